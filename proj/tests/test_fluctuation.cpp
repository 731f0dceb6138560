#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlab/fluctuation.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

const MatrixModel kModel{1.0};
const Prior kRad = Prior::rademacher();

Disorder quad_disorder(int order) {
  Disorder d;
  d.method = Disorder::Method::Quadrature;
  d.order = order;
  return d;
}

Disorder mc_disorder(int samples, std::uint64_t seed) {
  Disorder d;
  d.method = Disorder::Method::MonteCarlo;
  d.samples = samples;
  d.seed = seed;
  d.threads = 2;
  return d;
}

}  // namespace

TEST_CASE("observable L basics") {
  const PathConfig config{1, 1, 0.5};
  TrialParameters m;
  m.values = {0.0};
  const PathPoint point = make_path_point(kModel, config, m, 1, 0.0);

  QuenchedSample sample = draw_quenched(ModelSpec{kModel}, kRad, 1, 1, 3, 0);
  sample.signal = {1.0};
  sample.side_noise = {0.0};

  CHECK(observable_L(std::vector<double>{0.0}, sample, point) == 0.0);
  CHECK(observable_L(std::vector<double>{1.0}, sample, point) == doctest::Approx(-0.5));

  const PathPoint degenerate{1, 0.0, 0.0, 0.0};
  CHECK_THROWS(observable_L(std::vector<double>{1.0}, sample, degenerate));

  // single source of truth: the noise coefficient comes from point.eps_tilde
  sample.side_noise = {2.0};
  const double expected = 0.5 - 1.0 - 2.0 / (2.0 * std::sqrt(point.eps_tilde));
  CHECK(observable_L(std::vector<double>{1.0}, sample, point) ==
        doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("derivative checks vanish for the deterministic prior") {
  const Prior pm = Prior::point_mass(0.0);
  const PathConfig config{2, 1, 0.4};
  TrialParameters m;
  m.values = {0.0};
  const auto r = first_derivative_check(kModel, pm, config, m, 1, 0.0,
                                        mc_disorder(60, 5), 1e-3);
  CHECK(r.fd_value == 0.0);
  CHECK(r.formula_value == 0.0);
  CHECK(r.lbar_value == 0.0);
}

TEST_CASE("first derivative identity in the near-exact regime") {
  TrialParameters m;
  m.values = {0.0};

  const PathConfig one{1, 1, 0.4};
  const auto r1 = first_derivative_check(kModel, kRad, one, m, 1, 0.0, quad_disorder(60), 1e-4);
  CHECK(std::abs(r1.residual) < 1e-5);
  CHECK(std::abs(r1.lbar_residual) < 1e-10);
  CHECK(r1.formula_value <= 0.0);

  const PathConfig two{2, 1, 0.3};
  const auto r2 = first_derivative_check(kModel, kRad, two, m, 1, 0.0, quad_disorder(16), 1e-4);
  CHECK(std::abs(r2.residual) < 1e-5);
  CHECK(std::abs(r2.lbar_residual) < 1e-5);
  CHECK(r2.formula_value <= 0.0);
}

TEST_CASE("first derivative identity in the statistical regime") {
  const PathConfig config{3, 2, 0.3};
  TrialParameters m;
  m.values = {0.2, 0.4};
  const auto r = first_derivative_check(kModel, kRad, config, m, 2, 0.5,
                                        mc_disorder(4000, 414), 1e-3);
  CHECK(std::abs(r.residual) < 4.0 * r.stderr_);
  CHECK(r.formula_value <= 0.0);
}

TEST_CASE("concavity in the side-channel snr") {
  TrialParameters m;
  m.values = {0.0};
  const std::vector<double> grid = {0.38, 0.39, 0.40, 0.41, 0.42};

  SUBCASE("near-exact at n=1") {
    const PathConfig config{1, 1, 0.4};
    const auto r = concavity_check(kModel, kRad, config, m, 1, 0.0, grid, quad_disorder(60));
    CHECK(r.nonpositive);
    CHECK(r.formula_mid <= 0.0);
    CHECK(std::abs(r.residual) < 1e-4);
  }

  SUBCASE("statistical at n=3") {
    const PathConfig config{3, 1, 0.4};
    const auto r = concavity_check(kModel, kRad, config, m, 1, 0.0, grid,
                                   mc_disorder(3000, 515));
    CHECK(r.nonpositive);
    CHECK(r.formula_mid <= 0.0);
    CHECK(std::abs(r.residual) < 4.0 * r.stderr_);
  }

  SUBCASE("degenerate grids are rejected") {
    const PathConfig config{1, 1, 0.4};
    CHECK_THROWS(concavity_check(kModel, kRad, config, m, 1, 0.0,
                                 std::vector<double>{0.3, 0.4}, quad_disorder(20)));
    CHECK_THROWS(concavity_check(kModel, kRad, config, m, 1, 0.0,
                                 std::vector<double>{0.3, 0.4, 0.6}, quad_disorder(20)));
  }
}

TEST_CASE("fluctuation identity") {
  TrialParameters m;
  m.values = {0.0};

  SUBCASE("every term vanishes for the deterministic prior") {
    const PathConfig config{2, 1, 0.4};
    const auto r = fluctuation_identity_check(kModel, Prior::point_mass(0.0), config, m, 1,
                                              0.0, mc_disorder(60, 6));
    CHECK(r.lhs == 0.0);
    CHECK(r.overlap_variance_term == 0.0);
    CHECK(r.thermal_overlap_term == 0.0);
    CHECK(r.signal_term == 0.0);
    CHECK(r.residual == 0.0);
  }

  SUBCASE("near-exact at n=1") {
    const PathConfig config{1, 1, 0.4};
    const auto r =
        fluctuation_identity_check(kModel, kRad, config, m, 1, 0.0, quad_disorder(60));
    CHECK(std::abs(r.residual) < 1e-6);
    CHECK(std::abs(r.thermal_residual) < 1e-6);
    CHECK(std::abs(r.disorder_residual) < 1e-6);
    // decomposition identity: terms plus residual reproduce the lhs
    CHECK(r.lhs == doctest::Approx(r.overlap_variance_term + r.thermal_overlap_term +
                                   r.signal_term + r.residual)
                       .epsilon(1e-14));
  }

  SUBCASE("near-exact with a skewed prior") {
    const Prior skew = Prior::discrete({-0.4, 1.1}, {0.7, 0.3});
    const PathConfig config{1, 1, 0.35};
    const auto r =
        fluctuation_identity_check(kModel, skew, config, m, 1, 0.0, quad_disorder(60));
    CHECK(std::abs(r.residual) < 1e-6);
    CHECK(std::abs(r.thermal_residual) < 1e-6);
    CHECK(std::abs(r.disorder_residual) < 1e-6);
  }

  SUBCASE("statistical at n=4") {
    const PathConfig config{4, 1, 0.3};
    const auto r =
        fluctuation_identity_check(kModel, kRad, config, m, 1, 0.0, mc_disorder(5000, 616));
    CHECK(std::abs(r.residual) < 4.0 * r.stderr_);
    CHECK(std::abs(r.thermal_residual) < 4.0 * r.thermal_stderr);
    CHECK(std::abs(r.disorder_residual) < 4.0 * r.disorder_stderr);
  }

  SUBCASE("statistical at a later path point") {
    const PathConfig config{3, 3, 0.3};
    TrialParameters m3;
    m3.values = {0.3, 0.5, 0.2};
    const auto r =
        fluctuation_identity_check(kModel, kRad, config, m3, 2, 0.6, mc_disorder(5000, 617));
    CHECK(std::abs(r.residual) < 4.0 * r.stderr_);
  }

  SUBCASE("quadrature mode rejects multi-step paths") {
    const PathConfig config{2, 3, 0.3};
    TrialParameters m3;
    m3.values = {0.1, 0.1, 0.1};
    CHECK_THROWS(
        fluctuation_identity_check(kModel, kRad, config, m3, 2, 0.5, quad_disorder(20)));
  }
}

TEST_CASE("overlap concentration profile") {
  SUBCASE("deterministic prior is identically zero") {
    const std::vector<int> ns = {2, 3};
    const auto profile = overlap_concentration_profile(kModel, Prior::point_mass(0.0), ns, 4,
                                                       0.1, 40, 7, 1);
    for (const auto& pt : profile) {
      CHECK(pt.value == 0.0);
      CHECK(pt.stderr_ == 0.0);
    }
  }

  SUBCASE("decreasing in n in the high-noise phase") {
    const MatrixModel noisy{2.0};
    const std::vector<int> ns = {2, 4, 6};
    const auto profile =
        overlap_concentration_profile(noisy, kRad, ns, 4, 0.1, 2000, 808, 2);
    REQUIRE(profile.size() == 3);
    for (std::size_t i = 1; i < profile.size(); ++i) {
      const double band = 2.0 * std::hypot(profile[i].stderr_, profile[i - 1].stderr_);
      CHECK(profile[i].value < profile[i - 1].value + band);
    }
    for (const auto& pt : profile) CHECK(pt.value >= -3.0 * pt.stderr_);
  }
}

TEST_CASE("free energy variance profile") {
  SUBCASE("deterministic prior has zero variance") {
    const std::vector<int> ns = {2, 3};
    const auto profile = free_energy_variance_profile(ModelSpec{kModel},
                                                      Prior::point_mass(0.0), ns, 50, 5, 1);
    for (const auto& pt : profile.points) CHECK(pt.value == 0.0);
  }

  SUBCASE("variance decays with n") {
    const std::vector<int> ns = {2, 4, 8};
    const auto profile =
        free_energy_variance_profile(ModelSpec{kModel}, kRad, ns, 2500, 909, 2);
    REQUIRE(profile.points.size() == 3);
    CHECK(profile.points[0].value > profile.points[1].value);
    CHECK(profile.points[1].value > profile.points[2].value);
    CHECK(profile.log_log_slope <= -0.5);
  }

  SUBCASE("disjoint seed sets agree within errors") {
    const std::vector<int> ns = {4};
    const auto a = free_energy_variance_profile(ModelSpec{kModel}, kRad, ns, 2500, 111, 2);
    const auto b = free_energy_variance_profile(ModelSpec{kModel}, kRad, ns, 2500, 222, 2);
    const double band = 5.0 * std::hypot(a.points[0].stderr_, b.points[0].stderr_);
    CHECK(std::abs(a.points[0].value - b.points[0].value) < band);
  }
}
