#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rlab/rng.hpp"
#include "rlab/rs_potential.hpp"

using namespace rlab;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const ModelSpec kMatrix1{MatrixModel{1.0}};
}  // namespace

TEST_CASE("sigma_of_m") {
  CHECK(sigma_of_m(ModelSpec{MatrixModel{1.0}}, 1.0) == doctest::Approx(1.0));
  CHECK(sigma_of_m(ModelSpec{MatrixModel{1.0}}, 4.0) == doctest::Approx(0.5));
  CHECK(sigma_of_m(ModelSpec{MatrixModel{2.0}}, 0.0) == kInf);
  CHECK(sigma_of_m(ModelSpec{TensorModel{3, 2.0}}, 0.0) == kInf);
  // rle: Sigma(E=0)^-2 = alpha / delta
  CHECK(sigma_of_m(ModelSpec{RleModel{1.0, 1.0}}, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("psi values") {
  CHECK(psi(1.0, 1.0, 0.0) == 0.0);
  CHECK(psi(1.0, 1.0, 1.0) == doctest::Approx(0.5 * (std::log(2.0) - 0.5)).epsilon(1e-14));
  CHECK(psi(2.0, 1.0, 1.0) == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-14));
}

TEST_CASE("psi is nonnegative and increasing in E") {
  double prev = 0.0;
  for (double E = 0.0; E <= 5.0; E += 0.25) {
    const double v = psi(1.3, 0.8, E);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
}

TEST_CASE("potential vanishes exactly at m = 0") {
  const Prior priors[] = {Prior::rademacher(), Prior::discrete({0.0, 1.0}, {0.6, 0.4}),
                          Prior::point_mass(0.0)};
  for (const auto& p : priors) {
    CHECK(rs_potential(ModelSpec{MatrixModel{0.7}}, p, 0.0) == 0.0);
    CHECK(rs_potential(ModelSpec{TensorModel{3, 0.7}}, p, 0.0) == 0.0);
  }
  CHECK(rs_potential(ModelSpec{RleModel{1.0, 0.7}}, Prior::point_mass(0.0), 0.0) == 0.0);
}

TEST_CASE("tensor p=2 coincides with the matrix potential") {
  const Prior p = Prior::rademacher();
  const ModelSpec mat{MatrixModel{0.8}};
  const ModelSpec ten{TensorModel{2, 0.8}};
  for (int i = 0; i <= 100; ++i) {
    const double m = i / 100.0;
    CHECK(std::abs(rs_potential(mat, p, m) - rs_potential(ten, p, m)) < 1e-12);
  }
}

TEST_CASE("minimizer in the trivial and ordered phases") {
  const Prior rad = Prior::rademacher();
  const auto high = minimize_potential(ModelSpec{MatrixModel{2.0}}, rad);
  CHECK(high.m_star == 0.0);
  CHECK(high.f_rs == 0.0);

  const auto low = minimize_potential(ModelSpec{MatrixModel{0.1}}, rad);
  CHECK(low.m_star > 0.9);

  const auto zero = minimize_potential(ModelSpec{MatrixModel{0.3}}, Prior::point_mass(0.0));
  CHECK(zero.m_star == 0.0);
  CHECK(zero.f_rs == 0.0);
}

TEST_CASE("minimize returns a true minimum") {
  const Prior rad = Prior::rademacher();
  for (double delta : {0.3, 0.5, 0.9, 1.4}) {
    const ModelSpec model{MatrixModel{delta}};
    const auto res = minimize_potential(model, rad);
    for (double shift : {-1e-7, 1e-7}) {
      const double m = res.m_star + shift;
      if (m < 0.0) continue;
      CHECK(rs_potential(model, rad, m) >= res.f_rs - 1e-9);
    }
    CHECK(std::abs(rs_potential(model, rad, res.m_star) - res.f_rs) < 1e-12);
  }
}

TEST_CASE("fixed point contracts to zero above the transition") {
  const Prior rad = Prior::rademacher();
  const auto fp = fixed_point(ModelSpec{MatrixModel{2.0}}, rad, 0.5);
  CHECK(fp.converged);
  CHECK(std::abs(fp.m_fix) < 1e-4);

  const auto pm = fixed_point(ModelSpec{MatrixModel{1.0}}, Prior::point_mass(0.0), 0.8);
  CHECK(pm.converged);
  CHECK(pm.m_fix == 0.0);
  CHECK(pm.iterations == 1);
}

TEST_CASE("fixed point lands on a stationary point of the potential") {
  const Prior rad = Prior::rademacher();
  const ModelSpec model{MatrixModel{0.5}};
  const auto fp = fixed_point(model, rad, 1.0);
  CHECK(fp.converged);
  const double h = 1e-4;
  const double grad = (rs_potential(model, rad, fp.m_fix + h) -
                       rs_potential(model, rad, fp.m_fix - h)) /
                      (2.0 * h);
  CHECK(std::abs(grad) < 1e-5);
}

TEST_CASE("rle fixed point is stationary too") {
  const Prior rad = Prior::rademacher();
  const ModelSpec model{RleModel{1.0, 0.3}};
  const auto fp = fixed_point(model, rad, 0.5);
  CHECK(fp.converged);
  const double h = 1e-4;
  const double lo = std::max(0.0, fp.m_fix - h);
  const double grad =
      (rs_potential(model, rad, fp.m_fix + h) - rs_potential(model, rad, lo)) /
      (fp.m_fix + h - lo);
  CHECK(std::abs(grad) < 1e-4);
}

TEST_CASE("mutual information conversion") {
  const Prior rad = Prior::rademacher();
  CHECK(mutual_information(ModelSpec{MatrixModel{2.0}}, rad, 0.0) == doctest::Approx(0.125));
  CHECK(mutual_information(ModelSpec{TensorModel{2, 2.0}}, rad, 0.0) ==
        doctest::Approx(0.125));
  CHECK(mutual_information(ModelSpec{RleModel{1.0, 1.0}}, rad, 0.3) == doctest::Approx(0.3));
}

TEST_CASE("scan locates the continuous matrix transition near delta = 1") {
  const auto scan = scan_and_locate_transition(kMatrix1, Prior::rademacher(), 0.5, 1.5, 21,
                                               1e-3, 80, {}, 2);
  REQUIRE(scan.curve.size() == 21);
  CHECK(scan.transition.kind == TransitionKind::Continuous);
  CHECK(std::abs(scan.transition.delta_c - 1.0) <= 0.02);
  // m* decreases towards zero across the sweep
  CHECK(scan.curve.front().m_star > 0.5);
  CHECK(scan.curve.back().m_star == 0.0);
}

TEST_CASE("no transition for the flat potential") {
  const auto scan =
      scan_and_locate_transition(kMatrix1, Prior::point_mass(0.0), 0.5, 1.5, 11, 1e-3);
  CHECK(scan.transition.kind == TransitionKind::None);
  for (const auto& pt : scan.curve) CHECK(pt.m_star == 0.0);
}

TEST_CASE("tensor p=3 shows a persistent first-order jump") {
  const ModelSpec model{TensorModel{3, 1.0}};
  const Prior rad = Prior::rademacher();
  const auto scan = scan_and_locate_transition(model, rad, 0.1, 0.9, 33, 1e-4, 80, {}, 2);
  REQUIRE(scan.transition.kind == TransitionKind::FirstOrder);
  const double dc = scan.transition.delta_c;
  CHECK(dc > 0.0);
  CHECK(dc < 1.0);
  // cross-check: at delta_c the two competing local minima are degenerate
  const ModelSpec at{TensorModel{3, dc}};
  double f_lo = kInf, f_hi = kInf;
  double best_hi = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double m = i / 400.0;
    const double f = rs_potential(at, rad, m);
    if (m < 0.4) {
      f_lo = std::min(f_lo, f);
    } else if (f < f_hi) {
      f_hi = f;
      best_hi = m;
    }
  }
  CHECK(best_hi > 0.4);
  CHECK(std::abs(f_lo - f_hi) < 1e-3);
}

TEST_CASE("trial-sequence variances") {
  const std::vector<double> flat = {0.3, 0.3, 0.3};
  CHECK(v_k_variance(flat) == doctest::Approx(0.0));
  CHECK(v_kp_variance(flat, 3) == doctest::Approx(0.0));

  const std::vector<double> two = {0.0, 2.0};
  CHECK(v_k_variance(two) == doctest::Approx(1.0));
  CHECK(v_kp_variance(two, 3) ==
        doctest::Approx(4.0 - std::pow(2.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("trial-sequence variances are nonnegative") {
  Rng rng(7321);
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = 1 + static_cast<int>(rng.uniform() * 8);
    std::vector<double> m(K);
    for (auto& mk : m) mk = 2.0 * rng.uniform();
    CHECK(v_k_variance(m) >= -1e-12);
    CHECK(v_kp_variance(m, 2) >= -1e-12);
    CHECK(v_kp_variance(m, 3) >= -1e-12);
    CHECK(v_kp_variance(m, 4) >= -1e-12);
  }
}

TEST_CASE("per-step potential collapses on constant sequences") {
  const Prior rad = Prior::rademacher();
  const ModelSpec mat{MatrixModel{0.6}};
  const std::vector<double> constant = {0.4, 0.4, 0.4, 0.4};
  CHECK(std::abs(f_tilde_rs(mat, rad, constant) - rs_potential(mat, rad, 0.4)) < 1e-12);

  const std::vector<double> zeros = {0.0, 0.0};
  CHECK(f_tilde_rs(mat, rad, zeros) == 0.0);

  const ModelSpec rle{RleModel{1.3, 0.7}};
  const std::vector<double> ce = {0.25, 0.25, 0.25};
  CHECK(std::abs(f_tilde_rs(rle, rad, ce) - rs_potential(rle, rad, 0.25)) < 1e-12);

  CHECK_THROWS(f_tilde_rs(ModelSpec{TensorModel{3, 1.0}}, rad, constant));
}

TEST_CASE("per-step matrix potential dominates the scalar one") {
  const Prior rad = Prior::rademacher();
  const ModelSpec mat{MatrixModel{0.6}};
  Rng rng(4044);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> m(3);
    for (auto& mk : m) mk = rng.uniform();
    const double mean = (m[0] + m[1] + m[2]) / 3.0;
    CHECK(f_tilde_rs(mat, rad, m) >= rs_potential(mat, rad, mean) - 1e-12);
  }
}

TEST_CASE("rle auxiliary potential is midpoint convex in the channel snr") {
  const double alpha = 1.2, delta = 0.6;
  auto psi_tilde = [&](double rho) { return psi(alpha, delta, alpha / rho - delta); };
  Rng rng(91919);
  const double rho_max = alpha / delta;
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = rho_max * (0.02 + 0.96 * rng.uniform());
    const double b = rho_max * (0.02 + 0.96 * rng.uniform());
    CHECK(psi_tilde(0.5 * (a + b)) <= 0.5 * (psi_tilde(a) + psi_tilde(b)) + 1e-12);
  }
}
