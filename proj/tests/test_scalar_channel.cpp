#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rlab/parallel.hpp"
#include "rlab/rng.hpp"
#include "rlab/scalar_channel.hpp"

using namespace rlab;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("f_den and i_den vanish at infinite noise") {
  for (const Prior& p : {Prior::rademacher(), Prior::discrete({0.0, 1.0}, {0.4, 0.6})}) {
    CHECK(f_den({p, kInf}) == 0.0);
    CHECK(i_den({p, kInf}) == 0.0);
  }
}

TEST_CASE("point mass at zero gives zero free energy at any noise") {
  const Prior p = Prior::point_mass(0.0);
  for (double sigma : {0.2, 1.0, 5.0}) {
    CHECK(f_den({p, sigma}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(i_den({p, sigma}) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

// Monte Carlo oracle for the Rademacher closed form 1/2 - E ln cosh(1 + Z).
TEST_CASE("f_den matches the Rademacher closed form within MC error") {
  const double value = f_den({Prior::rademacher(), 1.0}, 80);
  Rng rng(2024);
  const int count = 2000000;
  std::vector<double> draws(count);
  for (int i = 0; i < count; ++i) draws[i] = std::log(std::cosh(1.0 + rng.gaussian()));
  const auto ms = mean_stderr(draws);
  CHECK(std::abs(value - (0.5 - ms.mean)) < 3.0 * ms.stderr_);
}

TEST_CASE("shift identity i_den = f_den + E[S^2]/(2 sigma^2)") {
  const Prior three = Prior::discrete({-1.5, 0.2, 1.0}, {0.3, 0.45, 0.25});
  for (const Prior& p : {Prior::rademacher(), three}) {
    for (double sigma : {0.4, 1.0, 2.5}) {
      const double lhs = i_den({p, sigma}, 80);
      const double rhs = f_den({p, sigma}, 80) + p.moment(2) / (2.0 * sigma * sigma);
      CHECK(std::abs(lhs - rhs) < 1e-8);
    }
  }
}

TEST_CASE("posterior mean examples") {
  CHECK(posterior_mean({Prior::point_mass(0.7), 1.3}, -2.0) == doctest::Approx(0.7));
  CHECK(posterior_mean({Prior::rademacher(), 1.0}, 0.0) == doctest::Approx(0.0));
  // binary posterior mean is tanh(y / sigma^2)
  CHECK(posterior_mean({Prior::rademacher(), 1.0}, 1.0) ==
        doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
}

TEST_CASE("posterior mean is bounded by the support") {
  const Prior p = Prior::discrete({-0.5, 0.25, 2.0}, {0.25, 0.5, 0.25});
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const double y = 40.0 * (rng.uniform() - 0.5);
    const double sigma = 0.1 + 2.0 * rng.uniform();
    CHECK(std::abs(posterior_mean({p, sigma}, y)) <= p.support_bound() + 1e-12);
  }
}

TEST_CASE("quadrature converges with the order") {
  const Prior p = Prior::discrete({-1.0, 0.3, 1.2}, {0.2, 0.5, 0.3});
  const double coarse = f_den({p, 0.7}, 40);
  const double fine = f_den({p, 0.7}, 80);
  const double finer = f_den({p, 0.7}, 160);
  CHECK(std::abs(fine - finer) < 1e-10);
  CHECK(std::abs(coarse - finer) < 1e-8);
}

TEST_CASE("snr derivative vanishes at zero for centered priors") {
  CHECK(std::abs(fden_snr_derivative(Prior::rademacher(), 0.0)) < 2e-4);
  for (double snr : {0.0, 0.5, 2.0})
    CHECK(fden_snr_derivative(Prior::point_mass(0.0), snr) == doctest::Approx(0.0));
}

// Oracle: -2 d f_den/d snr equals the posterior-mean overlap E[S <X>].
TEST_CASE("snr derivative matches the Monte Carlo overlap") {
  const Prior p = Prior::rademacher();
  const double value = -2.0 * fden_snr_derivative(p, 1.0);
  Rng rng(555);
  const int count = 2000000;
  std::vector<double> draws(count);
  for (int i = 0; i < count; ++i) {
    const double s = p.sample(rng);
    const double y = s + rng.gaussian();  // sigma = 1
    draws[i] = s * posterior_mean({p, 1.0}, y);
  }
  const auto ms = mean_stderr(draws);
  CHECK(std::abs(value - ms.mean) < 3.0 * ms.stderr_);
}

TEST_CASE("minus twice the derivative lies in [0, E[S^2]]") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 0.5 + rng.uniform();
    const Prior p = Prior::discrete({a, -a}, {0.5, 0.5});
    for (double snr : {0.1, 0.7, 2.0, 6.0}) {
      const double overlap = -2.0 * fden_snr_derivative(p, snr);
      CHECK(overlap >= -1e-6);
      CHECK(overlap <= p.moment(2) + 1e-6);
    }
  }
}

TEST_CASE("iden derivative is half the mmse") {
  const Prior p = Prior::rademacher();
  for (double snr : {0.3, 1.0, 3.0}) {
    const double mmse = p.moment(2) + 2.0 * fden_snr_derivative(p, snr);
    CHECK(2.0 * iden_snr_derivative(p, snr) == doctest::Approx(mmse).epsilon(1e-6));
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS(f_den({Prior::rademacher(), -1.0}));
  CHECK_THROWS(f_den_snr(Prior::rademacher(), -0.5));
  CHECK_THROWS(f_den_snr(Prior::rademacher(), 1.0, 1));
  CHECK_THROWS(posterior_mean({Prior::rademacher(), kInf}, 0.0));
}
