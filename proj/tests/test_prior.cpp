#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rlab/prior.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

Prior random_prior(Rng& rng, int max_atoms = 4) {
  const int count = 1 + static_cast<int>(rng.uniform() * max_atoms);
  std::vector<double> atoms, weights;
  double sum = 0.0;
  for (int i = 0; i < count; ++i) {
    atoms.push_back(-2.0 + 4.0 * rng.uniform() + 1e-3 * i);  // distinct
    const double w = 0.05 + rng.uniform();
    weights.push_back(w);
    sum += w;
  }
  for (auto& w : weights) w /= sum;
  return Prior::discrete(atoms, weights);
}

}  // namespace

TEST_CASE("rademacher moments") {
  const Prior p = Prior::rademacher();
  CHECK(p.moment(0) == doctest::Approx(1.0));
  CHECK(p.moment(2) == doctest::Approx(1.0));
  CHECK(p.moment(4) == doctest::Approx(1.0));
  CHECK(p.moment(3) == doctest::Approx(0.0));
  CHECK(p.support_bound() == 1.0);
}

TEST_CASE("point mass at zero has vanishing moments") {
  const Prior p = Prior::point_mass(0.0);
  CHECK(p.moment(0) == 1.0);
  for (int k = 1; k <= 6; ++k) CHECK(p.moment(k) == 0.0);
}

TEST_CASE("two-atom 0/1 prior") {
  const Prior p = Prior::discrete({0.0, 1.0}, {0.7, 0.3});
  CHECK(p.moment(1) == doctest::Approx(0.3));
  CHECK(p.moment(2) == doctest::Approx(0.3));
  CHECK(p.support_bound() == 1.0);
}

TEST_CASE("point mass moments") {
  const Prior p = Prior::point_mass(2.0);
  CHECK(p.moment(2) == doctest::Approx(4.0));
  CHECK(p.moment(9) == doctest::Approx(512.0));  // beyond the cached range
}

TEST_CASE("construction rejects bad inputs") {
  CHECK_THROWS_AS(Prior::discrete({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Prior::discrete({1.0}, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Prior::discrete({1.0, 2.0}, {1.2, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(Prior::discrete({1.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(Prior::discrete({1.0, 2.0}, {0.5, 0.6}), std::invalid_argument);
}

TEST_CASE("weights within 1e-9 of a unit sum are renormalized") {
  const Prior p = Prior::discrete({1.0, -1.0}, {0.5 + 4e-10, 0.5});
  double sum = 0.0;
  for (double w : p.weights()) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("moment inequalities and permutation invariance") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Prior p = random_prior(rng);
    const double bound = p.support_bound();
    for (int k = 1; k <= 4; ++k) {
      CHECK(p.moment(2 * k) >= p.moment(k) * p.moment(k) - 1e-12);
      CHECK(std::abs(p.moment(k)) <= std::pow(bound, k) + 1e-12);
    }
    // permuting (atom, weight) pairs leaves every moment unchanged
    std::vector<double> atoms = p.atoms(), weights = p.weights();
    std::reverse(atoms.begin(), atoms.end());
    std::reverse(weights.begin(), weights.end());
    const Prior q = Prior::discrete(atoms, weights);
    for (int k = 0; k <= 6; ++k)
      CHECK(p.moment(k) == doctest::Approx(q.moment(k)).epsilon(1e-13));
  }
}

TEST_CASE("sampling matches the weights") {
  const Prior p = Prior::discrete({-1.0, 0.0, 2.0}, {0.2, 0.5, 0.3});
  Rng rng(17);
  const int count = 100000;
  std::vector<int> hits(3, 0);
  for (int i = 0; i < count; ++i) {
    const double s = p.sample(rng);
    for (std::size_t b = 0; b < p.size(); ++b)
      if (s == p.atoms()[b]) ++hits[b];
  }
  for (std::size_t b = 0; b < p.size(); ++b) {
    const double freq = static_cast<double>(hits[b]) / count;
    const double se = std::sqrt(p.weights()[b] * (1 - p.weights()[b]) / count);
    CHECK(std::abs(freq - p.weights()[b]) < 5.0 * se);
  }
}
