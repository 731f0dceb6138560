#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlab/parallel.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

TEST_CASE("gauss-hermite reproduces standard normal moments") {
  for (int order : {20, 40, 80}) {
    const auto& rule = gauss_hermite(order);
    double w = 0.0, m2 = 0.0, m4 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double z = rule.nodes[i];
      w += rule.weights[i];
      m1 += rule.weights[i] * z;
      m2 += rule.weights[i] * z * z;
      m4 += rule.weights[i] * z * z * z * z;
    }
    CHECK(std::abs(w - 1.0) < 1e-13);
    CHECK(std::abs(m1) < 1e-13);
    CHECK(std::abs(m2 - 1.0) < 1e-12);
    CHECK(std::abs(m4 - 3.0) < 1e-11);
  }
}

TEST_CASE("gauss-legendre on [0,1] integrates monomials") {
  const auto& rule = gauss_legendre01(8);
  for (int k = 0; k <= 5; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * std::pow(rule.nodes[i], k);
    CHECK(std::abs(acc - 1.0 / (k + 1)) < 1e-14);
  }
}

TEST_CASE("rng streams are deterministic and independent of call site") {
  Rng a = Rng::stream(42, 7);
  Rng b = Rng::stream(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c = Rng::stream(42, 8);
  int same = 0;
  Rng a2 = Rng::stream(42, 7);
  for (int i = 0; i < 64; ++i) same += a2.next_u64() == c.next_u64();
  CHECK(same == 0);
}

TEST_CASE("gaussian draws have the right low moments") {
  Rng rng(123);
  const int count = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < count; ++i) {
    const double z = rng.gaussian();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s1 / count) < 0.01);
  CHECK(std::abs(s2 / count - 1.0) < 0.02);
  CHECK(std::abs(s4 / count - 3.0) < 0.1);
}

TEST_CASE("uniform stays in [0,1)") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("pairwise sum matches long double accumulation") {
  std::vector<double> xs;
  Rng rng(9);
  for (int i = 0; i < 5001; ++i) xs.push_back((rng.uniform() - 0.5) * std::exp(8.0 * rng.uniform()));
  long double ref = 0.0;
  for (double x : xs) ref += x;
  CHECK(std::abs(pairwise_sum(xs) - static_cast<double>(ref)) <
        1e-9 * (1.0 + std::abs(static_cast<double>(ref))));
}

TEST_CASE("parallel_for result is independent of thread count") {
  std::vector<double> a(1000), b(1000);
  auto fill = [](std::vector<double>& out, int threads) {
    parallel_for(out.size(), threads, [&](std::size_t i) {
      Rng rng = Rng::stream(77, i);
      out[i] = rng.gaussian() + rng.uniform();
    });
  };
  fill(a, 1);
  fill(b, 4);
  CHECK(a == b);
  CHECK(mean_stderr(a).mean == mean_stderr(b).mean);
}

TEST_CASE("mean_stderr basics") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  const auto ms = mean_stderr(xs);
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.variance == doctest::Approx(5.0 / 3.0));
  CHECK(ms.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
