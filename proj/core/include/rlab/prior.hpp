#pragma once

#include <cstddef>
#include <vector>

#include "rlab/rng.hpp"

namespace rlab {

/// Discrete signal law P0 = sum_b p_b delta(. - a_b).
///
/// Immutable after construction and safe to share across threads. Moments up
/// to order 8 are cached at construction; higher orders are summed on demand.
class Prior {
 public:
  /// Validates and builds a discrete prior. Weights may be off from a unit sum
  /// by at most 1e-9 (they are renormalized); anything worse is rejected.
  static Prior discrete(std::vector<double> atoms, std::vector<double> weights);

  static Prior rademacher() { return discrete({1.0, -1.0}, {0.5, 0.5}); }
  static Prior point_mass(double c) { return discrete({c}, {1.0}); }

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& log_weights() const { return log_weights_; }
  std::size_t size() const { return atoms_.size(); }

  /// Largest |a_b|; every posterior mean and overlap is bounded by powers of it.
  double support_bound() const { return support_bound_; }

  /// E[S^order] = sum_b p_b a_b^order.
  double moment(int order) const;
  double second_moment() const { return cached_moments_[2]; }

  /// One draw from the law.
  double sample(Rng& rng) const;

 private:
  Prior() = default;

  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<double> cached_moments_;  // orders 0..8
  double support_bound_ = 0.0;
};

}  // namespace rlab
