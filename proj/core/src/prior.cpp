#include "rlab/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rlab {

Prior Prior::discrete(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.empty() || weights.empty())
    throw std::invalid_argument("prior: atom and weight lists must be nonempty");
  if (atoms.size() != weights.size())
    throw std::invalid_argument("prior: atom and weight lists must have equal length");

  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("prior: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("prior: weights must sum to 1 within 1e-9");

  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) throw std::invalid_argument("prior: atoms must be finite");
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i] == atoms[j])
        throw std::invalid_argument("prior: atoms must be pairwise distinct");
  }

  Prior p;
  p.atoms_ = std::move(atoms);
  p.weights_ = std::move(weights);
  for (auto& w : p.weights_) w /= sum;

  p.log_weights_.resize(p.weights_.size());
  for (std::size_t i = 0; i < p.weights_.size(); ++i)
    p.log_weights_[i] = p.weights_[i] > 0.0 ? std::log(p.weights_[i])
                                            : -std::numeric_limits<double>::infinity();

  p.support_bound_ = 0.0;
  for (double a : p.atoms_) p.support_bound_ = std::max(p.support_bound_, std::abs(a));

  p.cached_moments_.resize(9);
  for (int order = 0; order <= 8; ++order) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.atoms_.size(); ++i)
      m += p.weights_[i] * std::pow(p.atoms_[i], order);
    p.cached_moments_[order] = m;
  }
  return p;
}

double Prior::moment(int order) const {
  if (order < 0) throw std::invalid_argument("prior: moment order must be nonnegative");
  if (order < static_cast<int>(cached_moments_.size())) return cached_moments_[order];
  double m = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    m += weights_[i] * std::pow(atoms_[i], order);
  return m;
}

double Prior::sample(Rng& rng) const {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    cum += weights_[i];
    if (u < cum) return atoms_[i];
  }
  return atoms_.back();
}

}  // namespace rlab
