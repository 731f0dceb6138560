#include "rlab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <map>
#include <mutex>
#include <stdexcept>

namespace rlab {
namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// orthogonal-polynomial recurrence, weights are mu0 * (first eigenvector
// component)^2.
QuadratureRule golub_welsch(const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int i = 0; i < n - 1; ++i) sub[i] = offdiag[i];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("quadrature: eigensolver failed");

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

QuadratureRule make_hermite(int order) {
  // Probabilists' Hermite: beta_k = sqrt(k). The diagonal shift is zero so
  // Legendre-style symmetrization is automatic.
  std::vector<double> offdiag(order - 1);
  for (int k = 1; k < order; ++k) offdiag[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(offdiag, 1.0);
}

QuadratureRule make_legendre01(int order) {
  std::vector<double> offdiag(order - 1);
  for (int k = 1; k < order; ++k) {
    const double kk = static_cast<double>(k);
    offdiag[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  QuadratureRule rule = golub_welsch(offdiag, 2.0);
  for (auto& x : rule.nodes) x = 0.5 * (x + 1.0);
  for (auto& w : rule.weights) w *= 0.5;
  return rule;
}

const QuadratureRule& cached(std::map<int, QuadratureRule>& cache, std::mutex& mu, int order,
                             QuadratureRule (*make)(int)) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make(order)).first;
  return it->second;
}

}  // namespace

const QuadratureRule& gauss_hermite(int order) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  return cached(cache, mu, order, make_hermite);
}

const QuadratureRule& gauss_legendre01(int order) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  return cached(cache, mu, order, make_legendre01);
}

}  // namespace rlab
