#pragma once

#include <span>
#include <vector>

#include "rlab/model.hpp"
#include "rlab/prior.hpp"
#include "rlab/scalar_channel.hpp"

namespace rlab {

/// Effective scalar-channel noise level entering the RS potential:
///   matrix  sqrt(delta / m)
///   tensor  sqrt(delta / m^(p-1))
///   rle     sqrt((delta + E) / alpha)      (the argument is the error level E)
/// m = 0 maps to +infinity for matrix/tensor.
double sigma_of_m(const ModelSpec& model, double m);

/// psi(E; delta) = (alpha/2) * (ln(1 + E/delta) - E/(delta + E)).
double psi(double alpha, double delta, double E);

/// The replica-symmetric potential of the model at overlap m (error level E
/// for rle). Its minimum over m >= 0 is the predicted asymptotic free energy.
double rs_potential(const ModelSpec& model, const Prior& prior, double m,
                    int quad_order = kDefaultQuadOrder);

struct MinimizeResult {
  double m_star;
  double f_rs;
};

/// Global minimization over [0, E[S^2]]: dense grid scan followed by
/// golden-section refinement of the best bracket, ties broken toward the
/// smallest m. `upper` overrides the search upper bound when positive.
MinimizeResult minimize_potential(const ModelSpec& model, const Prior& prior,
                                  int quad_order = kDefaultQuadOrder, int grid = 128,
                                  double tol = 1e-8, double upper = 0.0);

struct FixedPointResult {
  double m_fix;
  int iterations;
  bool converged;
};

/// State-evolution style fixed-point iteration of the stationarity condition
/// of the potential: m <- -2 d f_den / d(sigma^-2) at sigma(m) for
/// matrix/tensor, E <- 2 d i_den / d(sigma^-2) at sigma(E) for rle.
FixedPointResult fixed_point(const ModelSpec& model, const Prior& prior, double m0,
                             int quad_order = kDefaultQuadOrder, int max_iter = 500,
                             double tol = 1e-9);

/// Converts a free-energy value into mutual information per component.
double mutual_information(const ModelSpec& model, const Prior& prior, double f_value);

struct RsCurvePoint {
  double delta;
  double m_star;
  double f_rs;
  double mutual_info;
};

enum class TransitionKind { None, Continuous, FirstOrder };

struct Transition {
  TransitionKind kind = TransitionKind::None;
  double delta_c = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

struct TransitionThresholds {
  double jump_fraction = 0.05;       // of E[S^2]; adjacent m* jump for first order
  double smallness_fraction = 1e-3;  // of E[S^2]; m* below this counts as zero
};

struct ScanResult {
  std::vector<RsCurvePoint> curve;
  Transition transition;
};

/// Sweeps delta over [delta_min, delta_max], minimizing the potential at each
/// step, and locates the first phase transition if any: a jump of m* that
/// persists under bisection is first order, otherwise the point where m*
/// crosses the smallness threshold is reported as continuous.
ScanResult scan_and_locate_transition(const ModelSpec& model, const Prior& prior,
                                      double delta_min, double delta_max, int steps,
                                      double refine_tol = 1e-3,
                                      int quad_order = kDefaultQuadOrder,
                                      TransitionThresholds thresholds = {},
                                      int threads = 1);

/// V_K = mean(m^2) - mean(m)^2 over the trial sequence.
double v_k_variance(std::span<const double> m_list);

/// V_{K,p} = mean(m^p) - mean(m^(p-1))^(p/(p-1)); nonnegative by Jensen.
double v_kp_variance(std::span<const double> m_list, int p);

/// Per-step potential over a trial sequence {m_k} ({E_k} for rle):
///   matrix  (1/(4 delta K)) sum m_k^2 + f_den at the mean overlap
///   rle     i_den at the mean-field noise level + mean_k psi(E_k)
/// Coincides with the scalar potential on constant sequences.
double f_tilde_rs(const ModelSpec& model, const Prior& prior, std::span<const double> m_list,
                  int quad_order = kDefaultQuadOrder);

}  // namespace rlab
