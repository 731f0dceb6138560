#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlab/interpolation.hpp"

namespace rlab {

/// L(x) = (1/n) sum_i (x_i^2/2 - x_i s_i - x_i zhat_i / (2 sqrt(eps_tilde))).
/// Its Gibbs average is the eps_tilde-derivative of the free energy in the
/// merged side-channel representation. Requires eps_tilde > 0.
double observable_L(std::span<const double> x, const QuenchedSample& sample,
                    const PathPoint& point);

/// How to take the disorder average in the checks below. Quadrature mode is
/// the near-exact regime: it integrates every Gaussian coordinate and is only
/// available for single-step paths at (k=1, t=0), where the merged model is
/// the plain perturbed model.
struct Disorder {
  enum class Method { MonteCarlo, Quadrature };
  Method method = Method::MonteCarlo;
  int samples = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  int order = 16;  // per-dimension Gauss-Hermite order (quadrature mode)
};

struct DerivativeReport {
  double fd_value = 0.0;       // d f / d eps_tilde by central differences
  double formula_value = 0.0;  // -(1/2n) sum_i E<X_i>^2
  double lbar_value = 0.0;     // E<L>
  double residual = 0.0;       // fd - formula
  double lbar_residual = 0.0;  // lbar - formula
  double stderr_ = 0.0;
};

DerivativeReport first_derivative_check(const MatrixModel& model, const Prior& prior,
                                        const PathConfig& config, const TrialParameters& m,
                                        int k, double t, const Disorder& disorder,
                                        double d_eps = 1e-3);

struct ConcavityReport {
  std::vector<double> eps_grid;
  std::vector<double> free_energies;
  std::vector<double> second_differences;  // one per interior grid point
  std::vector<double> sd_stderr;
  double fd2_mid = 0.0;      // FD second derivative at the middle grid point
  double formula_mid = 0.0;  // -(n/2) E[(1/n^2) sum (<XiXj> - <Xi><Xj>)^2]
  double residual = 0.0;
  double stderr_ = 0.0;
  bool nonpositive = false;  // every second difference <= 3 sigma
};

/// Concavity of f in eps_tilde on a uniform grid (>= 3 points), plus the
/// connected-correlation formula for the second derivative.
ConcavityReport concavity_check(const MatrixModel& model, const Prior& prior,
                                const PathConfig& config, const TrialParameters& m, int k,
                                double t, std::span<const double> eps_grid,
                                const Disorder& disorder);

struct FluctuationReport {
  double lhs = 0.0;                    // E<(L - E<L>)^2>
  double overlap_variance_term = 0.0;  // (1/4)(E<q^2> - E<q>^2)
  double thermal_overlap_term = 0.0;   // (1/2)(E<q^2> - E[<q>^2])
  double signal_term = 0.0;            // E[S^2] / (4 n eps_tilde), analytic
  double residual = 0.0;
  double stderr_ = 0.0;
  double thermal_residual = 0.0;   // E<L^2> - E[<L>^2] against its X-moment form
  double disorder_residual = 0.0;  // E[<L>^2] - E[<L>]^2 against its X-moment form
  double thermal_stderr = 0.0;
  double disorder_stderr = 0.0;
};

/// The side-channel fluctuation identity and its thermal/disorder split,
/// term by term. All right-hand sides are overlap or X-moment expressions;
/// the signal term is computed from the prior, not estimated.
FluctuationReport fluctuation_identity_check(const MatrixModel& model, const Prior& prior,
                                             const PathConfig& config,
                                             const TrialParameters& m, int k, double t,
                                             const Disorder& disorder);

struct ProfilePoint {
  int n = 0;
  double value = 0.0;
  double stderr_ = 0.0;
};

/// E<(q - E<q>)^2> averaged over a small (k,t) grid, for each n. Trial
/// parameters are held at the potential's minimizer.
std::vector<ProfilePoint> overlap_concentration_profile(const MatrixModel& model,
                                                        const Prior& prior,
                                                        std::span<const int> n_list, int steps,
                                                        double eps, int samples,
                                                        std::uint64_t seed, int threads = 1);

struct VarianceProfile {
  std::vector<ProfilePoint> points;
  double log_log_slope = 0.0;
};

/// Disorder variance of the per-realization free energy for each n, with the
/// fitted slope of log-variance against log-n.
VarianceProfile free_energy_variance_profile(const ModelSpec& model, const Prior& prior,
                                             std::span<const int> n_list, int samples,
                                             std::uint64_t seed, int threads = 1);

}  // namespace rlab
