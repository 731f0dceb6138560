#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlab/gibbs.hpp"
#include "rlab/model.hpp"
#include "rlab/prior.hpp"
#include "rlab/quenched.hpp"
#include "rlab/scalar_channel.hpp"

namespace rlab {

/// Geometry of one interpolation path: system size, number of global steps K,
/// and the perturbation SNR eps.
struct PathConfig {
  int n;
  int steps;   // K
  double eps;  // in [0, 1]
};

/// Per-step trial SNRs {m_k}; entries live in [0, E[S^2]].
struct TrialParameters {
  std::vector<double> values;
};

/// Interpolation coordinate (k, t) with the perturbation SNR and the effective
/// accumulated side-channel SNR
///   eps_tilde = eps + (K delta)^-1 (sum_{l<k} m_l + t m_k).
/// Built only through make_path_point so there is a single source of truth.
struct PathPoint {
  int k;
  double t;
  double eps;
  double eps_tilde;
};

PathPoint make_path_point(const MatrixModel& model, const PathConfig& config,
                          const TrialParameters& m, int k, double t);

/// The (k,t)-interpolating energy of configuration x, perturbation included.
/// Every block enters in SNR form lambda*(quadratic) - sqrt(lambda)*(noise),
/// so blocks with vanishing SNR contribute exactly nothing and the
/// (k, t=1) == (k+1, t=0) telescoping identity holds bit-exactly.
double interp_hamiltonian(const MatrixModel& model, const PathConfig& config,
                          const PathPoint& point, const TrialParameters& m,
                          std::span<const double> x, const QuenchedSample& sample);

/// Exact enumeration of the (k,t)-interpolating posterior for one disorder
/// realization, with per-configuration energy primitives cached so that many
/// path points can be evaluated per sample.
class PathEvaluator {
 public:
  PathEvaluator(const MatrixModel& model, const Prior& prior, const QuenchedSample& sample);

  GibbsState state(const PathPoint& point, const TrialParameters& m) const;
  Moments moments(const PathPoint& point, const TrialParameters& m) const;

  /// Statistically equivalent model in which the k-1 completed mean-field
  /// blocks, the t-fraction of block k and the perturbation are merged into a
  /// single side channel of SNR eps_tilde (Gaussian stability). This is the
  /// representation in which d f / d eps_tilde = E<L> holds, so it backs all
  /// side-channel derivative and fluctuation checks.
  GibbsState merged_state(const PathPoint& point, double eps_tilde) const;
  Moments merged_moments(const PathPoint& point, double eps_tilde) const;

  const QuenchedSample& sample() const { return *sample_; }

 private:
  GibbsState finish(std::vector<double> energies) const;

  const QuenchedSample* sample_;
  MatrixModel model_;
  int n_ = 0;
  int steps_ = 0;
  std::vector<double> atoms_;
  std::size_t count_ = 0;
  std::vector<double> log_prior_;  // per configuration
  std::vector<double> quad_pair_;  // A(x) = sum_{i<=j} (x_i^2 x_j^2 / 2n - x_i x_j s_i s_j / n)
  std::vector<double> quad_mf_;    // B(x) = sum_i (x_i^2 / 2 - x_i s_i)
  std::vector<double> noise_pair_; // N_k(x) = sum_{i<=j} x_i x_j z_ij^(k) / sqrt(n); configs x K
  std::vector<double> noise_mf_;   // M_k(x) = sum_i x_i ztilde_i^(k); configs x K
  std::vector<double> noise_side_; // P(x) = sum_i x_i zhat_i
};

/// Monte Carlo estimate of the (k,t)-interpolating free energy.
MonteCarloEstimate path_free_energy(const MatrixModel& model, const Prior& prior,
                                    const PathConfig& config, const PathPoint& point,
                                    const TrialParameters& m, int samples,
                                    std::uint64_t seed, int threads = 1);

/// Free energies of the two path endpoints computed by quadrature (they
/// decouple, so these are n-independent): f_{K,1;eps} and f_{K,1;0}.
double final_free_energy(const MatrixModel& model, const Prior& prior,
                         const TrialParameters& m, double eps,
                         int quad_order = kDefaultQuadOrder);

struct StabilityReport {
  double variance = 0.0;
  double fourth_moment = 0.0;
  double weighted_variance = 0.0;
  bool pass = false;
};

/// Empirical check that sums of scaled Gaussian blocks are again standard
/// normal: plain sum_k z_k / sqrt(K) and the sqrt(m_k / (K mean m))-weighted
/// variant.
StabilityReport gaussian_stability_check(int steps, int samples, std::uint64_t seed,
                                         std::span<const double> weights_m = {});

struct DfdtReport {
  double fd_value = 0.0;
  double formula_value = 0.0;
  double residual = 0.0;
  double stderr_ = 0.0;
  double slack = 0.0;  // O(1/(nK)) allowance
  bool pass = false;
};

/// Central finite difference of the path free energy in t (common disorder)
/// against the overlap formula (1/(4 delta K)) E<q^2 - 2 m_k q>.
DfdtReport dfdt_check(const MatrixModel& model, const Prior& prior, const PathConfig& config,
                      int k, double t, const TrialParameters& m, int samples,
                      std::uint64_t seed, double dt = 0.1, int threads = 1,
                      double sigma_factor = 3.0);

struct SumRuleReport {
  double lhs = 0.0;           // f_{1,0;eps}
  double endpoint_gap = 0.0;  // f_{K,1;eps} - f_{K,1;0}
  double f_rs_mean = 0.0;     // f_RS(mean m)
  double v_term = 0.0;        // V_K / (4 delta)
  double remainder = 0.0;     // (1/(4 delta K)) sum_k int dt E<(q - m_k)^2>
  double remainder_stderr = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double stderr_ = 0.0;
  double slack = 0.0;  // 2/n
  bool pass = false;
};

/// Evaluates both sides of the free-energy decomposition
///   f_{1,0;eps} = (f_{K,1;eps} - f_{K,1;0}) + f_RS(mean m) + V_K/(4 delta)
///                 - remainder + O(1/n)
/// with the t-integral by Gauss-Legendre and all Gibbs averages sharing the
/// same disorder samples as the left-hand side.
SumRuleReport sum_rule_residual(const MatrixModel& model, const Prior& prior,
                                const PathConfig& config, const TrialParameters& m,
                                int samples, std::uint64_t seed, int t_quad_order = 16,
                                int threads = 1, double sigma_factor = 3.0);

/// Sequential construction m_k = clamp(E<q>_{k,0;eps}, [0, E[S^2]]); step k
/// uses only the already-fixed m_1..m_{k-1}. The k-loop must stay ordered.
TrialParameters adapt_parameters(const MatrixModel& model, const Prior& prior,
                                 const PathConfig& config, int samples, std::uint64_t seed,
                                 int threads = 1);

struct GapReport {
  double gap = 0.0;  // signed E<q>_{k,t} - E<q>_{k,0}
  double stderr_ = 0.0;
};

GapReport t_dependence_gap(const MatrixModel& model, const Prior& prior,
                           const PathConfig& config, int k, double t,
                           const TrialParameters& m, int samples, std::uint64_t seed,
                           int threads = 1);

struct GammaLambda {
  double gamma;
  double lambda;
};

/// RLE interpolation SNR functions with the linear schedule
/// gamma(t) = (1-t)/delta and lambda fixed by the constraint
/// alpha/(gamma^-1 + E) + lambda = Sigma(E)^-2; endpoints are exact.
GammaLambda rle_gamma_lambda(double t, double E, double alpha, double delta);

/// Residual of psi(E; delta) against its integral form
/// (alpha/2) int_0^1 dt gamma'(t) (E/(1+gamma E)^2 - E/(1+gamma E)).
double psi_integral_identity(double E, double alpha, double delta, int t_quad_order = 32);

}  // namespace rlab
