#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlab/model.hpp"
#include "rlab/parallel.hpp"
#include "rlab/prior.hpp"
#include "rlab/quenched.hpp"

namespace rlab {

/// Hard cap on |atoms|^n posterior configurations; beyond it the exact oracle
/// refuses rather than silently sampling.
inline constexpr std::size_t kEnumerationCap = 2'000'000;

struct enumeration_cap_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact posterior over atoms^n at one disorder realization. Configuration c
/// has component i equal to atoms[(c / B^i) % B].
struct GibbsState {
  int n = 0;
  std::vector<double> atoms;
  std::vector<double> log_weights;  // normalized: log-sum-exp = 0
  double log_z = 0.0;               // log partition function (prior included)
};

/// Energy of configuration x given the quenched variables (noise block 0).
double hamiltonian(const ModelSpec& model, std::span<const double> x,
                   const QuenchedSample& sample);

/// Epsilon side-channel energy, eps*(x^2/2 - x s) - sqrt(eps) * x . zhat
/// summed over components; exactly 0 at eps = 0.
double perturbation_energy(std::span<const double> x, const QuenchedSample& sample, double eps);

GibbsState enumerate_gibbs(const ModelSpec& model, const Prior& prior,
                           const QuenchedSample& sample, double eps);

/// Writes configuration `index` into x (size n).
void config_at(const GibbsState& state, std::size_t index, std::span<double> x);

double gibbs_expect(const GibbsState& state,
                    const std::function<double(std::span<const double>)>& observable);

/// Two-replica expectation under the product posterior.
double gibbs_expect2(
    const GibbsState& state,
    const std::function<double(std::span<const double>, std::span<const double>)>& observable);

/// q_{x,s} = (1/n) sum_i x_i s_i.
double overlap(std::span<const double> x, std::span<const double> s);

// ---------------------------------------------------------------------------
// Disorder-averaged observables. Everything any identity check needs from one
// disorder realization is collected into a fixed vector of scalars, so the
// Monte Carlo and quadrature disorder averages share one code path.

enum MomentField : std::size_t {
  kF,          // free energy per component of the realization
  kFSq,        // its square (variance diagnostics)
  kQ1,         // <q>
  kQ1Sq,       // <q>^2
  kQ2,         // <q^2>
  kLBar,       // <L>
  kLBarSq,     // <L>^2
  kL2,         // <L^2>
  kMeanSq,     // (1/n)   sum_i <X_i>^2
  kCorrSq,     // (1/n^2) sum_ij <X_i X_j>^2
  kCorrMixed,  // (1/n^2) sum_ij <X_i X_j><X_i><X_j>
  kMeanQuart,  // (1/n^2) sum_ij <X_i>^2 <X_j>^2
  kM2Mean,     // (1/n)   sum_i <X_i^2>
  kThermalVar, // (1/n)   sum_i (<X_i^2> - <X_i>^2)
  kConnCorrSq, // (1/n^2) sum_ij (<X_i X_j> - <X_i><X_j>)^2
  kX1Quartic,  // <X_1^4>
  kS1Quartic,  // s_1^4
  kMomentCount
};

using Moments = std::array<double, kMomentCount>;

/// Collects the per-realization observables above. eps_tilde is the effective
/// side-channel SNR entering L; at eps_tilde = 0 the L fields are left 0.
Moments collect_moments(const GibbsState& state, std::span<const double> signal,
                        std::span<const double> side_noise, double eps_tilde);

/// Enumerate + collect for the plain (single-block) model with perturbation eps.
Moments moments_of_sample(const ModelSpec& model, const Prior& prior,
                          const QuenchedSample& sample, double eps);

struct MomentStats {
  Moments mean{};
  Moments se{};
  std::size_t count = 0;
};

/// Per-sample moment vectors for `samples` disorder draws; deterministic in
/// (seed, samples) regardless of the thread count.
std::vector<Moments> mc_moment_samples(const ModelSpec& model, const Prior& prior, int n,
                                       double eps, int samples, std::uint64_t seed,
                                       int threads = 1);

MomentStats reduce_moments(std::span<const Moments> samples);

/// Tensor-product Gauss-Hermite integration over every Gaussian disorder
/// coordinate (exact atom sum over the signal). `fn` is called once per node
/// with a sample filled with the node coordinates and the node weight.
/// Throws when order^dims * atoms^n exceeds node_cap.
void for_each_disorder_node(const ModelSpec& model, const Prior& prior, int n,
                            bool with_side_channel, int order,
                            const std::function<void(const QuenchedSample&, double)>& fn,
                            std::size_t node_cap = 8'000'000);

Moments quadrature_moments(const ModelSpec& model, const Prior& prior, int n, double eps,
                           int order);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Disorder average of -(1/n) ln Z by exact enumeration per sample.
MonteCarloEstimate free_energy_mc(const ModelSpec& model, const Prior& prior, int n,
                                  double eps, int samples, std::uint64_t seed,
                                  int threads = 1);

double free_energy_quadrature(const ModelSpec& model, const Prior& prior, int n, double eps,
                              int order);

// ---------------------------------------------------------------------------
// Bayes (Nishimori) identity E<g(X, S)> = E<g(X, X')>.

enum class NishimoriObservable { One, Overlap, OverlapSq, SignalQuartic };

struct NishimoriReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double stderr_ = 0.0;
};

NishimoriReport nishimori_mc(const ModelSpec& model, const Prior& prior, int n, double eps,
                             NishimoriObservable g, int samples, std::uint64_t seed,
                             int threads = 1);

NishimoriReport nishimori_quadrature(const ModelSpec& model, const Prior& prior, int n,
                                     double eps, NishimoriObservable g, int order);

}  // namespace rlab
