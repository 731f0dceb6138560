#include "rlab/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rlab/quadrature.hpp"
#include "rlab/rng.hpp"
#include "rlab/rs_potential.hpp"
#include "rlab/scalar_channel.hpp"

namespace rlab {
namespace {

void check_path_inputs(const MatrixModel& model, const PathConfig& config,
                       const TrialParameters& m) {
  if (!(model.delta > 0.0)) throw std::invalid_argument("path: delta must be > 0");
  if (config.n < 1) throw std::invalid_argument("path: n must be >= 1");
  if (config.steps < 1) throw std::invalid_argument("path: K must be >= 1");
  if (!(config.eps >= 0.0) || config.eps > 1.0)
    throw std::invalid_argument("path: eps must be in [0, 1]");
  if (static_cast<int>(m.values.size()) != config.steps)
    throw std::invalid_argument("path: trial parameters must have K entries");
  for (double mk : m.values)
    if (!(mk >= 0.0)) throw std::invalid_argument("path: trial parameters must be >= 0");
}

// Per-block SNRs of the (k,t) Hamiltonian. Coefficients are produced by the
// same expressions at both ends of a step so the telescoping identity is
// bit-exact: (1-t) evaluates to 1.0 at t=0 and t*m_k to m_k at t=1.
struct BlockSnr {
  double pair;
  double mf;
};

BlockSnr block_snr(const MatrixModel& model, int steps, const PathPoint& point,
                   const TrialParameters& m, int block) {
  const double kd = static_cast<double>(steps) * model.delta;
  BlockSnr out{0.0, 0.0};
  if (block > point.k) {
    out.pair = 1.0 / kd;
  } else if (block == point.k) {
    out.pair = (1.0 - point.t) / kd;
    out.mf = (point.t * m.values[block - 1]) / kd;
  } else {
    out.mf = m.values[block - 1] / kd;
  }
  return out;
}

}  // namespace

PathPoint make_path_point(const MatrixModel& model, const PathConfig& config,
                          const TrialParameters& m, int k, double t) {
  check_path_inputs(model, config, m);
  if (k < 1 || k > config.steps) throw std::invalid_argument("path point: k out of range");
  if (!(t >= 0.0) || t > 1.0) throw std::invalid_argument("path point: t must be in [0, 1]");
  const double kd = static_cast<double>(config.steps) * model.delta;
  double acc = 0.0;
  for (int l = 0; l < k - 1; ++l) acc += m.values[l];
  acc += t * m.values[k - 1];
  return {k, t, config.eps, config.eps + acc / kd};
}

double interp_hamiltonian(const MatrixModel& model, const PathConfig& config,
                          const PathPoint& point, const TrialParameters& m,
                          std::span<const double> x, const QuenchedSample& sample) {
  if (sample.steps != config.steps)
    throw std::invalid_argument("interp hamiltonian: sample has wrong number of blocks");
  const int n = sample.n;
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("interp hamiltonian: configuration size mismatch");
  const auto& s = sample.signal;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  double quad_pair = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double xx = x[i] * x[j];
      quad_pair += 0.5 * xx * xx / n - xx * s[i] * s[j] / n;
    }
  double quad_mf = 0.0;
  for (int i = 0; i < n; ++i) quad_mf += 0.5 * x[i] * x[i] - x[i] * s[i];

  double h = 0.0;
  for (int block = 1; block <= config.steps; ++block) {
    const BlockSnr snr = block_snr(model, config.steps, point, m, block);
    if (snr.pair > 0.0) {
      double noise = 0.0;
      const auto& z = sample.pair_noise[block - 1];
      std::size_t idx = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++idx) noise += x[i] * x[j] * z[idx] * inv_sqrt_n;
      h += snr.pair * quad_pair - std::sqrt(snr.pair) * noise;
    }
    if (snr.mf > 0.0) {
      double noise = 0.0;
      const auto& zt = sample.mf_noise[block - 1];
      for (int i = 0; i < n; ++i) noise += x[i] * zt[i];
      h += snr.mf * quad_mf - std::sqrt(snr.mf) * noise;
    }
  }
  if (point.eps > 0.0) {
    double noise = 0.0;
    for (int i = 0; i < n; ++i) noise += x[i] * sample.side_noise[i];
    h += point.eps * quad_mf - std::sqrt(point.eps) * noise;
  }
  return h;
}

PathEvaluator::PathEvaluator(const MatrixModel& model, const Prior& prior,
                             const QuenchedSample& sample)
    : sample_(&sample), model_(model), n_(sample.n), steps_(sample.steps),
      atoms_(prior.atoms()) {
  count_ = 1;
  for (int i = 0; i < n_; ++i) {
    count_ *= atoms_.size();
    if (count_ > kEnumerationCap)
      throw enumeration_cap_error("enumeration cap exceeded on interpolation path");
  }

  log_prior_.resize(count_);
  quad_pair_.resize(count_);
  quad_mf_.resize(count_);
  noise_pair_.resize(count_ * steps_);
  noise_mf_.resize(count_ * steps_);
  noise_side_.resize(count_);

  const auto& s = sample.signal;
  const auto& logw = prior.log_weights();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_));

  std::vector<int> digits(n_, 0);
  std::vector<double> x(n_, atoms_[0]);
  for (std::size_t c = 0;; ++c) {
    double lp = 0.0, qp = 0.0, qm = 0.0, side = 0.0;
    for (int i = 0; i < n_; ++i) {
      lp += logw[digits[i]];
      qm += 0.5 * x[i] * x[i] - x[i] * s[i];
      side += x[i] * sample.side_noise[i];
      for (int j = i; j < n_; ++j) {
        const double xx = x[i] * x[j];
        qp += 0.5 * xx * xx / n_ - xx * s[i] * s[j] / n_;
      }
    }
    log_prior_[c] = lp;
    quad_pair_[c] = qp;
    quad_mf_[c] = qm;
    noise_side_[c] = side;

    for (int b = 0; b < steps_; ++b) {
      double np = 0.0;
      const auto& z = sample.pair_noise[b];
      std::size_t idx = 0;
      for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j, ++idx) np += x[i] * x[j] * z[idx] * inv_sqrt_n;
      noise_pair_[c * steps_ + b] = np;

      double nm = 0.0;
      const auto& zt = sample.mf_noise[b];
      for (int i = 0; i < n_; ++i) nm += x[i] * zt[i];
      noise_mf_[c * steps_ + b] = nm;
    }

    int pos = 0;
    while (pos < n_ && digits[pos] == static_cast<int>(atoms_.size()) - 1) {
      digits[pos] = 0;
      x[pos] = atoms_[0];
      ++pos;
    }
    if (pos == n_) break;
    ++digits[pos];
    x[pos] = atoms_[digits[pos]];
  }
}

GibbsState PathEvaluator::finish(std::vector<double> energies) const {
  GibbsState state;
  state.n = n_;
  state.atoms = atoms_;
  state.log_weights = std::move(energies);
  double mx = -std::numeric_limits<double>::infinity();
  for (double lw : state.log_weights) mx = std::max(mx, lw);
  double acc = 0.0;
  for (double lw : state.log_weights) acc += std::exp(lw - mx);
  state.log_z = mx + std::log(acc);
  for (auto& lw : state.log_weights) lw -= state.log_z;
  return state;
}

GibbsState PathEvaluator::state(const PathPoint& point, const TrialParameters& m) const {
  std::vector<double> lw(count_);
  const double sqrt_eps = point.eps > 0.0 ? std::sqrt(point.eps) : 0.0;
  for (std::size_t c = 0; c < count_; ++c) {
    double h = 0.0;
    for (int block = 1; block <= steps_; ++block) {
      const BlockSnr snr = block_snr(model_, steps_, point, m, block);
      if (snr.pair > 0.0)
        h += snr.pair * quad_pair_[c] - std::sqrt(snr.pair) * noise_pair_[c * steps_ + block - 1];
      if (snr.mf > 0.0)
        h += snr.mf * quad_mf_[c] - std::sqrt(snr.mf) * noise_mf_[c * steps_ + block - 1];
    }
    if (point.eps > 0.0) h += point.eps * quad_mf_[c] - sqrt_eps * noise_side_[c];
    lw[c] = log_prior_[c] - h;
  }
  return finish(std::move(lw));
}

GibbsState PathEvaluator::merged_state(const PathPoint& point, double eps_tilde) const {
  if (!(eps_tilde >= 0.0)) throw std::invalid_argument("merged state: eps_tilde must be >= 0");
  std::vector<double> lw(count_);
  const double kd = static_cast<double>(steps_) * model_.delta;
  const double sqrt_et = eps_tilde > 0.0 ? std::sqrt(eps_tilde) : 0.0;
  for (std::size_t c = 0; c < count_; ++c) {
    double h = 0.0;
    for (int block = point.k; block <= steps_; ++block) {
      const double snr = (block == point.k ? (1.0 - point.t) : 1.0) / kd;
      if (snr > 0.0)
        h += snr * quad_pair_[c] - std::sqrt(snr) * noise_pair_[c * steps_ + block - 1];
    }
    if (eps_tilde > 0.0) h += eps_tilde * quad_mf_[c] - sqrt_et * noise_side_[c];
    lw[c] = log_prior_[c] - h;
  }
  return finish(std::move(lw));
}

Moments PathEvaluator::moments(const PathPoint& point, const TrialParameters& m) const {
  // The separate-block representation's side channel has SNR eps, not
  // eps_tilde, so the L observables are only meaningful in the merged
  // representation; skip them here.
  return collect_moments(state(point, m), sample_->signal, sample_->side_noise, 0.0);
}

Moments PathEvaluator::merged_moments(const PathPoint& point, double eps_tilde) const {
  return collect_moments(merged_state(point, eps_tilde), sample_->signal,
                         sample_->side_noise, eps_tilde);
}

MonteCarloEstimate path_free_energy(const MatrixModel& model, const Prior& prior,
                                    const PathConfig& config, const PathPoint& point,
                                    const TrialParameters& m, int samples,
                                    std::uint64_t seed, int threads) {
  check_path_inputs(model, config, m);
  if (samples < 2) throw std::invalid_argument("path free energy: samples must be >= 2");
  std::vector<double> f(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    const QuenchedSample sample =
        draw_quenched(ModelSpec{model}, prior, config.n, config.steps, seed, i);
    const PathEvaluator ev(model, prior, sample);
    f[i] = -ev.state(point, m).log_z / static_cast<double>(config.n);
  });
  const auto ms = mean_stderr(f);
  return {ms.mean, ms.stderr_, static_cast<std::size_t>(samples)};
}

double final_free_energy(const MatrixModel& model, const Prior& prior,
                         const TrialParameters& m, double eps, int quad_order) {
  // f_{K,1;eps}: all K mean-field blocks plus the perturbation merge into one
  // scalar channel of SNR mean(m)/delta + eps.
  double mean = 0.0;
  for (double mk : m.values) mean += mk;
  mean /= static_cast<double>(m.values.size());
  return f_den_snr(prior, mean / model.delta + eps, quad_order);
}

StabilityReport gaussian_stability_check(int steps, int samples, std::uint64_t seed,
                                         std::span<const double> weights_m) {
  if (steps < 1 || samples < 2) throw std::invalid_argument("stability check: bad inputs");
  std::vector<double> plain(samples), weighted(samples);

  std::vector<double> w(steps, 1.0 / std::sqrt(static_cast<double>(steps)));
  if (!weights_m.empty()) {
    if (static_cast<int>(weights_m.size()) != steps)
      throw std::invalid_argument("stability check: weights size mismatch");
    double mean = 0.0;
    for (double mk : weights_m) mean += mk;
    mean /= static_cast<double>(steps);
    for (int k = 0; k < steps; ++k)
      w[k] = std::sqrt(weights_m[k] / (static_cast<double>(steps) * mean));
  }

  for (int i = 0; i < samples; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    double sum = 0.0, wsum = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double z = rng.gaussian();
      sum += z / std::sqrt(static_cast<double>(steps));
      wsum += w[k] * z;
    }
    plain[i] = sum;
    weighted[i] = wsum;
  }

  StabilityReport report;
  std::vector<double> sq(samples), quart(samples), wsq(samples);
  for (int i = 0; i < samples; ++i) {
    sq[i] = plain[i] * plain[i];
    quart[i] = sq[i] * sq[i];
    wsq[i] = weighted[i] * weighted[i];
  }
  report.variance = mean_stderr(sq).mean;
  report.fourth_moment = mean_stderr(quart).mean;
  report.weighted_variance = mean_stderr(wsq).mean;

  const double band = 5.0 / std::sqrt(static_cast<double>(samples));
  const double band4 = 5.0 * std::sqrt(96.0 / static_cast<double>(samples));
  report.pass = std::abs(report.variance - 1.0) <= band &&
                std::abs(report.weighted_variance - 1.0) <= band &&
                std::abs(report.fourth_moment - 3.0) <= band4;
  return report;
}

DfdtReport dfdt_check(const MatrixModel& model, const Prior& prior, const PathConfig& config,
                      int k, double t, const TrialParameters& m, int samples,
                      std::uint64_t seed, double dt, int threads, double sigma_factor) {
  check_path_inputs(model, config, m);
  if (!(t - dt > 0.0) || !(t + dt < 1.0))
    throw std::invalid_argument("dfdt: need 0 < t - dt and t + dt < 1");

  const PathPoint at = make_path_point(model, config, m, k, t);
  const PathPoint lo = make_path_point(model, config, m, k, t - dt);
  const PathPoint hi = make_path_point(model, config, m, k, t + dt);
  const double nd = static_cast<double>(config.n);
  const double scale = 1.0 / (4.0 * model.delta * static_cast<double>(config.steps));
  const double mk = m.values[k - 1];

  std::vector<double> fd(samples), formula(samples), diff(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    const QuenchedSample sample =
        draw_quenched(ModelSpec{model}, prior, config.n, config.steps, seed, i);
    const PathEvaluator ev(model, prior, sample);
    const double f_lo = -ev.state(lo, m).log_z / nd;
    const double f_hi = -ev.state(hi, m).log_z / nd;
    const Moments mm = ev.moments(at, m);
    fd[i] = (f_hi - f_lo) / (2.0 * dt);
    formula[i] = scale * (mm[kQ2] - 2.0 * mk * mm[kQ1]);
    diff[i] = fd[i] - formula[i];
  });

  DfdtReport report;
  report.fd_value = mean_stderr(fd).mean;
  report.formula_value = mean_stderr(formula).mean;
  const auto d = mean_stderr(diff);
  report.residual = d.mean;
  report.stderr_ = d.stderr_;
  report.slack = 1.0 / (nd * static_cast<double>(config.steps));
  report.pass = std::abs(report.residual) < sigma_factor * report.stderr_ + report.slack;
  return report;
}

SumRuleReport sum_rule_residual(const MatrixModel& model, const Prior& prior,
                                const PathConfig& config, const TrialParameters& m,
                                int samples, std::uint64_t seed, int t_quad_order,
                                int threads, double sigma_factor) {
  check_path_inputs(model, config, m);
  const int K = config.steps;
  const double nd = static_cast<double>(config.n);
  const auto& t_rule = gauss_legendre01(t_quad_order);

  double m_mf = 0.0;
  for (double mk : m.values) m_mf += mk;
  m_mf /= static_cast<double>(K);

  SumRuleReport report;
  report.endpoint_gap =
      final_free_energy(model, prior, m, config.eps) - final_free_energy(model, prior, m, 0.0);
  report.f_rs_mean = rs_potential(ModelSpec{model}, prior, m_mf);
  report.v_term = v_k_variance(m.values) / (4.0 * model.delta);
  const double constant = report.endpoint_gap + report.f_rs_mean + report.v_term;

  // One shared set of disorder samples feeds the LHS and every (k, t) node of
  // the remainder, so the residual is a per-sample quantity.
  std::vector<PathPoint> nodes;
  nodes.reserve(static_cast<std::size_t>(K) * t_rule.nodes.size());
  for (int k = 1; k <= K; ++k)
    for (double tn : t_rule.nodes) nodes.push_back(make_path_point(model, config, m, k, tn));
  const PathPoint start = make_path_point(model, config, m, 1, 0.0);
  const double scale = 1.0 / (4.0 * model.delta * static_cast<double>(K));

  std::vector<double> lhs(samples), remainder(samples), resid(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    const QuenchedSample sample =
        draw_quenched(ModelSpec{model}, prior, config.n, K, seed, i);
    const PathEvaluator ev(model, prior, sample);
    lhs[i] = -ev.state(start, m).log_z / nd;
    double rem = 0.0;
    std::size_t node = 0;
    for (int k = 1; k <= K; ++k) {
      const double mk = m.values[k - 1];
      for (std::size_t q = 0; q < t_rule.nodes.size(); ++q, ++node) {
        const Moments mm = ev.moments(nodes[node], m);
        rem += t_rule.weights[q] * (mm[kQ2] - 2.0 * mk * mm[kQ1] + mk * mk);
      }
    }
    remainder[i] = scale * rem;
    resid[i] = lhs[i] + remainder[i] - constant;
  });

  report.lhs = mean_stderr(lhs).mean;
  const auto rem = mean_stderr(remainder);
  report.remainder = rem.mean;
  report.remainder_stderr = rem.stderr_;
  report.rhs = constant - report.remainder;
  const auto d = mean_stderr(resid);
  report.residual = d.mean;
  report.stderr_ = d.stderr_;
  report.slack = 2.0 / nd;
  report.pass = std::abs(report.residual) < sigma_factor * report.stderr_ + report.slack;
  return report;
}

TrialParameters adapt_parameters(const MatrixModel& model, const Prior& prior,
                                 const PathConfig& config, int samples, std::uint64_t seed,
                                 int threads) {
  if (config.steps < 1) throw std::invalid_argument("adapt: K must be >= 1");
  const double m2 = prior.moment(2);
  TrialParameters m;
  m.values.assign(config.steps, 0.0);

  // Sequential over k by construction: step k's Gibbs average depends only on
  // the already-fixed m_1..m_{k-1}; only the disorder loop is parallel.
  std::vector<double> q(samples);
  for (int k = 1; k <= config.steps; ++k) {
    const PathPoint point = make_path_point(model, config, m, k, 0.0);
    parallel_for(samples, threads, [&](std::size_t i) {
      const QuenchedSample sample =
          draw_quenched(ModelSpec{model}, prior, config.n, config.steps, seed, i);
      const PathEvaluator ev(model, prior, sample);
      q[i] = ev.moments(point, m)[kQ1];
    });
    m.values[k - 1] = std::clamp(mean_stderr(q).mean, 0.0, m2);
  }
  return m;
}

GapReport t_dependence_gap(const MatrixModel& model, const Prior& prior,
                           const PathConfig& config, int k, double t,
                           const TrialParameters& m, int samples, std::uint64_t seed,
                           int threads) {
  check_path_inputs(model, config, m);
  const PathPoint at_t = make_path_point(model, config, m, k, t);
  const PathPoint at_0 = make_path_point(model, config, m, k, 0.0);

  std::vector<double> diff(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    const QuenchedSample sample =
        draw_quenched(ModelSpec{model}, prior, config.n, config.steps, seed, i);
    const PathEvaluator ev(model, prior, sample);
    diff[i] = ev.moments(at_t, m)[kQ1] - ev.moments(at_0, m)[kQ1];
  });
  const auto d = mean_stderr(diff);
  return {d.mean, d.stderr_};
}

GammaLambda rle_gamma_lambda(double t, double E, double alpha, double delta) {
  if (!(t >= 0.0) || t > 1.0) throw std::invalid_argument("gamma/lambda: t must be in [0, 1]");
  if (!(E >= 0.0)) throw std::invalid_argument("gamma/lambda: E must be >= 0");
  if (!(alpha > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("gamma/lambda: bad alpha/delta");
  if (t == 0.0) return {1.0 / delta, 0.0};
  if (t == 1.0) return {0.0, alpha / (delta + E)};
  const double gamma = (1.0 - t) / delta;
  return {gamma, alpha / (delta + E) - alpha / (1.0 / gamma + E)};
}

double psi_integral_identity(double E, double alpha, double delta, int t_quad_order) {
  const auto& rule = gauss_legendre01(t_quad_order);
  const double dgamma = -1.0 / delta;  // gamma(t) = (1 - t)/delta
  double integral = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double gamma = (1.0 - rule.nodes[q]) / delta;
    const double denom = 1.0 + gamma * E;
    integral += rule.weights[q] * dgamma * (E / (denom * denom) - E / denom);
  }
  return psi(alpha, delta, E) - 0.5 * alpha * integral;
}

}  // namespace rlab
