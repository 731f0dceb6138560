#include "rlab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlab/quadrature.hpp"
#include "rlab/rng.hpp"

namespace rlab {
namespace {

std::size_t pow_checked(std::size_t base, int exp, std::size_t cap) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) {
    out *= base;
    if (out > cap)
      throw enumeration_cap_error("enumeration cap exceeded: |atoms|^n > " +
                                  std::to_string(cap));
  }
  return out;
}

double log_sum_exp(std::span<const double> vals) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : vals) m = std::max(m, v);
  double acc = 0.0;
  for (double v : vals) acc += std::exp(v - m);
  return m + std::log(acc);
}

// Odometer over atoms^n: digits are little-endian atom indices.
struct ConfigIter {
  ConfigIter(int n, const std::vector<double>& atoms)
      : atoms_(atoms), digits(n, 0), x(n, atoms.empty() ? 0.0 : atoms[0]) {}

  bool advance() {
    std::size_t pos = 0;
    while (pos < digits.size() && digits[pos] == static_cast<int>(atoms_.size()) - 1) {
      digits[pos] = 0;
      x[pos] = atoms_[0];
      ++pos;
    }
    if (pos == digits.size()) return false;
    ++digits[pos];
    x[pos] = atoms_[digits[pos]];
    return true;
  }

  const std::vector<double>& atoms_;
  std::vector<int> digits;
  std::vector<double> x;
};

}  // namespace

double hamiltonian(const ModelSpec& model, std::span<const double> x,
                   const QuenchedSample& sample) {
  const int n = sample.n;
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("hamiltonian: configuration size mismatch");
  const auto& s = sample.signal;

  if (const auto* mat = std::get_if<MatrixModel>(&model)) {
    const double delta = mat->delta;
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    const auto& z = sample.pair_noise.at(0);
    double acc = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j, ++idx) {
        const double xx = x[i] * x[j];
        acc += xx * xx * 0.5 / n - xx * s[i] * s[j] / n -
               std::sqrt(delta) * inv_sqrt_n * xx * z[idx];
      }
    }
    return acc / delta;
  }

  if (const auto* ten = std::get_if<TensorModel>(&model)) {
    const double delta = ten->delta;
    const int p = ten->p;
    double fact = 1.0;
    for (int i = 2; i < p; ++i) fact *= i;  // (p-1)!
    const double scale = fact / std::pow(static_cast<double>(n), p - 1);
    const double noise_scale = std::sqrt(delta * scale);
    const auto tuples = sorted_tuples(n, p);
    const auto& z = sample.tuple_noise.at(0);
    double acc = 0.0;
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      double xs = 1.0, xprod = 1.0;
      for (int q : tuples[t]) {
        xs *= x[q] * s[q];
        xprod *= x[q];
      }
      acc += 0.5 * scale * xprod * xprod - scale * xs - noise_scale * z[t] * xprod;
    }
    return acc / delta;
  }

  const auto& rle = std::get<RleModel>(model);
  const auto& z = sample.meas_noise.at(0);
  const double sqrt_delta = std::sqrt(rle.delta);
  double acc = 0.0;
  for (int mu = 0; mu < sample.rows; ++mu) {
    double proj = 0.0;
    const double* row = sample.sensing.data() + static_cast<std::size_t>(mu) * n;
    for (int i = 0; i < n; ++i) proj += row[i] * (x[i] - s[i]);
    acc += 0.5 * proj * proj - sqrt_delta * proj * z[mu];
  }
  return acc / rle.delta;
}

double perturbation_energy(std::span<const double> x, const QuenchedSample& sample,
                           double eps) {
  if (eps == 0.0) return 0.0;
  if (!(eps >= 0.0)) throw std::invalid_argument("perturbation: eps must be >= 0");
  const double sqrt_eps = std::sqrt(eps);
  double quad = 0.0, lin = 0.0;
  for (int i = 0; i < sample.n; ++i) {
    quad += 0.5 * x[i] * x[i] - x[i] * sample.signal[i];
    lin += x[i] * sample.side_noise[i];
  }
  return eps * quad - sqrt_eps * lin;
}

GibbsState enumerate_gibbs(const ModelSpec& model, const Prior& prior,
                           const QuenchedSample& sample, double eps) {
  const int n = sample.n;
  const std::size_t count = pow_checked(prior.size(), n, kEnumerationCap);

  GibbsState state;
  state.n = n;
  state.atoms = prior.atoms();
  state.log_weights.resize(count);

  ConfigIter it(n, state.atoms);
  const auto& logw = prior.log_weights();
  std::size_t c = 0;
  do {
    double lp = 0.0;
    for (int i = 0; i < n; ++i) lp += logw[it.digits[i]];
    state.log_weights[c++] = lp - hamiltonian(model, it.x, sample) -
                             perturbation_energy(it.x, sample, eps);
  } while (it.advance());

  state.log_z = log_sum_exp(state.log_weights);
  for (auto& lw : state.log_weights) lw -= state.log_z;
  return state;
}

void config_at(const GibbsState& state, std::size_t index, std::span<double> x) {
  const std::size_t base = state.atoms.size();
  for (int i = 0; i < state.n; ++i) {
    x[i] = state.atoms[index % base];
    index /= base;
  }
}

double gibbs_expect(const GibbsState& state,
                    const std::function<double(std::span<const double>)>& observable) {
  ConfigIter it(state.n, state.atoms);
  double acc = 0.0;
  std::size_t c = 0;
  do {
    acc += std::exp(state.log_weights[c++]) * observable(it.x);
  } while (it.advance());
  return acc;
}

double gibbs_expect2(
    const GibbsState& state,
    const std::function<double(std::span<const double>, std::span<const double>)>& observable) {
  ConfigIter it(state.n, state.atoms);
  double acc = 0.0;
  std::size_t c = 0;
  do {
    const double w1 = std::exp(state.log_weights[c++]);
    ConfigIter jt(state.n, state.atoms);
    std::size_t c2 = 0;
    do {
      acc += w1 * std::exp(state.log_weights[c2++]) * observable(it.x, jt.x);
    } while (jt.advance());
  } while (it.advance());
  return acc;
}

double overlap(std::span<const double> x, std::span<const double> s) {
  if (x.size() != s.size()) throw std::invalid_argument("overlap: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * s[i];
  return acc / static_cast<double>(x.size());
}

Moments collect_moments(const GibbsState& state, std::span<const double> signal,
                        std::span<const double> side_noise, double eps_tilde) {
  const int n = state.n;
  const double nd = static_cast<double>(n);

  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  std::vector<double> corr(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
  double lbar = 0.0, l2 = 0.0, x1q = 0.0;
  const bool with_l = eps_tilde > 0.0;
  const double l_noise = with_l ? 0.5 / std::sqrt(eps_tilde) : 0.0;

  ConfigIter it(n, state.atoms);
  std::size_t c = 0;
  do {
    const double w = std::exp(state.log_weights[c++]);
    const auto& x = it.x;
    double lx = 0.0;
    for (int i = 0; i < n; ++i) {
      mean[i] += w * x[i];
      m2[i] += w * x[i] * x[i];
      if (with_l) lx += 0.5 * x[i] * x[i] - x[i] * signal[i] - x[i] * side_noise[i] * l_noise;
    }
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx) corr[idx] += w * x[i] * x[j];
    if (with_l) {
      lx /= nd;
      lbar += w * lx;
      l2 += w * lx * lx;
    }
    x1q += w * x[0] * x[0] * x[0] * x[0];
  } while (it.advance());

  Moments out{};
  out[kF] = -state.log_z / nd;
  out[kFSq] = out[kF] * out[kF];

  double q1 = 0.0;
  for (int i = 0; i < n; ++i) q1 += mean[i] * signal[i];
  q1 /= nd;
  out[kQ1] = q1;
  out[kQ1Sq] = q1 * q1;

  double q2 = 0.0, corr_sq = 0.0, corr_mixed = 0.0, conn_sq = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++idx) {
      const double mult = (i == j) ? 1.0 : 2.0;  // symmetric completion
      const double cij = corr[idx];
      const double conn = cij - mean[i] * mean[j];
      q2 += mult * cij * signal[i] * signal[j];
      corr_sq += mult * cij * cij;
      corr_mixed += mult * cij * mean[i] * mean[j];
      conn_sq += mult * conn * conn;
    }
  }
  out[kQ2] = q2 / (nd * nd);
  out[kCorrSq] = corr_sq / (nd * nd);
  out[kCorrMixed] = corr_mixed / (nd * nd);
  out[kConnCorrSq] = conn_sq / (nd * nd);

  double mean_sq = 0.0, m2_mean = 0.0, th_var = 0.0;
  for (int i = 0; i < n; ++i) {
    mean_sq += mean[i] * mean[i];
    m2_mean += m2[i];
    th_var += m2[i] - mean[i] * mean[i];
  }
  out[kMeanSq] = mean_sq / nd;
  out[kMeanQuart] = out[kMeanSq] * out[kMeanSq];
  out[kM2Mean] = m2_mean / nd;
  out[kThermalVar] = th_var / nd;

  out[kLBar] = lbar;
  out[kLBarSq] = lbar * lbar;
  out[kL2] = l2;
  out[kX1Quartic] = x1q;
  out[kS1Quartic] = std::pow(signal[0], 4);
  return out;
}

Moments moments_of_sample(const ModelSpec& model, const Prior& prior,
                          const QuenchedSample& sample, double eps) {
  const GibbsState state = enumerate_gibbs(model, prior, sample, eps);
  return collect_moments(state, sample.signal, sample.side_noise, eps);
}

std::vector<Moments> mc_moment_samples(const ModelSpec& model, const Prior& prior, int n,
                                       double eps, int samples, std::uint64_t seed,
                                       int threads) {
  if (samples < 2) throw std::invalid_argument("monte carlo: samples must be >= 2");
  pow_checked(prior.size(), n, kEnumerationCap);
  std::vector<Moments> out(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    const QuenchedSample sample = draw_quenched(model, prior, n, 1, seed, i);
    out[i] = moments_of_sample(model, prior, sample, eps);
  });
  return out;
}

MomentStats reduce_moments(std::span<const Moments> samples) {
  MomentStats stats;
  stats.count = samples.size();
  std::vector<double> field(samples.size());
  for (std::size_t f = 0; f < kMomentCount; ++f) {
    for (std::size_t i = 0; i < samples.size(); ++i) field[i] = samples[i][f];
    const auto ms = mean_stderr(field);
    stats.mean[f] = ms.mean;
    stats.se[f] = ms.stderr_;
  }
  return stats;
}

void for_each_disorder_node(const ModelSpec& model, const Prior& prior, int n,
                            bool with_side_channel, int order,
                            const std::function<void(const QuenchedSample&, double)>& fn,
                            std::size_t node_cap) {
  validate(model);
  if (order < 2) throw std::invalid_argument("disorder quadrature: order must be >= 2");

  QuenchedSample sample;
  sample.n = n;
  sample.steps = 1;
  sample.signal.assign(n, 0.0);
  sample.side_noise.assign(n, 0.0);
  sample.mf_noise.assign(1, std::vector<double>(n, 0.0));

  // gather pointers to every active gaussian coordinate of the sample
  std::vector<double*> coords;
  double sensing_scale = 1.0;
  if (std::holds_alternative<MatrixModel>(model)) {
    sample.pair_noise.assign(1, std::vector<double>(static_cast<std::size_t>(n) * (n + 1) / 2));
    for (auto& z : sample.pair_noise[0]) coords.push_back(&z);
  } else if (const auto* ten = std::get_if<TensorModel>(&model)) {
    sample.tuple_noise.assign(1, std::vector<double>(sorted_tuples(n, ten->p).size()));
    for (auto& z : sample.tuple_noise[0]) coords.push_back(&z);
  } else {
    const auto& rle = std::get<RleModel>(model);
    sample.rows = rle_rows(rle, n);
    sample.sensing.assign(static_cast<std::size_t>(sample.rows) * n, 0.0);
    sample.meas_noise.assign(1, std::vector<double>(sample.rows, 0.0));
    sensing_scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& phi : sample.sensing) coords.push_back(&phi);
    for (auto& z : sample.meas_noise[0]) coords.push_back(&z);
  }
  const std::size_t sensing_count = sample.sensing.size();
  if (with_side_channel)
    for (auto& z : sample.side_noise) coords.push_back(&z);

  const std::size_t dims = coords.size();
  const std::size_t signal_combos = pow_checked(prior.size(), n, node_cap);
  double total = static_cast<double>(signal_combos);
  for (std::size_t d = 0; d < dims; ++d) {
    total *= order;
    if (total > static_cast<double>(node_cap))
      throw std::invalid_argument(
          "quadrature over disorder: too many noise dimensions for order " +
          std::to_string(order));
  }

  const auto& rule = gauss_hermite(order);

  ConfigIter sig(n, prior.atoms());
  do {
    double pw = 1.0;
    for (int i = 0; i < n; ++i) pw *= prior.weights()[sig.digits[i]];
    for (int i = 0; i < n; ++i) sample.signal[i] = sig.x[i];

    std::vector<int> node(dims, 0);
    while (true) {
      double w = pw;
      for (std::size_t d = 0; d < dims; ++d) {
        const double scale = d < sensing_count ? sensing_scale : 1.0;
        *coords[d] = scale * rule.nodes[node[d]];
        w *= rule.weights[node[d]];
      }
      fn(sample, w);

      std::size_t pos = 0;
      while (pos < dims && node[pos] == order - 1) node[pos++] = 0;
      if (pos == dims) break;
      ++node[pos];
    }
  } while (sig.advance());
}

Moments quadrature_moments(const ModelSpec& model, const Prior& prior, int n, double eps,
                           int order) {
  Moments acc{};
  for_each_disorder_node(model, prior, n, eps > 0.0, order,
                         [&](const QuenchedSample& sample, double w) {
                           const Moments m = moments_of_sample(model, prior, sample, eps);
                           for (std::size_t f = 0; f < kMomentCount; ++f) acc[f] += w * m[f];
                         });
  return acc;
}

MonteCarloEstimate free_energy_mc(const ModelSpec& model, const Prior& prior, int n,
                                  double eps, int samples, std::uint64_t seed, int threads) {
  const auto stats = reduce_moments(mc_moment_samples(model, prior, n, eps, samples, seed, threads));
  return {stats.mean[kF], stats.se[kF], stats.count};
}

double free_energy_quadrature(const ModelSpec& model, const Prior& prior, int n, double eps,
                              int order) {
  return quadrature_moments(model, prior, n, eps, order)[kF];
}

namespace {

std::pair<MomentField, MomentField> nishimori_fields(NishimoriObservable g) {
  switch (g) {
    case NishimoriObservable::Overlap:
      return {kQ1, kMeanSq};  // E<q_{X,S}> = E[(1/n) sum <X_i>^2]
    case NishimoriObservable::OverlapSq:
      return {kQ2, kCorrSq};  // E<q^2_{X,S}> = E[(1/n^2) sum <X_i X_j>^2]
    case NishimoriObservable::SignalQuartic:
      return {kS1Quartic, kX1Quartic};  // E[S_1^4] = E<X_1^4>
    case NishimoriObservable::One:
      return {kMomentCount, kMomentCount};
  }
  throw std::invalid_argument("nishimori: unknown observable");
}

}  // namespace

NishimoriReport nishimori_mc(const ModelSpec& model, const Prior& prior, int n, double eps,
                             NishimoriObservable g, int samples, std::uint64_t seed,
                             int threads) {
  if (g == NishimoriObservable::One) return {1.0, 1.0, 0.0, 0.0};
  const auto [lf, rf] = nishimori_fields(g);
  const auto raw = mc_moment_samples(model, prior, n, eps, samples, seed, threads);
  std::vector<double> diff(raw.size());
  std::vector<double> lhs(raw.size()), rhs(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    lhs[i] = raw[i][lf];
    rhs[i] = raw[i][rf];
    diff[i] = lhs[i] - rhs[i];
  }
  const auto d = mean_stderr(diff);
  return {mean_stderr(lhs).mean, mean_stderr(rhs).mean, d.mean, d.stderr_};
}

NishimoriReport nishimori_quadrature(const ModelSpec& model, const Prior& prior, int n,
                                     double eps, NishimoriObservable g, int order) {
  if (g == NishimoriObservable::One) return {1.0, 1.0, 0.0, 0.0};
  const auto [lf, rf] = nishimori_fields(g);
  const Moments m = quadrature_moments(model, prior, n, eps, order);
  return {m[lf], m[rf], m[lf] - m[rf], 0.0};
}

}  // namespace rlab
