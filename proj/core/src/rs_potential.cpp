#include "rlab/rs_potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "rlab/parallel.hpp"

namespace rlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGoldenRatioConjugate = 0.6180339887498949;

double mean_of(std::span<const double> xs) {
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

void check_m(double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("rs potential: m must be >= 0");
}

// SNR of the effective scalar channel, 1/sigma^2; 0 at m = 0 for matrix/tensor.
double snr_of_m(const ModelSpec& model, double m) {
  check_m(m);
  if (const auto* mat = std::get_if<MatrixModel>(&model)) return m / mat->delta;
  if (const auto* ten = std::get_if<TensorModel>(&model))
    return std::pow(m, ten->p - 1) / ten->delta;
  const auto& rle = std::get<RleModel>(model);
  return rle.alpha / (rle.delta + m);
}

// Golden-section minimization on [a, b]; returns the midpoint of the final
// bracket. Assumes f is unimodal on the bracket (grid scan picked it).
template <typename F>
double golden_section(F&& f, double a, double b, double tol) {
  double u = b - kGoldenRatioConjugate * (b - a);
  double v = a + kGoldenRatioConjugate * (b - a);
  double fu = f(u), fv = f(v);
  while (b - a > tol) {
    if (fu <= fv) {
      b = v;
      v = u;
      fv = fu;
      u = b - kGoldenRatioConjugate * (b - a);
      fu = f(u);
    } else {
      a = u;
      u = v;
      fu = fv;
      v = a + kGoldenRatioConjugate * (b - a);
      fv = f(v);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double sigma_of_m(const ModelSpec& model, double m) {
  const double snr = snr_of_m(model, m);
  return snr == 0.0 ? kInf : 1.0 / std::sqrt(snr);
}

double psi(double alpha, double delta, double E) {
  if (!(alpha > 0.0) || !(delta > 0.0)) throw std::invalid_argument("psi: bad alpha/delta");
  if (!(E >= 0.0)) throw std::invalid_argument("psi: E must be >= 0");
  return 0.5 * alpha * (std::log1p(E / delta) - E / (delta + E));
}

double rs_potential(const ModelSpec& model, const Prior& prior, double m, int quad_order) {
  check_m(m);
  validate(model);
  if (const auto* mat = std::get_if<MatrixModel>(&model)) {
    return m * m / (4.0 * mat->delta) + f_den_snr(prior, m / mat->delta, quad_order);
  }
  if (const auto* ten = std::get_if<TensorModel>(&model)) {
    const double p = static_cast<double>(ten->p);
    return (p - 1.0) * std::pow(m, p) / (2.0 * p * ten->delta) +
           f_den_snr(prior, snr_of_m(model, m), quad_order);
  }
  const auto& rle = std::get<RleModel>(model);
  return psi(rle.alpha, rle.delta, m) + i_den_snr(prior, snr_of_m(model, m), quad_order);
}

MinimizeResult minimize_potential(const ModelSpec& model, const Prior& prior, int quad_order,
                                  int grid, double tol, double upper) {
  if (grid < 64) throw std::invalid_argument("minimize_potential: grid must be >= 64");
  const double hi = upper > 0.0 ? upper : prior.moment(2);
  if (hi <= 0.0) return {0.0, rs_potential(model, prior, 0.0, quad_order)};

  // memoized potential, keyed on m bits
  std::map<double, double> cache;
  auto f = [&](double m) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    const double val = rs_potential(model, prior, m, quad_order);
    cache.emplace(m, val);
    return val;
  };

  int best = 0;
  double best_f = kInf;
  const double step = hi / static_cast<double>(grid);
  for (int i = 0; i <= grid; ++i) {
    const double val = f(step * i);
    if (val < best_f) {  // strict: first (smallest m) minimum wins ties
      best_f = val;
      best = i;
    }
  }

  const double lo_b = step * std::max(0, best - 1);
  const double hi_b = step * std::min(grid, best + 1);
  const double m_ref = golden_section(f, lo_b, hi_b, tol);

  // exact endpoints matter for trivial phases; ties go to the smallest m
  std::array<double, 3> cands = {0.0, m_ref, step * best};
  std::sort(cands.begin(), cands.end());
  double f_min = kInf;
  for (double c : cands) f_min = std::min(f_min, f(c));
  const double tie_slack = 1e-12 * (1.0 + std::abs(f_min));
  for (double c : cands)
    if (f(c) <= f_min + tie_slack) return {c, f(c)};
  return {cands[0], f(cands[0])};  // unreachable
}

FixedPointResult fixed_point(const ModelSpec& model, const Prior& prior, double m0,
                             int quad_order, int max_iter, double tol) {
  check_m(m0);
  validate(model);
  const bool is_rle = std::holds_alternative<RleModel>(model);
  double m = m0;
  for (int it = 1; it <= max_iter; ++it) {
    const double snr = snr_of_m(model, m);
    const double next = is_rle ? std::max(0.0, 2.0 * iden_snr_derivative(prior, snr, quad_order))
                               : std::max(0.0, -2.0 * fden_snr_derivative(prior, snr, quad_order));
    if (std::abs(next - m) < tol) return {next, it, true};
    m = next;
  }
  return {m, max_iter, false};
}

double mutual_information(const ModelSpec& model, const Prior& prior, double f_value) {
  const double m2 = prior.moment(2);
  if (const auto* mat = std::get_if<MatrixModel>(&model))
    return f_value + m2 * m2 / (4.0 * mat->delta);
  if (const auto* ten = std::get_if<TensorModel>(&model)) {
    const double p = static_cast<double>(ten->p);
    return f_value + std::pow(m2, p) / (2.0 * p * ten->delta);
  }
  return f_value;  // rle free energy is already the mutual information
}

namespace {

double m_star_at(const ModelSpec& model, const Prior& prior, double delta, int quad_order) {
  return minimize_potential(with_delta(model, delta), prior, quad_order).m_star;
}

}  // namespace

ScanResult scan_and_locate_transition(const ModelSpec& model, const Prior& prior,
                                      double delta_min, double delta_max, int steps,
                                      double refine_tol, int quad_order,
                                      TransitionThresholds thresholds, int threads) {
  if (!(delta_min > 0.0) || !(delta_max > delta_min))
    throw std::invalid_argument("scan: need 0 < delta_min < delta_max");
  if (steps < 8) throw std::invalid_argument("scan: steps must be >= 8");

  ScanResult out;
  out.curve.resize(steps);
  const double d_step = (delta_max - delta_min) / static_cast<double>(steps - 1);
  parallel_for(steps, threads, [&](std::size_t i) {
    const double delta = delta_min + d_step * static_cast<double>(i);
    const ModelSpec m = with_delta(model, delta);
    const auto res = minimize_potential(m, prior, quad_order);
    out.curve[i] = {delta, res.m_star, res.f_rs,
                    mutual_information(m, prior, res.f_rs)};
  });

  const double m2 = prior.moment(2);
  const double jump_thr = thresholds.jump_fraction * m2;
  const double small_thr = thresholds.smallness_fraction * m2;

  // largest adjacent jump and first crossing of the smallness threshold
  int jump_at = -1;
  double max_jump = 0.0;
  int cross_at = -1;
  for (int i = 0; i + 1 < steps; ++i) {
    const double j = std::abs(out.curve[i].m_star - out.curve[i + 1].m_star);
    if (j > max_jump) {
      max_jump = j;
      jump_at = i;
    }
    if (cross_at < 0 && out.curve[i].m_star > small_thr &&
        out.curve[i + 1].m_star <= small_thr)
      cross_at = i;
  }

  auto bisect = [&](double lo, double hi, double level) {
    while (hi - lo > refine_tol) {
      const double mid = 0.5 * (lo + hi);
      (m_star_at(model, prior, mid, quad_order) > level ? lo : hi) = mid;
    }
    return std::pair<double, double>{lo, hi};
  };

  if (jump_at >= 0 && max_jump > jump_thr) {
    const double m_lo = out.curve[jump_at].m_star;
    const double m_hi = out.curve[jump_at + 1].m_star;
    auto [lo, hi] = bisect(out.curve[jump_at].delta, out.curve[jump_at + 1].delta,
                           0.5 * (m_lo + m_hi));
    // a true first-order point keeps its jump as the bracket narrows
    const double final_jump =
        m_star_at(model, prior, lo, quad_order) - m_star_at(model, prior, hi, quad_order);
    if (final_jump > jump_thr) {
      out.transition = {TransitionKind::FirstOrder, 0.5 * (lo + hi), lo, hi};
      return out;
    }
  }

  if (cross_at >= 0) {
    auto [lo, hi] =
        bisect(out.curve[cross_at].delta, out.curve[cross_at + 1].delta, small_thr);
    out.transition = {TransitionKind::Continuous, 0.5 * (lo + hi), lo, hi};
  }
  return out;
}

double v_k_variance(std::span<const double> m_list) {
  if (m_list.empty()) throw std::invalid_argument("v_k_variance: empty list");
  std::vector<double> sq(m_list.size());
  for (std::size_t i = 0; i < m_list.size(); ++i) sq[i] = m_list[i] * m_list[i];
  const double mean = mean_of(m_list);
  return mean_of(sq) - mean * mean;
}

double v_kp_variance(std::span<const double> m_list, int p) {
  if (m_list.empty()) throw std::invalid_argument("v_kp_variance: empty list");
  if (p < 2) throw std::invalid_argument("v_kp_variance: p must be >= 2");
  std::vector<double> mp(m_list.size()), mp1(m_list.size());
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (!(m_list[i] >= 0.0)) throw std::invalid_argument("v_kp_variance: entries must be >= 0");
    mp[i] = std::pow(m_list[i], p);
    mp1[i] = std::pow(m_list[i], p - 1);
  }
  const double pd = static_cast<double>(p);
  return mean_of(mp) - std::pow(mean_of(mp1), pd / (pd - 1.0));
}

double f_tilde_rs(const ModelSpec& model, const Prior& prior, std::span<const double> m_list,
                  int quad_order) {
  if (m_list.empty()) throw std::invalid_argument("f_tilde_rs: empty list");
  for (double m : m_list) check_m(m);

  if (const auto* mat = std::get_if<MatrixModel>(&model)) {
    std::vector<double> sq(m_list.size());
    for (std::size_t i = 0; i < m_list.size(); ++i) sq[i] = m_list[i] * m_list[i];
    return mean_of(sq) / (4.0 * mat->delta) +
           f_den_snr(prior, mean_of(m_list) / mat->delta, quad_order);
  }
  if (const auto* rle = std::get_if<RleModel>(&model)) {
    std::vector<double> snrs(m_list.size()), psis(m_list.size());
    for (std::size_t i = 0; i < m_list.size(); ++i) {
      snrs[i] = rle->alpha / (rle->delta + m_list[i]);
      psis[i] = psi(rle->alpha, rle->delta, m_list[i]);
    }
    return i_den_snr(prior, mean_of(snrs), quad_order) + mean_of(psis);
  }
  throw std::invalid_argument("f_tilde_rs: defined for matrix and rle models");
}

}  // namespace rlab
