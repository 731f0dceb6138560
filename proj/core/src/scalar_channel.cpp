#include "rlab/scalar_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "rlab/quadrature.hpp"

namespace rlab {
namespace {

double log_sum_exp(std::span<const double> vals) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : vals) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : vals) acc += std::exp(v - m);
  return m + std::log(acc);
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("scalar channel: sigma must be > 0 or inf");
}

void check_quad_order(int order) {
  if (order < 2) throw std::invalid_argument("scalar channel: quad_order must be >= 2");
}

}  // namespace

double f_den_snr(const Prior& prior, double snr, int quad_order) {
  check_quad_order(quad_order);
  if (snr < 0.0) throw std::invalid_argument("scalar channel: snr must be >= 0");
  if (snr == 0.0) return 0.0;

  const auto& rule = gauss_hermite(quad_order);
  const auto& a = prior.atoms();
  const auto& logw = prior.log_weights();
  const double sqrt_snr = std::sqrt(snr);

  std::vector<double> terms(a.size());
  double total = 0.0;
  for (std::size_t is = 0; is < a.size(); ++is) {
    const double s = a[is];
    const double ps = prior.weights()[is];
    for (std::size_t iz = 0; iz < rule.nodes.size(); ++iz) {
      const double z = rule.nodes[iz];
      for (std::size_t b = 0; b < a.size(); ++b)
        terms[b] = logw[b] + snr * (a[b] * s - 0.5 * a[b] * a[b]) + sqrt_snr * a[b] * z;
      total += ps * rule.weights[iz] * log_sum_exp(terms);
    }
  }
  if (!std::isfinite(total)) throw std::runtime_error("f_den: quadrature overflow");
  return -total;
}

double i_den_snr(const Prior& prior, double snr, int quad_order) {
  check_quad_order(quad_order);
  if (snr < 0.0) throw std::invalid_argument("scalar channel: snr must be >= 0");
  if (snr == 0.0) return 0.0;

  const auto& rule = gauss_hermite(quad_order);
  const auto& a = prior.atoms();
  const auto& logw = prior.log_weights();
  const double sqrt_snr = std::sqrt(snr);

  std::vector<double> terms(a.size());
  double total = 0.0;
  for (std::size_t is = 0; is < a.size(); ++is) {
    const double s = a[is];
    const double ps = prior.weights()[is];
    for (std::size_t iz = 0; iz < rule.nodes.size(); ++iz) {
      const double z = rule.nodes[iz];
      for (std::size_t b = 0; b < a.size(); ++b) {
        const double d = a[b] - s;
        terms[b] = logw[b] - 0.5 * snr * d * d + sqrt_snr * d * z;
      }
      total += ps * rule.weights[iz] * log_sum_exp(terms);
    }
  }
  if (!std::isfinite(total)) throw std::runtime_error("i_den: quadrature overflow");
  return -total;
}

double f_den(const ScalarChannel& channel, int quad_order) {
  if (std::isinf(channel.sigma)) return 0.0;
  check_sigma(channel.sigma);
  return f_den_snr(channel.prior, 1.0 / (channel.sigma * channel.sigma), quad_order);
}

double i_den(const ScalarChannel& channel, int quad_order) {
  if (std::isinf(channel.sigma)) return 0.0;
  check_sigma(channel.sigma);
  return i_den_snr(channel.prior, 1.0 / (channel.sigma * channel.sigma), quad_order);
}

double posterior_mean(const ScalarChannel& channel, double y) {
  check_sigma(channel.sigma);
  if (std::isinf(channel.sigma) || !std::isfinite(y))
    throw std::invalid_argument("posterior_mean: needs finite sigma and y");

  const double snr = 1.0 / (channel.sigma * channel.sigma);
  const auto& a = channel.prior.atoms();
  const auto& logw = channel.prior.log_weights();

  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> e(a.size());
  for (std::size_t b = 0; b < a.size(); ++b) {
    e[b] = logw[b] + snr * (a[b] * y - 0.5 * a[b] * a[b]);
    m = std::max(m, e[b]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < a.size(); ++b) {
    const double w = std::exp(e[b] - m);
    num += a[b] * w;
    den += w;
  }
  return num / den;
}

namespace {

double snr_derivative(double (*value)(const Prior&, double, int), const Prior& prior,
                      double snr, int quad_order, double step) {
  if (snr < 0.0) throw std::invalid_argument("snr derivative: snr must be >= 0");
  if (step <= 0.0) step = 1e-5 * std::max(1.0, snr);
  if (snr - step < 0.0) {
    // one-sided difference at the boundary
    return (value(prior, snr + step, quad_order) - value(prior, snr, quad_order)) / step;
  }
  return (value(prior, snr + step, quad_order) - value(prior, snr - step, quad_order)) /
         (2.0 * step);
}

}  // namespace

double fden_snr_derivative(const Prior& prior, double snr, int quad_order, double step) {
  return snr_derivative(&f_den_snr, prior, snr, quad_order, step);
}

double iden_snr_derivative(const Prior& prior, double snr, int quad_order, double step) {
  return snr_derivative(&i_den_snr, prior, snr, quad_order, step);
}

}  // namespace rlab
