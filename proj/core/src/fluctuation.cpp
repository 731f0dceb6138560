#include "rlab/fluctuation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "rlab/rs_potential.hpp"

namespace rlab {
namespace {

// Disorder-averaged moments of the merged (k,t) model at one or more
// eps_tilde values, sharing disorder across the eps_tilde list (common random
// numbers for finite differences). Also returns per-sample moment rows in MC
// mode so callers can build influence-function error bars.
struct MergedStats {
  std::vector<Moments> mean;                    // one per eps_tilde
  std::vector<std::vector<Moments>> per_sample; // empty in quadrature mode
};

MergedStats merged_disorder_stats(const MatrixModel& model, const Prior& prior,
                                  const PathConfig& config, const TrialParameters& m, int k,
                                  double t, std::span<const double> eps_tildes,
                                  const Disorder& disorder) {
  const PathPoint point = make_path_point(model, config, m, k, t);
  MergedStats stats;
  stats.mean.assign(eps_tildes.size(), Moments{});

  if (disorder.method == Disorder::Method::Quadrature) {
    if (config.steps != 1 || k != 1 || t != 0.0)
      throw std::invalid_argument(
          "quadrature disorder averaging needs a single-step path at (k=1, t=0)");
    // merged model == plain matrix model with side-channel SNR eps_tilde
    for (std::size_t e = 0; e < eps_tildes.size(); ++e)
      stats.mean[e] =
          quadrature_moments(ModelSpec{model}, prior, config.n, eps_tildes[e], disorder.order);
    return stats;
  }

  stats.per_sample.assign(eps_tildes.size(), std::vector<Moments>(disorder.samples));
  parallel_for(disorder.samples, disorder.threads, [&](std::size_t i) {
    const QuenchedSample sample =
        draw_quenched(ModelSpec{model}, prior, config.n, config.steps, disorder.seed, i);
    const PathEvaluator ev(model, prior, sample);
    for (std::size_t e = 0; e < eps_tildes.size(); ++e)
      stats.per_sample[e][i] = ev.merged_moments(point, eps_tildes[e]);
  });
  for (std::size_t e = 0; e < eps_tildes.size(); ++e)
    stats.mean[e] = reduce_moments(stats.per_sample[e]).mean;
  return stats;
}

double field_stderr(const MergedStats& stats, std::size_t e, MomentField f) {
  if (stats.per_sample.empty()) return 0.0;
  return reduce_moments(stats.per_sample[e]).se[f];
}

// stderr of sum_f coeff_f * mean_f via the per-sample linear combination.
double combo_stderr(const MergedStats& stats, std::size_t e,
                    std::span<const std::pair<MomentField, double>> combo) {
  if (stats.per_sample.empty()) return 0.0;
  const auto& rows = stats.per_sample[e];
  std::vector<double> y(rows.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [f, c] : combo) y[i] += c * rows[i][f];
  return mean_stderr(y).stderr_;
}

double fit_slope(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double observable_L(std::span<const double> x, const QuenchedSample& sample,
                    const PathPoint& point) {
  if (!(point.eps_tilde > 0.0))
    throw std::invalid_argument("observable_L: eps_tilde must be > 0");
  const double noise_coef = 0.5 / std::sqrt(point.eps_tilde);
  double acc = 0.0;
  for (int i = 0; i < sample.n; ++i)
    acc += 0.5 * x[i] * x[i] - x[i] * sample.signal[i] - x[i] * sample.side_noise[i] * noise_coef;
  return acc / static_cast<double>(sample.n);
}

DerivativeReport first_derivative_check(const MatrixModel& model, const Prior& prior,
                                        const PathConfig& config, const TrialParameters& m,
                                        int k, double t, const Disorder& disorder,
                                        double d_eps) {
  const PathPoint point = make_path_point(model, config, m, k, t);
  if (!(point.eps_tilde - d_eps > 0.0))
    throw std::invalid_argument("first derivative: eps_tilde - d_eps must stay positive");

  const double et = point.eps_tilde;
  const double grid[3] = {et - d_eps, et, et + d_eps};
  const MergedStats stats =
      merged_disorder_stats(model, prior, config, m, k, t, grid, disorder);

  DerivativeReport report;
  report.fd_value = (stats.mean[2][kF] - stats.mean[0][kF]) / (2.0 * d_eps);
  report.formula_value = -0.5 * stats.mean[1][kMeanSq];
  report.lbar_value = stats.mean[1][kLBar];
  report.residual = report.fd_value - report.formula_value;
  report.lbar_residual = report.lbar_value - report.formula_value;

  if (!stats.per_sample.empty()) {
    const double inv = 1.0 / (2.0 * d_eps);
    std::vector<double> y(disorder.samples);
    for (int i = 0; i < disorder.samples; ++i)
      y[i] = (stats.per_sample[2][i][kF] - stats.per_sample[0][i][kF]) * inv +
             0.5 * stats.per_sample[1][i][kMeanSq];
    report.stderr_ = mean_stderr(y).stderr_;
  }
  return report;
}

ConcavityReport concavity_check(const MatrixModel& model, const Prior& prior,
                                const PathConfig& config, const TrialParameters& m, int k,
                                double t, std::span<const double> eps_grid,
                                const Disorder& disorder) {
  if (eps_grid.size() < 3)
    throw std::invalid_argument("concavity: need at least 3 eps_tilde grid points");
  const double h = eps_grid[1] - eps_grid[0];
  for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i)
    if (std::abs((eps_grid[i + 1] - eps_grid[i]) - h) > 1e-12 * (1.0 + h))
      throw std::invalid_argument("concavity: eps_tilde grid must be uniform");

  const MergedStats stats =
      merged_disorder_stats(model, prior, config, m, k, t, eps_grid, disorder);

  ConcavityReport report;
  report.eps_grid.assign(eps_grid.begin(), eps_grid.end());
  for (const auto& mm : stats.mean) report.free_energies.push_back(mm[kF]);

  const double nd = static_cast<double>(config.n);
  const std::size_t interior = eps_grid.size() - 2;
  for (std::size_t i = 1; i + 1 < eps_grid.size(); ++i) {
    const double sd =
        (stats.mean[i - 1][kF] - 2.0 * stats.mean[i][kF] + stats.mean[i + 1][kF]) / (h * h);
    report.second_differences.push_back(sd);
    if (!stats.per_sample.empty()) {
      std::vector<double> y(disorder.samples);
      for (int s = 0; s < disorder.samples; ++s)
        y[s] = (stats.per_sample[i - 1][s][kF] - 2.0 * stats.per_sample[i][s][kF] +
                stats.per_sample[i + 1][s][kF]) /
               (h * h);
      report.sd_stderr.push_back(mean_stderr(y).stderr_);
    } else {
      report.sd_stderr.push_back(0.0);
    }
  }

  const std::size_t mid = 1 + interior / 2;
  report.fd2_mid = report.second_differences[mid - 1];
  report.formula_mid = -0.5 * nd * stats.mean[mid][kConnCorrSq];
  report.residual = report.fd2_mid - report.formula_mid;
  if (!stats.per_sample.empty()) {
    std::vector<double> y(disorder.samples);
    for (int s = 0; s < disorder.samples; ++s)
      y[s] = (stats.per_sample[mid - 1][s][kF] - 2.0 * stats.per_sample[mid][s][kF] +
              stats.per_sample[mid + 1][s][kF]) /
                 (h * h) +
             0.5 * nd * stats.per_sample[mid][s][kConnCorrSq];
    report.stderr_ = mean_stderr(y).stderr_;
  }

  report.nonpositive = true;
  for (std::size_t i = 0; i < report.second_differences.size(); ++i)
    if (report.second_differences[i] > 3.0 * report.sd_stderr[i] + 1e-9)
      report.nonpositive = false;
  return report;
}

FluctuationReport fluctuation_identity_check(const MatrixModel& model, const Prior& prior,
                                             const PathConfig& config,
                                             const TrialParameters& m, int k, double t,
                                             const Disorder& disorder) {
  const PathPoint point = make_path_point(model, config, m, k, t);
  if (!(point.eps_tilde > 0.0))
    throw std::invalid_argument("fluctuation identity: eps_tilde must be > 0");
  const double et = point.eps_tilde;
  const double grid[1] = {et};
  const MergedStats stats =
      merged_disorder_stats(model, prior, config, m, k, t, grid, disorder);
  const Moments& mm = stats.mean[0];
  const double nd = static_cast<double>(config.n);
  const double signal_coef = 1.0 / (4.0 * nd * et);

  FluctuationReport report;
  report.lhs = mm[kL2] - mm[kLBar] * mm[kLBar];
  report.overlap_variance_term = 0.25 * (mm[kQ2] - mm[kQ1] * mm[kQ1]);
  report.thermal_overlap_term = 0.5 * (mm[kQ2] - mm[kQ1Sq]);
  report.signal_term = signal_coef * prior.moment(2);
  report.residual = report.lhs - report.overlap_variance_term - report.thermal_overlap_term -
                    report.signal_term;

  // linearized per-sample influence for the plug-in estimator's stderr
  const std::pair<MomentField, double> combo[] = {
      {kL2, 1.0},
      {kLBar, -2.0 * mm[kLBar]},
      {kQ2, -0.75},
      {kQ1, 0.5 * mm[kQ1]},
      {kQ1Sq, 0.5},
  };
  report.stderr_ = combo_stderr(stats, 0, combo);

  // thermal split: E<L^2> - E[<L>^2] in X-moment form
  report.thermal_residual =
      mm[kL2] - mm[kLBarSq] -
      (0.5 * (mm[kCorrSq] - 2.0 * mm[kCorrMixed] + mm[kMeanQuart]) +
       signal_coef * mm[kThermalVar]);
  const std::pair<MomentField, double> thermal_combo[] = {
      {kL2, 1.0},          {kLBarSq, -1.0},     {kCorrSq, -0.5},
      {kCorrMixed, 1.0},   {kMeanQuart, -0.5},  {kThermalVar, -signal_coef},
  };
  report.thermal_stderr = combo_stderr(stats, 0, thermal_combo);

  // disorder split: E[<L>^2] - E[<L>]^2 in X-moment form
  report.disorder_residual =
      mm[kLBarSq] - mm[kLBar] * mm[kLBar] -
      (0.25 * (mm[kCorrSq] - mm[kMeanSq] * mm[kMeanSq]) +
       0.5 * (mm[kCorrMixed] - mm[kMeanQuart]) + signal_coef * mm[kMeanSq]);
  const std::pair<MomentField, double> disorder_combo[] = {
      {kLBarSq, 1.0},
      {kLBar, -2.0 * mm[kLBar]},
      {kCorrSq, -0.25},
      {kMeanSq, 0.5 * mm[kMeanSq] - signal_coef},
      {kCorrMixed, -0.5},
      {kMeanQuart, 0.5},
  };
  report.disorder_stderr = combo_stderr(stats, 0, disorder_combo);
  return report;
}

std::vector<ProfilePoint> overlap_concentration_profile(const MatrixModel& model,
                                                        const Prior& prior,
                                                        std::span<const int> n_list, int steps,
                                                        double eps, int samples,
                                                        std::uint64_t seed, int threads) {
  const double m_star = minimize_potential(ModelSpec{model}, prior).m_star;
  TrialParameters m;
  m.values.assign(steps, m_star);

  std::vector<ProfilePoint> out;
  for (int n : n_list) {
    const PathConfig config{n, steps, eps};
    const std::array<std::pair<int, double>, 3> grid = {
        std::pair<int, double>{1, 0.0},
        {std::max(1, steps / 2), 0.5},
        {steps, 1.0},
    };
    std::vector<PathPoint> points;
    for (auto [k, t] : grid) points.push_back(make_path_point(model, config, m, k, t));

    std::vector<std::array<double, 6>> rows(samples);  // (q1, q2) per grid point
    parallel_for(samples, threads, [&](std::size_t i) {
      const QuenchedSample sample = draw_quenched(ModelSpec{model}, prior, n, steps, seed, i);
      const PathEvaluator ev(model, prior, sample);
      for (std::size_t g = 0; g < points.size(); ++g) {
        const Moments mm = ev.moments(points[g], m);
        rows[i][2 * g] = mm[kQ1];
        rows[i][2 * g + 1] = mm[kQ2];
      }
    });

    double value = 0.0;
    std::array<double, 3> q1_mean{};
    for (std::size_t g = 0; g < 3; ++g) {
      std::vector<double> q1(samples), q2(samples);
      for (int i = 0; i < samples; ++i) {
        q1[i] = rows[i][2 * g];
        q2[i] = rows[i][2 * g + 1];
      }
      q1_mean[g] = mean_stderr(q1).mean;
      value += (mean_stderr(q2).mean - q1_mean[g] * q1_mean[g]) / 3.0;
    }
    std::vector<double> y(samples, 0.0);
    for (int i = 0; i < samples; ++i)
      for (std::size_t g = 0; g < 3; ++g)
        y[i] += (rows[i][2 * g + 1] - 2.0 * q1_mean[g] * rows[i][2 * g]) / 3.0;
    out.push_back({n, value, mean_stderr(y).stderr_});
  }
  return out;
}

VarianceProfile free_energy_variance_profile(const ModelSpec& model, const Prior& prior,
                                             std::span<const int> n_list, int samples,
                                             std::uint64_t seed, int threads) {
  VarianceProfile profile;
  std::vector<double> log_n, log_var;
  for (int n : n_list) {
    const auto rows = mc_moment_samples(model, prior, n, 0.0, samples, seed, threads);
    std::vector<double> f(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) f[i] = rows[i][kF];
    const auto ms = mean_stderr(f);
    // stderr of the sample variance from the fourth central moment
    std::vector<double> dev4(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double d = f[i] - ms.mean;
      dev4[i] = d * d * d * d;
    }
    const double m4 = mean_stderr(dev4).mean;
    const double var_se =
        std::sqrt(std::max(0.0, m4 - ms.variance * ms.variance) / static_cast<double>(samples));
    profile.points.push_back({n, ms.variance, var_se});
    if (ms.variance > 0.0) {
      log_n.push_back(std::log(static_cast<double>(n)));
      log_var.push_back(std::log(ms.variance));
    }
  }
  profile.log_log_slope =
      log_n.size() >= 2 ? fit_slope(log_n, log_var) : 0.0;
  return profile;
}

}  // namespace rlab
