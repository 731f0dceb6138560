#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <span>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlab/fluctuation.hpp"
#include "rlab/gibbs.hpp"
#include "rlab/interpolation.hpp"
#include "rlab/rng.hpp"
#include "rlab/rs_potential.hpp"

namespace rlab::cli {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string model = "matrix";
  double delta = 1.0;
  int p = 3;
  double alpha = 1.0;
  std::string prior = "rademacher";
  std::vector<double> prior_atoms;
  std::vector<double> prior_weights;
  std::uint64_t seed = 1;
  int quad_order = 80;
  int threads = 1;
  bool strict = false;
  std::string out;
};

ModelSpec make_model(const CommonOpts& o) {
  ModelSpec model;
  if (o.model == "matrix") {
    model = MatrixModel{o.delta};
  } else if (o.model == "tensor") {
    model = TensorModel{o.p, o.delta};
  } else if (o.model == "rle") {
    model = RleModel{o.alpha, o.delta};
  } else {
    throw CLI::ValidationError("--model", "unknown model '" + o.model + "'");
  }
  validate(model);
  return model;
}

Prior make_prior(const CommonOpts& o) {
  if (!o.prior_atoms.empty() || !o.prior_weights.empty())
    return Prior::discrete(o.prior_atoms, o.prior_weights);
  if (o.prior == "rademacher") return Prior::rademacher();
  if (o.prior == "zero") return Prior::point_mass(0.0);
  throw CLI::ValidationError("--prior", "unknown prior '" + o.prior +
                                            "' (use rademacher, zero, or "
                                            "--prior-atoms/--prior-weights)");
}

json prior_json(const Prior& prior) {
  return json{{"atoms", prior.atoms()}, {"weights", prior.weights()}};
}

// statistical acceptance width; --strict tightens every band by one sigma
double sigma_factor(const CommonOpts& o, double base = 3.0) {
  return o.strict ? base - 1.0 : base;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  file << text;
}

class Report {
 public:
  Report(std::string subcommand, const CommonOpts& opts)
      : opts_(opts), start_(std::chrono::steady_clock::now()) {
    body_["subcommand"] = std::move(subcommand);
    body_["version"] = kVersion;
    body_["inputs"] = json::object();
    body_["outputs"] = json::object();
  }

  json& inputs() { return body_["inputs"]; }
  json& outputs() { return body_["outputs"]; }

  int finish(bool pass) {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    body_["pass"] = pass;
    body_["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    write_text(opts_.out, body_.dump(2) + "\n");
    return pass ? 0 : 1;
  }

 private:
  const CommonOpts& opts_;
  json body_;
  std::chrono::steady_clock::time_point start_;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double fit_log_slope(std::span<const double> log_x, std::span<const double> log_y) {
  const double count = static_cast<double>(log_x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < log_x.size(); ++i) {
    sx += log_x[i];
    sy += log_y[i];
    sxx += log_x[i] * log_x[i];
    sxy += log_x[i] * log_y[i];
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

// ---------------------------------------------------------------------------

int run_rs_curve(const CommonOpts& o, double delta_min, double delta_max, int steps) {
  const ModelSpec model = make_model(o);
  const Prior prior = make_prior(o);
  const auto scan = scan_and_locate_transition(model, prior, delta_min, delta_max, steps,
                                               1e-3, o.quad_order, {}, o.threads);
  std::ostringstream csv;
  csv << "delta,m_star,f_rs,mutual_info\n";
  for (const auto& pt : scan.curve)
    csv << format_double(pt.delta) << ',' << format_double(pt.m_star) << ','
        << format_double(pt.f_rs) << ',' << format_double(pt.mutual_info) << '\n';
  write_text(o.out, csv.str());
  return 0;
}

int run_transition(const CommonOpts& o, double delta_min, double delta_max, int steps,
                   double refine_tol) {
  const ModelSpec model = make_model(o);
  const Prior prior = make_prior(o);
  Report report("transition", o);
  report.inputs() = {{"model", model_name(model)}, {"prior", prior_json(prior)},
                     {"delta_min", delta_min},     {"delta_max", delta_max},
                     {"steps", steps},             {"refine_tol", refine_tol},
                     {"quad_order", o.quad_order}};
  const auto scan = scan_and_locate_transition(model, prior, delta_min, delta_max, steps,
                                               refine_tol, o.quad_order, {}, o.threads);
  const char* kind = scan.transition.kind == TransitionKind::FirstOrder  ? "first_order"
                     : scan.transition.kind == TransitionKind::Continuous ? "continuous"
                                                                          : "none";
  report.outputs() = {{"kind", kind}};
  if (scan.transition.kind != TransitionKind::None) {
    report.outputs()["delta_c"] = scan.transition.delta_c;
    report.outputs()["bracket"] =
        json::array({scan.transition.bracket_lo, scan.transition.bracket_hi});
  }
  return report.finish(true);
}

int run_oracle(const CommonOpts& o, int n, int samples, double eps) {
  const ModelSpec model = make_model(o);
  const Prior prior = make_prior(o);
  Report report("oracle", o);
  report.inputs() = {{"model", model_name(model)}, {"delta", model_delta(model)},
                     {"prior", prior_json(prior)}, {"n", n},
                     {"samples", samples},         {"eps", eps},
                     {"seed", o.seed}};
  const auto fe = free_energy_mc(model, prior, n, eps, samples, o.seed, o.threads);
  report.outputs() = {{"f_mean", fe.mean},           {"f_stderr", fe.stderr_},
                      {"n", n},                      {"samples", samples},
                      {"model", model_name(model)}, {"prior", prior_json(prior)}};
  return report.finish(true);
}

int run_verify_sum_rule(const CommonOpts& o, int n, int K, double eps, int samples,
                        int t_quad_order, int adapt_samples, const std::string& trial) {
  const MatrixModel model{o.delta};
  const Prior prior = make_prior(o);
  const PathConfig config{n, K, eps};

  TrialParameters m;
  if (trial == "adapt") {
    m = adapt_parameters(model, prior, config, adapt_samples, o.seed + 1, o.threads);
  } else if (trial == "minimizer") {
    m.values.assign(K, minimize_potential(ModelSpec{model}, prior, o.quad_order).m_star);
  } else {
    throw CLI::ValidationError("--trial", "must be adapt or minimizer");
  }

  const auto r = sum_rule_residual(model, prior, config, m, samples, o.seed, t_quad_order,
                                   o.threads, sigma_factor(o));

  Report report("verify sum-rule", o);
  report.inputs() = {{"n", n},           {"K", K},
                     {"eps", eps},       {"samples", samples},
                     {"t_quad_order", t_quad_order}, {"adapt_samples", adapt_samples},
                     {"delta", o.delta}, {"prior", prior_json(prior)},
                     {"seed", o.seed},   {"trial", trial},
                     {"m", m.values}};
  report.outputs() = {{"lhs", r.lhs},
                      {"rhs", r.rhs},
                      {"endpoint_gap", r.endpoint_gap},
                      {"f_rs_mean", r.f_rs_mean},
                      {"v_term", r.v_term},
                      {"remainder", r.remainder},
                      {"remainder_stderr", r.remainder_stderr},
                      {"residual", r.residual},
                      {"stderr", r.stderr_},
                      {"slack", r.slack}};
  bool pass;
  if (trial == "minimizer") {
    // upper-bound mechanism: nonnegative remainder and LHS below the rest
    const double sf = sigma_factor(o);
    pass = r.remainder >= -sf * r.remainder_stderr &&
           r.residual - r.remainder <= sf * r.stderr_ + r.slack;
  } else {
    pass = r.pass;
  }
  return report.finish(pass);
}

int run_verify_telescoping(const CommonOpts& o, int n, int K, int trials) {
  const MatrixModel model{o.delta};
  const Prior prior = make_prior(o);
  if (K < 2) throw CLI::ValidationError("--K", "telescoping needs K >= 2");
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(o.seed ^ 0x7e1e5c09ull, trial);
    const double eps = rng.uniform();
    TrialParameters m;
    m.values.resize(K);
    for (auto& mk : m.values) mk = rng.uniform() * prior.moment(2);
    const int k = 1 + static_cast<int>(rng.uniform() * (K - 1));
    std::vector<double> x(n);
    for (auto& xi : x)
      xi = prior.atoms()[static_cast<std::size_t>(rng.uniform() *
                                                  static_cast<double>(prior.size()))];
    const QuenchedSample sample = draw_quenched(ModelSpec{model}, prior, n, K, o.seed, trial);
    const PathConfig config{n, K, eps};
    const PathPoint end = make_path_point(model, config, m, k, 1.0);
    const PathPoint next = make_path_point(model, config, m, k + 1, 0.0);
    const double h1 = interp_hamiltonian(model, config, end, m, x, sample);
    const double h0 = interp_hamiltonian(model, config, next, m, x, sample);
    worst = std::max(worst, std::abs(h1 - h0));
  }
  Report report("verify telescoping", o);
  report.inputs() = {{"n", n},           {"K", K},
                     {"trials", trials}, {"delta", o.delta},
                     {"prior", prior_json(prior)}, {"seed", o.seed}};
  report.outputs() = {{"max_abs_difference", worst}, {"bound", 1e-12}};
  return report.finish(worst < 1e-12);
}

int run_verify_dfdt(const CommonOpts& o, int n, int K, int k, double t, double dt,
                    int samples, double eps, double m_value) {
  const MatrixModel model{o.delta};
  const Prior prior = make_prior(o);
  const PathConfig config{n, K, eps};
  if (m_value < 0.0)
    m_value = minimize_potential(ModelSpec{model}, prior, o.quad_order).m_star;
  TrialParameters m;
  m.values.assign(K, m_value);
  const auto r = dfdt_check(model, prior, config, k, t, m, samples, o.seed, dt, o.threads,
                            sigma_factor(o));
  Report report("verify dfdt", o);
  report.inputs() = {{"n", n},         {"K", K},
                     {"k", k},         {"t", t},
                     {"dt", dt},       {"samples", samples},
                     {"eps", eps},     {"m_value", m_value},
                     {"delta", o.delta}, {"prior", prior_json(prior)},
                     {"seed", o.seed}};
  report.outputs() = {{"fd_value", r.fd_value},
                      {"formula_value", r.formula_value},
                      {"residual", r.residual},
                      {"stderr", r.stderr_},
                      {"slack", r.slack}};
  return report.finish(r.pass);
}

int run_verify_t_gap(const CommonOpts& o, int n, const std::vector<int>& k_list, int k,
                     double t, int samples, double eps, double m_value) {
  const MatrixModel model{o.delta};
  const Prior prior = make_prior(o);
  Report report("verify t-gap", o);
  report.inputs() = {{"n", n},         {"K_list", k_list},
                     {"k", k},         {"t", t},
                     {"samples", samples}, {"eps", eps},
                     {"m_value", m_value}, {"delta", o.delta},
                     {"prior", prior_json(prior)}, {"seed", o.seed}};

  std::vector<double> log_k, log_gap;
  json rows = json::array();
  for (int K : k_list) {
    const PathConfig config{n, K, eps};
    TrialParameters m;
    m.values.assign(K, m_value);
    const auto g = t_dependence_gap(model, prior, config, k, t, m, samples, o.seed, o.threads);
    rows.push_back({{"K", K}, {"gap", g.gap}, {"stderr", g.stderr_}});
    if (g.gap != 0.0) {
      log_k.push_back(std::log(static_cast<double>(K)));
      log_gap.push_back(std::log(std::abs(g.gap)));
    }
  }
  double slope = 0.0;
  if (log_k.size() >= 2) slope = fit_log_slope(log_k, log_gap);
  report.outputs() = {{"gaps", rows}, {"log_log_slope", slope}, {"slope_bound", -0.5}};
  const bool pass = k_list.size() < 2 || slope <= -0.5;
  return report.finish(pass);
}

int run_verify_nishimori(const CommonOpts& o, int n, const std::string& method,
                         const std::string& g_name, int samples, int order, double eps) {
  const ModelSpec model = make_model(o);
  const Prior prior = make_prior(o);
  NishimoriObservable g;
  if (g_name == "one") g = NishimoriObservable::One;
  else if (g_name == "q") g = NishimoriObservable::Overlap;
  else if (g_name == "q2") g = NishimoriObservable::OverlapSq;
  else if (g_name == "x4") g = NishimoriObservable::SignalQuartic;
  else throw CLI::ValidationError("--g", "must be one, q, q2 or x4");

  NishimoriReport r;
  bool pass;
  if (method == "quadrature") {
    r = nishimori_quadrature(model, prior, n, eps, g, order);
    pass = std::abs(r.residual) < 1e-8;
  } else if (method == "mc") {
    r = nishimori_mc(model, prior, n, eps, g, samples, o.seed, o.threads);
    pass = std::abs(r.residual) < sigma_factor(o, 4.0) * r.stderr_ + 1e-12;
  } else {
    throw CLI::ValidationError("--method", "must be quadrature or mc");
  }

  Report report("verify nishimori", o);
  report.inputs() = {{"model", model_name(model)}, {"delta", model_delta(model)},
                     {"n", n},           {"method", method},
                     {"g", g_name},      {"samples", samples},
                     {"order", order},   {"eps", eps},
                     {"prior", prior_json(prior)}, {"seed", o.seed}};
  report.outputs() = {{"lhs", r.lhs},
                      {"rhs", r.rhs},
                      {"residual", r.residual},
                      {"stderr", r.stderr_}};
  return report.finish(pass);
}

Disorder make_disorder(const CommonOpts& o, const std::string& method, int samples,
                       int order) {
  Disorder d;
  if (method == "quadrature") {
    d.method = Disorder::Method::Quadrature;
  } else if (method == "mc") {
    d.method = Disorder::Method::MonteCarlo;
  } else {
    throw CLI::ValidationError("--method", "must be quadrature or mc");
  }
  d.samples = samples;
  d.order = order;
  d.seed = o.seed;
  d.threads = o.threads;
  return d;
}

int run_verify_fluctuation(const CommonOpts& o, int n, const std::string& method,
                           int samples, int order, double eps) {
  const MatrixModel model{o.delta};
  const Prior prior = make_prior(o);
  const PathConfig config{n, 1, eps};
  TrialParameters m;
  m.values = {0.0};
  const Disorder disorder = make_disorder(o, method, samples, order);
  const auto r = fluctuation_identity_check(model, prior, config, m, 1, 0.0, disorder);

  const bool quad = disorder.method == Disorder::Method::Quadrature;
  const double sf = sigma_factor(o, 4.0);
  const bool pass = quad ? std::abs(r.residual) < 1e-6 &&
                               std::abs(r.thermal_residual) < 1e-6 &&
                               std::abs(r.disorder_residual) < 1e-6
                         : std::abs(r.residual) < sf * r.stderr_ &&
                               std::abs(r.thermal_residual) < sf * r.thermal_stderr &&
                               std::abs(r.disorder_residual) < sf * r.disorder_stderr;

  Report report("verify fluctuation", o);
  report.inputs() = {{"n", n},         {"method", method},
                     {"samples", samples}, {"order", order},
                     {"eps", eps},     {"delta", o.delta},
                     {"prior", prior_json(prior)}, {"seed", o.seed}};
  report.outputs() = {{"lhs", r.lhs},
                      {"overlap_variance_term", r.overlap_variance_term},
                      {"thermal_overlap_term", r.thermal_overlap_term},
                      {"signal_term", r.signal_term},
                      {"residual", r.residual},
                      {"stderr", r.stderr_},
                      {"thermal_residual", r.thermal_residual},
                      {"thermal_stderr", r.thermal_stderr},
                      {"disorder_residual", r.disorder_residual},
                      {"disorder_stderr", r.disorder_stderr}};
  return report.finish(pass);
}

int run_verify_concavity(const CommonOpts& o, int n, const std::string& method, int samples,
                         int order, double eps, double eps_step, int eps_points) {
  const MatrixModel model{o.delta};
  const Prior prior = make_prior(o);
  const PathConfig config{n, 1, eps};
  TrialParameters m;
  m.values = {0.0};
  std::vector<double> grid(eps_points);
  for (int i = 0; i < eps_points; ++i)
    grid[i] = eps + (i - (eps_points - 1) / 2) * eps_step;
  const Disorder disorder = make_disorder(o, method, samples, order);
  const auto r = concavity_check(model, prior, config, m, 1, 0.0, grid, disorder);

  const bool quad = disorder.method == Disorder::Method::Quadrature;
  const bool formula_ok = quad
                              ? std::abs(r.residual) < 1e-4
                              : std::abs(r.residual) < sigma_factor(o) * r.stderr_ + 1e-4;
  const bool pass = r.nonpositive && formula_ok && r.formula_mid <= 0.0;

  Report report("verify concavity", o);
  report.inputs() = {{"n", n},           {"method", method},
                     {"samples", samples}, {"order", order},
                     {"eps", eps},       {"eps_step", eps_step},
                     {"eps_points", eps_points}, {"delta", o.delta},
                     {"prior", prior_json(prior)}, {"seed", o.seed}};
  report.outputs() = {{"eps_grid", r.eps_grid},
                      {"free_energies", r.free_energies},
                      {"second_differences", r.second_differences},
                      {"fd2_mid", r.fd2_mid},
                      {"formula_mid", r.formula_mid},
                      {"residual", r.residual},
                      {"stderr", r.stderr_},
                      {"nonpositive", r.nonpositive}};
  return report.finish(pass);
}

int run_verify_psi_identity(const CommonOpts& o, double alpha, double delta, double E,
                            int t_quad_order, int trials) {
  Report report("verify psi-identity", o);
  report.inputs() = {{"alpha", alpha},
                     {"delta", delta},
                     {"E", E},
                     {"t_quad_order", t_quad_order},
                     {"trials", trials},
                     {"seed", o.seed}};
  double worst = 0.0;
  json rows = json::array();
  if (trials <= 1) {
    worst = std::abs(psi_integral_identity(E, alpha, delta, t_quad_order));
    rows.push_back({{"alpha", alpha}, {"delta", delta}, {"E", E}, {"residual", worst}});
  } else {
    for (int i = 0; i < trials; ++i) {
      Rng rng = Rng::stream(o.seed ^ 0x9d2c5680ull, i);
      const double a = 0.3 + 2.7 * rng.uniform();
      const double d = 0.5 + 1.5 * rng.uniform();
      const double e = 2.0 * rng.uniform();
      const double resid = std::abs(psi_integral_identity(e, a, d, t_quad_order));
      rows.push_back({{"alpha", a}, {"delta", d}, {"E", e}, {"residual", resid}});
      worst = std::max(worst, resid);
    }
  }
  report.outputs() = {{"cases", rows}, {"max_residual", worst}, {"bound", 1e-10}};
  return report.finish(worst < 1e-10);
}

int run_diagnose_concentration(const CommonOpts& o, const std::vector<int>& n_list, int K,
                               double eps, int samples) {
  const MatrixModel model{o.delta};
  const Prior prior = make_prior(o);
  const auto profile =
      overlap_concentration_profile(model, prior, n_list, K, eps, samples, o.seed, o.threads);
  Report report("diagnose concentration", o);
  report.inputs() = {{"n_list", n_list}, {"K", K},
                     {"eps", eps},       {"samples", samples},
                     {"delta", o.delta}, {"prior", prior_json(prior)},
                     {"seed", o.seed}};
  json rows = json::array();
  bool decreasing = true;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    rows.push_back({{"n", profile[i].n},
                    {"value", profile[i].value},
                    {"stderr", profile[i].stderr_}});
    if (i > 0) {
      const double band = 2.0 * std::hypot(profile[i].stderr_, profile[i - 1].stderr_);
      if (profile[i].value > profile[i - 1].value + band) decreasing = false;
    }
  }
  report.outputs() = {{"profile", rows}, {"decreasing", decreasing}};
  return report.finish(decreasing);
}

int run_diagnose_fe_variance(const CommonOpts& o, const std::vector<int>& n_list,
                             int samples) {
  const ModelSpec model = make_model(o);
  const Prior prior = make_prior(o);
  const auto profile =
      free_energy_variance_profile(model, prior, n_list, samples, o.seed, o.threads);
  Report report("diagnose fe-variance", o);
  report.inputs() = {{"model", model_name(model)}, {"delta", model_delta(model)},
                     {"n_list", n_list},           {"samples", samples},
                     {"prior", prior_json(prior)}, {"seed", o.seed}};
  json rows = json::array();
  for (const auto& pt : profile.points)
    rows.push_back({{"n", pt.n}, {"variance", pt.value}, {"stderr", pt.stderr_}});
  report.outputs() = {{"profile", rows},
                      {"log_log_slope", profile.log_log_slope},
                      {"slope_bound", -0.5}};
  return report.finish(profile.log_log_slope <= -0.5);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"replica-lab: replica-symmetric predictions for rank-one matrix/tensor and "
               "random linear estimation, checked against exact small-system posteriors"};
  app.fallthrough();
  app.set_config("--config", "", "TOML-style config file; explicit flags win");

  CommonOpts o;
  app.add_option("--model", o.model, "matrix | tensor | rle")->capture_default_str();
  app.add_option("--delta", o.delta, "noise variance")->capture_default_str();
  app.add_option("--p", o.p, "tensor order")->capture_default_str();
  app.add_option("--alpha", o.alpha, "rle measurement rate")->capture_default_str();
  app.add_option("--prior", o.prior, "named prior (rademacher, zero)")->capture_default_str();
  app.add_option("--prior-atoms", o.prior_atoms, "custom prior atom locations");
  app.add_option("--prior-weights", o.prior_weights, "custom prior weights");
  app.add_option("--seed", o.seed, "base RNG seed")
      ->envname("REPLICA_LAB_SEED")
      ->capture_default_str();
  app.add_option("--quad-order", o.quad_order, "Gauss-Hermite order for scalar channels")
      ->capture_default_str();
  app.add_option("--threads", o.threads,
                 "worker pool size (outputs are thread-count independent)")
      ->capture_default_str();
  app.add_flag("--strict", o.strict, "tighten statistical acceptance by one sigma");
  app.add_option("--out", o.out, "output path (default stdout)");

  app.require_subcommand(1);
  int exit_code = 0;

  {
    auto* sub = app.add_subcommand("rs-curve", "sweep delta and emit the RS curve as CSV");
    auto dmin = std::make_shared<double>(0.5);
    auto dmax = std::make_shared<double>(1.5);
    auto steps = std::make_shared<int>(21);
    sub->add_option("--delta-min", *dmin)->capture_default_str();
    sub->add_option("--delta-max", *dmax)->capture_default_str();
    sub->add_option("--steps", *steps)->capture_default_str();
    sub->callback(
        [&, dmin, dmax, steps] { exit_code = run_rs_curve(o, *dmin, *dmax, *steps); });
  }
  {
    auto* sub = app.add_subcommand("transition", "locate the phase transition in delta");
    auto dmin = std::make_shared<double>(0.5);
    auto dmax = std::make_shared<double>(1.5);
    auto steps = std::make_shared<int>(21);
    auto tol = std::make_shared<double>(1e-3);
    sub->add_option("--delta-min", *dmin)->capture_default_str();
    sub->add_option("--delta-max", *dmax)->capture_default_str();
    sub->add_option("--steps", *steps)->capture_default_str();
    sub->add_option("--refine-tol", *tol)->capture_default_str();
    sub->callback([&, dmin, dmax, steps, tol] {
      exit_code = run_transition(o, *dmin, *dmax, *steps, *tol);
    });
  }
  {
    auto* sub = app.add_subcommand("oracle", "finite-n free energy by exact enumeration");
    auto n = std::make_shared<int>(8);
    auto samples = std::make_shared<int>(2000);
    auto eps = std::make_shared<double>(0.0);
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->callback([&, n, samples, eps] { exit_code = run_oracle(o, *n, *samples, *eps); });
  }

  auto* verify = app.add_subcommand("verify", "identity checks against the exact oracle");
  verify->require_subcommand(1);
  verify->fallthrough();
  {
    auto* sub = verify->add_subcommand("sum-rule", "free-energy decomposition along the path");
    auto n = std::make_shared<int>(4);
    auto K = std::make_shared<int>(8);
    auto eps = std::make_shared<double>(0.1);
    auto samples = std::make_shared<int>(1500);
    auto tq = std::make_shared<int>(16);
    auto adapt_samples = std::make_shared<int>(800);
    auto trial = std::make_shared<std::string>("adapt");
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--K", *K)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->add_option("--t-quad-order", *tq)->capture_default_str();
    sub->add_option("--adapt-samples", *adapt_samples)->capture_default_str();
    sub->add_option("--trial", *trial, "adapt | minimizer")->capture_default_str();
    sub->callback([&, n, K, eps, samples, tq, adapt_samples, trial] {
      exit_code = run_verify_sum_rule(o, *n, *K, *eps, *samples, *tq, *adapt_samples, *trial);
    });
  }
  {
    auto* sub = verify->add_subcommand("telescoping", "(k,1) == (k+1,0) energy identity");
    auto n = std::make_shared<int>(3);
    auto K = std::make_shared<int>(4);
    auto trials = std::make_shared<int>(100);
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--K", *K)->capture_default_str();
    sub->add_option("--trials", *trials)->capture_default_str();
    sub->callback(
        [&, n, K, trials] { exit_code = run_verify_telescoping(o, *n, *K, *trials); });
  }
  {
    auto* sub = verify->add_subcommand("dfdt", "t-derivative against the overlap formula");
    auto n = std::make_shared<int>(4);
    auto K = std::make_shared<int>(8);
    auto k = std::make_shared<int>(3);
    auto t = std::make_shared<double>(0.5);
    auto dt = std::make_shared<double>(0.1);
    auto samples = std::make_shared<int>(4000);
    auto eps = std::make_shared<double>(0.1);
    auto mv = std::make_shared<double>(0.5);
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--K", *K)->capture_default_str();
    sub->add_option("--k", *k)->capture_default_str();
    sub->add_option("--t", *t)->capture_default_str();
    sub->add_option("--dt", *dt)->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->add_option("--m-value", *mv,
                    "constant trial parameter; negative selects the potential minimizer")
        ->capture_default_str();
    sub->callback([&, n, K, k, t, dt, samples, eps, mv] {
      exit_code = run_verify_dfdt(o, *n, *K, *k, *t, *dt, *samples, *eps, *mv);
    });
  }
  {
    auto* sub = verify->add_subcommand("t-gap", "weak t-dependence scaling in K");
    auto n = std::make_shared<int>(3);
    auto klist = std::make_shared<std::vector<int>>(std::vector<int>{8, 16, 32, 64});
    auto k = std::make_shared<int>(1);
    auto t = std::make_shared<double>(1.0);
    auto samples = std::make_shared<int>(30000);
    auto eps = std::make_shared<double>(0.1);
    auto mv = std::make_shared<double>(0.5);
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--K-list", *klist)->capture_default_str();
    sub->add_option("--k", *k)->capture_default_str();
    sub->add_option("--t", *t)->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->add_option("--m-value", *mv)->capture_default_str();
    sub->callback([&, n, klist, k, t, samples, eps, mv] {
      exit_code = run_verify_t_gap(o, *n, *klist, *k, *t, *samples, *eps, *mv);
    });
  }
  {
    auto* sub = verify->add_subcommand("nishimori", "Bayes identity E<g(X,S)> = E<g(X,X')>");
    auto n = std::make_shared<int>(1);
    auto method = std::make_shared<std::string>("quadrature");
    auto g = std::make_shared<std::string>("q");
    auto samples = std::make_shared<int>(5000);
    auto order = std::make_shared<int>(80);
    auto eps = std::make_shared<double>(0.0);
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--method", *method, "quadrature | mc")->capture_default_str();
    sub->add_option("--g", *g, "one | q | q2 | x4")->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->add_option("--order", *order)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->callback([&, n, method, g, samples, order, eps] {
      exit_code = run_verify_nishimori(o, *n, *method, *g, *samples, *order, *eps);
    });
  }
  {
    auto* sub = verify->add_subcommand("fluctuation", "side-channel fluctuation identity");
    auto n = std::make_shared<int>(1);
    auto method = std::make_shared<std::string>("quadrature");
    auto samples = std::make_shared<int>(5000);
    auto order = std::make_shared<int>(60);
    auto eps = std::make_shared<double>(0.4);
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--method", *method, "quadrature | mc")->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->add_option("--order", *order)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->callback([&, n, method, samples, order, eps] {
      exit_code = run_verify_fluctuation(o, *n, *method, *samples, *order, *eps);
    });
  }
  {
    auto* sub = verify->add_subcommand("concavity", "f concave in the side-channel SNR");
    auto n = std::make_shared<int>(1);
    auto method = std::make_shared<std::string>("quadrature");
    auto samples = std::make_shared<int>(4000);
    auto order = std::make_shared<int>(60);
    auto eps = std::make_shared<double>(0.4);
    auto step = std::make_shared<double>(0.01);
    auto points = std::make_shared<int>(5);
    sub->add_option("--n", *n)->capture_default_str();
    sub->add_option("--method", *method)->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->add_option("--order", *order)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->add_option("--eps-step", *step)->capture_default_str();
    sub->add_option("--eps-points", *points)->capture_default_str();
    sub->callback([&, n, method, samples, order, eps, step, points] {
      exit_code = run_verify_concavity(o, *n, *method, *samples, *order, *eps, *step, *points);
    });
  }
  {
    auto* sub =
        verify->add_subcommand("psi-identity", "psi matches its interpolation-path integral");
    auto alpha = std::make_shared<double>(1.0);
    auto delta = std::make_shared<double>(1.0);
    auto E = std::make_shared<double>(1.0);
    auto tq = std::make_shared<int>(32);
    auto trials = std::make_shared<int>(1);
    sub->add_option("--alpha", *alpha)->capture_default_str();
    sub->add_option("--delta-rle", *delta)->capture_default_str();
    sub->add_option("--E", *E)->capture_default_str();
    sub->add_option("--t-quad-order", *tq)->capture_default_str();
    sub->add_option("--trials", *trials, "random (alpha, delta, E) triples when > 1")
        ->capture_default_str();
    sub->callback([&, alpha, delta, E, tq, trials] {
      exit_code = run_verify_psi_identity(o, *alpha, *delta, *E, *tq, *trials);
    });
  }

  auto* diagnose = app.add_subcommand("diagnose", "finite-size concentration trends");
  diagnose->require_subcommand(1);
  diagnose->fallthrough();
  {
    auto* sub = diagnose->add_subcommand("concentration", "overlap fluctuation vs n");
    auto nlist = std::make_shared<std::vector<int>>(std::vector<int>{2, 4, 6, 8});
    auto K = std::make_shared<int>(4);
    auto eps = std::make_shared<double>(0.1);
    auto samples = std::make_shared<int>(3000);
    sub->add_option("--n-list", *nlist)->capture_default_str();
    sub->add_option("--K", *K)->capture_default_str();
    sub->add_option("--eps", *eps)->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->callback([&, nlist, K, eps, samples] {
      exit_code = run_diagnose_concentration(o, *nlist, *K, *eps, *samples);
    });
  }
  {
    auto* sub = diagnose->add_subcommand("fe-variance", "free-energy variance vs n");
    auto nlist = std::make_shared<std::vector<int>>(std::vector<int>{2, 4, 8});
    auto samples = std::make_shared<int>(3000);
    sub->add_option("--n-list", *nlist)->capture_default_str();
    sub->add_option("--samples", *samples)->capture_default_str();
    sub->callback([&, nlist, samples] {
      exit_code = run_diagnose_fe_variance(o, *nlist, *samples);
    });
  }

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("replica-lab");
  for (const auto& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const enumeration_cap_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace rlab::cli
