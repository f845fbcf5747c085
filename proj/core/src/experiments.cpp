#include "bqlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bqlab/corpus.hpp"
#include "bqlab/norms.hpp"
#include "bqlab/trajectory.hpp"

namespace bqlab {
namespace {

using json = nlohmann::json;

// --- config <-> json --------------------------------------------------------

template <class T>
void take(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

// JSON has no infinity; "inf" strings stand in for it
double read_exp(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    throw std::invalid_argument("config: expected a number or \"inf\", got \"" + s + "\"");
  }
  return j.get<double>();
}

json write_exp(double x) { return std::isinf(x) ? json("inf") : json(x); }

void take_exp(const json& j, const char* key, double& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = read_exp(*it);
}

void take_exps(const json& j, const char* key, std::vector<double>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    out.clear();
    for (const auto& x : *it) out.push_back(read_exp(x));
  }
}

json exps(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(write_exp(x));
  return a;
}

ProfileSpec read_profile(const json& j) {
  ProfileSpec p;
  take(j, "kind", p.kind);
  take(j, "amplitude", p.amplitude);
  take(j, "width", p.width);
  take(j, "center", p.center);
  take(j, "frequency", p.frequency);
  return p;
}

json write_profile(const ProfileSpec& p) {
  return {{"kind", p.kind}, {"amplitude", p.amplitude}, {"width", p.width}, {"center", p.center},
          {"frequency", p.frequency}};
}

ProductParams read_product(const json& j, ProductParams p) {
  take(j, "s", p.s);
  take_exp(j, "p", p.p);
  take_exp(j, "sigma", p.sigma);
  take_exp(j, "p1", p.p1);
  take_exp(j, "sigma1", p.sigma1);
  take_exp(j, "p2", p.p2);
  take_exp(j, "sigma2", p.sigma2);
  take(j, "power", p.power);
  take_exp(j, "Q", p.Q);
  take_exp(j, "mu", p.mu);
  take_exp(j, "nu", p.nu);
  take_exps(j, "p_i", p.p_i);
  take_exps(j, "gamma_i", p.gamma_i);
  take_exp(j, "p_target", p.p_target);
  take_exp(j, "gamma_target", p.gamma_target);
  take(j, "time_weight", p.time_weight);
  take_exp(j, "q", p.q);
  take(j, "t0", p.t0);
  take(j, "t1", p.t1);
  take(j, "dt", p.dt);
  return p;
}

json write_product(const ProductParams& p) {
  return {{"s", p.s},
          {"p", write_exp(p.p)},
          {"sigma", write_exp(p.sigma)},
          {"p1", write_exp(p.p1)},
          {"sigma1", write_exp(p.sigma1)},
          {"p2", write_exp(p.p2)},
          {"sigma2", write_exp(p.sigma2)},
          {"power", p.power},
          {"Q", write_exp(p.Q)},
          {"mu", write_exp(p.mu)},
          {"nu", write_exp(p.nu)},
          {"p_i", exps(p.p_i)},
          {"gamma_i", exps(p.gamma_i)},
          {"p_target", write_exp(p.p_target)},
          {"gamma_target", write_exp(p.gamma_target)},
          {"time_weight", p.time_weight},
          {"q", write_exp(p.q)},
          {"t0", p.t0},
          {"t1", p.t1},
          {"dt", p.dt}};
}

void apply_override(json& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override '" + spec + "' is not key=value");
  const std::string path = spec.substr(0, eq), text = spec.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw std::invalid_argument("override '" + spec + "' has an empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  take(j, "schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion)
    throw std::invalid_argument("config: unsupported schema_version " + std::to_string(c.schema_version));
  take(j, "experiment", c.experiment);
  take(j, "kind", c.kind);
  if (auto it = j.find("theorem"); it != j.end()) c.theorem = parse_theorem_kind(it->get<std::string>());
  take(j, "threads", c.threads);

  ProblemParams& pp = c.solver.pp;
  if (auto it = j.find("problem"); it != j.end()) {
    take(*it, "n", pp.n);
    take(*it, "lambda", pp.lambda);
    take(*it, "p", pp.p);
    take_exp(*it, "q", pp.q);
    take(*it, "s", pp.s);
  }
  if (auto it = j.find("grid"); it != j.end()) {
    take(*it, "L", c.grid.L);
    take(*it, "N", c.grid.N);
  }
  if (auto it = j.find("solver"); it != j.end()) {
    auto& s = c.solver;
    take(*it, "T", s.T);
    take(*it, "M", s.M);
    take(*it, "K_max", s.K_max);
    take(*it, "tol_fixed_point", s.tol_fixed_point);
    take(*it, "dt_ref", s.dt_ref);
    take(*it, "sample_every", s.sample_every);
    take(*it, "norm_every", s.norm_every);
    take(*it, "nonlinear", s.nonlinear);
    take(*it, "amplitude_sweep", c.amplitude_sweep);
  }
  if (auto it = j.find("data"); it != j.end()) {
    if (auto d = it->find("u0"); d != it->end()) c.data.u0 = read_profile(*d);
    if (auto d = it->find("v0"); d != it->end()) c.data.v0 = read_profile(*d);
    if (auto d = it->find("perturbation"); d != it->end()) c.data.perturbation = read_profile(*d);
  }
  if (auto it = j.find("corpus"); it != j.end()) {
    take(*it, "seed", c.corpus.seed);
    take(*it, "size", c.corpus.size);
    take(*it, "cutoff", c.corpus.cutoff);
    take(*it, "kinds", c.corpus.kinds);
  }
  if (auto it = j.find("window"); it != j.end()) {
    take(*it, "t0", c.window.t0);
    take(*it, "t1", c.window.t1);
    take(*it, "samples", c.window.samples);
    take(*it, "dt", c.window.dt);
  }
  if (auto it = j.find("decay"); it != j.end()) {
    take(*it, "p", c.decay.p);
    take(*it, "operators", c.decay.operators);
    take(*it, "variants", c.decay.variants);
    take(*it, "overclaim", c.decay.overclaim);
  }
  if (auto it = j.find("estimates"); it != j.end()) {
    auto& e = c.estimates;
    take(*it, "kinds", e.kinds);
    if (auto k = it->find("bilinear_s_nonneg"); k != it->end()) e.bilinear_s_nonneg = read_product(*k, e.bilinear_s_nonneg);
    if (auto k = it->find("bilinear_Ib1"); k != it->end()) e.bilinear_Ib1 = read_product(*k, e.bilinear_Ib1);
    if (auto k = it->find("power_Ib2"); k != it->end()) e.power_Ib2 = read_product(*k, e.power_Ib2);
    if (auto k = it->find("multilinear_box"); k != it->end()) e.multilinear_box = read_product(*k, e.multilinear_box);
  }
  if (auto it = j.find("strichartz"); it != j.end()) {
    auto& s = c.strichartz;
    take(*it, "operators", s.operators);
    take_exp(*it, "q", s.q);
    take_exp(*it, "gamma", s.gamma);
    take_exp(*it, "sigma", s.sigma);
    take(*it, "substeps", s.substeps);
    take(*it, "energy_target", s.energy_target);
  }
  if (auto it = j.find("tolerances"); it != j.end()) {
    auto& t = c.tol;
    take(*it, "slope_rel", t.slope_rel);
    take(*it, "stability", t.stability);
    take(*it, "trend", t.trend);
    take(*it, "cross_validation", t.cross_validation);
    take(*it, "residual_order", t.residual_order);
    take(*it, "residual_order_tol", t.residual_order_tol);
    take(*it, "contraction_slope_rel", t.contraction_slope_rel);
    take(*it, "scatter_rel", t.scatter_rel);
    take(*it, "scaling_rel", t.scaling_rel);
    take(*it, "identity", t.identity);
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  const auto& pp = c.solver.pp;
  const auto& s = c.solver;
  const auto& e = c.estimates;
  const auto& t = c.tol;
  return {
      {"schema_version", c.schema_version},
      {"experiment", c.experiment},
      {"kind", c.kind},
      {"theorem", to_string(c.theorem)},
      {"threads", c.threads},
      {"problem", {{"n", pp.n}, {"lambda", pp.lambda}, {"p", pp.p}, {"q", write_exp(pp.q)}, {"s", pp.s}}},
      {"grid", {{"L", c.grid.L}, {"N", c.grid.N}}},
      {"solver",
       {{"T", s.T},
        {"M", s.M},
        {"K_max", s.K_max},
        {"tol_fixed_point", s.tol_fixed_point},
        {"dt_ref", s.dt_ref},
        {"sample_every", s.sample_every},
        {"norm_every", s.norm_every},
        {"nonlinear", s.nonlinear},
        {"amplitude_sweep", c.amplitude_sweep}}},
      {"data",
       {{"u0", write_profile(c.data.u0)},
        {"v0", write_profile(c.data.v0)},
        {"perturbation", write_profile(c.data.perturbation)}}},
      {"corpus",
       {{"seed", c.corpus.seed}, {"size", c.corpus.size}, {"cutoff", c.corpus.cutoff}, {"kinds", c.corpus.kinds}}},
      {"window", {{"t0", c.window.t0}, {"t1", c.window.t1}, {"samples", c.window.samples}, {"dt", c.window.dt}}},
      {"decay",
       {{"p", c.decay.p},
        {"operators", c.decay.operators},
        {"variants", c.decay.variants},
        {"overclaim", c.decay.overclaim}}},
      {"estimates",
       {{"kinds", e.kinds},
        {"bilinear_s_nonneg", write_product(e.bilinear_s_nonneg)},
        {"bilinear_Ib1", write_product(e.bilinear_Ib1)},
        {"power_Ib2", write_product(e.power_Ib2)},
        {"multilinear_box", write_product(e.multilinear_box)}}},
      {"strichartz",
       {{"operators", c.strichartz.operators},
        {"q", write_exp(c.strichartz.q)},
        {"gamma", write_exp(c.strichartz.gamma)},
        {"sigma", write_exp(c.strichartz.sigma)},
        {"substeps", c.strichartz.substeps},
        {"energy_target", c.strichartz.energy_target}}},
      {"tolerances",
       {{"slope_rel", t.slope_rel},
        {"stability", t.stability},
        {"trend", t.trend},
        {"cross_validation", t.cross_validation},
        {"residual_order", t.residual_order},
        {"residual_order_tol", t.residual_order_tol},
        {"contraction_slope_rel", t.contraction_slope_rel},
        {"scatter_rel", t.scatter_rel},
        {"scaling_rel", t.scaling_rel},
        {"identity", t.identity}}},
  };
}

// --- suite helpers ----------------------------------------------------------

struct Setup {
  Grid grid;
  WindowBank bank;
  StatePair z0;
  SolverConfig solver;
};

Setup setup(const ExperimentConfig& c) {
  const Grid g = make_grid(c.solver.pp.n, c.grid.L, c.grid.N);
  WindowBank bank = build_windows(g);
  StatePair z0(make_profile(g, c.data.u0), make_profile(g, c.data.v0));
  SolverConfig sc = c.solver;
  return {g, std::move(bank), std::move(z0), sc};
}

double data_speed(const StatePair& z) { return std::max(max_group_speed(z.u), max_group_speed(z.v)); }

void add(RunResult& r, std::string check, bool pass, double value, std::string detail = {}) {
  r.verdicts.push_back({std::move(check), pass, value, std::move(detail)});
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

bool within_rel(double measured, double target, double rel) {
  return std::isfinite(measured) && std::abs(measured - target) <= rel * std::abs(target);
}

SeriesTable norm_table(const std::string& name, const WeightedSeries& ws) {
  SeriesTable t{name, {"t", "norm_u", "norm_v_dinvj", "weighted_sum"}, {}};
  for (std::size_t i = 0; i < ws.t.size(); ++i) t.rows.push_back({ws.t[i], ws.norm_u[i], ws.norm_v_dinvj[i], ws.weighted_sum[i]});
  return t;
}

SeriesTable report_table(const FixedPointReport& rep) {
  SeriesTable t{"contraction", {"iteration", "iterate_norm", "contraction_ratio", "relative_change"}, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < rep.iterate_norms.size(); ++k) {
    // ratio k compares iterations k+1 and k; listed against the later iterate
    const double ratio = k >= 2 && k - 2 < rep.contraction_ratios.size() ? rep.contraction_ratios[k - 2] : nan;
    const double rel = k >= 1 && k - 1 < rep.relative_changes.size() ? rep.relative_changes[k - 1] : nan;
    t.rows.push_back({double(k), rep.iterate_norms[k], ratio, rel});
  }
  return t;
}

Corpus corpus_for(const ExperimentConfig& c, const Grid& g, double horizon, std::size_t size) {
  CorpusOptions opt;
  opt.cutoff = c.corpus.cutoff > 0.0 ? c.corpus.cutoff : safe_cutoff(g, horizon);
  opt.kinds.clear();
  for (const auto& k : c.corpus.kinds) {
    if (k == "gaussian") opt.kinds.push_back(MemberKind::Gaussian);
    else if (k == "packet") opt.kinds.push_back(MemberKind::WavePacket);
    else if (k == "mode") opt.kinds.push_back(MemberKind::SingleMode);
    else if (k == "noise") opt.kinds.push_back(MemberKind::Noise);
    else throw std::invalid_argument("config: unknown corpus kind '" + k + "'");
  }
  return make_corpus(g, c.corpus.seed, size, opt);
}

HarnessOptions harness_options(const ExperimentConfig& c) {
  HarnessOptions h;
  h.threads = c.threads;
  h.stability_tol = c.tol.stability;
  h.trend_tol = c.tol.trend;
  return h;
}

void report_verdict(RunResult& r, const RatioReport& rep, const std::string& id) {
  add(r, id, rep.verdict == "pass", rep.sup_ratio,
      rep.verdict + ", sup " + num(rep.sup_ratio) + ", drift " + num(rep.stability) + ", trend " + num(rep.trend_slope));
  r.summary[id + ".sup"] = rep.sup_ratio;
  r.summary[id + ".drift"] = rep.stability;
}

// --- suites -----------------------------------------------------------------

RunResult run_validate(const ExperimentConfig& c) {
  RunResult r;
  r.hypotheses = validate_hypotheses(c.theorem, c.solver.pp);
  add(r, "hypotheses", r.hypotheses.empty(), double(r.hypotheses.size()), to_string(c.theorem));
  r.summary["alpha"] = c.solver.pp.alpha();
  r.summary["beta"] = c.solver.pp.beta();
  r.summary["alpha_lambda"] = c.solver.pp.alpha() * c.solver.pp.lambda;
  r.summary["lambda0"] = lambda0(c.solver.pp.n);
  return r;
}

RunResult run_simulate(const ExperimentConfig& c) {
  RunResult r = run_validate(c);
  if (!r.hypotheses.empty()) return r;
  auto s = setup(c);
  const ProblemParams& pp = s.solver.pp;
  const double speed = data_speed(s.z0);
  const double horizon = speed > 0.0 ? wraparound_horizon(s.grid, speed) : kInf;
  r.summary["horizon"] = horizon;

  SolverConfig sc = s.solver;
  if (c.theorem == TheoremKind::Local1) {
    // pilot run measures the contraction factor; C3 T (2 eps)^{lambda-1} = 1/2 sets the window
    const auto pilot = picard_solve(s.z0, sc, s.bank);
    const double kappa = pilot.report.contraction_ratios.empty() ? 0.0 : pilot.report.contraction_ratios.front();
    const double eps = pilot.report.epsilon;
    const double c3 = eps > 0.0 ? kappa / (sc.T * std::pow(2.0, pp.lambda) * std::pow(eps, pp.lambda - 1)) : 0.0;
    double T = c3 > 0.0 ? 0.5 / (c3 * std::pow(2.0, pp.lambda) * std::pow(eps, pp.lambda - 1)) : sc.T;
    T = std::min(T, horizon);
    const double dt = sc.dt();
    std::size_t M = std::max<std::size_t>(2 * sc.sample_every, std::size_t(std::ceil(T / dt)));
    M = (M + sc.sample_every - 1) / sc.sample_every * sc.sample_every;
    if (sc.norm_every > 0) M = (M + sc.norm_every - 1) / sc.norm_every * sc.norm_every;
    sc.T = T;
    sc.M = M;
    r.summary["pilot_kappa"] = kappa;
    r.summary["C3"] = c3;
    r.summary["T_local"] = T;
    add(r, "local_window", T > 0.0 && std::isfinite(T), T, "T from the contraction rule, capped by the horizon");
  } else {
    add(r, "wraparound", sc.T <= horizon, horizon, "T = " + num(sc.T) + " vs horizon " + num(horizon));
  }

  const auto res = picard_solve(s.z0, sc, s.bank);
  const auto& rep = res.report;
  r.summary["epsilon"] = rep.epsilon;
  r.summary["final_norm"] = rep.final_norm;
  r.summary["iterations"] = double(rep.iterations);
  add(r, "picard_converged", rep.converged, double(rep.iterations), num(double(rep.iterations)) + " iterations");
  add(r, "within_2eps_ball", rep.within_ball, rep.final_norm, "final " + num(rep.final_norm) + ", eps " + num(rep.epsilon));

  const auto ref = reference_integrate(s.z0, sc);
  const double xv = sup_relative_difference(res.trajectory, ref);
  r.summary["cross_validation"] = xv;
  add(r, "cross_validation", xv <= c.tol.cross_validation, xv, "Picard vs RK4, sup relative L2xL2");

  const auto ws = weighted_sup_norm(res.trajectory, sc.mod(), TimeWeight::poly_alpha(pp.alpha()), s.bank);
  r.tables.push_back(norm_table("series", ws));
  r.tables.push_back(report_table(rep));

  // residual order on a short leading window, step halved once
  {
    SolverConfig rc = sc;
    rc.T = std::min(sc.T, 5.0);
    rc.M = std::max<std::size_t>(20, std::size_t(std::llround(rc.T / sc.dt())));
    rc.sample_every = 1;
    rc.norm_every = 0;
    SeriesTable t{"residual", {"dt", "max_residual"}, {}};
    std::vector<double> peaks;
    for (int k = 0; k < 2; ++k) {
      const auto sol = picard_solve(s.z0, rc, s.bank);
      const auto res_k = residual_fourth_order(sol.trajectory, pp.lambda);
      const double peak = res_k.empty() ? 0.0 : *std::max_element(res_k.begin(), res_k.end());
      peaks.push_back(peak);
      t.rows.push_back({rc.dt(), peak});
      rc.M *= 2;
    }
    const double order = peaks[1] > 0.0 ? std::log2(peaks[0] / peaks[1]) : 0.0;
    r.summary["residual_order"] = order;
    const bool zero = peaks[0] == 0.0 && peaks[1] == 0.0;
    add(r, "residual_order", zero || std::abs(order - c.tol.residual_order) <= c.tol.residual_order_tol, order,
        zero ? "zero residual" : "peaks " + num(peaks[0]) + " -> " + num(peaks[1]));
    r.tables.push_back(std::move(t));
  }

  if (!c.amplitude_sweep.empty()) {
    SeriesTable t{"contraction_sweep", {"amplitude", "first_ratio"}, {}};
    std::vector<double> amps, ratios;
    SolverConfig wc = sc;
    wc.K_max = 2;
    for (double a : c.amplitude_sweep) {
      ProfileSpec u = c.data.u0, v = c.data.v0;
      const double scale = u.amplitude != 0.0 ? a / u.amplitude : 1.0;
      u.amplitude *= scale;
      v.amplitude *= scale;
      const StatePair z(make_profile(s.grid, u), make_profile(s.grid, v));
      const auto run = picard_solve(z, wc, s.bank);
      const double ratio = run.report.contraction_ratios.empty() ? 0.0 : run.report.contraction_ratios.front();
      amps.push_back(a);
      ratios.push_back(ratio);
      t.rows.push_back({a, ratio});
    }
    const auto fit = fit_loglog(amps, ratios);
    r.summary["contraction_slope"] = fit.slope;
    add(r, "contraction_scaling", within_rel(fit.slope, pp.lambda - 1.0, c.tol.contraction_slope_rel), fit.slope,
        "target " + num(pp.lambda - 1.0));
    r.tables.push_back(std::move(t));
  }
  return r;
}

RunResult run_decay(const ExperimentConfig& c) {
  RunResult r;
  auto s = setup(c);
  ProblemParams pp = s.solver.pp;
  pp.p = c.decay.p;
  const double alpha = pp.alpha();
  const auto times = geometric_times(c.window.t0, c.window.t1, c.window.samples);
  const double speed = max_group_speed(s.z0.u);
  if (speed > 0.0 && c.window.t1 > wraparound_horizon(s.grid, speed))
    throw std::invalid_argument("decay: window end " + num(c.window.t1) + " beyond wrap-around horizon " +
                                num(wraparound_horizon(s.grid, speed)));

  DecayRequest lp{DecayOperator::B1, DecayVariant::Lp, pp, times, 0.0};
  DecayRequest ms{DecayOperator::B1, DecayVariant::MsqSmooth, pp, times, 0.0};
  const auto nl = decay_series(s.z0.u, lp, s.bank);
  const auto nm = decay_series(s.z0.u, ms, s.bank);
  SeriesTable series{"decay_series", {"t", "norm_Lp", "norm_Msq"}, {}};
  for (std::size_t i = 0; i < times.size(); ++i) series.rows.push_back({times[i], nl[i], nm[i]});
  r.tables.push_back(std::move(series));
  const auto fl = fit_loglog(times, nl), fm = fit_loglog(times, nm);
  r.summary["alpha"] = alpha;
  r.summary["slope_Lp"] = fl.slope;
  r.summary["slope_Lp_ci_low"] = fl.ci_low;
  r.summary["slope_Lp_ci_high"] = fl.ci_high;
  r.summary["slope_Msq"] = fm.slope;
  r.summary["slope_Msq_ci_low"] = fm.ci_low;
  r.summary["slope_Msq_ci_high"] = fm.ci_high;
  add(r, "slope_Lp", within_rel(fl.slope, -alpha, c.tol.slope_rel), fl.slope, "target " + num(-alpha));
  add(r, "slope_Msq", within_rel(fm.slope, -alpha, c.tol.slope_rel), fm.slope, "target " + num(-alpha));

  const auto hopt = harness_options(c);
  const Corpus small = corpus_for(c, s.grid, c.window.t1, c.corpus.size);
  const Corpus big = corpus_for(c, s.grid, c.window.t1, 2 * c.corpus.size);
  SeriesTable trends{"ratio_trends", {"t"}, {}};
  std::vector<std::vector<double>> cols;
  for (const auto& on : c.decay.operators)
    for (const auto& vn : c.decay.variants) {
      DecayRequest req{parse_decay_operator(on), parse_decay_variant(vn), pp, times, 0.0};
      const auto rep = with_stability(decay_ratio(req, big, s.bank, hopt), decay_ratio(req, small, s.bank, hopt), hopt);
      report_verdict(r, rep, "decay." + on + "." + vn);
      trends.columns.push_back(on + "_" + vn);
      cols.push_back(rep.per_time_sup);
    }
  DecayRequest over{DecayOperator::B1, DecayVariant::Lp, pp, times, c.decay.overclaim};
  const auto ctrl = decay_ratio(over, big, s.bank, hopt);
  add(r, "overclaim_flagged", !ctrl.bounded, ctrl.trend_slope,
      "weight exponent alpha+" + num(c.decay.overclaim) + ", trend " + num(ctrl.trend_slope));
  trends.columns.push_back("overclaim");
  cols.push_back(ctrl.per_time_sup);
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> row{times[i]};
    for (const auto& col : cols) row.push_back(col[i]);
    trends.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(trends));
  return r;
}

RunResult run_estimates(const ExperimentConfig& c) {
  RunResult r;
  const auto& e = c.estimates;
  auto params = [&](ProductKind k) -> const ProductParams& {
    switch (k) {
      case ProductKind::BilinearSNonneg: return e.bilinear_s_nonneg;
      case ProductKind::BilinearIb1: return e.bilinear_Ib1;
      case ProductKind::PowerIb2: return e.power_Ib2;
      default: return e.multilinear_box;
    }
  };
  // every relation is checked before anything runs
  for (const auto& name : e.kinds) {
    const auto k = parse_product_kind(name);
    for (auto v : check_product_constraints(k, params(k), c.solver.pp.n)) {
      v.clause = name + ":" + v.clause;
      r.hypotheses.push_back(std::move(v));
    }
  }
  if (!r.hypotheses.empty()) {
    add(r, "constraints", false, double(r.hypotheses.size()), "exponent relations violated, nothing run");
    return r;
  }
  auto s = setup(c);
  const auto hopt = harness_options(c);
  const Corpus small = corpus_for(c, s.grid, c.window.t1, c.corpus.size);
  const Corpus big = corpus_for(c, s.grid, c.window.t1, 2 * c.corpus.size);
  SeriesTable table{"estimates", {"index", "sup_ratio", "sup_ratio_doubled", "drift"}, {}};
  double idx = 0;
  for (const auto& name : e.kinds) {
    const auto k = parse_product_kind(name);
    const auto a = product_ratio(k, params(k), small, s.bank, hopt);
    const auto rep = with_stability(product_ratio(k, params(k), big, s.bank, hopt), a, hopt);
    report_verdict(r, rep, "product." + name);
    table.rows.push_back({idx++, a.sup_ratio, rep.sup_ratio, rep.stability});
  }
  r.tables.push_back(std::move(table));

  // Hölder scaling on constants: exactly one box, ratio vol^{1/p - 1/p1 - 1/p2}
  {
    Corpus consts;
    for (double cval : {0.7, -1.3}) {
      auto f = forward_transform(Field::sample(s.grid, [cval](double, double) { return cval; }));
      consts.members.push_back({std::move(f), MemberKind::Gaussian, "const", 0.0});
    }
    const auto rep = product_ratio(ProductKind::BilinearSNonneg, e.bilinear_s_nonneg, consts, s.bank, hopt);
    double dev = 0.0;
    for (double v : rep.values) dev = std::max(dev, std::abs(v - 1.0));
    add(r, "holder_constant_sanity", dev <= 1e-13, dev, "max |ratio - 1| over constant pairs");
    r.summary["holder_constant_deviation"] = dev;
  }
  // l2(t) = J^{-1} D B3(t) on the lattice
  {
    double dev = 0.0;
    for (const auto& m : small.members) {
      double peak = 0.0;
      for (double x : samples_of(m.field)) peak = std::max(peak, std::abs(x));
      for (double t : geometric_times(c.window.t0, c.window.t1, 5)) {
        const auto a = samples_of(apply_component(Component::L2, t, m.field));
        const auto b = samples_of(apply_riesz_j(apply_component(Component::B3, t, m.field)));
        for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]) / peak);
      }
    }
    add(r, "l2_identity", dev <= c.tol.identity, dev, "max |l2 g - J^{-1}D B3 g| / max |g|");
    r.summary["l2_identity"] = dev;
  }
  return r;
}

RunResult run_strichartz(const ExperimentConfig& c) {
  RunResult r;
  auto s = setup(c);
  const auto hopt = harness_options(c);
  const double t1_big = 2.0 * c.window.t1;
  const Corpus corpus = corpus_for(c, s.grid, t1_big, c.corpus.size);
  SeriesTable table{"strichartz", {"index", "sup_ratio", "sup_ratio_doubled_window", "drift"}, {}};
  std::map<std::string, RatioReport> reports;
  double idx = 0;
  for (const auto& name : c.strichartz.operators) {
    StrichartzParams sp;
    sp.op = parse_strichartz_operator(name);
    sp.q = c.strichartz.q;
    sp.gamma = c.strichartz.gamma;
    sp.sigma = c.strichartz.sigma;
    sp.t0 = c.window.t0;
    sp.t1 = c.window.t1;
    sp.dt = c.window.dt;
    sp.substeps = c.strichartz.substeps;
    sp.energy_target = c.strichartz.energy_target;
    const auto a = strichartz_ratio(sp, corpus, s.bank, hopt);
    sp.t1 = t1_big;
    auto rep = with_stability(strichartz_ratio(sp, corpus, s.bank, hopt), a, hopt);
    report_verdict(r, rep, "strichartz." + name);
    table.rows.push_back({idx++, a.sup_ratio, rep.sup_ratio, rep.stability});
    reports[name] = std::move(rep);
  }
  if (reports.count("l2") && reports.count("B3_DinvJ")) {
    const auto& a = reports["l2"].values;
    const auto& b = reports["B3_DinvJ"].values;
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      dev = std::max(dev, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
    add(r, "l2_vs_B3_DinvJ", dev <= c.tol.identity, dev, "relative ratio difference");
    r.summary["l2_vs_B3_DinvJ"] = dev;
  }
  r.tables.push_back(std::move(table));
  return r;
}

RunResult run_scatter(const ExperimentConfig& c) {
  RunResult r = run_validate(c);
  if (!r.hypotheses.empty()) return r;
  const ProblemParams& pp = c.solver.pp;
  const double al = pp.alpha() * pp.lambda;
  if (!(al > 1.0)) {
    r.hypotheses.push_back({"alpha*lambda>1", "alpha*lambda = " + num(al)});
    add(r, "scattering_admissible", false, al);
    return r;
  }
  auto s = setup(c);
  const SolverConfig& sc = s.solver;
  const double speed = data_speed(s.z0);
  const double horizon = speed > 0.0 ? wraparound_horizon(s.grid, speed) : kInf;
  add(r, "wraparound", sc.T <= horizon, horizon);
  const auto sol = picard_solve(s.z0, sc, s.bank);
  add(r, "picard_converged", sol.report.converged, double(sol.report.iterations));
  const auto& traj = sol.trajectory;
  const auto scat = scattering_state(traj, 1, sc, s.bank);
  const auto lin = linear_trajectory(scat.data, sc);

  std::vector<StatePair> diff;
  for (std::size_t i = 0; i < traj.size(); ++i) diff.push_back(traj.states()[i] - lin.states()[i]);
  const std::vector<double> times(traj.times().begin(), traj.times().end());
  const auto d = weighted_sup_norm(Trajectory(times, std::move(diff)), sc.mod(), TimeWeight::poly_alpha(0.0), s.bank);
  SeriesTable st{"scatter_series", {"t", "diff_norm"}, {}};
  std::vector<double> ft, fd;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    st.rows.push_back({d.t[i], d.weighted_sum[i]});
    if (d.t[i] >= sc.T / 4.0 - 1e-12 && d.t[i] <= sc.T / 2.0 + 1e-12) {
      ft.push_back(d.t[i]);
      fd.push_back(d.weighted_sum[i]);
    }
  }
  r.tables.push_back(std::move(st));
  const bool zero = std::all_of(d.weighted_sum.begin(), d.weighted_sum.end(), [](double x) { return x == 0.0; });
  if (zero) {
    add(r, "scatter_rate", !sc.nonlinear, 0.0, "difference identically zero");
  } else {
    const auto fit = fit_loglog(ft, fd);
    r.summary["scatter_slope"] = fit.slope;
    r.summary["scatter_slope_ci_low"] = fit.ci_low;
    r.summary["scatter_slope_ci_high"] = fit.ci_high;
    add(r, "scatter_rate", within_rel(fit.slope, 1.0 - al, c.tol.scatter_rel), fit.slope,
        "target " + num(1.0 - al) + " over [T/4, T/2]");
  }

  SeriesTable tt{"tail", {"T_max", "tail_bound", "forcing_sup"}, {}};
  bool monotone = true;
  double prev = kInf;
  for (double frac : {0.25, 0.5, 1.0}) {
    const double Tm = frac * sc.T;
    std::vector<double> tm;
    std::vector<StatePair> zm;
    for (std::size_t i = 0; i < traj.size(); ++i)
      if (traj.times()[i] <= Tm + 1e-9) {
        tm.push_back(traj.times()[i]);
        zm.push_back(traj.states()[i]);
      }
    const auto sr = scattering_state(Trajectory(tm, zm), 1, sc, s.bank);
    tt.rows.push_back({Tm, sr.tail_bound, sr.forcing_sup});
    if (sc.nonlinear) monotone = monotone && sr.tail_bound > 0.0 && sr.tail_bound < prev;
    prev = sr.tail_bound;
  }
  add(r, "tail_bound_decreasing", monotone, prev);
  r.summary["tail_bound"] = prev;
  r.tables.push_back(std::move(tt));
  return r;
}

RunResult run_stability(const ExperimentConfig& c) {
  RunResult r = run_validate(c);
  if (!r.hypotheses.empty()) return r;
  auto s = setup(c);
  const SolverConfig& sc = s.solver;
  const Field w = make_profile(s.grid, c.data.perturbation);
  const StatePair z1(s.z0.u + w, s.z0.v);
  const StatePair z2(s.z0.u + 2.0 * w, s.z0.v);
  const double speed = std::max({data_speed(s.z0), data_speed(z1), data_speed(z2)});
  const double horizon = speed > 0.0 ? wraparound_horizon(s.grid, speed) : kInf;
  add(r, "wraparound", sc.T <= horizon, horizon);

  const auto same = stability_experiment(s.z0, s.z0, sc, s.bank);
  add(r, "identical_data_zero", same.identical, 0.0);
  const auto one = stability_experiment(s.z0, z1, sc, s.bank);
  const auto two = stability_experiment(s.z0, z2, sc, s.bank);
  r.summary["kappa"] = one.kappa;
  r.summary["bound_factor"] = one.bound_factor;
  r.summary["measured_constant"] = one.measured_constant;
  r.summary["epsilon"] = one.epsilon;
  add(r, "co_decay", one.co_decay && std::isfinite(one.measured_constant), one.measured_constant,
      "kappa " + num(one.kappa) + ", bound " + num(one.bound_factor));
  const double h1 = *std::max_element(one.solution_diff.begin(), one.solution_diff.end());
  const double h2 = *std::max_element(two.solution_diff.begin(), two.solution_diff.end());
  const double j1 = *std::max_element(one.linear_diff.begin(), one.linear_diff.end());
  const double j2 = *std::max_element(two.linear_diff.begin(), two.linear_diff.end());
  r.summary["scaling_solution"] = h2 / h1;
  r.summary["scaling_linear"] = j2 / j1;
  add(r, "perturbation_scaling", within_rel(h2 / h1, 2.0, c.tol.scaling_rel) && within_rel(j2 / j1, 2.0, c.tol.scaling_rel),
      h2 / h1, "solution x" + num(h2 / h1) + ", linear x" + num(j2 / j1));

  SeriesTable t{"stability_series", {"t", "solution_diff", "linear_diff", "solution_diff_x2", "linear_diff_x2"}, {}};
  for (std::size_t i = 0; i < one.t.size(); ++i)
    t.rows.push_back({one.t[i], one.solution_diff[i], one.linear_diff[i], two.solution_diff[i], two.linear_diff[i]});
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace

bool RunResult::all_pass() const {
  return hypotheses.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides) {
  json j = json::parse(json_text);
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string canonical_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_json(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "validate") return run_validate(cfg);
  if (cfg.kind == "simulate") return run_simulate(cfg);
  if (cfg.kind == "decay") return run_decay(cfg);
  if (cfg.kind == "estimates") return run_estimates(cfg);
  if (cfg.kind == "strichartz") return run_strichartz(cfg);
  if (cfg.kind == "scatter") return run_scatter(cfg);
  if (cfg.kind == "stability") return run_stability(cfg);
  throw std::invalid_argument("unknown experiment kind '" + cfg.kind + "'");
}

}  // namespace bqlab
