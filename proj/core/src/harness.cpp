#include "bqlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "bqlab/norms.hpp"
#include "bqlab/trajectory.hpp"

namespace bqlab {
namespace {

constexpr double kRelationTol = 1e-12;

// Results land in index order, so reductions stay deterministic for any thread count.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, std::size_t threads, Fn fn) {
  std::vector<T> out(count);
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

double conj_exp(double p) {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

double pair_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return kInf;
  return num / den;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void throw_violations(const char* where, const std::vector<Violation>& v) {
  std::string msg = std::string(where) + ": constraint violated:";
  for (const auto& x : v) msg += " [" + x.clause + "] " + x.detail + ";";
  throw std::invalid_argument(msg);
}

void settle(RatioReport& r, const HarnessOptions& opt) {
  r.sup_ratio = 0.0;
  for (double v : r.values) r.sup_ratio = std::max(r.sup_ratio, v);
  for (double v : r.per_time_sup) r.sup_ratio = std::max(r.sup_ratio, v);
  const bool trend_ok = std::isnan(r.trend_slope) || r.trend_slope <= opt.trend_tol;
  r.bounded = std::isfinite(r.sup_ratio) && trend_ok;
  r.stable = std::isnan(r.stability) || r.stability <= opt.stability_tol;
  r.verdict = !r.bounded ? "unbounded" : (!r.stable ? "unstable" : "pass");
}

Field apply_decay_op(DecayOperator op, double t, const Field& g) {
  switch (op) {
    case DecayOperator::B1: return apply_component(Component::B1, t, g);
    case DecayOperator::B2: return apply_component(Component::B2, t, g);
    case DecayOperator::B3AsDinvJ: return apply_riesz_j(apply_component(Component::B3, t, g));
    case DecayOperator::L2: return apply_component(Component::L2, t, g);
  }
  throw std::logic_error("unknown decay operator");
}

void check_window(const Corpus& corpus, const Grid& g, double t_last, const char* where) {
  const double horizon = wraparound_horizon(g, corpus.max_group_speed());
  if (t_last > horizon)
    throw std::invalid_argument(std::string(where) + ": time " + fmt(t_last) + " beyond wrap-around horizon " +
                                fmt(horizon));
}

// Largest occupied |xi| over the corpus.
double corpus_bandwidth(const Corpus& c) {
  double kmax = 0.0;
  for (const auto& m : c.members) {
    const Grid& g = m.field.grid();
    const auto spec = spectrum_of(m.field);
    const auto xi = g.abs_frequencies();
    double peak = 0.0;
    for (const auto& z : spec) peak = std::max(peak, std::abs(z));
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (peak > 0.0 && std::abs(spec[i]) >= kOccupancyThreshold * peak) kmax = std::max(kmax, xi[i]);
  }
  return kmax;
}

// Products of `factors` members must stay on the lattice, otherwise truncation changes the numerator.
void check_bandwidth(const Corpus& c, const Grid& g, std::size_t factors) {
  const double band = double(factors) * corpus_bandwidth(c);
  if (band > g.max_frequency())
    throw std::invalid_argument("product_ratio: product bandwidth " + fmt(band) + " exceeds grid max frequency " +
                                fmt(g.max_frequency()) + "; lower the corpus cutoff");
}

std::vector<double> window_times(double t0, double t1, double dt) {
  const auto steps = std::size_t(std::llround((t1 - t0) / dt));
  if (steps < 1) throw std::invalid_argument("window shorter than one step");
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = t0 + (t1 - t0) * double(i) / double(steps);
  return t;
}

}  // namespace

RatioReport with_stability(RatioReport big, const RatioReport& small, const HarnessOptions& opt) {
  if (small.sup_ratio == 0.0)
    big.stability = big.sup_ratio == 0.0 ? 0.0 : kInf;
  else
    big.stability = std::abs(big.sup_ratio - small.sup_ratio) / small.sup_ratio;
  settle(big, opt);
  return big;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  const std::size_t m = lx.size();
  if (m < 3) throw std::invalid_argument("fit_loglog: need at least 3 positive points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) mx += lx[i], my += ly[i];
  mx /= double(m);
  my /= double(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  SlopeFit f;
  f.points = m;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ly[i] - f.intercept - f.slope * lx[i];
    rss += e * e;
  }
  f.stderr_slope = std::sqrt(rss / double(m - 2) / sxx);
  boost::math::students_t dist(double(m - 2));
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  f.ci_low = f.slope - tq * f.stderr_slope;
  f.ci_high = f.slope + tq * f.stderr_slope;
  return f;
}

std::vector<double> geometric_times(double a, double b, std::size_t n) {
  if (!(a > 0.0) || !(b > a) || n < 2) throw std::invalid_argument("geometric_times: need 0 < a < b, n >= 2");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = a * std::pow(b / a, double(i) / double(n - 1));
  t.back() = b;
  return t;
}

// --- decay ------------------------------------------------------------------

DecayOperator parse_decay_operator(const std::string& name) {
  if (name == "B1") return DecayOperator::B1;
  if (name == "B2") return DecayOperator::B2;
  if (name == "B3_as_DinvJ") return DecayOperator::B3AsDinvJ;
  if (name == "l2") return DecayOperator::L2;
  throw std::invalid_argument("unknown decay operator '" + name + "'");
}

DecayVariant parse_decay_variant(const std::string& name) {
  if (name == "Lp") return DecayVariant::Lp;
  if (name == "Msq_singular") return DecayVariant::MsqSingular;
  if (name == "Msq_smooth") return DecayVariant::MsqSmooth;
  throw std::invalid_argument("unknown decay variant '" + name + "'");
}

std::string to_string(DecayOperator op) {
  switch (op) {
    case DecayOperator::B1: return "B1";
    case DecayOperator::B2: return "B2";
    case DecayOperator::B3AsDinvJ: return "B3_as_DinvJ";
    case DecayOperator::L2: return "l2";
  }
  return "?";
}

std::string to_string(DecayVariant v) {
  switch (v) {
    case DecayVariant::Lp: return "Lp";
    case DecayVariant::MsqSingular: return "Msq_singular";
    case DecayVariant::MsqSmooth: return "Msq_smooth";
  }
  return "?";
}

std::vector<double> decay_series(const Field& g, const DecayRequest& req, const WindowBank& bank) {
  const ModParams mp{req.pp.p, req.pp.q, req.pp.s};
  std::vector<double> out;
  out.reserve(req.times.size());
  for (double t : req.times) {
    const Field f = apply_decay_op(req.op, t, g);
    out.push_back(req.variant == DecayVariant::Lp ? lp_norm(f, req.pp.p) : modulation_norm(f, mp, bank));
  }
  return out;
}

RatioReport decay_ratio(const DecayRequest& req, const Corpus& corpus, const WindowBank& bank,
                        const HarnessOptions& opt) {
  if (!(req.pp.p >= 2.0)) throw std::invalid_argument("decay_ratio: need p >= 2");
  if (req.times.empty()) throw std::invalid_argument("decay_ratio: no times");
  if (corpus.members.empty()) throw std::invalid_argument("decay_ratio: empty corpus");
  for (double t : req.times)
    if (t < 0.0) throw std::invalid_argument("decay_ratio: negative time");
  check_window(corpus, bank.grid(), *std::max_element(req.times.begin(), req.times.end()), "decay_ratio");

  const double a = req.pp.alpha() + req.weight_excess;
  const double pc = req.pp.p_conjugate();
  const ModParams src{pc, req.pp.q, req.pp.s};
  const std::size_t nt = req.times.size();
  auto rows = parallel_map<std::vector<double>>(corpus.members.size(), opt.threads, [&](std::size_t m) {
    const Field& g = corpus.members[m].field;
    const double den = req.variant == DecayVariant::Lp ? lp_norm(synchronized(g), pc) : modulation_norm(g, src, bank);
    const auto num = decay_series(g, req, bank);
    std::vector<double> r(nt);
    for (std::size_t j = 0; j < nt; ++j) {
      const double t = req.times[j];
      const double w = req.variant == DecayVariant::MsqSmooth ? std::pow(1.0 + t, a) : std::pow(t, a);
      r[j] = pair_ratio(w * num[j], den);
    }
    return r;
  });

  RatioReport rep;
  rep.estimate_id = "decay/" + to_string(req.op) + "/" + to_string(req.variant);
  rep.times = req.times;
  rep.per_time_sup.assign(nt, 0.0);
  for (const auto& r : rows) {
    rep.values.insert(rep.values.end(), r.begin(), r.end());
    for (std::size_t j = 0; j < nt; ++j) rep.per_time_sup[j] = std::max(rep.per_time_sup[j], r[j]);
  }
  std::size_t positive = 0;
  for (std::size_t j = 0; j < nt; ++j) positive += req.times[j] > 0.0 && rep.per_time_sup[j] > 0.0;
  if (positive >= 3) rep.trend_slope = fit_loglog(rep.times, rep.per_time_sup).slope;
  settle(rep, opt);
  return rep;
}

// --- products ---------------------------------------------------------------

ProductKind parse_product_kind(const std::string& name) {
  if (name == "bilinear_s_nonneg") return ProductKind::BilinearSNonneg;
  if (name == "bilinear_Ib1") return ProductKind::BilinearIb1;
  if (name == "power_Ib2") return ProductKind::PowerIb2;
  if (name == "multilinear_box") return ProductKind::MultilinearBox;
  throw std::invalid_argument("unknown product kind '" + name + "'");
}

std::string to_string(ProductKind k) {
  switch (k) {
    case ProductKind::BilinearSNonneg: return "bilinear_s_nonneg";
    case ProductKind::BilinearIb1: return "bilinear_Ib1";
    case ProductKind::PowerIb2: return "power_Ib2";
    case ProductKind::MultilinearBox: return "multilinear_box";
  }
  return "?";
}

std::vector<Violation> check_product_constraints(ProductKind kind, const ProductParams& pp, int n) {
  std::vector<Violation> v;
  auto need = [&](bool ok, const char* clause, std::string detail) {
    if (!ok) v.push_back({clause, std::move(detail)});
  };
  auto in_closed = [](double x) { return x >= 1.0; };  // [1, inf]
  auto in_open = [](double x) { return x > 1.0 && std::isfinite(x); };
  const double sn = pp.s / double(n);
  switch (kind) {
    case ProductKind::BilinearSNonneg:
      need(in_closed(pp.p) && in_closed(pp.p1) && in_closed(pp.p2), "1<=p,p1,p2<=inf", "Lebesgue exponents");
      need(in_closed(pp.sigma) && in_closed(pp.sigma1) && in_closed(pp.sigma2), "1<=sigma,sigma1,sigma2<=inf",
           "summation exponents");
      need(std::abs(inv(pp.p) - inv(pp.p1) - inv(pp.p2)) <= kRelationTol, "1/p=1/p1+1/p2",
           fmt(inv(pp.p)) + " vs " + fmt(inv(pp.p1) + inv(pp.p2)));
      need(std::abs(inv(pp.sigma) - inv(pp.sigma1) - inv(pp.sigma2) + 1.0) <= kRelationTol,
           "1/sigma=1/sigma1+1/sigma2-1", fmt(inv(pp.sigma)) + " vs " + fmt(inv(pp.sigma1) + inv(pp.sigma2) - 1.0));
      need(pp.s >= 0.0, "s>=0", "s = " + fmt(pp.s));
      break;
    case ProductKind::BilinearIb1: {
      need(in_closed(pp.p) && in_closed(pp.p1) && in_closed(pp.p2), "1<=p,p1,p2<=inf", "Lebesgue exponents");
      need(in_open(pp.sigma) && in_open(pp.sigma1) && in_open(pp.sigma2), "1<sigma,sigma1,sigma2<inf",
           "summation exponents");
      need(std::abs(inv(pp.p) - inv(pp.p1) - inv(pp.p2)) <= kRelationTol, "1/p=1/p1+1/p2",
           fmt(inv(pp.p)) + " vs " + fmt(inv(pp.p1) + inv(pp.p2)));
      const double lo = inv(pp.sigma) - inv(pp.sigma1) - inv(pp.sigma2) + 1.0;
      need(lo <= sn + kRelationTol, "1/sigma-1/sigma1-1/sigma2+1<=s/n", fmt(lo) + " > " + fmt(sn));
      need(sn < inv(pp.sigma), "s/n<1/sigma", fmt(sn) + " >= " + fmt(inv(pp.sigma)));
      break;
    }
    case ProductKind::PowerIb2: {
      const double P = pp.power;
      need(pp.power >= 2, "P>=2", "P = " + std::to_string(pp.power));
      need(in_closed(pp.Q), "1<=Q<=inf", "Q = " + fmt(pp.Q));
      need(pp.nu >= 1.0 && pp.nu <= pp.mu && std::isfinite(pp.mu), "1<=nu<=mu<inf",
           "nu = " + fmt(pp.nu) + ", mu = " + fmt(pp.mu));
      need(pp.s >= 0.0 && sn < inv(pp.nu), "0<=s<n/nu", "s = " + fmt(pp.s));
      const double lhs = inv(pp.nu) - (P - 1.0) * sn, rhs = P * inv(pp.mu) - P + 1.0;
      need(lhs <= rhs + kRelationTol, "1/nu-(P-1)s/n<=P/mu-P+1", fmt(lhs) + " > " + fmt(rhs));
      break;
    }
    case ProductKind::MultilinearBox: {
      need(pp.p_i.size() >= 2 && pp.p_i.size() == pp.gamma_i.size(), "m>=2 factors",
           "p_i and gamma_i must list the same m >= 2 exponents");
      double sp = 0, sg = 0;
      bool ranges = in_closed(pp.p_target) && in_closed(pp.gamma_target);
      for (double x : pp.p_i) ranges = ranges && in_closed(x), sp += inv(x);
      for (double x : pp.gamma_i) ranges = ranges && in_closed(x), sg += inv(x);
      need(ranges, "1<=p_i,gamma_i<=inf", "exponents");
      need(std::abs(inv(pp.p_target) - sp) <= kRelationTol, "1/p'=sum 1/p_i",
           fmt(inv(pp.p_target)) + " vs " + fmt(sp));
      need(std::abs(inv(pp.gamma_target) - sg) <= kRelationTol, "1/gamma'=sum 1/gamma_i",
           fmt(inv(pp.gamma_target)) + " vs " + fmt(sg));
      need(pp.time_weight == 0.0, "alpha=0", "only the unweighted case is implemented");
      need(pp.q == 1.0, "q=1", "q = " + fmt(pp.q));
      need(pp.t1 > pp.t0 && pp.dt > 0.0, "window", "need t0 < t1 and dt > 0");
      break;
    }
  }
  return v;
}

RatioReport product_ratio(ProductKind kind, const ProductParams& pp, const Corpus& corpus, const WindowBank& bank,
                          const HarnessOptions& opt) {
  const int n = bank.grid().dim();
  if (auto v = check_product_constraints(kind, pp, n); !v.empty()) throw_violations("product_ratio", v);
  if (corpus.members.empty()) throw std::invalid_argument("product_ratio: empty corpus");
  const auto& mem = corpus.members;
  const std::size_t M = mem.size();
  const std::size_t factors = kind == ProductKind::PowerIb2 ? std::size_t(pp.power)
                              : kind == ProductKind::MultilinearBox ? pp.p_i.size()
                                                                    : 2;
  check_bandwidth(corpus, bank.grid(), factors);
  RatioReport rep;
  rep.estimate_id = "product/" + to_string(kind);

  switch (kind) {
    case ProductKind::BilinearSNonneg:
    case ProductKind::BilinearIb1: {
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = i; j < M; ++j) pairs.emplace_back(i, j);
      rep.values = parallel_map<double>(pairs.size(), opt.threads, [&](std::size_t k) {
        const Field& u = mem[pairs[k].first].field;
        const Field& w = mem[pairs[k].second].field;
        const Field uv[] = {u, w};
        const double num = modulation_norm(dealiased_product(uv), {pp.p, pp.sigma, pp.s}, bank);
        const double den = modulation_norm(u, {pp.p1, pp.sigma1, pp.s}, bank) *
                           modulation_norm(w, {pp.p2, pp.sigma2, pp.s}, bank);
        return pair_ratio(num, den);
      });
      break;
    }
    case ProductKind::PowerIb2: {
      rep.values = parallel_map<double>(M, opt.threads, [&](std::size_t i) {
        const Field& u = mem[i].field;
        const double num = modulation_norm(pointwise_power(u, pp.power), {pp.Q, pp.mu, pp.s}, bank);
        const double den =
            std::pow(modulation_norm(u, {double(pp.power) * pp.Q, pp.nu, pp.s}, bank), double(pp.power));
        return pair_ratio(num, den);
      });
      break;
    }
    case ProductKind::MultilinearBox: {
      check_window(corpus, bank.grid(), pp.t1, "product_ratio");
      const auto times = window_times(pp.t0, pp.t1, pp.dt);
      const std::size_t m = pp.p_i.size();
      // linear flows of every member, shared by all tuples
      auto flows = parallel_map<std::vector<Field>>(M, opt.threads, [&](std::size_t i) {
        std::vector<Field> f;
        f.reserve(times.size());
        for (double t : times) f.push_back(synchronized(apply_component(Component::B1, t, mem[i].field)));
        return f;
      });
      std::map<std::pair<double, double>, std::vector<double>> factor_norms;
      for (std::size_t k = 0; k < m; ++k) {
        const auto key = std::make_pair(pp.p_i[k], pp.gamma_i[k]);
        if (factor_norms.count(key)) continue;
        factor_norms[key] = parallel_map<double>(M, opt.threads, [&](std::size_t i) {
          return lq_box_spacetime_norm(times, flows[i], pp.q, key.second, key.first, bank);
        });
      }
      // tuples (g_i, ..., g_i, g_j) over ordered pairs: the tuple set of a corpus is contained in that of
      // any corpus extending it, so doubling compares nested sups
      rep.values = parallel_map<double>(M * M, opt.threads, [&](std::size_t t) {
        const std::size_t i = t / M, j = t % M;
        auto member = [&](std::size_t k) { return k + 1 < m ? i : j; };
        std::vector<Field> prod;
        prod.reserve(times.size());
        std::vector<Field> factors;
        for (std::size_t s = 0; s < times.size(); ++s) {
          factors.clear();
          for (std::size_t k = 0; k < m; ++k) factors.push_back(flows[member(k)][s]);
          prod.push_back(dealiased_product(factors));
        }
        const double num = lq_box_spacetime_norm(times, prod, pp.q, pp.gamma_target, pp.p_target, bank);
        double den = 1.0;
        for (std::size_t k = 0; k < m; ++k) den *= factor_norms.at({pp.p_i[k], pp.gamma_i[k]})[member(k)];
        return pair_ratio(num, den);
      });
      break;
    }
  }
  settle(rep, opt);
  return rep;
}

// --- space-time -------------------------------------------------------------

StrichartzOperator parse_strichartz_operator(const std::string& name) {
  static const std::map<std::string, StrichartzOperator> names{
      {"B1", StrichartzOperator::B1},           {"B2", StrichartzOperator::B2},
      {"l2", StrichartzOperator::L2},           {"B1_DinvJ", StrichartzOperator::B1DinvJ},
      {"B3_DinvJ", StrichartzOperator::B3DinvJ}, {"inhom_B1", StrichartzOperator::InhomB1},
      {"inhom_B2", StrichartzOperator::InhomB2}, {"inhom_l2", StrichartzOperator::InhomL2}};
  auto it = names.find(name);
  if (it == names.end()) throw std::invalid_argument("unknown space-time operator '" + name + "'");
  return it->second;
}

std::string to_string(StrichartzOperator op) {
  switch (op) {
    case StrichartzOperator::B1: return "B1";
    case StrichartzOperator::B2: return "B2";
    case StrichartzOperator::L2: return "l2";
    case StrichartzOperator::B1DinvJ: return "B1_DinvJ";
    case StrichartzOperator::B3DinvJ: return "B3_DinvJ";
    case StrichartzOperator::InhomB1: return "inhom_B1";
    case StrichartzOperator::InhomB2: return "inhom_B2";
    case StrichartzOperator::InhomL2: return "inhom_l2";
  }
  return "?";
}

bool is_inhomogeneous(StrichartzOperator op) {
  return op == StrichartzOperator::InhomB1 || op == StrichartzOperator::InhomB2 || op == StrichartzOperator::InhomL2;
}

void validate(const StrichartzParams& sp, int n) {
  if (!(sp.q >= 1.0) || std::isinf(sp.q)) throw std::invalid_argument("space-time estimate: need 1 <= q < inf");
  if (!(sp.sigma >= 2.0) || std::isinf(sp.sigma)) throw std::invalid_argument("space-time estimate: need 2 <= sigma < inf");
  if (!strichartz_pair_ok(sp.gamma, sp.sigma, n))
    throw std::invalid_argument("space-time estimate: gamma = " + fmt(sp.gamma) + " below max(2, gamma_sigma = " +
                                fmt(strichartz_admissible(sp.sigma, n)) + ")");
  if (!(sp.t1 > sp.t0) || !(sp.t0 >= 0.0) || !(sp.dt > 0.0) || sp.substeps < 1)
    throw std::invalid_argument("space-time estimate: bad window");
}

RatioReport strichartz_ratio(const StrichartzParams& sp, const Corpus& corpus, const WindowBank& bank,
                             const HarnessOptions& opt) {
  const Grid& g = bank.grid();
  validate(sp, g.dim());
  if (corpus.members.empty()) throw std::invalid_argument("strichartz_ratio: empty corpus");
  check_window(corpus, g, sp.t1, "strichartz_ratio");
  const auto times = window_times(sp.t0, sp.t1, sp.dt);
  const Lattice lat(g);
  const std::size_t size = g.size();

  RatioReport rep;
  rep.estimate_id = "strichartz/" + to_string(sp.op);
  rep.values = parallel_map<double>(corpus.members.size(), opt.threads, [&](std::size_t i) {
    const Field& f = corpus.members[i].field;
    if (!is_inhomogeneous(sp.op)) {
      std::vector<Field> series;
      series.reserve(times.size());
      for (double t : times) {
        switch (sp.op) {
          case StrichartzOperator::B1: series.push_back(apply_component(Component::B1, t, f)); break;
          case StrichartzOperator::B2: series.push_back(apply_component(Component::B2, t, f)); break;
          case StrichartzOperator::L2: series.push_back(apply_component(Component::L2, t, f)); break;
          case StrichartzOperator::B1DinvJ: series.push_back(apply_riesz_j(apply_component(Component::B1, t, f))); break;
          case StrichartzOperator::B3DinvJ: series.push_back(apply_riesz_j(apply_component(Component::B3, t, f))); break;
          default: break;
        }
      }
      const double num = lq_box_spacetime_norm(times, series, sp.q, sp.gamma, sp.sigma, bank);
      return pair_ratio(num, modulation_norm(f, {2.0, sp.q, 0.0}, bank));
    }

    // b(t - tau) = a_c(t) cos(tau w) + a_s(t) sin(tau w) per mode; running trapezoid sums of
    // cos(tau w) Fhat and sin(tau w) Fhat give the retarded integral at every sample.
    const auto fhat = spectrum_of(f);
    std::vector<cplx> C(size), S(size), out(size);
    std::vector<cplx> prev_c(size), prev_s(size);
    auto forcing_terms = [&](double tau, std::vector<cplx>& ct, std::vector<cplx>& st) {
      for (std::size_t m = 0; m < size; ++m) {
        const double w = lat.omega[m], c = std::cos(tau * w), s = std::sin(tau * w);
        const cplx F = c * fhat[m];  // B1(tau) f
        ct[m] = c * F;
        st[m] = s * F;
      }
    };
    std::vector<Field> response, forcing;
    response.reserve(times.size());
    forcing.reserve(times.size());
    std::vector<cplx> cur_c(size), cur_s(size);
    forcing_terms(times.front(), prev_c, prev_s);
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double t = times[j];
      if (j > 0) {
        const double hj = (t - times[j - 1]) / double(sp.substeps);
        for (std::size_t k = 1; k <= sp.substeps; ++k) {
          forcing_terms(times[j - 1] + hj * double(k), cur_c, cur_s);
          for (std::size_t m = 0; m < size; ++m) {
            C[m] += 0.5 * hj * (prev_c[m] + cur_c[m]);
            S[m] += 0.5 * hj * (prev_s[m] + cur_s[m]);
          }
          std::swap(prev_c, cur_c);
          std::swap(prev_s, cur_s);
        }
      }
      for (std::size_t m = 0; m < size; ++m) {
        const double w = lat.omega[m], c = std::cos(t * w), s = std::sin(t * w);
        const double r = lat.abs_xi[m] / lat.bracket[m];
        const cplx cos_part = c * C[m] + s * S[m];  // int cos((t - tau) w) F
        const cplx sin_part = s * C[m] - c * S[m];  // int sin((t - tau) w) F
        switch (sp.op) {
          case StrichartzOperator::InhomB1: out[m] = cos_part; break;
          case StrichartzOperator::InhomB2: out[m] = -r * sin_part; break;
          default: out[m] = sin_part; break;
        }
      }
      response.push_back(field_from_spectrum(g, out));
      forcing.push_back(apply_component(Component::B1, t, f));
    }
    const double num = sp.energy_target ? lq_box_spacetime_norm(times, response, sp.q, kInf, 2.0, bank)
                                        : lq_box_spacetime_norm(times, response, sp.q, sp.gamma, sp.sigma, bank);
    const double den = lq_box_spacetime_norm(times, forcing, sp.q, conj_exp(sp.gamma), conj_exp(sp.sigma), bank);
    return pair_ratio(num, den);
  });
  settle(rep, opt);
  return rep;
}

// --- stability --------------------------------------------------------------

StabilityReport stability_experiment(const StatePair& z0, const StatePair& z0_tilde, const SolverConfig& cfg,
                                     const WindowBank& bank) {
  const PicardResult a = picard_solve(z0, cfg, bank);
  const PicardResult b = picard_solve(z0_tilde, cfg, bank);
  if (!a.report.converged || !b.report.converged)
    throw std::runtime_error("stability_experiment: Picard iteration did not converge (smallness violated?)");

  const Trajectory lin = linear_trajectory(z0 - z0_tilde, cfg);
  const auto& ta = a.trajectory;
  const auto& tb = b.trajectory;
  std::vector<StatePair> diff, rem;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    diff.push_back(ta.states()[i] - tb.states()[i]);
    rem.push_back(diff.back() - lin.states()[i]);
  }
  const std::vector<double> times(ta.times().begin(), ta.times().end());
  const ModParams mp = cfg.mod();
  const TimeWeight w = TimeWeight::poly_alpha(cfg.pp.alpha());
  const auto H = weighted_sup_norm(Trajectory(times, diff), mp, w, bank);
  const auto J = weighted_sup_norm(lin, mp, w, bank);
  const auto R = weighted_sup_norm(Trajectory(times, std::move(rem)), mp, w, bank);

  StabilityReport rep;
  rep.t = H.t;
  rep.solution_diff = H.weighted_sum;
  rep.linear_diff = J.weighted_sum;
  rep.epsilon = std::max(a.report.epsilon, b.report.epsilon);
  rep.identical = std::all_of(H.weighted_sum.begin(), H.weighted_sum.end(), [](double x) { return x == 0.0; }) &&
                  std::all_of(J.weighted_sum.begin(), J.weighted_sum.end(), [](double x) { return x == 0.0; });
  if (rep.identical) {
    rep.kappa = 0.0;
    rep.bound_factor = 1.0;
    rep.measured_constant = 0.0;
    rep.co_decay = true;
    return rep;
  }
  // tail sups, latest sample first
  const std::size_t m = rep.t.size();
  std::vector<double> h(m), j(m), r(m);
  double hs = 0, js = 0, rs = 0;
  for (std::size_t k = m; k-- > 0;) {
    hs = std::max(hs, H.weighted_sum[k]);
    js = std::max(js, J.weighted_sum[k]);
    rs = std::max(rs, R.weighted_sum[k]);
    h[k] = hs, j[k] = js, r[k] = rs;
  }
  bool tracks = true;
  for (std::size_t k = 0; k < m; ++k) {
    if (h[k] > 0.0) rep.kappa = std::max(rep.kappa, r[k] / h[k]);
    rep.measured_constant = std::max(rep.measured_constant, j[k] > 0.0 ? h[k] / j[k] : (h[k] > 0.0 ? kInf : 0.0));
  }
  rep.bound_factor = rep.kappa < 1.0 ? 1.0 / (1.0 - rep.kappa) : kInf;
  for (std::size_t k = 0; k < m; ++k)
    tracks = tracks && h[k] <= rep.bound_factor * j[k] * (1.0 + 1e-12) && j[k] <= (1.0 + rep.kappa) * h[k] * (1.0 + 1e-12);
  rep.co_decay = std::isfinite(rep.bound_factor) && tracks;
  return rep;
}

}  // namespace bqlab
