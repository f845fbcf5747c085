#include "bqlab/constants.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bqlab {

double ProblemParams::alpha() const { return n * (0.5 - 1.0 / p); }

double ProblemParams::beta() const { return (1.0 - alpha()) / (lambda - 1); }

double ProblemParams::p_conjugate() const {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

double lambda0(int n) {
  if (n < 1) throw std::invalid_argument("lambda0: dimension must be >= 1");
  const double d = n;
  return (d + 2.0 + std::sqrt(d * d + 12.0 * d + 4.0)) / (2.0 * d);
}

double lambda1(int n) {
  if (n < 1) throw std::invalid_argument("lambda1: dimension must be >= 1");
  if (n <= 2) return std::numeric_limits<double>::infinity();
  return (n + 2.0) / (n - 2.0);
}

TheoremKind parse_theorem_kind(std::string_view name) {
  if (name == "global1") return TheoremKind::Global1;
  if (name == "global4") return TheoremKind::Global4;
  if (name == "local1") return TheoremKind::Local1;
  throw std::invalid_argument("unknown theorem kind '" + std::string(name) + "'");
}

std::string to_string(TheoremKind k) {
  switch (k) {
    case TheoremKind::Global1: return "global1";
    case TheoremKind::Global4: return "global4";
    case TheoremKind::Local1: return "local1";
  }
  return "?";
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

void check(std::vector<Violation>& out, bool ok, const char* clause, const std::string& detail) {
  if (!ok) out.push_back({clause, detail});
}

void check_q_s(std::vector<Violation>& out, const ProblemParams& pp, double q_max) {
  const double n = pp.n, q = pp.q;
  check(out, q >= 1.0 && q < q_max, q_max == 2.0 ? "1<=q<2" : "1<=q<inf", "q = " + fmt(q));
  const double lo = n - n / q, hi = n / q;
  check(out, pp.s >= lo && pp.s < hi, "n-n/q<=s<n/q",
        "s = " + fmt(pp.s) + " outside [" + fmt(lo) + ", " + fmt(hi) + ")");
  check(out, q != 1.0 || pp.lambda >= 2, "q=1=>lambda>=2", "lambda = " + std::to_string(pp.lambda));
}

}  // namespace

std::vector<Violation> validate_hypotheses(TheoremKind kind, const ProblemParams& pp) {
  std::vector<Violation> out;
  if (pp.n < 1) {
    out.push_back({"n>=1", "n = " + std::to_string(pp.n)});
    return out;
  }
  const double l0 = lambda0(pp.n);
  const double lam = pp.lambda;
  switch (kind) {
    case TheoremKind::Global1:
      check(out, lam > l0, "lambda>lambda0(n)", "lambda = " + fmt(lam) + ", lambda0 = " + fmt(l0));
      check(out, pp.p == lam + 1.0, "p=lambda+1", "p = " + fmt(pp.p));
      check_q_s(out, pp, 2.0);
      break;
    case TheoremKind::Global4: {
      const double lo = 2.0 + 4.0 / pp.n;
      check(out, pp.p >= lo && pp.p <= lam + 1.0, "2+4/n<=p<=lambda+1",
            "p = " + fmt(pp.p) + " outside [" + fmt(lo) + ", " + fmt(lam + 1.0) + "]");
      check(out, std::isfinite(pp.p) && pp.p == std::floor(pp.p), "p integer", "p = " + fmt(pp.p));
      check(out, lam > 1.0 + 4.0 / pp.n, "lambda>1+4/n",
            "lambda = " + fmt(lam) + ", 1+4/n = " + fmt(1.0 + 4.0 / pp.n));
      break;
    }
    case TheoremKind::Local1:
      check(out, lam > 1.0 && lam <= l0, "1<lambda<=lambda0(n)",
            "lambda = " + fmt(lam) + ", lambda0 = " + fmt(l0));
      check(out, pp.p == lam + 1.0, "p=lambda+1", "p = " + fmt(pp.p));
      check_q_s(out, pp, std::numeric_limits<double>::infinity());
      break;
  }
  return out;
}

double scaling_identity_check(const ProblemParams& pp) {
  return std::abs(1.0 - pp.beta() * (pp.lambda - 1) - pp.alpha());
}

double convolution_integral(double alpha, double lambda, double t) {
  if (t <= 0.0) return 0.0;
  auto f = [=](double tau) {
    return std::pow(1.0 + t - tau, -alpha) * std::pow(1.0 + tau, -alpha * lambda);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  // both endpoint layers have unit width; split so each half resolves one
  const double mid = 0.5 * t;
  double e1 = 0.0, e2 = 0.0;
  const double a = GK::integrate(f, 0.0, mid, 25, 1e-13, &e1);
  const double b = GK::integrate(f, mid, t, 25, 1e-13, &e2);
  if (!(e1 + e2 <= 1e-9)) {
    throw std::runtime_error("convolution_integral: quadrature tolerance 1e-9 not reached at t = " + fmt(t));
  }
  return a + b;
}

ConvolutionBound weighted_convolution_bound(double alpha, double lambda, double t_max, std::size_t grid_pts,
                                            BoundVariant variant) {
  if (!(t_max > 0.0) || grid_pts < 2) throw std::invalid_argument("weighted_convolution_bound: bad t grid");
  if (variant == BoundVariant::Global && !(alpha > 0.0))
    throw std::invalid_argument("weighted_convolution_bound: alpha must be positive");
  ConvolutionBound out;
  for (std::size_t i = 0; i < grid_pts; ++i) {
    const double t = t_max * double(i) / double(grid_pts - 1);
    const double I = convolution_integral(alpha, lambda, t);
    double v = std::pow(1.0 + t, alpha) * I;
    if (variant == BoundVariant::Local) v /= t_max;
    out.t.push_back(t);
    out.integral.push_back(I);
    out.scaled.push_back(v);
    out.sup_c = std::max(out.sup_c, v);
  }
  return out;
}

double strichartz_admissible(double sigma, int n) {
  if (!(sigma >= 2.0) || std::isinf(sigma)) throw std::invalid_argument("strichartz_admissible: need 2 <= sigma < inf");
  if (sigma == 2.0) return std::numeric_limits<double>::infinity();
  return 2.0 / (n * (0.5 - 1.0 / sigma));
}

bool strichartz_pair_ok(double gamma, double sigma, int n) {
  const double gs = strichartz_admissible(sigma, n);
  return gamma >= std::max(2.0, gs);
}

}  // namespace bqlab
