#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "bqlab/constants.hpp"
#include "bqlab/corpus.hpp"
#include "bqlab/propagator.hpp"
#include "bqlab/solver.hpp"
#include "bqlab/windows.hpp"

namespace bqlab {

struct HarnessOptions {
  std::size_t threads = 1;
  /// Relative drift of the sup allowed under corpus or window doubling.
  double stability_tol = 0.25;
  /// Largest log-log trend of the per-time sup still counted as bounded.
  double trend_tol = 0.1;
};

struct RatioReport {
  std::string estimate_id;
  /// Row-major [member][time] for time-resolved estimates, one per member (or pair) otherwise.
  std::vector<double> values;
  std::vector<double> times;
  std::vector<double> per_time_sup;
  double sup_ratio = 0.0;
  /// |sup_big - sup_small| / sup_small; NaN until a doubling run is attached.
  double stability = std::numeric_limits<double>::quiet_NaN();
  double trend_slope = std::numeric_limits<double>::quiet_NaN();
  bool bounded = false;
  bool stable = false;
  /// "pass", "unbounded" or "unstable".
  std::string verdict;
};

/// Attaches the doubling drift of `small` to `big` and settles the verdict.
RatioReport with_stability(RatioReport big, const RatioReport& small, const HarnessOptions& opt = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Least squares of log y on log x with a 95% Student-t interval; drops y <= 0.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// n geometrically spaced points on [a, b].
std::vector<double> geometric_times(double a, double b, std::size_t n);

// ---------------------------------------------------------------------------
// Linear decay

enum class DecayOperator { B1, B2, B3AsDinvJ, L2 };
enum class DecayVariant { Lp, MsqSingular, MsqSmooth };

DecayOperator parse_decay_operator(const std::string& name);
DecayVariant parse_decay_variant(const std::string& name);
std::string to_string(DecayOperator op);
std::string to_string(DecayVariant v);

struct DecayRequest {
  DecayOperator op = DecayOperator::B1;
  DecayVariant variant = DecayVariant::Lp;
  /// n, p, q and s are used; p >= 2.
  ProblemParams pp;
  std::vector<double> times;
  /// Added to alpha in the time weight; positive values over-claim the decay.
  double weight_excess = 0.0;
};

/// Target norm of Op(t) g: L^p, or M^s_{p,q} (D^{-1}J M^s_{p,q} for B3AsDinvJ).
std::vector<double> decay_series(const Field& g, const DecayRequest& req, const WindowBank& bank);

/// weight(t) |Op(t) g|_target / |g|_source over corpus x times.
/// Throws when a time lies outside the wrap-around window of the corpus.
RatioReport decay_ratio(const DecayRequest& req, const Corpus& corpus, const WindowBank& bank,
                        const HarnessOptions& opt = {});

// ---------------------------------------------------------------------------
// Products

enum class ProductKind { BilinearSNonneg, BilinearIb1, PowerIb2, MultilinearBox };

ProductKind parse_product_kind(const std::string& name);
std::string to_string(ProductKind k);

struct ProductParams {
  double s = 0.0;
  // bilinear: |uv|_{M^s_{p,sigma}} against |u|_{M^s_{p1,sigma1}} |v|_{M^s_{p2,sigma2}}
  double p = 2.0, sigma = 1.0;
  double p1 = 4.0, sigma1 = 1.0;
  double p2 = 4.0, sigma2 = 1.0;
  // power: |u^P|_{M^s_{Q,mu}} against |u|^P_{M^s_{PQ,nu}}
  int power = 3;
  double Q = 4.0 / 3.0, mu = 1.0, nu = 1.0;
  // multilinear: |prod u_i|_{l^1(L^gamma'(L^p'))} against prod |u_i|_{l^1(L^gamma_i(L^p_i))}, u_i = B1(t) g_i,
  // over tuples (g_a, ..., g_a, g_b) for all ordered member pairs
  std::vector<double> p_i{6, 6, 6, 6, 6, std::numeric_limits<double>::infinity()};
  std::vector<double> gamma_i{6, 6, 6, 6, 6, std::numeric_limits<double>::infinity()};
  double p_target = 1.2, gamma_target = 1.2;
  double time_weight = 0.0;
  double q = 1.0;
  double t0 = 5.0, t1 = 50.0, dt = 1.0;
};

/// Violated clauses of the exponent relations of the selected estimate; empty when admissible.
std::vector<Violation> check_product_constraints(ProductKind kind, const ProductParams& pp, int n);

/// Throws std::invalid_argument naming the clauses when constraints fail.
RatioReport product_ratio(ProductKind kind, const ProductParams& pp, const Corpus& corpus, const WindowBank& bank,
                          const HarnessOptions& opt = {});

// ---------------------------------------------------------------------------
// Space-time estimates

enum class StrichartzOperator { B1, B2, L2, B1DinvJ, B3DinvJ, InhomB1, InhomB2, InhomL2 };

StrichartzOperator parse_strichartz_operator(const std::string& name);
std::string to_string(StrichartzOperator op);
bool is_inhomogeneous(StrichartzOperator op);

struct StrichartzParams {
  StrichartzOperator op = StrichartzOperator::B1;
  double q = 1.0, gamma = 6.0, sigma = 6.0;
  double t0 = 5.0, t1 = 50.0;
  /// Sampling of the norm in time.
  double dt = 0.5;
  /// Quadrature substeps per norm sample for the retarded integral.
  std::size_t substeps = 10;
  /// Inhomogeneous target l^q(L^inf(L^2)) instead of l^q(L^gamma(L^sigma)).
  bool energy_target = false;
};

void validate(const StrichartzParams& sp, int n);

/// Homogeneous: |Op(t) g|_{l^q(L^gamma(L^sigma))} / |g|_{M_{2,q}}.
/// Inhomogeneous, with forcing F(tau) = B1(tau) g on the window:
/// |int_{t0}^t Op(t - tau) F(tau) dtau| / |F|_{l^q(L^gamma'(L^sigma'))}.
RatioReport strichartz_ratio(const StrichartzParams& sp, const Corpus& corpus, const WindowBank& bank,
                             const HarnessOptions& opt = {});

// ---------------------------------------------------------------------------
// Stability of the nonlinear flow

struct StabilityReport {
  std::vector<double> t;
  /// (1+t)^alpha |z(t) - z~(t)| in M^s_{p,q} x D^{-1}J M^s_{p,q}.
  std::vector<double> solution_diff;
  /// (1+t)^alpha |B(t)(z0 - z~0)| in the same norm.
  std::vector<double> linear_diff;
  /// sup of the nonlinear remainder over sup of the solution difference, tail-wise.
  double kappa = 0.0;
  /// 1 / (1 - kappa); infinite when kappa >= 1.
  double bound_factor = std::numeric_limits<double>::infinity();
  /// max over t of tail-sup ratio solution_diff / linear_diff.
  double measured_constant = 0.0;
  double epsilon = 0.0;
  bool identical = false;
  bool co_decay = false;
};

/// Throws when either Picard run fails to converge.
StabilityReport stability_experiment(const StatePair& z0, const StatePair& z0_tilde, const SolverConfig& cfg,
                                     const WindowBank& bank);

}  // namespace bqlab
