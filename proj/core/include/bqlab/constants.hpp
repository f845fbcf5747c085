#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bqlab {

/// Problem exponents with the derived alpha, beta and p'.
struct ProblemParams {
  int n = 1;
  int lambda = 4;
  double p = 5.0;
  double q = 1.0;
  double s = 0.0;

  /// n (1/2 - 1/p).
  double alpha() const;
  /// (1 - alpha) / (lambda - 1).
  double beta() const;
  double p_conjugate() const;
};

double lambda0(int n);
/// (n+2)/(n-2) for n >= 3, infinity otherwise.
double lambda1(int n);

enum class TheoremKind { Global1, Global4, Local1 };

TheoremKind parse_theorem_kind(std::string_view name);
std::string to_string(TheoremKind k);

struct Violation {
  std::string clause;
  std::string detail;
};

/// Every violated clause of the selected hypothesis set; empty means admissible.
std::vector<Violation> validate_hypotheses(TheoremKind kind, const ProblemParams& pp);

/// |1 - beta (lambda - 1) - alpha|.
double scaling_identity_check(const ProblemParams& pp);

/// int_0^t (1+t-tau)^{-alpha} (1+tau)^{-alpha lambda} dtau.
double convolution_integral(double alpha, double lambda, double t);

struct ConvolutionBound {
  double sup_c = 0.0;
  std::vector<double> t;
  std::vector<double> integral;
  /// (1+t)^alpha I(t), divided by t_max for the local variant.
  std::vector<double> scaled;
};

enum class BoundVariant { Global, Local };

/// sup over a grid of [0, t_max] of (1+t)^alpha I(t) (global) or (1+t)^alpha I(t) / t_max (local).
ConvolutionBound weighted_convolution_bound(double alpha, double lambda, double t_max, std::size_t grid_pts,
                                            BoundVariant variant = BoundVariant::Global);

/// gamma_sigma with 2/gamma = n (1/2 - 1/sigma); infinity at sigma = 2.
double strichartz_admissible(double sigma, int n);
bool strichartz_pair_ok(double gamma, double sigma, int n);

}  // namespace bqlab
