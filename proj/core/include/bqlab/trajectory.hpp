#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "bqlab/norms.hpp"
#include "bqlab/propagator.hpp"

namespace bqlab {

/// Box L^p norms of u and of J^{-1} D v, indexed [sample][box].
struct BoxNormRecord {
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v_dinvj;
};

/// Time-sampled states on one grid with strictly increasing times.
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::vector<StatePair> states);

  std::span<const double> times() const noexcept { return times_; }
  std::span<const StatePair> states() const noexcept { return states_; }
  std::size_t size() const noexcept { return times_.size(); }
  const Grid& grid() const { return states_.front().grid(); }

  bool is_uniform(double rel_tol = 1e-9) const;
  /// Sample spacing; throws unless uniform.
  double spacing() const;

  /// Cached per exponent p; the bank must live on the trajectory grid.
  const BoxNormRecord& box_norm_record(double p, const WindowBank& bank) const;

 private:
  struct Cache {
    std::mutex mutex;
    std::map<double, std::shared_ptr<const BoxNormRecord>> records;
  };
  std::vector<double> times_;
  std::vector<StatePair> states_;
  std::shared_ptr<Cache> cache_;
};

/// (1+|t|)^alpha or |t|^beta.
struct TimeWeight {
  enum class Kind { PolyAlpha, PureBeta };
  Kind kind = Kind::PolyAlpha;
  double exponent = 0.0;

  static TimeWeight poly_alpha(double a) { return {Kind::PolyAlpha, a}; }
  static TimeWeight pure_beta(double b) { return {Kind::PureBeta, b}; }
  double at(double t) const;
};

struct WeightedSeries {
  double sup = 0.0;
  std::vector<double> t;
  std::vector<double> norm_u;
  std::vector<double> norm_v_dinvj;
  std::vector<double> weighted_sum;
};

WeightedSeries weighted_sup_norm(const Trajectory& traj, const ModParams& mp, const TimeWeight& w,
                                 const WindowBank& bank);

/// (sum_k |box_k u|_{L^gamma(window; L^sigma)}^q)^{1/q} with trapezoid weights in time.
double lq_box_spacetime_norm(std::span<const double> times, std::span<const Field> fields, double q,
                             double gamma, double sigma, const WindowBank& bank);
/// u-component form; dinvj = true pre-applies J^{-1} D.
double lq_box_spacetime_norm(const Trajectory& traj, double q, double gamma, double sigma,
                             const WindowBank& bank, bool dinvj = false);
/// Same combination from precomputed per-sample box norms [sample][box].
double lq_box_combine(std::span<const double> times, const std::vector<std::vector<double>>& norms,
                      double q, double gamma);

}  // namespace bqlab
