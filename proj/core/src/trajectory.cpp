#include "bqlab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bqlab {

Trajectory::Trajectory(std::vector<double> times, std::vector<StatePair> states)
    : times_(std::move(times)), states_(std::move(states)), cache_(std::make_shared<Cache>()) {
  if (times_.empty()) throw std::invalid_argument("trajectory must be non-empty");
  if (times_.size() != states_.size()) throw std::invalid_argument("trajectory times/states size mismatch");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("trajectory times must increase strictly");
  for (const auto& z : states_) require_same_grid(states_.front().grid(), z.grid(), "Trajectory");
}

bool Trajectory::is_uniform(double rel_tol) const {
  if (times_.size() < 2) return true;
  const double d = (times_.back() - times_.front()) / double(times_.size() - 1);
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (std::abs(times_[i] - times_[i - 1] - d) > rel_tol * std::abs(d)) return false;
  return true;
}

double Trajectory::spacing() const {
  if (times_.size() < 2 || !is_uniform()) throw std::invalid_argument("trajectory is not uniformly sampled");
  return (times_.back() - times_.front()) / double(times_.size() - 1);
}

const BoxNormRecord& Trajectory::box_norm_record(double p, const WindowBank& bank) const {
  require_same_grid(bank.grid(), grid(), "box_norm_record");
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->records.find(p); it != cache_->records.end()) return *it->second;
  }
  auto rec = std::make_shared<BoxNormRecord>();
  rec->u.reserve(size());
  rec->v_dinvj.reserve(size());
  for (const auto& z : states_) {
    rec->u.push_back(box_norms(z.u, p, bank));
    rec->v_dinvj.push_back(box_norms(apply_riesz_j(z.v), p, bank));
  }
  std::lock_guard lock(cache_->mutex);
  auto [it, inserted] = cache_->records.emplace(p, std::move(rec));
  return *it->second;
}

double TimeWeight::at(double t) const {
  const double a = std::abs(t);
  if (kind == Kind::PolyAlpha) return std::pow(1.0 + a, exponent);
  return a == 0.0 ? (exponent == 0.0 ? 1.0 : 0.0) : std::pow(a, exponent);
}

WeightedSeries weighted_sup_norm(const Trajectory& traj, const ModParams& mp, const TimeWeight& w,
                                 const WindowBank& bank) {
  validate(mp);
  const auto& rec = traj.box_norm_record(mp.p, bank);
  WeightedSeries out;
  auto times = traj.times();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double a = combine_box_norms(rec.u[i], bank, mp.q, mp.s);
    const double b = combine_box_norms(rec.v_dinvj[i], bank, mp.q, mp.s);
    const double ws = w.at(times[i]) * (a + b);
    out.t.push_back(times[i]);
    out.norm_u.push_back(a);
    out.norm_v_dinvj.push_back(b);
    out.weighted_sum.push_back(ws);
    out.sup = std::max(out.sup, ws);
  }
  return out;
}

double lq_box_combine(std::span<const double> times, const std::vector<std::vector<double>>& norms,
                      double q, double gamma) {
  if (times.empty() || norms.size() != times.size()) throw std::invalid_argument("lq_box_combine: empty or mismatched");
  if (!(q >= 1.0) || !(gamma >= 1.0)) throw std::invalid_argument("lq_box_combine: exponents must be >= 1");
  if (!std::isinf(gamma) && times.size() < 2)
    throw std::invalid_argument("finite time exponent needs at least two samples");
  const std::size_t nb = norms.front().size();
  std::vector<double> wts(times.size(), 0.0);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double d = 0.5 * (times[i + 1] - times[i]);
    wts[i] += d;
    wts[i + 1] += d;
  }
  std::vector<double> per_box(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    double peak = 0.0;
    for (const auto& row : norms) peak = std::max(peak, row[b]);
    if (peak == 0.0 || std::isinf(gamma)) {
      per_box[b] = peak;
      continue;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) acc += wts[i] * std::pow(norms[i][b] / peak, gamma);
    per_box[b] = peak * std::pow(acc, 1.0 / gamma);
  }
  double peak = *std::max_element(per_box.begin(), per_box.end());
  if (peak == 0.0 || std::isinf(q)) return peak;
  double acc = 0.0;
  for (double x : per_box) acc += std::pow(x / peak, q);
  return peak * std::pow(acc, 1.0 / q);
}

double lq_box_spacetime_norm(std::span<const double> times, std::span<const Field> fields, double q,
                             double gamma, double sigma, const WindowBank& bank) {
  if (fields.empty()) throw std::invalid_argument("space-time norm of an empty trajectory");
  std::vector<std::vector<double>> norms;
  norms.reserve(fields.size());
  for (const auto& f : fields) norms.push_back(box_norms(f, sigma, bank));
  return lq_box_combine(times, norms, q, gamma);
}

double lq_box_spacetime_norm(const Trajectory& traj, double q, double gamma, double sigma,
                             const WindowBank& bank, bool dinvj) {
  if (!dinvj) return lq_box_combine(traj.times(), traj.box_norm_record(sigma, bank).u, q, gamma);
  std::vector<Field> fields;
  fields.reserve(traj.size());
  for (const auto& z : traj.states()) fields.push_back(apply_riesz_j(z.u));
  return lq_box_spacetime_norm(traj.times(), fields, q, gamma, sigma, bank);
}

}  // namespace bqlab
