#include "bqlab/windows.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "transforms.hpp"

namespace bqlab {
namespace {

double phi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

double bump(double r) {
  const double a = std::abs(r);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  const double p = phi(2.0 - 2.0 * a), q = phi(2.0 * a - 1.0);
  return p / (p + q);
}

double window_1d(double eta) {
  const double top = bump(eta);
  if (top == 0.0) return 0.0;
  double den = 0.0;
  for (int l = -2; l <= 2; ++l) den += bump(eta - l);
  return top / den;
}

WindowBank::WindowBank(const Grid& g) : grid_(g), K_(0), lower_bound_(0.0) {
  K_ = static_cast<int>(std::ceil(g.max_frequency())) + 1;
  const std::size_t N = g.points_per_dim();
  tables_.resize(2 * K_ + 1);
  for (int k = -K_; k <= K_; ++k) {
    auto& tab = tables_[k + K_];
    for (std::size_t m = 0; m < N; ++m) {
      double w = window_1d(g.frequency(m) - k);
      if (w != 0.0) tab.push_back({m, w});
    }
  }

  const int n = g.dim();
  for (int k0 = -K_; k0 <= K_; ++k0) {
    if (tables_[k0 + K_].empty()) continue;
    if (n == 1) {
      boxes_.push_back({k0, 0});
      continue;
    }
    for (int k1 = -K_; k1 <= K_; ++k1)
      if (!tables_[k1 + K_].empty()) boxes_.push_back({k0, k1});
  }

  // 1D overlap on the lattice; the tensor structure makes the n-D set a product
  std::vector<int> overlap;
  const auto& zero = tables_[K_];
  for (int l = -K_; l <= K_; ++l) {
    const auto& other = tables_[l + K_];
    bool hit = false;
    for (const auto& a : zero) {
      for (const auto& b : other)
        if (a.slot == b.slot) { hit = true; break; }
      if (hit) break;
    }
    if (hit) overlap.push_back(l);
  }
  for (int a : overlap) {
    if (n == 1) {
      neighbors_.push_back({a, 0});
      continue;
    }
    for (int b : overlap) neighbors_.push_back({a, b});
  }

  double lb = 1.0;
  for (const auto& e : zero)
    if (std::abs(g.frequency(e.slot)) <= 0.5) lb = std::min(lb, e.value);
  lower_bound_ = std::pow(lb, n);
}

std::span<const WindowBank::Entry> WindowBank::entries_1d(int k) const {
  if (k < -K_ || k > K_) return {};
  return tables_[k + K_];
}

bool WindowBank::in_range(const BoxIndex& k) const noexcept {
  if (std::abs(k[0]) > K_) return false;
  if (grid_.dim() == 1) return k[1] == 0;
  return std::abs(k[1]) <= K_;
}

double WindowBank::value(const BoxIndex& k, std::size_t flat) const {
  if (!in_range(k)) return 0.0;
  int j0 = 0, j1 = 0;
  grid_.split_index(flat, j0, j1);
  const double dxi = grid_.frequency_spacing();
  double v = window_1d(j0 * dxi - k[0]);
  if (grid_.dim() == 2) v *= window_1d(j1 * dxi - k[1]);
  return v;
}

bool WindowBank::window_spectrum(const BoxIndex& k, std::span<const cplx> spec,
                                 std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx(0.0));
  if (!in_range(k)) return false;
  bool any = false;
  const auto& t0 = tables_[k[0] + K_];
  if (grid_.dim() == 1) {
    for (const auto& e : t0) {
      out[e.slot] = e.value * spec[e.slot];
      any = any || out[e.slot] != cplx(0.0);
    }
    return any;
  }
  const std::size_t N = grid_.points_per_dim();
  const auto& t1 = tables_[k[1] + K_];
  for (const auto& a : t0)
    for (const auto& b : t1) {
      const std::size_t m = a.slot * N + b.slot;
      out[m] = a.value * b.value * spec[m];
      any = any || out[m] != cplx(0.0);
    }
  return any;
}

WindowBank build_windows(const Grid& g) { return WindowBank(g); }

BoxProjection box_project(const BoxIndex& k, const Field& f, const WindowBank& bank) {
  require_same_grid(bank.grid(), f.grid(), "box_project");
  const Grid& g = f.grid();
  BoxProjection out{g, std::vector<cplx>(g.size()), std::vector<cplx>(g.size())};
  auto spec = spectrum_of(f);
  if (bank.window_spectrum(k, spec, out.spec)) detail::inverse_complex(g, out.spec, out.samples);
  return out;
}

double lp_norm(std::span<const cplx> values, double cell_volume, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
  double peak2 = 0.0;
  for (const cplx& z : values) peak2 = std::max(peak2, std::norm(z));
  if (peak2 == 0.0 || std::isinf(p)) return std::sqrt(peak2);
  const double inv = 1.0 / peak2;
  double acc = 0.0;
  for (const cplx& z : values) acc += detail::half_power(std::norm(z) * inv, p);
  return std::sqrt(peak2) * std::pow(acc * cell_volume, 1.0 / p);
}

}  // namespace bqlab
