#include "bqlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fft.hpp"
#include "transforms.hpp"

namespace bqlab {
namespace {

std::size_t cube(int n, std::size_t N) { return n == 1 ? N : N * N; }

// (-1)^(m0 + m1) for a flat index of an n-cube of side N (N even).
inline double parity(int n, std::size_t N, std::size_t flat) {
  std::size_t s = n == 1 ? flat : flat / N + flat % N;
  return (s & 1U) ? -1.0 : 1.0;
}

// Spectral coefficients from samples on a box of half-length L with N points.
std::vector<cplx> forward_raw(int n, double L, std::size_t N, std::span<const double> phys) {
  const std::size_t total = cube(n, N);
  std::vector<cplx> in(phys.begin(), phys.end()), out(total);
  detail::dft(n, N, in.data(), out.data(), -1);
  const double w = std::pow(2.0 * L / static_cast<double>(N), n);
  for (std::size_t m = 0; m < total; ++m) out[m] *= w * parity(n, N, m);
  return out;
}

std::vector<double> inverse_raw(int n, double L, std::size_t N, std::span<const cplx> spec) {
  const std::size_t total = cube(n, N);
  std::vector<cplx> in(total), out(total);
  for (std::size_t m = 0; m < total; ++m) in[m] = spec[m] * parity(n, N, m);
  detail::dft(n, N, in.data(), out.data(), +1);
  const double w = 1.0 / std::pow(2.0 * L, n);
  std::vector<double> phys(total);
  for (std::size_t i = 0; i < total; ++i) phys[i] = out[i].real() * w;
  return phys;
}

// Target slots (and weights) of a source index on the padded axis; the source
// Nyquist coefficient is shared equally between -N/2 and +N/2.
int pad_targets(int j, std::size_t N, std::size_t Np, std::size_t* slot, double* wt) {
  const int half = static_cast<int>(N / 2);
  auto idx = [Np](int k) { return k >= 0 ? std::size_t(k) : std::size_t(k + int(Np)); };
  if (j == -half) {
    slot[0] = idx(-half);
    slot[1] = idx(half);
    wt[0] = wt[1] = 0.5;
    return 2;
  }
  slot[0] = idx(j);
  wt[0] = 1.0;
  return 1;
}

std::vector<cplx> pad_spectrum(const Grid& g, std::span<const cplx> spec, std::size_t P) {
  const int n = g.dim();
  const std::size_t N = g.points_per_dim(), Np = P * N;
  std::vector<cplx> out(cube(n, Np));
  std::size_t s0[2], s1[2];
  double w0[2], w1[2];
  if (n == 1) {
    for (std::size_t m = 0; m < N; ++m) {
      int k = pad_targets(g.signed_index(m), N, Np, s0, w0);
      for (int a = 0; a < k; ++a) out[s0[a]] += w0[a] * spec[m];
    }
    return out;
  }
  for (std::size_t m0 = 0; m0 < N; ++m0) {
    int k0 = pad_targets(g.signed_index(m0), N, Np, s0, w0);
    for (std::size_t m1 = 0; m1 < N; ++m1) {
      int k1 = pad_targets(g.signed_index(m1), N, Np, s1, w1);
      const cplx c = spec[m0 * N + m1];
      for (int a = 0; a < k0; ++a)
        for (int b = 0; b < k1; ++b) out[s0[a] * Np + s1[b]] += w0[a] * w1[b] * c;
    }
  }
  return out;
}

// Inverse of pad_spectrum's index map: the two padded Nyquist slots fold into one.
int fold_sources(int j, std::size_t N, std::size_t Np, std::size_t* slot) {
  const int half = static_cast<int>(N / 2);
  auto idx = [Np](int k) { return k >= 0 ? std::size_t(k) : std::size_t(k + int(Np)); };
  if (j == -half) {
    slot[0] = idx(-half);
    slot[1] = idx(half);
    return 2;
  }
  slot[0] = idx(j);
  return 1;
}

std::vector<cplx> truncate_spectrum(const Grid& g, std::span<const cplx> padded, std::size_t P) {
  const int n = g.dim();
  const std::size_t N = g.points_per_dim(), Np = P * N;
  std::vector<cplx> out(g.size());
  std::size_t s0[2], s1[2];
  if (n == 1) {
    for (std::size_t m = 0; m < N; ++m) {
      int k = fold_sources(g.signed_index(m), N, Np, s0);
      for (int a = 0; a < k; ++a) out[m] += padded[s0[a]];
    }
    return out;
  }
  for (std::size_t m0 = 0; m0 < N; ++m0) {
    int k0 = fold_sources(g.signed_index(m0), N, Np, s0);
    for (std::size_t m1 = 0; m1 < N; ++m1) {
      int k1 = fold_sources(g.signed_index(m1), N, Np, s1);
      cplx acc = 0.0;
      for (int a = 0; a < k0; ++a)
        for (int b = 0; b < k1; ++b) acc += padded[s0[a] * Np + s1[b]];
      out[m0 * N + m1] = acc;
    }
  }
  return out;
}

std::vector<double> padded_samples(const Field& f, std::size_t P) {
  const Grid& g = f.grid();
  std::vector<cplx> spec = spectrum_of(f);
  return inverse_raw(g.dim(), g.half_length(), P * g.points_per_dim(), pad_spectrum(g, spec, P));
}

Field from_padded_samples(const Grid& g, std::span<const double> phys, std::size_t P) {
  auto padded = forward_raw(g.dim(), g.half_length(), P * g.points_per_dim(), phys);
  return field_from_spectrum(g, truncate_spectrum(g, padded, P));
}

}  // namespace

namespace detail {

void inverse_complex(const Grid& g, std::span<const cplx> spec, std::span<cplx> out) {
  const int n = g.dim();
  const std::size_t N = g.points_per_dim(), total = g.size();
  std::vector<cplx> in(total);
  for (std::size_t m = 0; m < total; ++m) in[m] = spec[m] * parity(n, N, m);
  dft(n, N, in.data(), out.data(), +1);
  const double w = 1.0 / g.volume();
  for (std::size_t i = 0; i < total; ++i) out[i] *= w;
}

std::vector<cplx> power_spectrum(const Grid& g, std::span<const cplx> spec, int lambda) {
  if (lambda < 2) throw std::invalid_argument("pointwise_power: lambda must be an integer >= 2");
  const std::size_t P = static_cast<std::size_t>(lambda + 2) / 2;
  const std::size_t Np = P * g.points_per_dim();
  auto phys = inverse_raw(g.dim(), g.half_length(), Np, pad_spectrum(g, spec, P));
  for (double& x : phys) {
    double y = x;
    for (int k = 1; k < lambda; ++k) y *= x;
    x = y;
  }
  return truncate_spectrum(g, forward_raw(g.dim(), g.half_length(), Np, phys), P);
}

void inverse_real(const Grid& g, std::span<const cplx> spec, std::span<double> out) {
  auto phys = inverse_raw(g.dim(), g.half_length(), g.points_per_dim(), spec);
  std::copy(phys.begin(), phys.end(), out.begin());
}

}  // namespace detail

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

Field Field::from_physical(const Grid& g, std::vector<double> phys) {
  if (phys.size() != g.size()) throw std::invalid_argument("physical sample count does not match grid");
  Field f(g);
  f.phys_ = std::move(phys);
  return f;
}

Field Field::from_spectral(const Grid& g, std::vector<cplx> spec) {
  if (spec.size() != g.size()) throw std::invalid_argument("spectral coefficient count does not match grid");
  Field f(g);
  f.spec_ = std::move(spec);
  return f;
}

Field Field::from_both(const Grid& g, std::vector<double> phys, std::vector<cplx> spec) {
  if (phys.size() != g.size() || spec.size() != g.size())
    throw std::invalid_argument("representation size does not match grid");
  Field f(g);
  f.phys_ = std::move(phys);
  f.spec_ = std::move(spec);
  return f;
}

Field Field::zeros(const Grid& g) {
  return from_both(g, std::vector<double>(g.size()), std::vector<cplx>(g.size()));
}

Field Field::sample(const Grid& g, const std::function<double(double, double)>& fn) {
  const std::size_t N = g.points_per_dim();
  std::vector<double> phys(g.size());
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < N; ++i) phys[i] = fn(g.coordinate(i), 0.0);
  } else {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) phys[i * N + k] = fn(g.coordinate(i), g.coordinate(k));
  }
  return from_physical(g, std::move(phys));
}

std::span<const double> Field::physical() const {
  if (phys_.empty()) throw std::logic_error("field has no physical representation");
  return phys_;
}

std::span<const cplx> Field::spectral() const {
  if (spec_.empty()) throw std::logic_error("field has no spectral representation");
  return spec_;
}

Field forward_transform(const Field& f) {
  const Grid& g = f.grid();
  auto phys = f.physical();
  auto spec = forward_raw(g.dim(), g.half_length(), g.points_per_dim(), phys);
  return Field::from_both(g, std::vector<double>(phys.begin(), phys.end()), std::move(spec));
}

Field inverse_transform(const Field& f) {
  const Grid& g = f.grid();
  auto spec = f.spectral();
  auto phys = inverse_raw(g.dim(), g.half_length(), g.points_per_dim(), spec);
  return Field::from_both(g, std::move(phys), std::vector<cplx>(spec.begin(), spec.end()));
}

Field synchronized(const Field& f) {
  if (f.has_physical() && f.has_spectral()) return f;
  return f.has_physical() ? forward_transform(f) : inverse_transform(f);
}

std::vector<cplx> spectrum_of(const Field& f) {
  if (f.has_spectral()) {
    auto s = f.spectral();
    return {s.begin(), s.end()};
  }
  const Grid& g = f.grid();
  return forward_raw(g.dim(), g.half_length(), g.points_per_dim(), f.physical());
}

std::vector<double> samples_of(const Field& f) {
  if (f.has_physical()) {
    auto s = f.physical();
    return {s.begin(), s.end()};
  }
  const Grid& g = f.grid();
  return inverse_raw(g.dim(), g.half_length(), g.points_per_dim(), f.spectral());
}

Field field_from_spectrum(const Grid& g, std::vector<cplx> spec) {
  auto phys = inverse_raw(g.dim(), g.half_length(), g.points_per_dim(), spec);
  return Field::from_both(g, std::move(phys), std::move(spec));
}

Field apply_multiplier(const SpectralSymbol& m, const Field& f) {
  if (m.values.size() != f.grid().size())
    throw std::invalid_argument("apply_multiplier: grid mismatch for symbol '" + m.label + "'");
  auto spec = spectrum_of(f);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= m.values[i];
  return field_from_spectrum(f.grid(), std::move(spec));
}

Field pointwise_power(const Field& f, int lambda) {
  auto spec = spectrum_of(f);
  return field_from_spectrum(f.grid(), detail::power_spectrum(f.grid(), spec, lambda));
}

Field dealiased_product(std::span<const Field> factors) {
  if (factors.size() < 2) throw std::invalid_argument("dealiased_product: need at least two factors");
  const Grid& g = factors.front().grid();
  for (const Field& f : factors) require_same_grid(g, f.grid(), "dealiased_product");
  const std::size_t P = (factors.size() + 2) / 2;
  auto acc = padded_samples(factors[0], P);
  for (std::size_t k = 1; k < factors.size(); ++k) {
    auto next = padded_samples(factors[k], P);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= next[i];
  }
  return from_padded_samples(g, acc, P);
}

double lp_norm(std::span<const double> values, double cell_volume, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
  double peak = 0.0;
  for (double x : values) peak = std::max(peak, std::abs(x));
  if (peak == 0.0 || std::isinf(p)) return peak;
  const double inv = 1.0 / peak;
  double acc = 0.0;
  for (double x : values) {
    const double r = x * inv;
    acc += detail::half_power(r * r, p);
  }
  return peak * std::pow(acc * cell_volume, 1.0 / p);
}

double lp_norm(const Field& f, double p) {
  return lp_norm(f.physical(), f.grid().cell_volume(), p);
}

namespace {

template <class Op>
Field combine(const Field& a, const Field& b, Op op, const char* where) {
  require_same_grid(a.grid(), b.grid(), where);
  if (a.has_physical() && b.has_physical()) {
    auto x = a.physical(), y = b.physical();
    std::vector<double> phys(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) phys[i] = op(x[i], y[i]);
    if (a.has_spectral() && b.has_spectral()) {
      auto s = a.spectral(), t = b.spectral();
      std::vector<cplx> spec(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) spec[i] = op(s[i], t[i]);
      return Field::from_both(a.grid(), std::move(phys), std::move(spec));
    }
    return Field::from_physical(a.grid(), std::move(phys));
  }
  auto s = spectrum_of(a), t = spectrum_of(b);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = op(s[i], t[i]);
  return Field::from_spectral(a.grid(), std::move(s));
}

}  // namespace

Field operator+(const Field& a, const Field& b) {
  return combine(a, b, [](auto x, auto y) { return x + y; }, "field addition");
}

Field operator-(const Field& a, const Field& b) {
  return combine(a, b, [](auto x, auto y) { return x - y; }, "field subtraction");
}

Field operator*(double c, const Field& f) {
  std::vector<double> phys;
  std::vector<cplx> spec;
  if (f.has_physical()) {
    auto x = f.physical();
    phys.assign(x.begin(), x.end());
    for (double& v : phys) v *= c;
  }
  if (f.has_spectral()) {
    auto s = f.spectral();
    spec.assign(s.begin(), s.end());
    for (cplx& v : spec) v *= c;
  }
  if (phys.empty()) return Field::from_spectral(f.grid(), std::move(spec));
  if (spec.empty()) return Field::from_physical(f.grid(), std::move(phys));
  return Field::from_both(f.grid(), std::move(phys), std::move(spec));
}

}  // namespace bqlab
