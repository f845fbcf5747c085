#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bqlab/grid.hpp"

namespace bqlab {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Real scalar field on a Grid. Holds physical samples, spectral coefficients, or both.
///
/// Spectral coefficients approximate the continuum transform,
/// fhat(xi_j) = h^n sum_x f(x) exp(-i x.xi_j).
class Field {
 public:
  static Field from_physical(const Grid& g, std::vector<double> phys);
  static Field from_spectral(const Grid& g, std::vector<cplx> spec);
  static Field from_both(const Grid& g, std::vector<double> phys, std::vector<cplx> spec);
  static Field zeros(const Grid& g);
  /// Samples fn(x, y) at the grid points (y = 0 when n = 1).
  static Field sample(const Grid& g, const std::function<double(double, double)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  bool has_physical() const noexcept { return !phys_.empty(); }
  bool has_spectral() const noexcept { return !spec_.empty(); }

  /// Throws std::logic_error when the representation is absent.
  std::span<const double> physical() const;
  std::span<const cplx> spectral() const;

 private:
  explicit Field(const Grid& g) : grid_(g) {}
  Grid grid_;
  std::vector<double> phys_;
  std::vector<cplx> spec_;
};

/// Fourier multiplier values at every spectral slot.
struct SpectralSymbol {
  std::vector<cplx> values;
  std::string label;
};

Field forward_transform(const Field& f);
Field inverse_transform(const Field& f);
/// Both representations populated; no-op copy when already complete.
Field synchronized(const Field& f);

/// Spectral coefficients of f, transforming when needed.
std::vector<cplx> spectrum_of(const Field& f);
/// Physical samples of f, transforming when needed.
std::vector<double> samples_of(const Field& f);

/// Real field from coefficients with Hermitian symmetry (imaginary round-off dropped).
Field field_from_spectrum(const Grid& g, std::vector<cplx> spec);

Field apply_multiplier(const SpectralSymbol& m, const Field& f);

/// u^lambda evaluated on a grid padded to ceil((lambda+1)/2) N points per dimension.
Field pointwise_power(const Field& f, int lambda);
/// Product of all factors on a grid padded to ceil((m+1)/2) N points per dimension.
Field dealiased_product(std::span<const Field> factors);

/// (sum |f|^p h^n)^(1/p); p = kInf gives max |f|.
double lp_norm(const Field& f, double p);
double lp_norm(std::span<const double> values, double cell_volume, double p);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& f);

void require_same_grid(const Grid& a, const Grid& b, const char* where);

}  // namespace bqlab
