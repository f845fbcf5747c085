#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bqlab/field.hpp"

namespace bqlab::detail {

/// Complex samples of a (not necessarily Hermitian) spectrum on grid g.
void inverse_complex(const Grid& g, std::span<const cplx> spec, std::span<cplx> out);
/// Real samples of a Hermitian spectrum on grid g.
void inverse_real(const Grid& g, std::span<const cplx> spec, std::span<double> out);

/// x^(p/2) for x >= 0; integer and half-integer p/2 avoid pow.
inline double half_power(double x, double p) {
  const double h = 0.5 * p;
  const double twice = 2.0 * h;
  if (twice == std::floor(twice) && h <= 16.0) {
    const int whole = int(h);
    double r = 1.0;
    for (int i = 0; i < whole; ++i) r *= x;
    return h > whole ? r * std::sqrt(x) : r;
  }
  return std::pow(x, h);
}

/// Spectrum of u^lambda with zero-padding dealiasing, u given by its spectrum.
std::vector<cplx> power_spectrum(const Grid& g, std::span<const cplx> spec, int lambda);

}  // namespace bqlab::detail
