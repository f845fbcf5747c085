#pragma once

#include <complex>
#include <cstddef>

namespace bqlab::detail {

using cplx = std::complex<double>;

/// Unnormalized complex DFT on an n-dimensional cube of side N.
/// sign = -1 is forward (FFTW_FORWARD), +1 is backward. in and out must not alias.
void dft(int n, std::size_t N, const cplx* in, cplx* out, int sign);

}  // namespace bqlab::detail
