#pragma once

#include <cstddef>
#include <vector>

namespace bqlab {

/// Periodic box [-L, L)^n sampled with N points per dimension.
///
/// Physical and spectral arrays are stored row-major with axis 0 slowest.
/// Spectral arrays use FFT ordering: storage slot m holds the signed index
/// j = m for m < N/2 and j = m - N otherwise, with frequency j*pi/L.
class Grid {
 public:
  Grid(int n, double L, std::size_t N);

  int dim() const noexcept { return n_; }
  double half_length() const noexcept { return L_; }
  std::size_t points_per_dim() const noexcept { return N_; }
  std::size_t size() const noexcept { return n_ == 1 ? N_ : N_ * N_; }

  double spacing() const noexcept { return h_; }
  double frequency_spacing() const noexcept;
  /// Largest represented |xi|_inf, (N/2) pi / L.
  double max_frequency() const noexcept;
  double volume() const noexcept;
  double cell_volume() const noexcept;

  double coordinate(std::size_t i) const noexcept { return -L_ + static_cast<double>(i) * h_; }
  int signed_index(std::size_t m) const noexcept;
  std::size_t storage_index(int j) const noexcept;
  double frequency(std::size_t m) const noexcept;

  /// Euclidean |xi| at every flat spectral slot.
  std::vector<double> abs_frequencies() const;
  /// Signed per-axis indices of a flat spectral slot (second entry 0 for n = 1).
  void split_index(std::size_t flat, int& j0, int& j1) const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.L_ == b.L_ && a.N_ == b.N_;
  }

 private:
  int n_;
  double L_;
  std::size_t N_;
  double h_;
};

Grid make_grid(int n, double L, std::size_t N);

}  // namespace bqlab
