#include "bqlab/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bqlab {

Grid::Grid(int n, double L, std::size_t N) : n_(n), L_(L), N_(N), h_(0.0) {
  if (n != 1 && n != 2) {
    throw std::invalid_argument("grid dimension must be 1 or 2, got " + std::to_string(n));
  }
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw std::invalid_argument("grid half-length must be positive");
  }
  if (N < 8 || (N & (N - 1)) != 0) {
    throw std::invalid_argument("points per dimension must be a power of two >= 8, got " +
                                std::to_string(N));
  }
  h_ = 2.0 * L / static_cast<double>(N);
}

double Grid::frequency_spacing() const noexcept { return std::numbers::pi / L_; }

double Grid::max_frequency() const noexcept {
  return static_cast<double>(N_ / 2) * frequency_spacing();
}

double Grid::volume() const noexcept { return std::pow(2.0 * L_, n_); }

double Grid::cell_volume() const noexcept { return std::pow(h_, n_); }

int Grid::signed_index(std::size_t m) const noexcept {
  return m < N_ / 2 ? static_cast<int>(m) : static_cast<int>(m) - static_cast<int>(N_);
}

std::size_t Grid::storage_index(int j) const noexcept {
  return j >= 0 ? static_cast<std::size_t>(j) : static_cast<std::size_t>(j + static_cast<int>(N_));
}

double Grid::frequency(std::size_t m) const noexcept {
  return signed_index(m) * frequency_spacing();
}

void Grid::split_index(std::size_t flat, int& j0, int& j1) const noexcept {
  if (n_ == 1) {
    j0 = signed_index(flat);
    j1 = 0;
  } else {
    j0 = signed_index(flat / N_);
    j1 = signed_index(flat % N_);
  }
}

std::vector<double> Grid::abs_frequencies() const {
  std::vector<double> out(size());
  const double dxi = frequency_spacing();
  for (std::size_t m = 0; m < out.size(); ++m) {
    int j0 = 0, j1 = 0;
    split_index(m, j0, j1);
    out[m] = dxi * std::sqrt(double(j0) * j0 + double(j1) * j1);
  }
  return out;
}

Grid make_grid(int n, double L, std::size_t N) { return Grid(n, L, N); }

}  // namespace bqlab
