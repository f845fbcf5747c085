#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bqlab/field.hpp"

namespace bqlab {

/// C-infinity bump: 1 on |r| <= 1/2, 0 on |r| >= 1.
double bump(double r);
/// One-dimensional normalized window sigma_0(eta) = theta(eta) / sum_l theta(eta - l).
double window_1d(double eta);

using BoxIndex = std::array<int, 2>;

/// Frequency-uniform decomposition sampled on a grid.
///
/// Windows are tensor products of window_1d, so each box stores one sparse
/// table per axis of (storage slot, value) pairs.
class WindowBank {
 public:
  struct Entry {
    std::size_t slot;
    double value;
  };

  explicit WindowBank(const Grid& g);

  const Grid& grid() const noexcept { return grid_; }
  /// Box indices run over |k|_inf <= max_index().
  int max_index() const noexcept { return K_; }
  /// Boxes whose window touches at least one lattice frequency.
  std::span<const BoxIndex> boxes() const noexcept { return boxes_; }
  std::span<const Entry> entries_1d(int k) const;
  bool in_range(const BoxIndex& k) const noexcept;

  /// sigma_k at a flat spectral slot.
  double value(const BoxIndex& k, std::size_t flat) const;
  /// Neighbor set: l with supp sigma_0 and supp sigma_l overlapping on the lattice.
  std::span<const BoxIndex> neighbors() const noexcept { return neighbors_; }
  /// min of sigma_0 over lattice points of the unit cube |xi|_inf <= 1/2.
  double cube_lower_bound() const noexcept { return lower_bound_; }

  /// sigma_k * spec written into out (zeroed first). Returns false when the product vanishes.
  bool window_spectrum(const BoxIndex& k, std::span<const cplx> spec, std::span<cplx> out) const;

 private:
  Grid grid_;
  int K_;
  std::vector<std::vector<Entry>> tables_;
  std::vector<BoxIndex> boxes_;
  std::vector<BoxIndex> neighbors_;
  double lower_bound_;
};

WindowBank build_windows(const Grid& g);

/// Box projection of a real field; complex valued unless k = 0.
struct BoxProjection {
  Grid grid;
  std::vector<cplx> spec;
  std::vector<cplx> samples;
};

/// Zero projection when k lies outside the bank range.
BoxProjection box_project(const BoxIndex& k, const Field& f, const WindowBank& bank);

double lp_norm(std::span<const cplx> values, double cell_volume, double p);

}  // namespace bqlab
