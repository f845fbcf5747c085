#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bqlab/field.hpp"

namespace bqlab {

enum class Component { B1, B2, B3, L2 };

Component parse_component(std::string_view name);
std::string to_string(Component c);

/// The pair [u, v] acted on by the linear group.
struct StatePair {
  Field u;
  Field v;

  StatePair(Field u_, Field v_);
  static StatePair zeros(const Grid& g);
  const Grid& grid() const noexcept { return u.grid(); }
};

StatePair operator+(const StatePair& a, const StatePair& b);
StatePair operator-(const StatePair& a, const StatePair& b);
StatePair operator*(double c, const StatePair& z);
/// sqrt(|u|_2^2 + |v|_2^2).
double l2_pair_norm(const StatePair& z);

/// <xi> = (1 + |xi|^2)^(1/2).
double bracket(double abs_xi);
/// Dispersion relation |xi| <xi>.
double omega(double abs_xi);
/// d omega / d|xi| = (1 + 2 xi^2) / <xi>.
double group_speed(double abs_xi);

/// |xi|, <xi> and omega at every spectral slot of a grid.
struct Lattice {
  Grid grid;
  std::vector<double> abs_xi;
  std::vector<double> bracket;
  std::vector<double> omega;

  explicit Lattice(const Grid& g);
};

/// Symbols of B1, B2, B3 and l2 at one time.
class PropagatorBank {
 public:
  PropagatorBank(std::shared_ptr<const Lattice> lattice, double t);
  PropagatorBank(const Grid& g, double t);

  double time() const noexcept { return t_; }
  const Grid& grid() const noexcept { return lattice_->grid; }
  std::span<const double> symbol(Component c) const;
  SpectralSymbol as_symbol(Component c) const;

  /// Fused [B1 B2; B3 B1] action on spectra. Outputs may alias inputs.
  void apply(std::span<const cplx> u, std::span<const cplx> v, std::span<cplx> out_u,
             std::span<cplx> out_v) const;

 private:
  std::shared_ptr<const Lattice> lattice_;
  double t_;
  std::vector<double> b1_, b2_, b3_, l2_;
};

/// Group action with banks cached by time (bounded, oldest evicted first).
class Propagator {
 public:
  explicit Propagator(const Grid& g, std::size_t capacity = 256);

  const Grid& grid() const noexcept { return lattice_->grid; }
  std::shared_ptr<const Lattice> lattice() const noexcept { return lattice_; }
  std::shared_ptr<const PropagatorBank> bank(double t) const;

  StatePair apply_group(double t, const StatePair& z) const;
  Field apply_component(Component c, double t, const Field& g) const;

 private:
  std::shared_ptr<const Lattice> lattice_;
  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  mutable std::map<double, std::shared_ptr<const PropagatorBank>> banks_;
  mutable std::deque<double> order_;
};

StatePair apply_group(double t, const StatePair& z);
Field apply_component(Component c, double t, const Field& g);
/// J^s, symbol <xi>^s.
Field apply_bessel(double s, const Field& f);
/// J^{-1} D, symbol |xi| / <xi>.
Field apply_riesz_j(const Field& f);

}  // namespace bqlab

namespace bqlab {

/// Modes with |fhat| >= threshold * max |fhat| count as occupied.
inline constexpr double kOccupancyThreshold = 1e-6;

/// Largest group speed over the occupied modes of f (0 for the zero field).
double max_group_speed(const Field& f, double threshold = kOccupancyThreshold);
/// Latest time before waves moving at speed v wrap around the box: L / (2 v).
double wraparound_horizon(const Grid& g, double speed);

}  // namespace bqlab
