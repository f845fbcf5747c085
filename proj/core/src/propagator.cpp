#include "bqlab/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace bqlab {

Component parse_component(std::string_view name) {
  if (name == "B1") return Component::B1;
  if (name == "B2") return Component::B2;
  if (name == "B3") return Component::B3;
  if (name == "l2") return Component::L2;
  throw std::invalid_argument("unknown propagator component '" + std::string(name) + "'");
}

std::string to_string(Component c) {
  switch (c) {
    case Component::B1: return "B1";
    case Component::B2: return "B2";
    case Component::B3: return "B3";
    case Component::L2: return "l2";
  }
  throw std::invalid_argument("unknown propagator component");
}

StatePair::StatePair(Field u_, Field v_) : u(std::move(u_)), v(std::move(v_)) {
  require_same_grid(u.grid(), v.grid(), "StatePair");
}

StatePair StatePair::zeros(const Grid& g) { return {Field::zeros(g), Field::zeros(g)}; }

StatePair operator+(const StatePair& a, const StatePair& b) { return {a.u + b.u, a.v + b.v}; }
StatePair operator-(const StatePair& a, const StatePair& b) { return {a.u - b.u, a.v - b.v}; }
StatePair operator*(double c, const StatePair& z) { return {c * z.u, c * z.v}; }

double l2_pair_norm(const StatePair& z) {
  const Field u = synchronized(z.u), v = synchronized(z.v);
  double a = lp_norm(u, 2.0), b = lp_norm(v, 2.0);
  return std::hypot(a, b);
}

double bracket(double abs_xi) { return std::sqrt(1.0 + abs_xi * abs_xi); }
double omega(double abs_xi) { return abs_xi * bracket(abs_xi); }
double group_speed(double abs_xi) { return (1.0 + 2.0 * abs_xi * abs_xi) / bracket(abs_xi); }

Lattice::Lattice(const Grid& g) : grid(g), abs_xi(g.abs_frequencies()) {
  bracket.resize(abs_xi.size());
  omega.resize(abs_xi.size());
  for (std::size_t m = 0; m < abs_xi.size(); ++m) {
    bracket[m] = bqlab::bracket(abs_xi[m]);
    omega[m] = abs_xi[m] * bracket[m];
  }
}

PropagatorBank::PropagatorBank(std::shared_ptr<const Lattice> lattice, double t)
    : lattice_(std::move(lattice)), t_(t) {
  const auto& L = *lattice_;
  const std::size_t n = L.abs_xi.size();
  b1_.resize(n);
  b2_.resize(n);
  b3_.resize(n);
  l2_.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double c = std::cos(t * L.omega[m]);
    const double s = std::sin(t * L.omega[m]);
    const double r = L.abs_xi[m] / L.bracket[m];
    b1_[m] = c;
    l2_[m] = s;
    if (L.abs_xi[m] == 0.0) {
      b2_[m] = 0.0;
      b3_[m] = t;
    } else {
      b2_[m] = -r * s;
      b3_[m] = s / r;
    }
  }
}

PropagatorBank::PropagatorBank(const Grid& g, double t)
    : PropagatorBank(std::make_shared<const Lattice>(g), t) {}

std::span<const double> PropagatorBank::symbol(Component c) const {
  switch (c) {
    case Component::B1: return b1_;
    case Component::B2: return b2_;
    case Component::B3: return b3_;
    case Component::L2: return l2_;
  }
  throw std::invalid_argument("unknown propagator component");
}

SpectralSymbol PropagatorBank::as_symbol(Component c) const {
  auto s = symbol(c);
  return {std::vector<cplx>(s.begin(), s.end()), to_string(c)};
}

void PropagatorBank::apply(std::span<const cplx> u, std::span<const cplx> v, std::span<cplx> out_u,
                           std::span<cplx> out_v) const {
  const std::size_t n = b1_.size();
  if (u.size() != n || v.size() != n || out_u.size() != n || out_v.size() != n)
    throw std::invalid_argument("PropagatorBank::apply: size mismatch");
  for (std::size_t m = 0; m < n; ++m) {
    const cplx a = u[m], b = v[m];
    out_u[m] = b1_[m] * a + b2_[m] * b;
    out_v[m] = b3_[m] * a + b1_[m] * b;
  }
}

Propagator::Propagator(const Grid& g, std::size_t capacity)
    : lattice_(std::make_shared<const Lattice>(g)), capacity_(capacity == 0 ? 1 : capacity) {}

std::shared_ptr<const PropagatorBank> Propagator::bank(double t) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = banks_.find(t); it != banks_.end()) return it->second;
  }
  auto fresh = std::make_shared<const PropagatorBank>(lattice_, t);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = banks_.emplace(t, fresh);
  if (inserted) {
    order_.push_back(t);
    while (order_.size() > capacity_) {
      banks_.erase(order_.front());
      order_.pop_front();
    }
  }
  return it->second;
}

namespace {

StatePair group_with(const PropagatorBank& b, const StatePair& z) {
  require_same_grid(b.grid(), z.grid(), "apply_group");
  auto u = spectrum_of(z.u), v = spectrum_of(z.v);
  b.apply(u, v, u, v);
  return {field_from_spectrum(b.grid(), std::move(u)), field_from_spectrum(b.grid(), std::move(v))};
}

Field component_with(const PropagatorBank& b, Component c, const Field& g) {
  require_same_grid(b.grid(), g.grid(), "apply_component");
  auto s = b.symbol(c);
  auto spec = spectrum_of(g);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= s[m];
  return field_from_spectrum(g.grid(), std::move(spec));
}

}  // namespace

StatePair Propagator::apply_group(double t, const StatePair& z) const { return group_with(*bank(t), z); }

Field Propagator::apply_component(Component c, double t, const Field& g) const {
  return component_with(*bank(t), c, g);
}

StatePair apply_group(double t, const StatePair& z) {
  return group_with(PropagatorBank(z.grid(), t), z);
}

Field apply_component(Component c, double t, const Field& g) {
  return component_with(PropagatorBank(g.grid(), t), c, g);
}

Field apply_bessel(double s, const Field& f) {
  const Grid& g = f.grid();
  auto xi = g.abs_frequencies();
  auto spec = spectrum_of(f);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= std::pow(1.0 + xi[m] * xi[m], 0.5 * s);
  return field_from_spectrum(g, std::move(spec));
}

Field apply_riesz_j(const Field& f) {
  const Grid& g = f.grid();
  auto xi = g.abs_frequencies();
  auto spec = spectrum_of(f);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= xi[m] / bracket(xi[m]);
  return field_from_spectrum(g, std::move(spec));
}

}  // namespace bqlab

namespace bqlab {

double max_group_speed(const Field& f, double threshold) {
  auto spec = spectrum_of(f);
  auto xi = f.grid().abs_frequencies();
  double peak = 0.0;
  for (const cplx& c : spec) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return 0.0;
  double v = 0.0;
  for (std::size_t m = 0; m < spec.size(); ++m)
    if (std::abs(spec[m]) >= threshold * peak) v = std::max(v, group_speed(xi[m]));
  return v;
}

double wraparound_horizon(const Grid& g, double speed) {
  if (speed <= 0.0) return std::numeric_limits<double>::infinity();
  return g.half_length() / (2.0 * speed);
}

}  // namespace bqlab
