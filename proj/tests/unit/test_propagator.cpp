#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bqlab/propagator.hpp"

using namespace bqlab;
using std::numbers::pi;

namespace {

Field noise(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> x(g.size());
  for (double& v : x) v = nd(rng);
  return Field::from_physical(g, std::move(x));
}

double max_diff(const Field& a, const Field& b) {
  const auto x = samples_of(a), y = samples_of(b);
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace

TEST(Dispersion, Values) {
  EXPECT_EQ(omega(0.0), 0.0);
  EXPECT_NEAR(omega(1.0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(omega(3.0), 3.0 * std::sqrt(10.0), 1e-13);
  EXPECT_NEAR(omega(3.0), 9.48683, 1e-5);
  EXPECT_NEAR(bracket(0.0), 1.0, 0.0);
  EXPECT_NEAR(group_speed(0.0), 1.0, 0.0);
}

TEST(Dispersion, GroupSpeedIsDerivativeOfOmega) {
  for (double k : {0.1, 0.5, 1.0, 2.5, 7.0}) {
    const double h = 1e-5;
    EXPECT_NEAR(group_speed(k), (omega(k + h) - omega(k - h)) / (2 * h), 1e-8 * group_speed(k));
  }
}

TEST(Group, IdentityAtZero) {
  const Grid g = make_grid(1, 6.0, 128);
  const StatePair z(noise(g, 1), noise(g, 2));
  const StatePair w = apply_group(0.0, z);
  EXPECT_LE(max_diff(w.u, z.u), 1e-13);
  EXPECT_LE(max_diff(w.v, z.v), 1e-13);
}

TEST(Group, SingleModeClosedForm) {
  const Grid g = make_grid(1, 4.0 * pi, 256);
  const double k = 6 * g.frequency_spacing();
  const Field u0 = Field::sample(g, [k](double x, double) { return std::cos(k * x); });
  for (double t : {0.3, 1.1, -2.0}) {
    const StatePair z = apply_group(t, StatePair(u0, Field::zeros(g)));
    const Field u = Field::sample(g, [&](double x, double) { return std::cos(t * omega(k)) * std::cos(k * x); });
    const Field v = Field::sample(
        g, [&](double x, double) { return bracket(k) / k * std::sin(t * omega(k)) * std::cos(k * x); });
    EXPECT_LE(max_diff(z.u, u), 1e-12);
    EXPECT_LE(max_diff(z.v, v), 1e-12);
  }
}

TEST(Group, LawOnRandomStates) {
  const Grid g = make_grid(1, 10.0, 128);
  const Propagator prop(g);
  const StatePair z(noise(g, 3), noise(g, 4));
  const StatePair a = prop.apply_group(0.7, prop.apply_group(-0.3, z));
  const StatePair b = prop.apply_group(0.4, z);
  EXPECT_LE(l2_pair_norm(a - b), 1e-10 * l2_pair_norm(z));
}

TEST(Group, CachedAndFreeActionsAgree) {
  const Grid g = make_grid(2, 3.0, 32);
  const Propagator prop(g, 2);
  const Field f = noise(g, 5);
  for (double t : {0.1, 0.2, 0.3, 0.1}) {
    for (Component c : {Component::B1, Component::B2, Component::B3, Component::L2})
      EXPECT_EQ(max_diff(prop.apply_component(c, t, f), apply_component(c, t, f)), 0.0);
  }
}

TEST(Components, CosineHalfPeriodNegates) {
  const Grid g = make_grid(1, 4.0 * pi, 128);
  const double k = 3 * g.frequency_spacing();
  const Field f = Field::sample(g, [k](double x, double) { return std::cos(k * x); });
  EXPECT_LE(max_diff(apply_component(Component::B1, pi / omega(k), f), -1.0 * f), 1e-12);
}

TEST(Components, L2KillsConstantsAndContracts) {
  const Grid g = make_grid(1, 5.0, 128);
  const Field c = Field::sample(g, [](double, double) { return 2.0; });
  for (double v : samples_of(apply_component(Component::L2, 3.7, c))) EXPECT_NEAR(v, 0.0, 1e-14);
  const Field f = noise(g, 6);
  for (double t : {0.5, 4.0, 40.0}) EXPECT_LE(lp_norm(apply_component(Component::L2, t, f), 2.0), lp_norm(f, 2.0));
}

TEST(Components, B3AtZeroFrequencyIsTime) {
  const Grid g = make_grid(1, 5.0, 64);
  const Field c = Field::sample(g, [](double, double) { return 1.0; });
  for (double v : samples_of(apply_component(Component::B3, 2.5, c))) EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(Components, L2EqualsRieszOfB3) {
  const Grid g = make_grid(2, 4.0, 32);
  const Field f = noise(g, 8);
  for (double t : {0.4, 3.0})
    EXPECT_LE(max_diff(apply_component(Component::L2, t, f), apply_riesz_j(apply_component(Component::B3, t, f))),
              1e-13);
}

TEST(Components, NamesRoundTrip) {
  for (Component c : {Component::B1, Component::B2, Component::B3, Component::L2})
    EXPECT_EQ(parse_component(to_string(c)), c);
  EXPECT_THROW(parse_component("B4"), std::invalid_argument);
}

TEST(Bessel, ZeroOneAndInverse) {
  const Grid g = make_grid(1, 16.0 * pi, 512);
  const Field mode = Field::sample(g, [](double x, double) { return std::cos(x); });
  const Field f = noise(g, 9);
  EXPECT_LE(max_diff(apply_bessel(0.0, f), f), 1e-13);
  EXPECT_LE(max_diff(apply_bessel(1.0, mode), std::sqrt(2.0) * mode), 1e-12);
  EXPECT_LE(max_diff(apply_bessel(-1.0, apply_bessel(1.0, f)), f), 1e-12);
}

TEST(Horizon, SpeedAndWraparound) {
  const Grid g = make_grid(1, 100.0, 1024);
  const double k = 40 * g.frequency_spacing();
  const Field f = Field::sample(g, [k](double x, double) { return std::cos(k * x); });
  EXPECT_NEAR(max_group_speed(f), group_speed(k), 1e-12);
  EXPECT_EQ(max_group_speed(Field::zeros(g)), 0.0);
  EXPECT_DOUBLE_EQ(wraparound_horizon(g, 2.0), 25.0);
}
