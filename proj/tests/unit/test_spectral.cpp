#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bqlab/field.hpp"
#include "bqlab/grid.hpp"
#include "bqlab/propagator.hpp"

using namespace bqlab;
using std::numbers::pi;

namespace {

std::vector<double> gaussian_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> x(n);
  for (double& v : x) v = nd(rng);
  return x;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Grid, LatticeArithmetic) {
  const Grid g = make_grid(1, 16.0, 256);
  EXPECT_NEAR(g.frequency_spacing(), pi / 16.0, 1e-15);
  EXPECT_NEAR(g.frequency_spacing(), 0.19635, 1e-5);
  EXPECT_NEAR(g.max_frequency(), 8.0 * pi, 1e-12);
  EXPECT_DOUBLE_EQ(make_grid(1, 64.0, 4096).spacing(), 1.0 / 32.0);
  const Grid g2 = make_grid(2, 16.0, 128);
  EXPECT_EQ(g2.size(), 128u * 128u);
  EXPECT_NEAR(g2.frequency_spacing(), pi / 16.0, 1e-15);
}

TEST(Grid, StorageOrderRoundTrips) {
  const Grid g = make_grid(1, 3.0, 64);
  for (std::size_t m = 0; m < 64; ++m) EXPECT_EQ(g.storage_index(g.signed_index(m)), m);
  EXPECT_EQ(g.signed_index(31), 31);
  EXPECT_EQ(g.signed_index(32), -32);
  EXPECT_EQ(g.signed_index(63), -1);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(make_grid(1, 1.0, 7), std::invalid_argument);
  EXPECT_THROW(make_grid(1, 1.0, 4), std::invalid_argument);
  EXPECT_THROW(make_grid(1, 1.0, 24), std::invalid_argument);
  EXPECT_THROW(make_grid(1, 0.0, 64), std::invalid_argument);
  EXPECT_THROW(make_grid(1, -2.0, 64), std::invalid_argument);
  EXPECT_THROW(make_grid(3, 1.0, 16), std::invalid_argument);
}

TEST(Transform, ZeroFieldHasZeroSpectrum) {
  const Grid g = make_grid(1, 4.0, 32);
  for (cplx z : spectrum_of(Field::zeros(g))) EXPECT_EQ(z, cplx(0.0));
}

TEST(Transform, CosineHasTwoCoefficientsOfSizeL) {
  const double L = 12.0;
  const Grid g = make_grid(1, L, 128);
  const int j0 = 5;
  const double k = j0 * g.frequency_spacing();
  const auto spec = spectrum_of(Field::sample(g, [k](double x, double) { return std::cos(k * x); }));
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const int j = g.signed_index(m);
    const double want = std::abs(j) == j0 ? L : 0.0;
    EXPECT_NEAR(spec[m].real(), want, 1e-12 * L) << "j = " << j;
    EXPECT_NEAR(spec[m].imag(), 0.0, 1e-12 * L) << "j = " << j;
  }
}

TEST(Transform, RoundTripAndParseval) {
  for (auto [n, N] : {std::pair{1, 512}, {2, 64}}) {
    const Grid g = make_grid(n, 7.5, N);
    const auto x = gaussian_noise(g.size(), 11 + n);
    const Field f = forward_transform(Field::from_physical(g, x));
    const auto spec = f.spectral();
    double phys = 0.0, freq = 0.0;
    for (double v : x) phys += v * v * g.cell_volume();
    for (cplx z : spec) freq += std::norm(z) / g.volume();
    EXPECT_NEAR(freq / phys, 1.0, 1e-12);
    const Field back = inverse_transform(Field::from_spectral(g, {spec.begin(), spec.end()}));
    EXPECT_LE(max_abs_diff(back.physical(), x), 1e-12 * 5.0);
  }
}

TEST(Transform, MissingRepresentationThrows) {
  const Grid g = make_grid(1, 1.0, 16);
  const Field phys_only = Field::zeros(g);
  EXPECT_THROW((void)Field::from_physical(g, std::vector<double>(8)), std::invalid_argument);
  EXPECT_TRUE(phys_only.has_physical());
  EXPECT_THROW((void)inverse_transform(Field::from_physical(g, std::vector<double>(16))), std::logic_error);
}

TEST(Multiplier, IdentityAndBracketSquared) {
  // L = 16 pi puts xi = 1 on the lattice (j = 16)
  const Grid g = make_grid(1, 16.0 * pi, 512);
  const Field f = Field::sample(g, [](double x, double) { return std::cos(x); });
  const auto xi = g.abs_frequencies();
  SpectralSymbol one{std::vector<cplx>(g.size(), 1.0), "one"};
  SpectralSymbol br2{{}, "bracket^2"};
  for (double a : xi) br2.values.push_back(1.0 + a * a);
  EXPECT_LE(max_abs_diff(samples_of(apply_multiplier(one, f)), samples_of(f)), 1e-13);
  const auto doubled = samples_of(apply_multiplier(br2, f));
  const auto base = samples_of(f);
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(doubled[i], 2.0 * base[i], 1e-12);
}

TEST(Multiplier, RieszOnConstantVanishes) {
  const Grid g = make_grid(1, 5.0, 64);
  const Field c = Field::sample(g, [](double, double) { return 3.25; });
  for (double v : samples_of(apply_riesz_j(c))) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Power, ConstantCubes) {
  const Grid g = make_grid(2, 2.0, 16);
  const Field c = Field::sample(g, [](double, double) { return -1.5; });
  for (double v : samples_of(pointwise_power(c, 3))) EXPECT_NEAR(v, -3.375, 1e-13);
}

TEST(Power, CosineSquaredHasNoAliasing) {
  const Grid g = make_grid(1, pi, 16);  // xi = 1 is j = 1, 2 xi stays below N/2
  const Field f = Field::sample(g, [](double x, double) { return std::cos(x); });
  const auto spec = spectrum_of(pointwise_power(f, 2));
  // (1 + cos 2x) / 2: coefficient 2L/2 = pi at j = 0, pi/2 at j = +-2
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const int j = g.signed_index(m);
    const double want = j == 0 ? pi : std::abs(j) == 2 ? pi / 2.0 : 0.0;
    EXPECT_NEAR(std::abs(spec[m] - cplx(want)), 0.0, 1e-13) << "j = " << j;
  }
}

TEST(Power, MatchesBruteForceConvolution) {
  const Grid g = make_grid(1, 3.0, 32);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::vector<cplx> spec(32);
  for (int j = -15; j <= 15; ++j) spec[g.storage_index(j)] = {nd(rng), nd(rng)};
  std::vector<cplx> sym(32);
  for (int j = -15; j <= 15; ++j)
    sym[g.storage_index(j)] = 0.5 * (spec[g.storage_index(j)] + std::conj(spec[g.storage_index(-j)]));
  const Field f = field_from_spectrum(g, sym);
  const auto got = spectrum_of(pointwise_power(f, 2));
  double peak = 0.0, err = 0.0;
  for (int m = -15; m <= 15; ++m) {
    cplx want = 0.0;
    for (int j = -15; j <= 15; ++j)
      if (std::abs(m - j) <= 15) want += sym[g.storage_index(j)] * sym[g.storage_index(m - j)];
    want /= g.volume();
    peak = std::max(peak, std::abs(want));
    err = std::max(err, std::abs(got[g.storage_index(m)] - want));
  }
  EXPECT_LE(err / peak, 1e-12);
}

TEST(Power, ProductOfDistinctFactorsMatchesProductOfSamples) {
  // low band factors: the product is exactly representable, so it equals pointwise multiplication
  const Grid g = make_grid(1, pi, 64);
  const Field a = Field::sample(g, [](double x, double) { return std::cos(3 * x) + 0.2; });
  const Field b = Field::sample(g, [](double x, double) { return std::sin(2 * x); });
  const Field c = Field::sample(g, [](double x, double) { return 1.0 - std::cos(x); });
  const std::vector<Field> fs{a, b, c};
  const auto got = samples_of(dealiased_product(fs));
  const auto sa = samples_of(a), sb = samples_of(b), sc = samples_of(c);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], sa[i] * sb[i] * sc[i], 1e-13);
}

TEST(LpNorm, ConstantsAndCosine) {
  const Grid g = make_grid(1, 16.0, 256);
  const Field one = Field::sample(g, [](double, double) { return 1.0; });
  for (double p : {1.0, 2.0, 3.5, 6.0}) EXPECT_NEAR(lp_norm(one, p), std::pow(32.0, 1.0 / p), 1e-12);
  EXPECT_DOUBLE_EQ(lp_norm(one, kInf), 1.0);
  EXPECT_EQ(lp_norm(Field::zeros(g), 3.0), 0.0);
  const Grid gc = make_grid(1, 16.0 * pi, 1024);
  const Field c = Field::sample(gc, [](double x, double) { return std::cos(x); });
  EXPECT_NEAR(lp_norm(c, 2.0), std::sqrt(gc.volume() / 2.0), 1e-10);
}

TEST(LpNorm, RejectsExponentBelowOne) {
  const Grid g = make_grid(1, 1.0, 16);
  EXPECT_THROW((void)lp_norm(Field::zeros(g), 0.5), std::invalid_argument);
}

TEST(LpNorm, IntegerAndGeneralExponentsAgreeWithPow) {
  const Grid g = make_grid(1, 2.0, 128);
  const auto x = gaussian_noise(g.size(), 3);
  const Field f = Field::from_physical(g, x);
  for (double p : {1.0, 1.2, 2.0, 3.0, 4.0, 5.0, 6.0, 7.5, 8.0}) {
    double acc = 0.0;
    for (double v : x) acc += std::pow(std::abs(v), p);
    EXPECT_NEAR(lp_norm(f, p), std::pow(acc * g.cell_volume(), 1.0 / p), 1e-12 * lp_norm(f, p)) << p;
  }
}

TEST(FieldAlgebra, GridMismatchThrows) {
  const Field a = Field::zeros(make_grid(1, 1.0, 16));
  const Field b = Field::zeros(make_grid(1, 2.0, 16));
  EXPECT_THROW((void)(a + b), std::invalid_argument);
}
