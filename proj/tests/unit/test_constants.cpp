#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "bqlab/constants.hpp"

using namespace bqlab;

namespace {

bool has_clause(const std::vector<Violation>& v, const std::string& needle) {
  for (const auto& x : v)
    if (x.clause.find(needle) != std::string::npos) return true;
  return false;
}

// Composite Simpson on [0, t]; the integrand is smooth, so 20000 panels reach ~1e-14.
double simpson_convolution(double a, double lam, double t) {
  const int n = 20000;
  const double h = t / n;
  auto f = [&](double s) { return std::pow(1.0 + t - s, -a) * std::pow(1.0 + s, -a * lam); };
  double acc = f(0.0) + f(t);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST(Lambda0, ClosedFormAgainstBracketedRoot) {
  EXPECT_NEAR(lambda0(1), (3.0 + std::sqrt(17.0)) / 2.0, 1e-14);
  EXPECT_NEAR(lambda0(1), 3.561553, 1e-6);
  EXPECT_NEAR(lambda0(2), 1.0 + std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(lambda0(2), 2.414214, 1e-6);
  for (int n = 1; n <= 8; ++n) {
    auto q = [n](double l) { return n * l * l - (n + 2) * l - 2.0; };
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t it = 200;
    const auto [lo, hi] = boost::math::tools::bisect(q, 1.0, 10.0, tol, it);
    EXPECT_NEAR(lambda0(n), 0.5 * (lo + hi), 1e-12) << n;
    EXPECT_LE(std::abs(q(lambda0(n))), 1e-12) << n;
  }
}

TEST(Lambda0, DecreasingAndAboveOne) {
  for (int n = 1; n <= 8; ++n) {
    EXPECT_GT(lambda0(n), 1.0);
    if (n > 1) EXPECT_LT(lambda0(n), lambda0(n - 1));
  }
  EXPECT_THROW(lambda0(0), std::invalid_argument);
}

TEST(Lambda1, Values) {
  EXPECT_DOUBLE_EQ(lambda1(3), 5.0);
  EXPECT_DOUBLE_EQ(lambda1(4), 3.0);
  EXPECT_TRUE(std::isinf(lambda1(1)));
  EXPECT_TRUE(std::isinf(lambda1(2)));
}

TEST(Hypotheses, FlagshipIsAdmissible) {
  EXPECT_TRUE(validate_hypotheses(TheoremKind::Global1, {1, 4, 5.0, 1.0, 0.0}).empty());
  EXPECT_TRUE(validate_hypotheses(TheoremKind::Global4, {1, 6, 6.0, 1.0, 0.0}).empty());
  EXPECT_TRUE(validate_hypotheses(TheoremKind::Local1, {1, 3, 4.0, 1.0, 0.0}).empty());
}

TEST(Hypotheses, ViolationsAreNamed) {
  const auto below = validate_hypotheses(TheoremKind::Global1, {1, 3, 4.0, 1.0, 0.0});
  ASSERT_FALSE(below.empty());
  EXPECT_TRUE(has_clause(below, "lambda0"));
  EXPECT_TRUE(has_clause(validate_hypotheses(TheoremKind::Global1, {1, 4, 6.0, 1.0, 0.0}), "p=lambda+1"));
  EXPECT_FALSE(validate_hypotheses(TheoremKind::Global1, {1, 4, 5.0, 1.0, 1.5}).empty());
  EXPECT_FALSE(validate_hypotheses(TheoremKind::Global1, {1, 4, 5.0, 2.5, 0.0}).empty());
  EXPECT_FALSE(validate_hypotheses(TheoremKind::Global4, {1, 5, 6.0, 1.0, 0.0}).empty());
  EXPECT_FALSE(validate_hypotheses(TheoremKind::Local1, {1, 4, 5.0, 1.0, 0.0}).empty());
}

TEST(Hypotheses, TheoremNamesRoundTrip) {
  for (auto k : {TheoremKind::Global1, TheoremKind::Global4, TheoremKind::Local1})
    EXPECT_EQ(parse_theorem_kind(to_string(k)), k);
  EXPECT_THROW(parse_theorem_kind("global9"), std::invalid_argument);
}

TEST(Scaling, DerivedExponents) {
  const ProblemParams a{1, 3, 4.0, 1.0, 0.0};
  EXPECT_DOUBLE_EQ(a.alpha(), 0.25);
  EXPECT_DOUBLE_EQ(a.beta(), 0.375);
  EXPECT_EQ(scaling_identity_check(a), 0.0);
  const ProblemParams b{2, 3, 4.0, 1.0, 0.0};
  EXPECT_DOUBLE_EQ(b.alpha(), 0.5);
  EXPECT_DOUBLE_EQ(b.beta(), 0.25);
  EXPECT_EQ(scaling_identity_check(b), 0.0);
  EXPECT_DOUBLE_EQ((ProblemParams{1, 4, 5.0, 1.0, 0.0}.p_conjugate()), 1.25);
}

TEST(Scaling, RandomizedIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dn(1, 6), dl(2, 15);
  std::uniform_real_distribution<double> dp(2.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    ProblemParams pp;
    pp.n = dn(rng);
    pp.lambda = dl(rng);
    pp.p = dp(rng);
    EXPECT_LE(scaling_identity_check(pp), 1e-14);
  }
}

TEST(Scaling, ThresholdEquivalenceAtPEqualsLambdaPlusOne) {
  for (int n = 1; n <= 8; ++n)
    for (int lam = 2; lam <= 12; ++lam) {
      const ProblemParams pp{n, lam, lam + 1.0, 1.0, 0.0};
      EXPECT_EQ(lam > lambda0(n), pp.alpha() * lam > 1.0) << n << " " << lam;
    }
}

TEST(Convolution, EmptyIntegralAndOracle) {
  EXPECT_EQ(convolution_integral(0.3, 4.0, 0.0), 0.0);
  for (double t : {0.5, 3.0, 25.0, 120.0})
    EXPECT_NEAR(convolution_integral(0.3, 4.0, t), simpson_convolution(0.3, 4.0, t), 1e-10) << t;
  EXPECT_NEAR(convolution_integral(0.25, 3.0, 40.0), simpson_convolution(0.25, 3.0, 40.0), 1e-10);
}

TEST(Convolution, SupBoundedAboveThresholdAndGrowingBelow) {
  // (1+t)^a I(t) rises to 1/(a lam - 1) only like t^{1 - a lam}; reference sups from scipy quad
  const double a = weighted_convolution_bound(0.3, 4.0, 100.0, 200).sup_c;
  const double b = weighted_convolution_bound(0.3, 4.0, 200.0, 400).sup_c;
  EXPECT_NEAR(a, 3.2738046773, 1e-7);
  EXPECT_NEAR(b, 3.5063217300, 1e-7);
  EXPECT_LT(weighted_convolution_bound(0.3, 4.0, 1e4, 50).sup_c, 1.0 / (0.3 * 4.0 - 1.0));
  const double c = weighted_convolution_bound(0.25, 3.0, 100.0, 200).sup_c;
  const double d = weighted_convolution_bound(0.25, 3.0, 200.0, 400).sup_c;
  EXPECT_GT(d, 1.1 * c);
}

TEST(Convolution, LocalVariantDividesByWindow) {
  const auto g = weighted_convolution_bound(0.25, 3.0, 10.0, 11);
  const auto l = weighted_convolution_bound(0.25, 3.0, 10.0, 11, BoundVariant::Local);
  for (std::size_t i = 0; i < g.scaled.size(); ++i) EXPECT_NEAR(l.scaled[i], g.scaled[i] / 10.0, 1e-15);
  EXPECT_THROW(weighted_convolution_bound(0.3, 4.0, -1.0, 10), std::invalid_argument);
}

TEST(Strichartz, AdmissibleExponent) {
  EXPECT_NEAR(strichartz_admissible(6.0, 1), 6.0, 1e-14);
  EXPECT_NEAR(strichartz_admissible(4.0, 2), 4.0, 1e-14);
  EXPECT_TRUE(std::isinf(strichartz_admissible(2.0, 1)));
  EXPECT_THROW(strichartz_admissible(1.5, 1), std::invalid_argument);
  EXPECT_TRUE(strichartz_pair_ok(6.0, 6.0, 1));
  EXPECT_FALSE(strichartz_pair_ok(5.0, 6.0, 1));
  // p >= gamma_p reproduces the threshold p >= 2 + 4/n
  for (int n : {1, 2, 4})
    for (double p = 2.3; p < 12.0; p += 0.25)
      EXPECT_EQ(strichartz_pair_ok(p, p, n), p > 2.0 + 4.0 / n) << n << " " << p;
}
