#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cyclescope/bounds.hpp"

using namespace cyclescope;

namespace {

// Independent evaluation in long double, written out term by term.
long double gamma_oracle(long double eps, long double d) {
  const long double rest = 1.0L / (1.0L - eps);
  return 1.0L - eps * ((d + rest) / (d - 1.0L));
}

long double cosine_oracle(long double d, long double eps) {
  const long double len = d * (1.0L - eps);
  long double c = (0.0199L - 1.98L * len) / (2.0L * len);
  return c < -1.0L ? -1.0L : (c > 1.0L ? 1.0L : c);
}

}  // namespace

TEST(OverlapLowerBound, Values) {
  EXPECT_DOUBLE_EQ(overlap_lower_bound(1), 1.0);
  EXPECT_NEAR(overlap_lower_bound(135), 1.0 / std::sqrt(std::sqrt(135.0)), 1e-15);
  EXPECT_NEAR(overlap_lower_bound(135), 0.2933706, 1e-7);
  EXPECT_NEAR(overlap_lower_bound(120), 0.3021375, 1e-7);
  EXPECT_DOUBLE_EQ(overlap_lower_bound(16), 0.5);
  EXPECT_THROW(overlap_lower_bound(0), Error);
}

TEST(PerturbationBound, WorkedExampleBothVariants) {
  std::vector<double> d(120, 32.0), dh(120, 36.4);
  auto b = perturbation_bound(120, d, dh);
  const double oracle = std::pow(120.0, 0.25) * (4.4 / 36.4);
  EXPECT_NEAR(b.first_order_no_factor2, oracle, 1e-14);
  EXPECT_NEAR(b.first_order_no_factor2, 0.4001, 5e-5);
  EXPECT_NEAR(b.first_order, 2 * oracle, 1e-14);
  EXPECT_NEAR(b.first_order, 0.8002, 1e-4);
  EXPECT_NEAR(b.higher_order, std::pow(2 * 4.4 / 36.4, 2), 1e-14);
  EXPECT_NEAR(b.max_relative_change, 4.4 / 36.4, 1e-15);
}

TEST(PerturbationBound, TrivialCases) {
  std::vector<double> d{3, 5, 7};
  auto zero = perturbation_bound(3, d, d);
  EXPECT_EQ(zero.first_order, 0.0);
  EXPECT_EQ(zero.higher_order, 0.0);
  auto one = perturbation_bound(1, std::vector<double>{1}, std::vector<double>{2});
  EXPECT_DOUBLE_EQ(one.first_order, 1.0);
  // the maximum picks the worst vertex
  auto mixed = perturbation_bound(1, std::vector<double>{4, 4}, std::vector<double>{5, 8});
  EXPECT_DOUBLE_EQ(mixed.max_relative_change, 0.5);
}

TEST(PerturbationBound, Errors) {
  EXPECT_THROW(perturbation_bound(2, std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  try {
    perturbation_bound(2, std::vector<double>{1, 2}, std::vector<double>{1});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionMismatch);
  }
  EXPECT_THROW(perturbation_bound(1, std::vector<double>{3}, std::vector<double>{2}), Error);
  EXPECT_THROW(perturbation_bound(1, std::vector<double>{0}, std::vector<double>{2}), Error);
}

TEST(DecayRates, WorkedValues) {
  EXPECT_NEAR(decay_rates(0.1301, 46).simple, 0.8699, 1e-15);
  const auto r = decay_rates(0.0527, 277);
  EXPECT_NEAR(r.gamma, static_cast<double>(gamma_oracle(0.0527L, 277.0L)), 1e-14);
  EXPECT_NEAR(r.gamma, 0.9469, 5e-5);
  const auto exact = decay_rates(0.0, 5);
  EXPECT_EQ(exact.simple, 1.0);
  EXPECT_EQ(exact.gamma, 1.0);
}

TEST(DecayRates, Errors) {
  try {
    decay_rates(0.1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegreeTooSmall);
  }
  EXPECT_THROW(decay_rates(1.0, 4), Error);
  EXPECT_THROW(decay_rates(-0.1, 4), Error);
}

TEST(DecayRates, GammaBelowSimpleRate) {
  for (int d = 2; d <= 300; d += 7)
    for (double eps = 0.001; eps < 1.0; eps += 0.037) {
      const auto r = decay_rates(eps, d);
      EXPECT_LT(r.gamma, r.simple) << d << " " << eps;
      EXPECT_LE(r.gamma, 1.0);
      EXPECT_GE(r.gamma, 0.0);
      const long double g = gamma_oracle(eps, d);
      if (g > 0) EXPECT_NEAR(r.gamma, static_cast<double>(g), 1e-13);
    }
}

TEST(PhaseDeviation, Values) {
  EXPECT_NEAR(phase_cosine(32, 0.1301), -0.98964, 5e-6);
  EXPECT_NEAR(phase_deviation(32, 0.1301), std::acos(static_cast<double>(cosine_oracle(32, 0.1301L))), 1e-13);
  EXPECT_NEAR(phase_deviation(32, 0.1301), 2.9975415, 1e-7);
  EXPECT_NEAR(phase_cosine(1, 0.0), -0.98005, 1e-12);
  EXPECT_NEAR(phase_deviation(1, 0.0), 2.9415092, 1e-7);
  // the raw argument is 0.00995/(d(1-eps)) - 0.99 > -0.99, so only the upper
  // clamp can bind: tiny d(1-eps) pushes it past 1
  EXPECT_DOUBLE_EQ(phase_cosine(1, 0.999), 1.0);
  EXPECT_DOUBLE_EQ(phase_deviation(1, 0.999), 0.0);
  for (int d = 1; d < 400; d += 3)
    for (double eps = 0.0; eps < 0.99; eps += 0.01) {
      EXPECT_GT(phase_cosine(d, eps), -0.99);
      EXPECT_LE(phase_deviation(d, eps), std::numbers::pi);
    }
}

TEST(EmbeddingRadius, WorkedValue) {
  EXPECT_NEAR(embedding_radius(46, 0.1301, 1), 1.89, 0.05);
  EXPECT_NEAR(embedding_radius(46, 0.1301, 1), 1.8589298, 1e-7);
  const long double g = gamma_oracle(0.1301L, 46.0L), c = cosine_oracle(46.0L, 0.1301L);
  EXPECT_NEAR(embedding_radius(46, 0.1301, 1), static_cast<double>(std::sqrt(1 + g * g - 2 * g * c)), 1e-13);
}

TEST(EmbeddingRadius, DepthZeroAtExactEigenvalue) {
  const double c = phase_cosine(10, 0.0);
  EXPECT_NEAR(embedding_radius(10, 0.0, 0), std::sqrt(2.0 - 2.0 * c), 1e-14);
  EXPECT_GT(embedding_radius(10, 0.0, 0), 1.9);
}

// c < 0, so r^2 = 1 + g^2 + 2 g |c| shrinks as g = gamma^depth shrinks.
TEST(EmbeddingRadius, NonincreasingInDepthAndTendsToOne) {
  for (int d : {2, 5, 46, 277})
    for (double eps : {0.01, 0.05, 0.13, 0.4}) {
      const double gamma = decay_rates(eps, d).gamma;
      double prev = embedding_radius(d, eps, 0);
      for (int depth = 1; depth <= 3000; ++depth) {
        const double r = embedding_radius(d, eps, depth);
        EXPECT_LE(r, prev + 1e-15);
        EXPECT_GE(r, 1.0 - 1e-15);
        EXPECT_LE(r, 1.0 + std::pow(gamma, depth) + 1e-15);  // r <= 1 + gamma^depth since |c| <= 1
        prev = r;
      }
      EXPECT_NEAR(prev, 1.0, 1e-6) << d << " " << eps;
    }
  EXPECT_THROW(embedding_radius(1, 0.1, 1), Error);
  EXPECT_THROW(embedding_radius(5, 0.1, -1), Error);
}
