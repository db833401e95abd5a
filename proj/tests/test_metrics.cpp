#include <gtest/gtest.h>

#include <random>

#include "cyclescope/metrics.hpp"

using namespace cyclescope;

namespace {

// Rand index adjusted by brute force over all item pairs.
double ari_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double both = 0, sa = 0, sb = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool x = a[i] == a[j], y = b[i] == b[j];
      both += x && y;
      sa += x;
      sb += y;
      total += 1;
    }
  const double expected = sa * sb / total;
  const double top = 0.5 * (sa + sb);
  return (both - expected) / (top - expected);
}

std::vector<int> random_labels(std::size_t n, int classes, std::mt19937_64& rng) {
  std::vector<int> out(n);
  for (auto& v : out) v = static_cast<int>(rng() % static_cast<unsigned>(classes)) - 1;
  return out;
}

}  // namespace

TEST(Ari, MatchesPairCounting) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 60;
    auto a = random_labels(n, 2 + static_cast<int>(rng() % 5), rng);
    auto b = a;
    for (auto& v : b)
      if (rng() % 3 == 0) v = static_cast<int>(rng() % 4);
    const double ref = ari_pairs(a, b);
    if (!std::isfinite(ref)) continue;
    EXPECT_NEAR(adjusted_rand_index(a, b), ref, 1e-12);
  }
}

TEST(Ari, IdentityAndRelabeling) {
  std::vector<int> a{0, 0, 1, 1, 2, 2, -1};
  std::vector<int> b{5, 5, 3, 3, 9, 9, 0};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, a), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), 1.0);
  std::vector<int> one(7, 0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(one, one), 1.0);
  EXPECT_THROW(adjusted_rand_index(std::vector<int>{1}, std::vector<int>{1, 2}), Error);
}

TEST(Ari, PermutationNullNearZero) {
  std::mt19937_64 rng(11);
  std::vector<int> truth(3000);
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(i % 3);
  for (int trial = 0; trial < 10; ++trial) {
    auto pred = truth;
    std::shuffle(pred.begin(), pred.end(), rng);
    EXPECT_LT(std::abs(adjusted_rand_index(truth, pred)), 0.05);
  }
}

TEST(Recovery, PerfectUpToRotation) {
  std::vector<int> truth{-1, -1, 0, 0, 1, 1, 2, 2};
  std::vector<int> pred{kNoise, kNoise, 2, 2, 0, 0, 1, 1};
  auto m = recovery_metrics(truth, pred, 3);
  EXPECT_DOUBLE_EQ(m.adjusted_rand_index, 1.0);
  EXPECT_DOUBLE_EQ(m.ari_within_group, 1.0);
  EXPECT_DOUBLE_EQ(m.coverage, 1.0);
  EXPECT_EQ(m.false_positives, 0u);
  EXPECT_EQ(m.rotation, 1);
  EXPECT_EQ(m.aligned_correct, 6u);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(m.confusion[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)], 2u);
}

TEST(Recovery, AllNoiseHasZeroCoverage) {
  std::vector<int> truth{0, 1, 2, 0, 1, 2, -1};
  std::vector<int> pred(7, kNoise);
  auto m = recovery_metrics(truth, pred, 3);
  EXPECT_DOUBLE_EQ(m.coverage, 0.0);
  EXPECT_EQ(m.false_positives, 0u);
  for (const auto& row : m.confusion) EXPECT_EQ(row.back(), 2u);
}

TEST(Recovery, ConfusionRowsCountGroupVertices) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 30 + rng() % 50;
    std::vector<int> truth(n), pred(n);
    for (auto& t : truth) t = static_cast<int>(rng() % 4) - 1;
    for (auto& p : pred) p = static_cast<int>(rng() % 6) - 1;
    auto m = recovery_metrics(truth, pred, 3);
    for (int r = 0; r < 3; ++r) {
      std::size_t expected = 0, sum = 0;
      for (int t : truth) expected += t == r;
      for (auto c : m.confusion[static_cast<std::size_t>(r)]) sum += c;
      EXPECT_EQ(sum, expected);
    }
    std::size_t fp = 0;
    for (std::size_t v = 0; v < n; ++v) fp += truth[v] < 0 && pred[v] >= 0;
    EXPECT_EQ(m.false_positives, fp);
  }
}

TEST(Recovery, SizeMismatch) {
  try {
    recovery_metrics(std::vector<int>{0, 1}, std::vector<int>{0}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::VertexMapMismatch);
  }
}

TEST(Recovery, Json) {
  nlohmann::json j = recovery_metrics(std::vector<int>{0, 1}, std::vector<int>{1, 0}, 2);
  EXPECT_EQ(j.at("schema"), "cyclescope.metrics.v1");
  EXPECT_EQ(j.at("rotation"), 1);
}
