#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "cyclescope/embed.hpp"
#include "cyclescope/error.hpp"

namespace cyclescope {

/// Adjusted Rand index of two labelings of the same items. Every distinct
/// label value (kNoise included) is its own class. Two single-class
/// labelings count as identical (1.0).
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "labelings differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<int, int>, std::uint64_t> joint;
  std::map<int, std::uint64_t> ca, cb;
  for (std::size_t i = 0; i < n; ++i) {
    ++joint[{a[i], b[i]}];
    ++ca[a[i]];
    ++cb[b[i]];
  }
  auto pairs = [](std::uint64_t c) { return static_cast<double>(c) * static_cast<double>(c - 1) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  for (const auto& [key, c] : ca) sa += pairs(c);
  for (const auto& [key, c] : cb) sb += pairs(c);
  const double expected = sa * sb / pairs(n);
  const double top = 0.5 * (sa + sb);
  if (top == expected) return 1.0;  // both labelings trivial in the same way
  return (index - expected) / (top - expected);
}

inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  return adjusted_rand_index(std::span<const int>(a), std::span<const int>(b));
}

/// Recovery of one k-cycle group. truth[v] is the cycle position (0..k-1)
/// or -1 outside the group; predicted[v] is a group id or kNoise.
struct RecoveryMetrics {
  double adjusted_rand_index = 0.0;  // all vertices; outside and kNoise are classes too
  double ari_within_group = 0.0;     // group vertices only
  double ari_excluding_noise = 0.0;  // vertices the prediction did not call noise
  std::vector<std::vector<std::size_t>> confusion;  // k rows x (groups + 1); last column kNoise
  double coverage = 0.0;               // group vertices labeled non-noise
  std::size_t false_positives = 0;     // non-group vertices labeled non-noise
  int rotation = 0;                    // predicted id p is reported as (p + rotation) mod groups
  std::size_t aligned_correct = 0;     // group vertices whose rotated label equals the truth
};

/// Scores predicted labels against a k-cycle group. Predicted ids are
/// aligned with the best of the cyclic rotations before the confusion matrix
/// is built.
inline RecoveryMetrics recovery_metrics(std::span<const int> truth, std::span<const int> predicted, int k) {
  if (truth.size() != predicted.size())
    throw Error(Errc::VertexMapMismatch, "truth and prediction cover different vertex counts");
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  int groups = k;
  for (int p : predicted) groups = std::max(groups, p + 1);

  RecoveryMetrics m;
  std::size_t best = 0;
  for (int r = 0; r < k; ++r) {
    std::size_t correct = 0;
    for (std::size_t v = 0; v < truth.size(); ++v)
      if (truth[v] >= 0 && predicted[v] >= 0 && predicted[v] < k && (predicted[v] + r) % k == truth[v])
        ++correct;
    if (r == 0 || correct > best) {
      best = correct;
      m.rotation = r;
    }
  }
  m.aligned_correct = best;

  m.confusion.assign(static_cast<std::size_t>(k), std::vector<std::size_t>(static_cast<std::size_t>(groups) + 1, 0));
  std::size_t in_group = 0, covered = 0;
  std::vector<int> t_in, p_in;
  for (std::size_t v = 0; v < truth.size(); ++v) {
    const int p = predicted[v];
    if (truth[v] < 0) {
      if (p >= 0) ++m.false_positives;
      continue;
    }
    if (truth[v] >= k) throw Error(Errc::InvalidArgument, "truth label exceeds k");
    ++in_group;
    std::size_t col = static_cast<std::size_t>(groups);
    if (p >= 0) {
      ++covered;
      col = static_cast<std::size_t>(p < k ? (p + m.rotation) % k : p);
    }
    ++m.confusion[static_cast<std::size_t>(truth[v])][col];
    t_in.push_back(truth[v]);
    p_in.push_back(p);
  }
  m.coverage = in_group ? static_cast<double>(covered) / static_cast<double>(in_group) : 0.0;
  m.adjusted_rand_index = adjusted_rand_index(truth, predicted);
  m.ari_within_group = adjusted_rand_index(t_in, p_in);
  std::vector<int> t_kept, p_kept;
  for (std::size_t v = 0; v < truth.size(); ++v)
    if (predicted[v] >= 0) {
      t_kept.push_back(truth[v]);
      p_kept.push_back(predicted[v]);
    }
  m.ari_excluding_noise = adjusted_rand_index(t_kept, p_kept);
  return m;
}

inline RecoveryMetrics recovery_metrics(const std::vector<int>& truth, const std::vector<int>& predicted,
                                        int k) {
  return recovery_metrics(std::span<const int>(truth), std::span<const int>(predicted), k);
}

inline void to_json(nlohmann::json& j, const RecoveryMetrics& m) {
  j = nlohmann::json{{"schema", "cyclescope.metrics.v1"},
                     {"adjusted_rand_index", m.adjusted_rand_index},
                     {"ari_within_group", m.ari_within_group},
                     {"ari_excluding_noise", m.ari_excluding_noise},
                     {"confusion", m.confusion},
                     {"coverage", m.coverage},
                     {"false_positives", m.false_positives},
                     {"rotation", m.rotation},
                     {"aligned_correct", m.aligned_correct}};
}

}  // namespace cyclescope
