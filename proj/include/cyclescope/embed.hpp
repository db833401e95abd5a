#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "cyclescope/error.hpp"
#include "cyclescope/graph.hpp"
#include "cyclescope/spectral.hpp"

namespace cyclescope {

using Point = std::array<double, 2>;

inline constexpr int kNoise = -1;

/// Per-vertex planar coordinates (Re v_i, Im v_i) of one phase-normalized
/// unit eigenvector.
struct PlanarEmbedding {
  std::vector<Point> coords;
  cplx lambda{};
  Side side = Side::Right;
  int k = 3;
  bool degenerate = false;  // |Im lambda| < 1e-8: all points on a line

  std::size_t size() const noexcept { return coords.size(); }

  double magnitude(std::size_t i) const { return std::hypot(coords[i][0], coords[i][1]); }

  /// Angle in [0, 2*pi).
  double angle(std::size_t i) const {
    double a = std::atan2(coords[i][1], coords[i][0]);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  }

  double max_magnitude() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, magnitude(i));
    return m;
  }

  /// First vertex of largest magnitude.
  std::size_t peak_vertex() const {
    std::size_t best = 0;
    double m = -1.0;
    for (std::size_t i = 0; i < size(); ++i)
      if (magnitude(i) > m) {
        m = magnitude(i);
        best = i;
      }
    return best;
  }
};

/// Planar embedding from one side of an eigenpair. Drops the sqrt(2) of the
/// real/imaginary rotation, which scales both axes alike.
inline PlanarEmbedding embed(const EigenPair& pair, Side side, int k = 3) {
  if (side == Side::Both) throw Error(Errc::InvalidArgument, "embed one side at a time");
  const auto& vec = side == Side::Right ? pair.right : pair.left;
  if (!vec) throw Error(Errc::MissingSide, std::string(to_string(side)) + " vector not computed");
  PlanarEmbedding e;
  e.lambda = pair.lambda;
  e.side = side;
  e.k = k;
  e.degenerate = std::abs(pair.lambda.imag()) < 1e-8;
  e.coords.reserve(static_cast<std::size_t>(vec->size()));
  for (Eigen::Index i = 0; i < vec->size(); ++i) e.coords.push_back({(*vec)[i].real(), (*vec)[i].imag()});
  return e;
}

struct ClusterResult {
  std::vector<int> labels;  // group id, or kNoise
  std::string method;       // "sector" or "dbscan"
  std::vector<std::vector<Vertex>> seeds;  // per group, descending magnitude

  std::size_t num_groups() const noexcept { return seeds.size(); }
};

namespace detail {

inline std::vector<std::vector<Vertex>> groups_by_magnitude(const std::vector<int>& labels,
                                                            std::size_t groups,
                                                            const PlanarEmbedding& e) {
  std::vector<std::vector<Vertex>> out(groups);
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v] >= 0) out[static_cast<std::size_t>(labels[v])].push_back(v);
  for (auto& members : out)
    std::stable_sort(members.begin(), members.end(),
                     [&e](Vertex a, Vertex b) { return e.magnitude(a) > e.magnitude(b); });
  return out;
}

inline int positive_mod(long long a, int k) {
  const long long r = a % k;
  return static_cast<int>(r < 0 ? r + k : r);
}

}  // namespace detail

/// Angular sector classification. Vertices below `mag_threshold` are noise;
/// the rest go to the nearest angle 2*pi*j/k. Groups are renumbered so group
/// 0 holds the peak vertex; with `orient` given, numbering also follows edge
/// direction (out-neighbors of group j sit in group j+1) by majority vote.
inline ClusterResult sector_classify(const PlanarEmbedding& e, int k, double mag_threshold,
                                     const Digraph* orient = nullptr) {
  if (e.size() == 0) throw Error(Errc::EmptyEmbedding, "embedding has no vertices");
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (mag_threshold < 0.0) throw Error(Errc::InvalidArgument, "magnitude threshold must be >= 0");
  if (orient && orient->num_vertices() != e.size())
    throw Error(Errc::DimensionMismatch, "graph and embedding sizes differ");

  const double width = 2.0 * std::numbers::pi / k;
  std::vector<int> sector(e.size(), kNoise);
  bool any = false;
  for (std::size_t v = 0; v < e.size(); ++v) {
    const double mag = e.magnitude(v);
    if (mag == 0.0 || mag < mag_threshold) continue;
    sector[v] = detail::positive_mod(std::llround(e.angle(v) / width), k);
    any = true;
  }

  ClusterResult r;
  r.method = "sector";
  r.labels.assign(e.size(), kNoise);
  if (!any) {
    r.seeds.assign(static_cast<std::size_t>(k), {});
    return r;
  }

  const int anchor = sector[e.peak_vertex()];
  int direction = 1;
  if (orient && k > 2) {
    std::size_t forward = 0, backward = 0;
    for (Vertex u = 0; u < e.size(); ++u) {
      if (sector[u] < 0) continue;
      for (Vertex w : orient->out_neighbors(u)) {
        if (sector[w] < 0) continue;
        const int step = detail::positive_mod(sector[w] - sector[u], k);
        if (step == 1) ++forward;
        if (step == k - 1) ++backward;
      }
    }
    if (backward > forward) direction = -1;
  }
  for (std::size_t v = 0; v < e.size(); ++v)
    if (sector[v] >= 0) r.labels[v] = detail::positive_mod(direction * (sector[v] - anchor), k);
  r.seeds = detail::groups_by_magnitude(r.labels, static_cast<std::size_t>(k), e);
  return r;
}

/// Density-based clustering (Euclidean, neighborhoods include the point).
/// Clusters are discovered and numbered in ascending vertex order; a border
/// point goes to the first cluster that reaches it. Uses a uniform grid of
/// cell size eps for neighbor queries.
inline std::vector<int> dbscan(const std::vector<Point>& points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw Error(Errc::InvalidArgument, "eps must be positive");
  if (min_pts < 1) throw Error(Errc::InvalidArgument, "min_pts must be >= 1");
  const std::size_t n = points.size();

  auto cell_key = [eps](double x, double y) {
    const auto cx = static_cast<std::int64_t>(std::floor(x / eps));
    const auto cy = static_cast<std::int64_t>(std::floor(y / eps));
    return std::pair{cx, cy};
  };
  auto pack = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ull) ^ static_cast<std::uint64_t>(cy);
  };
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  std::vector<std::pair<std::int64_t, std::int64_t>> cell_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    cell_of[i] = cell_key(points[i][0], points[i][1]);
    grid[pack(cell_of[i].first, cell_of[i].second)].push_back(i);
  }
  const double eps2 = eps * eps;
  auto neighbors = [&](std::size_t i) {
    std::vector<std::size_t> out;
    const auto [cx, cy] = cell_of[i];
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(pack(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          if (cell_of[j] != std::pair{cx + dx, cy + dy}) continue;  // hash collision
          const double ddx = points[i][0] - points[j][0], ddy = points[i][1] - points[j][1];
          if (ddx * ddx + ddy * ddy <= eps2) out.push_back(j);
        }
      }
    std::sort(out.begin(), out.end());
    return out;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto seed = neighbors(i);
    if (seed.size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::vector<std::size_t> queue(seed.begin(), seed.end());
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t q = queue[head];
      if (label[q] == kNoise) label[q] = cluster;
      if (label[q] != kUnvisited) continue;
      label[q] = cluster;
      auto more = neighbors(q);
      if (more.size() >= min_pts) queue.insert(queue.end(), more.begin(), more.end());
    }
    ++cluster;
  }
  return label;
}

/// eps from the sorted k-distance curve (distance to the (min_pts-1)-th other
/// point): the point of the curve farthest from the chord joining its ends.
inline double suggest_eps(const std::vector<Point>& points, std::size_t min_pts) {
  const std::size_t n = points.size();
  if (n < 2) throw Error(Errc::InvalidArgument, "need at least two points");
  const std::size_t kth = std::clamp<std::size_t>(min_pts > 1 ? min_pts - 1 : 1, 1, n - 1);
  std::vector<double> kd(n), row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row[c++] = std::hypot(points[i][0] - points[j][0], points[i][1] - points[j][1]);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kth - 1), row.end());
    kd[i] = row[kth - 1];
  }
  std::sort(kd.begin(), kd.end());
  const double x1 = static_cast<double>(n - 1), y0 = kd.front(), y1 = kd.back();
  double best = -1.0, eps = kd.back();
  for (std::size_t i = 0; i < n; ++i) {
    // distance from (i, kd[i]) to the chord (0, y0)-(x1, y1), up to a constant
    const double d = std::abs((y1 - y0) * static_cast<double>(i) - x1 * (kd[i] - y0));
    if (d > best) {
      best = d;
      eps = kd[i];
    }
  }
  return eps > 0.0 ? eps : std::max(kd.back(), 1e-12);
}

/// Wraps raw cluster labels (e.g. from dbscan) with per-group seed lists.
inline ClusterResult cluster_result(std::vector<int> labels, const PlanarEmbedding& e,
                                    std::string method) {
  int groups = 0;
  for (int l : labels) groups = std::max(groups, l + 1);
  ClusterResult r;
  r.seeds = detail::groups_by_magnitude(labels, static_cast<std::size_t>(groups), e);
  r.labels = std::move(labels);
  r.method = std::move(method);
  return r;
}

/// Magnitudes of the peak vertex's out-neighbors relative to the peak,
/// against the per-step decay rate 1 - epsilon.
struct DecayObservation {
  Vertex peak = 0;
  std::size_t neighbors = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double bound = 1.0;          // 1 - epsilon
  std::size_t violations = 0;  // neighbors with ratio < bound - 1e-8
  bool best_neighbor_ok = true;  // max ratio >= bound - 1e-8
};

/// Checks the depth-1 decay around the peak. With `labels` given, only
/// neighbors that carry a group label are considered.
inline DecayObservation decay_check(const Digraph& g, const PlanarEmbedding& e, double epsilon,
                                    const std::vector<int>* labels = nullptr) {
  if (e.size() == 0) throw Error(Errc::EmptyEmbedding, "embedding has no vertices");
  if (g.num_vertices() != e.size()) throw Error(Errc::DimensionMismatch, "graph and embedding sizes differ");
  DecayObservation d;
  d.peak = e.peak_vertex();
  d.bound = 1.0 - epsilon;
  const double top = e.magnitude(d.peak);
  if (top <= 0.0) return d;
  d.min_ratio = std::numeric_limits<double>::infinity();
  for (Vertex w : g.out_neighbors(d.peak)) {
    if (labels && (*labels)[w] < 0) continue;
    const double ratio = e.magnitude(w) / top;
    ++d.neighbors;
    d.min_ratio = std::min(d.min_ratio, ratio);
    d.max_ratio = std::max(d.max_ratio, ratio);
    if (ratio < d.bound - 1e-8) ++d.violations;
  }
  if (d.neighbors == 0) d.min_ratio = 0.0;
  d.best_neighbor_ok = d.neighbors == 0 || d.max_ratio >= d.bound - 1e-8;
  return d;
}

/// The m largest-magnitude members of each group.
inline std::vector<std::vector<Vertex>> extract_seeds(const ClusterResult& c, const PlanarEmbedding& e,
                                                      std::size_t m) {
  if (m < 1) throw Error(Errc::InvalidArgument, "m must be >= 1");
  auto ordered = c.seeds.empty() ? detail::groups_by_magnitude(c.labels, 0, e) : c.seeds;
  for (auto& g : ordered)
    if (g.size() > m) g.resize(m);
  return ordered;
}

}  // namespace cyclescope
