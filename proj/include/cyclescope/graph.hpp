#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cyclescope/error.hpp"

namespace cyclescope {

using Vertex = std::size_t;
using EdgePair = std::pair<std::int64_t, std::int64_t>;

enum class SelfLoopPolicy { Reject, Drop };

/// Simple directed graph in canonical compressed-sparse-row form.
///
/// Out-neighbor lists are sorted and duplicate free, so two graphs compare
/// equal exactly when they have the same vertex count and edge set.
class Digraph {
 public:
  Digraph() : offsets_{0} {}

  /// Builds a graph from already-canonical CSR arrays. Used internally by
  /// constructions that produce sorted, duplicate-free rows.
  static Digraph from_csr(std::size_t n, std::vector<std::size_t> offsets,
                          std::vector<Vertex> targets) {
    Digraph g;
    g.n_ = n;
    g.offsets_ = std::move(offsets);
    g.targets_ = std::move(targets);
    return g;
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return targets_.size(); }

  std::span<const Vertex> out_neighbors(Vertex v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }

  std::size_t out_degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  bool has_edge(Vertex u, Vertex v) const {
    auto nbrs = out_neighbors(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
  }

  std::vector<std::size_t> out_degrees() const {
    std::vector<std::size_t> d(n_);
    for (Vertex v = 0; v < n_; ++v) d[v] = out_degree(v);
    return d;
  }

  std::vector<std::size_t> in_degrees() const {
    std::vector<std::size_t> d(n_, 0);
    for (Vertex t : targets_) ++d[t];
    return d;
  }

  std::vector<std::pair<Vertex, Vertex>> edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(num_edges());
    for (Vertex u = 0; u < n_; ++u)
      for (Vertex v : out_neighbors(u)) out.emplace_back(u, v);
    return out;
  }

  /// Graph with every edge reversed.
  Digraph transpose() const {
    std::vector<std::size_t> offsets(n_ + 1, 0);
    for (Vertex t : targets_) ++offsets[t + 1];
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<Vertex> targets(num_edges());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    // Sources are visited in ascending order, so every reversed row comes out sorted.
    for (Vertex u = 0; u < n_; ++u)
      for (Vertex v : out_neighbors(u)) targets[cursor[v]++] = u;
    return from_csr(n_, std::move(offsets), std::move(targets));
  }

  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  const std::vector<Vertex>& targets() const noexcept { return targets_; }

  bool operator==(const Digraph&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
};

/// Canonicalizes a list of (source, target) pairs. Duplicates collapse; a
/// self-loop raises SelfLoop unless `loops` is Drop. Without an explicit `n`
/// the vertex count is one past the largest index seen.
inline Digraph from_edge_list(std::span<const EdgePair> pairs,
                              std::optional<std::size_t> n = std::nullopt,
                              SelfLoopPolicy loops = SelfLoopPolicy::Reject) {
  std::size_t count = n.value_or(0);
  for (const auto& [s, t] : pairs) {
    if (s < 0 || t < 0)
      throw Error(Errc::IndexOutOfRange,
                  "negative vertex index in edge (" + std::to_string(s) + "," +
                      std::to_string(t) + ")");
    auto hi = static_cast<std::size_t>(std::max(s, t));
    if (n) {
      if (hi >= *n)
        throw Error(Errc::IndexOutOfRange, "vertex " + std::to_string(hi) +
                                               " out of range for n=" + std::to_string(*n));
    } else {
      count = std::max(count, hi + 1);
    }
  }

  std::vector<std::pair<Vertex, Vertex>> sorted;
  sorted.reserve(pairs.size());
  for (const auto& [s, t] : pairs) {
    if (s == t) {
      if (loops == SelfLoopPolicy::Drop) continue;
      throw VertexError(Errc::SelfLoop, static_cast<std::size_t>(s),
                        "self-loop at vertex " + std::to_string(s));
    }
    sorted.emplace_back(static_cast<Vertex>(s), static_cast<Vertex>(t));
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<std::size_t> offsets(count + 1, 0);
  std::vector<Vertex> targets;
  targets.reserve(sorted.size());
  for (const auto& [s, t] : sorted) {
    ++offsets[s + 1];
    targets.push_back(t);
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return Digraph::from_csr(count, std::move(offsets), std::move(targets));
}

inline Digraph from_edge_list(std::initializer_list<EdgePair> pairs,
                              std::optional<std::size_t> n = std::nullopt,
                              SelfLoopPolicy loops = SelfLoopPolicy::Reject) {
  return from_edge_list(std::span<const EdgePair>(pairs.begin(), pairs.size()), n, loops);
}

/// Row-stochastic random-walk operator B = D^{-1} A. Holds its own copy of
/// the graph; value 1/d_i is implicit at every stored edge of row i.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Digraph g) : graph_(std::move(g)) {
    out_degrees_ = graph_.out_degrees();
    for (Vertex v = 0; v < out_degrees_.size(); ++v)
      if (out_degrees_[v] == 0)
        throw VertexError(Errc::DanglingVertex, v,
                          "vertex " + std::to_string(v) + " has no out-edges");
  }

  const Digraph& graph() const noexcept { return graph_; }
  const std::vector<std::size_t>& out_degrees() const noexcept { return out_degrees_; }
  std::size_t size() const noexcept { return graph_.num_vertices(); }

  double value(Vertex row) const { return 1.0 / static_cast<double>(out_degrees_[row]); }

  /// y = B x
  template <class Vec>
  Vec apply(const Vec& x) const {
    Vec y = Vec::Zero(static_cast<Eigen::Index>(size()));
    for (Vertex i = 0; i < size(); ++i) {
      typename Vec::Scalar acc{0};
      for (Vertex j : graph_.out_neighbors(i)) acc += x[static_cast<Eigen::Index>(j)];
      y[static_cast<Eigen::Index>(i)] = acc * value(i);
    }
    return y;
  }

  /// y = B^T x
  template <class Vec>
  Vec apply_transpose(const Vec& x) const {
    Vec y = Vec::Zero(static_cast<Eigen::Index>(size()));
    for (Vertex i = 0; i < size(); ++i) {
      auto xi = x[static_cast<Eigen::Index>(i)] * value(i);
      for (Vertex j : graph_.out_neighbors(i)) y[static_cast<Eigen::Index>(j)] += xi;
    }
    return y;
  }

  template <class Scalar = double>
  Eigen::SparseMatrix<Scalar> to_sparse() const {
    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(graph_.num_edges());
    for (Vertex i = 0; i < size(); ++i)
      for (Vertex j : graph_.out_neighbors(i))
        trips.emplace_back(static_cast<int>(i), static_cast<int>(j), Scalar(value(i)));
    Eigen::SparseMatrix<Scalar> m(static_cast<Eigen::Index>(size()),
                                  static_cast<Eigen::Index>(size()));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
  }

  Eigen::MatrixXd to_dense() const {
    auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Vertex i = 0; i < size(); ++i)
      for (Vertex j : graph_.out_neighbors(i))
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value(i);
    return m;
  }

 private:
  Digraph graph_;
  std::vector<std::size_t> out_degrees_;
};

inline TransitionMatrix transition_matrix(const Digraph& g) { return TransitionMatrix(g); }

/// Subgraph induced by `vertices` (sorted ascending), relabeled 0..k-1 in that order.
inline Digraph induced_subgraph(const Digraph& g, std::span<const Vertex> vertices) {
  constexpr auto kAbsent = static_cast<Vertex>(-1);
  std::vector<Vertex> local(g.num_vertices(), kAbsent);
  for (std::size_t i = 0; i < vertices.size(); ++i) local[vertices[i]] = i;
  std::vector<std::size_t> offsets{0};
  std::vector<Vertex> targets;
  for (Vertex v : vertices) {
    for (Vertex w : g.out_neighbors(v))
      if (local[w] != kAbsent) targets.push_back(local[w]);
    // Row order follows the (ascending) original order, hence stays sorted.
    offsets.push_back(targets.size());
  }
  return Digraph::from_csr(vertices.size(), std::move(offsets), std::move(targets));
}

struct SccResult {
  std::vector<std::size_t> component_id;
  std::vector<Vertex> largest_component_vertices;
  Digraph induced;
  std::vector<Vertex> vertex_map;  // induced index -> original index
};

/// Tarjan's algorithm with an explicit stack. Component ids are assigned in
/// completion order.
inline std::vector<std::size_t> strongly_connected_components(const Digraph& g,
                                                              std::size_t* count = nullptr) {
  const std::size_t n = g.num_vertices();
  constexpr auto kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<Vertex> stack;
  std::vector<std::pair<Vertex, std::size_t>> call;  // (vertex, next edge offset)
  std::size_t next_index = 0, next_comp = 0;

  for (Vertex root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      auto nbrs = g.out_neighbors(v);
      if (pos < nbrs.size()) {
        Vertex w = nbrs[pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      Vertex done = v;
      call.pop_back();
      if (!call.empty()) {
        Vertex parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        Vertex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != done);
        ++next_comp;
      }
    }
  }
  if (count) *count = next_comp;
  return comp;
}

/// Largest strongly connected component. Equal sizes are broken by the
/// smallest minimum original vertex index.
inline SccResult largest_scc(const Digraph& g) {
  SccResult r;
  std::size_t count = 0;
  r.component_id = strongly_connected_components(g, &count);
  if (g.num_vertices() == 0) return r;

  std::vector<std::size_t> size(count, 0);
  std::vector<Vertex> min_vertex(count, static_cast<Vertex>(-1));
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    auto c = r.component_id[v];
    ++size[c];
    min_vertex[c] = std::min(min_vertex[c], v);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < count; ++c)
    if (size[c] > size[best] || (size[c] == size[best] && min_vertex[c] < min_vertex[best]))
      best = c;

  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (r.component_id[v] == best) r.largest_component_vertices.push_back(v);
  r.vertex_map = r.largest_component_vertices;
  r.induced = induced_subgraph(g, r.largest_component_vertices);
  return r;
}

/// One forward and one backward reachability pass from vertex 0.
inline bool is_strongly_connected(const Digraph& g) {
  const std::size_t n = g.num_vertices();
  if (n == 0) return false;
  auto reaches_all = [n](const Digraph& h) {
    std::vector<bool> seen(n, false);
    std::vector<Vertex> todo{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!todo.empty()) {
      Vertex v = todo.back();
      todo.pop_back();
      for (Vertex w : h.out_neighbors(v))
        if (!seen[w]) {
          seen[w] = true;
          ++count;
          todo.push_back(w);
        }
    }
    return count == n;
  };
  return reaches_all(g) && reaches_all(g.transpose());
}

/// k-colored state-space graph: every edge (j, i) becomes k edges from color
/// c-1 of j to color c of i, with copy c of vertex v at index v + c*n.
inline Digraph stateful_lift(const Digraph& g, int k) {
  if (k < 2) throw Error(Errc::InvalidArgument, "lift order must be >= 2");
  const std::size_t n = g.num_vertices();
  const auto ku = static_cast<std::size_t>(k);
  std::vector<std::size_t> offsets{0};
  std::vector<Vertex> targets;
  targets.reserve(ku * g.num_edges());
  for (std::size_t color = 0; color < ku; ++color) {
    const std::size_t next = (color + 1) % ku;
    for (Vertex j = 0; j < n; ++j) {
      for (Vertex i : g.out_neighbors(j)) targets.push_back(i + next * n);
      offsets.push_back(targets.size());
    }
  }
  return Digraph::from_csr(ku * n, std::move(offsets), std::move(targets));
}

/// Result of labeling a purely k-cyclic graph; `classes` is empty on failure.
struct CyclicPartition {
  bool success = false;
  std::vector<int> class_of;                   // per vertex, 0..k-1
  std::vector<std::vector<Vertex>> classes;    // k sorted lists
};

/// Breadth-first labeling by distance mod k from vertex 0, then one check that
/// every edge advances the label by exactly one.
inline CyclicPartition bfs_cyclic_partition(const Digraph& g, int k) {
  if (k < 1) throw Error(Errc::InvalidArgument, "cycle length must be >= 1");
  if (!is_strongly_connected(g))
    throw Error(Errc::NotStronglyConnected, "cyclic partition needs a strongly connected graph");
  const std::size_t n = g.num_vertices();
  CyclicPartition out;
  out.class_of.assign(n, -1);
  std::vector<Vertex> queue{0};
  out.class_of[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Vertex v = queue[head];
    for (Vertex w : g.out_neighbors(v))
      if (out.class_of[w] < 0) {
        out.class_of[w] = (out.class_of[v] + 1) % k;
        queue.push_back(w);
      }
  }
  for (Vertex u = 0; u < n; ++u)
    for (Vertex w : g.out_neighbors(u))
      if (out.class_of[w] != (out.class_of[u] + 1) % k) {
        out.class_of.clear();
        return out;
      }
  out.success = true;
  out.classes.resize(static_cast<std::size_t>(k));
  for (Vertex v = 0; v < n; ++v) out.classes[static_cast<std::size_t>(out.class_of[v])].push_back(v);
  return out;
}

/// Per-vertex (B^k)_{ii}: the chance that a k-step uniform random walk from i
/// is back at i. Propagates the indicator row vector k times along out-edges.
inline std::vector<double> return_probability_score(const TransitionMatrix& b, int k) {
  if (k < 1) throw Error(Errc::InvalidArgument, "walk length must be >= 1");
  const std::size_t n = b.size();
  const Digraph& g = b.graph();
  std::vector<double> score(n, 0.0);
  std::vector<double> cur(n, 0.0), nxt(n, 0.0);
  std::vector<Vertex> frontier, next_frontier;
  std::vector<bool> in_next(n, false);
  for (Vertex start = 0; start < n; ++start) {
    frontier.assign(1, start);
    cur[start] = 1.0;
    for (int step = 0; step < k; ++step) {
      next_frontier.clear();
      for (Vertex v : frontier) {
        const double share = cur[v] * b.value(v);
        cur[v] = 0.0;
        for (Vertex w : g.out_neighbors(v)) {
          if (!in_next[w]) {
            in_next[w] = true;
            next_frontier.push_back(w);
          }
          nxt[w] += share;
        }
      }
      for (Vertex w : next_frontier) {
        in_next[w] = false;
        cur[w] = nxt[w];
        nxt[w] = 0.0;
      }
      frontier.swap(next_frontier);
    }
    score[start] = cur[start];
    for (Vertex v : frontier) cur[v] = 0.0;
  }
  return score;
}

}  // namespace cyclescope
