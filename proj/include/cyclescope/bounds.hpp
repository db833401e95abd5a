#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include <json.hpp>

#include "cyclescope/embed.hpp"
#include "cyclescope/error.hpp"
#include "cyclescope/graph.hpp"
#include "cyclescope/sbm.hpp"
#include "cyclescope/spectral.hpp"

namespace cyclescope {

namespace detail {

inline void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw Error(Errc::InvalidArgument, "epsilon must lie in [0, 1)");
}

}  // namespace detail

/// Lower bound n^(-1/4) on |y^* x| for unit left/right eigenvectors at the
/// cube root of unity of a purely 3-cyclic graph on n vertices.
inline double overlap_lower_bound(std::size_t n_cyclic) {
  if (n_cyclic < 1) throw Error(Errc::InvalidArgument, "n_cyclic must be >= 1");
  return std::pow(static_cast<double>(n_cyclic), -0.25);
}

struct PerturbationBound {
  double first_order = 0.0;            // 2 C^(1/4) max_i (dh_i - d_i)/dh_i
  double first_order_no_factor2 = 0.0;  // the same without the leading 2
  double higher_order = 0.0;           // (max_i 2 (dh_i - d_i)/dh_i)^2
  double max_relative_change = 0.0;    // max_i (dh_i - d_i)/dh_i
};

/// Eigenvalue perturbation bound for noise added around a 3-cyclic region of
/// C vertices with clean out-degrees d and noisy out-degrees d_hat.
inline PerturbationBound perturbation_bound(std::size_t C, std::span<const double> d,
                                            std::span<const double> d_hat) {
  if (d.size() != d_hat.size())
    throw Error(Errc::DimensionMismatch, "d and d_hat differ in length");
  if (C < 1) throw Error(Errc::InvalidArgument, "C must be >= 1");
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] >= 1.0) || d_hat[i] < d[i])
      throw Error(Errc::InvalidArgument, "need d_hat_i >= d_i >= 1");
    worst = std::max(worst, (d_hat[i] - d[i]) / d_hat[i]);
  }
  const double root = std::pow(static_cast<double>(C), 0.25);
  PerturbationBound b;
  b.max_relative_change = worst;
  b.first_order_no_factor2 = root * worst;
  b.first_order = 2.0 * b.first_order_no_factor2;
  b.higher_order = (2.0 * worst) * (2.0 * worst);
  return b;
}

inline PerturbationBound perturbation_bound(std::size_t C, const std::vector<double>& d,
                                            const std::vector<double>& d_hat) {
  return perturbation_bound(C, std::span<const double>(d), std::span<const double>(d_hat));
}

struct DecayRates {
  double simple = 1.0;  // 1 - eps
  double gamma = 1.0;   // 1 - eps (d + 1/(1-eps)) / (d - 1), floored at 0
};

/// Per-step magnitude decay rates. gamma is floored at 0: for large eps the
/// formula goes negative, where the bound says nothing.
inline DecayRates decay_rates(double epsilon, int d) {
  detail::check_epsilon(epsilon);
  if (d <= 1) throw Error(Errc::DegreeTooSmall, "gamma needs degree >= 2");
  const double dd = static_cast<double>(d);
  DecayRates r;
  r.simple = 1.0 - epsilon;
  r.gamma = std::max(0.0, 1.0 - epsilon * (dd + 1.0 / (1.0 - epsilon)) / (dd - 1.0));
  return r;
}

/// The cosine argument (0.0199 - 1.98 d (1-eps)) / (2 d (1-eps)), clamped.
inline double phase_cosine(int d, double epsilon) {
  detail::check_epsilon(epsilon);
  if (d < 1) throw Error(Errc::DegreeTooSmall, "degree must be >= 1");
  const double a = static_cast<double>(d) * (1.0 - epsilon);
  return std::clamp((0.0199 - 1.98 * a) / (2.0 * a), -1.0, 1.0);
}

/// Largest deviation (radians) of a neighbor's phase step from the
/// eigenvalue's angle.
inline double phase_deviation(int d, double epsilon) { return std::acos(phase_cosine(d, epsilon)); }

/// r with r^2 = 1 + gamma^(2k) - 2 gamma^k c: the radius around the unit
/// root-of-unity vectors containing the vertices k steps from the peak.
inline double embedding_radius(int d_max, double epsilon, int depth) {
  if (depth < 0) throw Error(Errc::InvalidArgument, "depth must be >= 0");
  const double g = std::pow(decay_rates(epsilon, d_max).gamma, depth);
  const double c = phase_cosine(d_max, epsilon);
  return std::sqrt(std::max(0.0, 1.0 + g * g - 2.0 * g * c));
}

struct DecayCheck {
  int depth = 0;
  std::size_t vertices = 0;  // cyclic vertices at this BFS depth
  double min_ratio = 0.0;    // |x_j| / |x_peak| over those vertices
  double max_ratio = 0.0;
  double simple_bound = 1.0;  // (1 - eps)^depth
  std::optional<double> gamma_bound;  // gamma^depth
  std::optional<double> radius;       // embedding_radius at this depth
  std::size_t simple_violations = 0;
  std::size_t gamma_violations = 0;
  std::size_t radius_violations = 0;
};

struct BoundsReport {
  int k = 3;
  cplx lambda{};
  double epsilon = 0.0;
  std::size_t C = 0;
  double overlap_lower = 0.0;
  std::optional<double> overlap_measured;  // |y^* x| when both sides present
  PerturbationBound perturbation;
  std::size_t d_max = 0;
  std::vector<double> d;      // pattern-consistent out-degrees, cyclic vertices
  std::vector<double> d_hat;  // actual out-degrees, same order
  std::vector<Vertex> cyclic_vertices;
  std::size_t vertices_without_pattern_edges = 0;
  double decay_simple = 1.0;
  std::optional<double> gamma;
  std::optional<double> phase_dev;
  std::map<int, double> radius_at_depth;
  Vertex peak = 0;
  std::vector<DecayCheck> decay;

  bool first_order_holds = false;
  bool first_order_no_factor2_holds = false;
  bool full_bound_holds = false;  // first order plus the squared term
  bool gamma_decay_holds = true;
  bool simple_decay_holds = true;
  bool radius_holds = true;
};

/// Compares the closed-form bounds against an observed eigenpair and its
/// embedding, using the ground-truth k-cycle group of `e.k` as the cyclic
/// region. d_i counts out-edges that follow the cycle pattern.
inline BoundsReport verify_bounds(const Digraph& g, const GroundTruth& truth, const EigenPair& pair,
                                  const PlanarEmbedding& e) {
  const int k = e.k;
  const auto group = truth.find_group(k);
  if (!group)
    throw Error(Errc::MissingGroundTruth, "ground truth has no " + std::to_string(k) + "-cycle group");
  const std::size_t n = g.num_vertices();
  if (truth.num_vertices() != n || e.size() != n)
    throw Error(Errc::DimensionMismatch, "graph, truth and embedding sizes differ");

  BoundsReport r;
  r.k = k;
  r.lambda = pair.lambda;
  r.epsilon = std::abs(pair.lambda - RootTarget(1, k).value());

  const auto label = truth.cycle_labels(*group);
  for (Vertex v = 0; v < n; ++v) {
    if (label[v] < 0) continue;
    r.cyclic_vertices.push_back(v);
    std::size_t pattern = 0;
    for (Vertex w : g.out_neighbors(v))
      if (label[w] == (label[v] + 1) % k) ++pattern;
    if (pattern == 0) {
      ++r.vertices_without_pattern_edges;
      continue;
    }
    r.d.push_back(static_cast<double>(pattern));
    r.d_hat.push_back(static_cast<double>(g.out_degree(v)));
    r.d_max = std::max(r.d_max, g.out_degree(v));
  }
  r.C = r.cyclic_vertices.size();
  if (r.C == 0) throw Error(Errc::MissingGroundTruth, "cyclic group has no vertices in this graph");
  r.overlap_lower = overlap_lower_bound(r.C);
  if (pair.left && pair.right)
    r.overlap_measured = std::abs(pair.left->dot(*pair.right)) /
                         (pair.left->norm() * pair.right->norm());

  if (!r.d.empty()) r.perturbation = perturbation_bound(r.C, r.d, r.d_hat);
  const double full = r.perturbation.first_order + r.perturbation.higher_order;
  const bool usable = !r.d.empty();
  // An exact eigenvalue shows up as epsilon ~ 1e-16 against a zero bound.
  constexpr double eig_slack = 1e-10;
  r.first_order_holds = usable && r.epsilon <= r.perturbation.first_order + eig_slack;
  r.first_order_no_factor2_holds = usable && r.epsilon <= r.perturbation.first_order_no_factor2 + eig_slack;
  r.full_bound_holds = usable && r.epsilon <= full + eig_slack;

  const bool eps_ok = r.epsilon < 1.0;
  const bool deg_ok = r.d_max >= 2;
  const int dmax = static_cast<int>(r.d_max);
  if (eps_ok) r.decay_simple = 1.0 - r.epsilon;
  if (eps_ok && deg_ok) {
    r.gamma = decay_rates(r.epsilon, dmax).gamma;
    r.phase_dev = phase_deviation(dmax, r.epsilon);
  }

  // BFS along out-edges from the peak vertex.
  r.peak = e.peak_vertex();
  const double peak_mag = e.magnitude(r.peak);
  std::vector<int> depth(n, -1);
  std::queue<Vertex> frontier;
  depth[r.peak] = 0;
  frontier.push(r.peak);
  while (!frontier.empty()) {
    Vertex u = frontier.front();
    frontier.pop();
    for (Vertex w : g.out_neighbors(u))
      if (depth[w] < 0) {
        depth[w] = depth[u] + 1;
        frontier.push(w);
      }
  }
  std::map<int, DecayCheck> by_depth;
  const double step = 2.0 * std::numbers::pi / k;
  for (Vertex v : r.cyclic_vertices) {
    if (depth[v] < 0 || peak_mag <= 0.0) continue;
    auto [it, fresh] = by_depth.try_emplace(depth[v]);
    DecayCheck& c = it->second;
    if (fresh) {
      c.depth = depth[v];
      c.min_ratio = std::numeric_limits<double>::infinity();
      c.simple_bound = eps_ok ? std::pow(1.0 - r.epsilon, c.depth) : 0.0;
      if (r.gamma) {
        c.gamma_bound = std::pow(*r.gamma, c.depth);
        c.radius = embedding_radius(dmax, r.epsilon, c.depth);
        r.radius_at_depth[c.depth] = *c.radius;
      }
    }
    const double ratio = e.magnitude(v) / peak_mag;
    ++c.vertices;
    c.min_ratio = std::min(c.min_ratio, ratio);
    c.max_ratio = std::max(c.max_ratio, ratio);
    constexpr double slack = 1e-12;
    if (ratio + slack < c.simple_bound) ++c.simple_violations;
    if (c.gamma_bound && ratio + slack < *c.gamma_bound) ++c.gamma_violations;
    if (c.radius) {
      // distance from the scaled point to the nearest unit root-of-unity vector
      const double x = e.coords[v][0] / peak_mag, y = e.coords[v][1] / peak_mag;
      double nearest = std::numeric_limits<double>::infinity();
      for (int m = 0; m < k; ++m)
        nearest = std::min(nearest, std::hypot(x - std::cos(step * m), y - std::sin(step * m)));
      if (nearest > *c.radius + slack) ++c.radius_violations;
    }
  }
  for (auto& [dep, c] : by_depth) {
    r.simple_decay_holds = r.simple_decay_holds && c.simple_violations == 0;
    r.gamma_decay_holds = r.gamma_decay_holds && c.gamma_violations == 0;
    r.radius_holds = r.radius_holds && c.radius_violations == 0;
    r.decay.push_back(c);
  }
  return r;
}

inline void to_json(nlohmann::json& j, const DecayCheck& c) {
  j = nlohmann::json{{"depth", c.depth},
                     {"vertices", c.vertices},
                     {"min_ratio", c.min_ratio},
                     {"max_ratio", c.max_ratio},
                     {"simple_bound", c.simple_bound},
                     {"simple_violations", c.simple_violations},
                     {"gamma_violations", c.gamma_violations},
                     {"radius_violations", c.radius_violations}};
  j["gamma_bound"] = c.gamma_bound ? nlohmann::json(*c.gamma_bound) : nlohmann::json(nullptr);
  j["radius"] = c.radius ? nlohmann::json(*c.radius) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const BoundsReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json radius = nlohmann::json::object();
  for (const auto& [depth, value] : r.radius_at_depth) radius[std::to_string(depth)] = value;
  j = nlohmann::json{
      {"schema", "cyclescope.bounds.v1"},
      {"k", r.k},
      {"lambda", {r.lambda.real(), r.lambda.imag()}},
      {"epsilon", r.epsilon},
      {"inputs",
       {{"C", r.C},
        {"d_max", r.d_max},
        {"cyclic_vertices", r.cyclic_vertices},
        {"d", r.d},
        {"d_hat", r.d_hat},
        {"vertices_without_pattern_edges", r.vertices_without_pattern_edges}}},
      {"overlap_lower", r.overlap_lower},
      {"overlap_measured", opt(r.overlap_measured)},
      {"perturbation_first_order", r.perturbation.first_order},
      {"perturbation_first_order_no_factor2", r.perturbation.first_order_no_factor2},
      {"perturbation_higher_order", r.perturbation.higher_order},
      {"decay_simple", r.decay_simple},
      {"gamma", opt(r.gamma)},
      {"phase_dev", opt(r.phase_dev)},
      {"radius_at_depth", radius},
      {"peak_vertex", r.peak},
      {"decay_checks", r.decay},
      {"checks",
       {{"first_order", r.first_order_holds},
        {"first_order_no_factor2", r.first_order_no_factor2_holds},
        {"full_bound", r.full_bound_holds},
        {"simple_decay", r.simple_decay_holds},
        {"gamma_decay", r.gamma_decay_holds},
        {"radius", r.radius_holds}}}};
}

}  // namespace cyclescope
