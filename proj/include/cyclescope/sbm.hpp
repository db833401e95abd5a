#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cyclescope/error.hpp"
#include "cyclescope/graph.hpp"

namespace cyclescope {

/// One planted cyclic structure: position j of the cycle is the union of the
/// blocks in `positions[j]`, and edges are meant to run j -> j+1 (mod k).
struct CyclicGroup {
  int k = 0;
  std::vector<std::vector<std::size_t>> positions;

  bool operator==(const CyclicGroup&) const = default;
};

/// Non-symmetric stochastic block model with matching row and column
/// blockings. An unset p0 entry falls back to `noise`.
struct BlockModelSpec {
  std::vector<std::size_t> block_sizes;
  std::vector<std::optional<double>> p0;  // b*b, row-major
  double noise = 0.0;
  std::vector<CyclicGroup> cyclic_groups;
  std::vector<std::string> block_names;   // optional, for reports

  std::size_t num_blocks() const noexcept { return block_sizes.size(); }

  std::size_t num_vertices() const {
    return std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
  }

  double probability(std::size_t from_block, std::size_t to_block) const {
    return p0[from_block * num_blocks() + to_block].value_or(noise);
  }

  void set(std::size_t from_block, std::size_t to_block, double p) {
    p0[from_block * num_blocks() + to_block] = p;
  }

  /// Throws InvalidArgument on malformed input.
  void validate() const {
    const auto b = num_blocks();
    if (p0.size() != b * b)
      throw Error(Errc::DimensionMismatch, "p0 must have " + std::to_string(b * b) + " entries");
    auto check = [](double p) {
      if (!(p >= 0.0 && p <= 1.0))
        throw Error(Errc::InvalidArgument, "probability outside [0,1]: " + std::to_string(p));
    };
    check(noise);
    for (const auto& p : p0)
      if (p) check(*p);
    for (auto s : block_sizes)
      if (s == 0) throw Error(Errc::InvalidArgument, "block sizes must be positive");
    for (const auto& grp : cyclic_groups) {
      if (grp.k < 2 || grp.positions.size() != static_cast<std::size_t>(grp.k))
        throw Error(Errc::InvalidArgument, "cyclic group needs k >= 2 positions");
      std::vector<bool> used(b, false);
      for (const auto& pos : grp.positions)
        for (auto blk : pos) {
          if (blk >= b) throw Error(Errc::IndexOutOfRange, "cyclic group refers to a missing block");
          if (used[blk]) throw Error(Errc::InvalidArgument, "cyclic group repeats a block");
          used[blk] = true;
        }
    }
  }
};

struct GroundTruth {
  std::vector<std::size_t> membership;  // per-vertex block id
  std::vector<std::size_t> block_sizes;
  std::vector<CyclicGroup> cyclic_groups;
  std::vector<std::string> block_names;

  std::size_t num_vertices() const noexcept { return membership.size(); }

  /// Cycle position (0..k-1) of every vertex for group `g`, or -1 outside it.
  std::vector<int> cycle_labels(std::size_t g) const {
    const auto& grp = cyclic_groups.at(g);
    std::vector<int> pos_of_block(block_sizes.size(), -1);
    for (std::size_t j = 0; j < grp.positions.size(); ++j)
      for (auto blk : grp.positions[j]) pos_of_block[blk] = static_cast<int>(j);
    std::vector<int> out(membership.size());
    for (std::size_t v = 0; v < membership.size(); ++v) out[v] = pos_of_block[membership[v]];
    return out;
  }

  std::optional<std::size_t> find_group(int k) const {
    for (std::size_t g = 0; g < cyclic_groups.size(); ++g)
      if (cyclic_groups[g].k == k) return g;
    return std::nullopt;
  }

  /// Truth for a vertex subset, e.g. an SCC; vertex_map[new] = old index.
  GroundTruth restricted(std::span<const Vertex> vertex_map) const {
    GroundTruth out{{}, block_sizes, cyclic_groups, block_names};
    out.membership.reserve(vertex_map.size());
    for (Vertex v : vertex_map) {
      if (v >= membership.size())
        throw Error(Errc::VertexMapMismatch, "vertex map refers past the truth's vertex count");
      out.membership.push_back(membership[v]);
    }
    return out;
  }
};

/// The sampler's fixed generator: 64-bit Mersenne Twister seeded directly
/// with the user seed, and uniforms built from the top 53 bits.
class PortableUniform {
 public:
  explicit PortableUniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// One Bernoulli trial per ordered pair (i, j), i != j, in row-major order;
/// the edge is kept when the uniform draw is below P_ij.
inline std::pair<Digraph, GroundTruth> sample(const BlockModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.num_vertices();
  GroundTruth truth;
  truth.block_sizes = spec.block_sizes;
  truth.cyclic_groups = spec.cyclic_groups;
  truth.block_names = spec.block_names;
  truth.membership.reserve(n);
  for (std::size_t b = 0; b < spec.num_blocks(); ++b)
    truth.membership.insert(truth.membership.end(), spec.block_sizes[b], b);

  PortableUniform uniform(seed);
  std::vector<std::size_t> offsets{0};
  std::vector<Vertex> targets;
  std::vector<double> row_p(spec.num_blocks());
  for (Vertex i = 0; i < n; ++i) {
    const auto bi = truth.membership[i];
    for (std::size_t bj = 0; bj < spec.num_blocks(); ++bj) row_p[bj] = spec.probability(bi, bj);
    for (Vertex j = 0; j < n; ++j) {
      if (j == i) continue;
      if (uniform() < row_p[truth.membership[j]]) targets.push_back(j);
    }
    offsets.push_back(targets.size());
  }
  return {Digraph::from_csr(n, std::move(offsets), std::move(targets)), std::move(truth)};
}

inline BlockModelSpec make_empty_spec(std::vector<std::size_t> sizes, double noise = 0.0) {
  BlockModelSpec spec;
  spec.p0.assign(sizes.size() * sizes.size(), std::nullopt);
  spec.block_sizes = std::move(sizes);
  spec.noise = noise;
  return spec;
}

/// Three blocks wired 0 -> 1 -> 2 -> 0 with probability `rho`, nothing else.
inline BlockModelSpec pure_3cyclic(std::size_t group_size, double rho) {
  if (group_size < 1) throw Error(Errc::InvalidArgument, "group size must be >= 1");
  auto spec = make_empty_spec({group_size, group_size, group_size}, 0.0);
  for (std::size_t b = 0; b < 3; ++b) spec.set(b, (b + 1) % 3, rho);
  spec.cyclic_groups.push_back({3, {{0}, {1}, {2}}});
  spec.block_names = {"V0", "V1", "V2"};
  return spec;
}

/// Sizes of the hidden-community model. The overlap between a cyclic set
/// and its classical community is not pinned down by the model description;
/// `overlap` is that size.
struct HiddenLayout {
  std::size_t classical_size = 150;
  std::size_t cyclic_size = 100;
  std::size_t overlap = 50;
  double p_classical = 0.4;
  double p_overlapping_classical = 0.2;
  double p_cyclic = 0.5;
  double noise = 0.001;
};

/// q_ext external classical communities, two classical communities (magenta,
/// yellow) overlapping the red and blue sets of a red -> green -> blue cyclic
/// community. Block order:
///   ext_0..ext_{q-1}, magenta, red&magenta, red, green, blue, blue&yellow, yellow
inline BlockModelSpec hidden_3cyclic(std::size_t q_ext, const HiddenLayout& L = {}) {
  if (L.overlap > L.cyclic_size || L.overlap > L.classical_size)
    throw Error(Errc::InvalidArgument, "overlap exceeds community size");
  std::vector<std::size_t> sizes(q_ext, L.classical_size);
  const std::size_t magenta = q_ext, red_mag = q_ext + 1, red = q_ext + 2, green = q_ext + 3,
                    blue = q_ext + 4, blue_yel = q_ext + 5, yellow = q_ext + 6;
  sizes.push_back(L.classical_size - L.overlap);  // magenta only
  sizes.push_back(L.overlap);                     // red & magenta
  sizes.push_back(L.cyclic_size - L.overlap);     // red only
  sizes.push_back(L.cyclic_size);                 // green
  sizes.push_back(L.cyclic_size - L.overlap);     // blue only
  sizes.push_back(L.overlap);                     // blue & yellow
  sizes.push_back(L.classical_size - L.overlap);  // yellow only

  auto spec = make_empty_spec(sizes, L.noise);
  for (std::size_t e = 0; e < q_ext; ++e) {
    spec.set(e, e, L.p_classical);
    spec.block_names.push_back("ext" + std::to_string(e));
  }
  for (const auto& name : {"magenta", "red&magenta", "red", "green", "blue", "blue&yellow", "yellow"})
    spec.block_names.emplace_back(name);

  const std::vector<std::size_t> mag_set{magenta, red_mag}, yel_set{blue_yel, yellow};
  for (auto set : {mag_set, yel_set})
    for (auto a : set)
      for (auto b : set) spec.set(a, b, L.p_overlapping_classical);

  const std::vector<std::vector<std::size_t>> cycle{{red_mag, red}, {green}, {blue, blue_yel}};
  for (std::size_t c = 0; c < 3; ++c)
    for (auto a : cycle[c])
      for (auto b : cycle[(c + 1) % 3]) spec.set(a, b, L.p_cyclic);

  spec.cyclic_groups.push_back({3, cycle});
  return spec;
}

/// Ten blocks [120, 60, 60, 40, 40, 40, 30, 30, 30, 30]: a classical block,
/// a 2-cycle, a 3-cycle and a 4-cycle at rho_in, everything else at rho_out.
inline BlockModelSpec mixed_cycles(double rho_in = 0.80, double rho_out = 0.01) {
  auto spec = make_empty_spec({120, 60, 60, 40, 40, 40, 30, 30, 30, 30}, rho_out);
  spec.set(0, 0, rho_in);
  spec.set(1, 2, rho_in);
  spec.set(2, 1, rho_in);
  for (std::size_t b = 3; b < 6; ++b) spec.set(b, b == 5 ? 3 : b + 1, rho_in);
  for (std::size_t b = 6; b < 10; ++b) spec.set(b, b == 9 ? 6 : b + 1, rho_in);
  spec.cyclic_groups.push_back({2, {{1}, {2}}});
  spec.cyclic_groups.push_back({3, {{3}, {4}, {5}}});
  spec.cyclic_groups.push_back({4, {{6}, {7}, {8}, {9}}});
  for (int b = 0; b < 10; ++b) spec.block_names.push_back("V" + std::to_string(b));
  return spec;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const CyclicGroup& g) {
  j = nlohmann::json{{"k", g.k}, {"blocks", g.positions}};
}

inline void from_json(const nlohmann::json& j, CyclicGroup& g) {
  g.k = j.at("k").get<int>();
  g.positions.clear();
  for (const auto& pos : j.at("blocks")) {
    if (pos.is_array())
      g.positions.push_back(pos.get<std::vector<std::size_t>>());
    else
      g.positions.push_back({pos.get<std::size_t>()});
  }
}

inline void to_json(nlohmann::json& j, const BlockModelSpec& s) {
  nlohmann::json p0 = nlohmann::json::array();
  for (const auto& p : s.p0) p0.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
  j = nlohmann::json{{"schema", "cyclescope.sbm.v1"},
                     {"block_sizes", s.block_sizes},
                     {"p0", p0},
                     {"noise", s.noise},
                     {"cyclic_groups", s.cyclic_groups}};
  if (!s.block_names.empty()) j["block_names"] = s.block_names;
}

inline void from_json(const nlohmann::json& j, BlockModelSpec& s) {
  s.block_sizes = j.at("block_sizes").get<std::vector<std::size_t>>();
  s.p0.clear();
  const auto& p0 = j.at("p0");
  // Accept both the flat row-major form and a nested b x b array.
  auto push = [&s](const nlohmann::json& v) {
    s.p0.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
  };
  for (const auto& row : p0) {
    if (row.is_array())
      for (const auto& v : row) push(v);
    else
      push(row);
  }
  s.noise = j.value("noise", 0.0);
  s.cyclic_groups = j.value("cyclic_groups", std::vector<CyclicGroup>{});
  s.block_names = j.value("block_names", std::vector<std::string>{});
  s.validate();
}

inline void to_json(nlohmann::json& j, const GroundTruth& t) {
  j = nlohmann::json{{"schema", "cyclescope.truth.v1"},
                     {"n", t.membership.size()},
                     {"block_sizes", t.block_sizes},
                     {"membership", t.membership},
                     {"cyclic_groups", t.cyclic_groups}};
  if (!t.block_names.empty()) j["block_names"] = t.block_names;
}

inline void from_json(const nlohmann::json& j, GroundTruth& t) {
  t.membership = j.at("membership").get<std::vector<std::size_t>>();
  t.block_sizes = j.at("block_sizes").get<std::vector<std::size_t>>();
  t.cyclic_groups = j.value("cyclic_groups", std::vector<CyclicGroup>{});
  t.block_names = j.value("block_names", std::vector<std::string>{});
  for (auto b : t.membership)
    if (b >= t.block_sizes.size())
      throw Error(Errc::IndexOutOfRange, "membership refers to a missing block");
}

}  // namespace cyclescope
