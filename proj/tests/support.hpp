#pragma once

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cyclescope/graph.hpp"

namespace testsupport {

using cyclescope::Digraph;
using cyclescope::EdgePair;

/// Erdos-Renyi digraph without loops.
inline Digraph random_digraph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<EdgePair> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(rng)) e.emplace_back(i, j);
  return cyclescope::from_edge_list(e, n);
}

/// A random Hamiltonian cycle plus Erdos-Renyi edges: always strongly connected.
inline Digraph random_strongly_connected(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(p);
  std::vector<EdgePair> e;
  for (std::size_t i = 0; i < n; ++i)
    if (n > 1) e.emplace_back(order[i], order[(i + 1) % n]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(rng)) e.emplace_back(i, j);
  return cyclescope::from_edge_list(e, n);
}

/// reach[u][v]: a walk of length >= 0 leads from u to v (Warshall closure).
inline std::vector<std::vector<bool>> reachability(const Digraph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t u = 0; u < n; ++u) {
    r[u][u] = true;
    for (auto v : g.out_neighbors(u)) r[u][v] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cyclescope-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
