#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "cyclescope/sbm.hpp"
#include "cyclescope/svd.hpp"
#include "support.hpp"

using namespace cyclescope;

namespace {

Digraph permutation_graph(const std::vector<std::size_t>& perm) {
  std::vector<EdgePair> e;
  for (std::size_t i = 0; i < perm.size(); ++i) e.emplace_back(i, perm[i]);
  return from_edge_list(e, perm.size());
}

Digraph relabel(const Digraph& g, const std::vector<std::size_t>& perm) {
  std::vector<EdgePair> e;
  for (auto [u, v] : g.edges()) e.emplace_back(perm[u], perm[v]);
  return from_edge_list(e, g.num_vertices());
}

// Nonnegative eigenvalues of [[0, M], [M^t, 0]], descending.
Eigen::VectorXd lift_eigen_oracle(const SparseReal& m) {
  const Eigen::Index r = m.rows(), c = m.cols();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(r + c, r + c);
  big.topRightCorner(r, c) = Eigen::MatrixXd(m);
  big.bottomLeftCorner(c, r) = Eigen::MatrixXd(m).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(big, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse().head(std::min(r, c));
}

std::vector<std::size_t> component_sizes(const Digraph& g) {
  std::size_t count = 0;
  auto comp = strongly_connected_components(g, &count);
  std::vector<std::size_t> sizes(count, 0);
  for (auto c : comp) ++sizes[c];
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

void expect_orthonormal(const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd gram = q.transpose() * q;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8);
}

}  // namespace

TEST(ScaledAdjacency, TriangleAndStar) {
  auto tri = Eigen::MatrixXd(scaled_adjacency(from_edge_list({{0, 1}, {1, 2}, {2, 0}})));
  EXPECT_EQ(tri.sum(), 3.0);
  EXPECT_EQ(tri(0, 1), 1.0);

  auto star = Eigen::MatrixXd(scaled_adjacency(from_edge_list({{0, 1}, {0, 2}, {0, 3}, {0, 4}})));
  for (int j = 1; j <= 4; ++j) EXPECT_DOUBLE_EQ(star(0, j), 0.5);  // 1/sqrt(4 * 1)
  EXPECT_EQ(star.bottomRows(4).cwiseAbs().sum(), 0.0);  // sinks keep zero rows
}

TEST(ScaledAdjacency, EntriesAndNormAtMostOne) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto g = testsupport::random_digraph(30, 0.12, seed);
    auto m = Eigen::MatrixXd(scaled_adjacency(g));
    const auto out = g.out_degrees();
    const auto in = g.in_degrees();
    for (auto [u, v] : g.edges())
      EXPECT_NEAR(m(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)),
                  1.0 / std::sqrt(static_cast<double>(out[u] * in[v])), 1e-15);
    EXPECT_EQ((m.array() != 0.0).count(), static_cast<Eigen::Index>(g.num_edges()));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    EXPECT_LE(svd.singularValues()(0), 1.0 + 1e-8);
  }
}

TEST(TruncatedSvd, MatchesLiftEigenvaluesDense) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto g = testsupport::random_strongly_connected(10 + 5 * seed, 0.15, seed);
    auto m = scaled_adjacency(g);
    const auto oracle = lift_eigen_oracle(m);
    const Eigen::Index s = std::min<Eigen::Index>(8, m.rows());
    auto e = truncated_svd(m, s);
    EXPECT_EQ(e.method, "dense");
    EXPECT_EQ(e.rank(), s);
    for (Eigen::Index j = 0; j < s; ++j) EXPECT_NEAR(e.singular_values(j), oracle(j), 1e-10);
    for (Eigen::Index j = 1; j < s; ++j) EXPECT_LE(e.singular_values(j), e.singular_values(j - 1));
    EXPECT_LE(e.max_residual, 1e-8);
    expect_orthonormal(e.left_coords);
    expect_orthonormal(e.right_coords);
  }
}

TEST(TruncatedSvd, LanczosAgreesWithDense) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto g = testsupport::random_strongly_connected(60 + 20 * seed, 0.08, seed);
    auto m = scaled_adjacency(g);
    auto dense = truncated_svd(m, 10);
    auto iter = truncated_svd(m, 10, 0);
    EXPECT_EQ(iter.method, "lanczos");
    EXPECT_LE(iter.max_residual, 1e-8);
    EXPECT_LT((dense.singular_values - iter.singular_values).cwiseAbs().maxCoeff(), 1e-9);
    expect_orthonormal(iter.left_coords);
    expect_orthonormal(iter.right_coords);
    // each triplet is checked directly: M w_j = sigma_j u_j
    Eigen::MatrixXd md(m);
    for (Eigen::Index j = 0; j < 10; ++j)
      EXPECT_LE((md * iter.right_coords.col(j) - iter.singular_values(j) * iter.left_coords.col(j)).norm(), 1e-8);
  }
}

TEST(TruncatedSvd, PermutationGraphsAreAllOnes) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::size_t> perm(12 + static_cast<std::size_t>(trial) * 7);
    std::iota(perm.begin(), perm.end(), 0);
    // a derangement, since fixed points would be self-loops
    do std::shuffle(perm.begin(), perm.end(), rng);
    while (std::any_of(perm.begin(), perm.end(), [&](std::size_t v) { return perm[v] == v; }));
    auto m = scaled_adjacency(permutation_graph(perm));
    const auto n = m.rows();
    for (std::size_t threshold : {std::size_t{4000}, std::size_t{0}}) {
      auto e = truncated_svd(m, n, threshold);
      EXPECT_LT((e.singular_values.array() - 1.0).abs().maxCoeff(), 1e-10);
    }
  }
}

TEST(TruncatedSvd, InvariantUnderRelabeling) {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto g = testsupport::random_digraph(40, 0.1, seed);
    std::vector<std::size_t> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto a = truncated_svd(scaled_adjacency(g), 40);
    auto b = truncated_svd(scaled_adjacency(relabel(g, perm)), 40);
    EXPECT_LT((a.singular_values - b.singular_values).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TruncatedSvd, RankChecks) {
  auto m = scaled_adjacency(from_edge_list({{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_THROW(truncated_svd(m, 0), Error);
  EXPECT_THROW(truncated_svd(m, 4), Error);
}

TEST(TruncatedSvd, HiddenCommunityGap) {
  auto g = sample(hidden_3cyclic(2), 1).first;
  auto e = truncated_svd(scaled_adjacency(g), 25);
  EXPECT_GE(e.singular_values(6) / e.singular_values(7), 1.5);
}

TEST(BipartiteLift, DirectedTriangleIsPerfectMatching) {
  auto lift = bipartite_lift(from_edge_list({{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_EQ(lift.num_vertices(), 6u);
  EXPECT_EQ(lift.num_edges(), 6u);  // 3 undirected edges stored as arc pairs
  for (Vertex v = 0; v < 6; ++v) EXPECT_EQ(lift.out_degree(v), 1u);
  EXPECT_TRUE(lift.has_edge(0, 4));
  EXPECT_TRUE(lift.has_edge(4, 0));
  EXPECT_TRUE(lift.has_edge(2, 3));
  EXPECT_EQ(component_sizes(lift), std::vector<std::size_t>(3, 2));
}

TEST(BipartiteLift, ReciprocalTriangleIsSixCycle) {
  auto lift = bipartite_lift(from_edge_list({{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 0}, {0, 2}}));
  EXPECT_EQ(lift.num_edges(), 12u);
  for (Vertex v = 0; v < 6; ++v) EXPECT_EQ(lift.out_degree(v), 2u);
  EXPECT_TRUE(is_strongly_connected(lift));
}

TEST(BipartiteLift, PermutationGraphsCollapse) {
  // one 6-cycle and two 3-cycles: different eigenvalues, isomorphic lifts
  auto six = permutation_graph({1, 2, 3, 4, 5, 0});
  auto threes = permutation_graph({1, 2, 0, 4, 5, 3});
  auto a = bipartite_lift(six), b = bipartite_lift(threes);
  EXPECT_EQ(component_sizes(a), std::vector<std::size_t>(6, 2));
  EXPECT_EQ(component_sizes(b), component_sizes(a));
  auto da = a.out_degrees(), db = b.out_degrees();
  std::sort(da.begin(), da.end());
  std::sort(db.begin(), db.end());
  EXPECT_EQ(da, db);
}

TEST(PlanarProjection, PicksColumnsAndChecksDims) {
  auto g = testsupport::random_strongly_connected(20, 0.2, 3);
  auto e = truncated_svd(scaled_adjacency(g), 5);
  auto left = svd_planar_projection(e, 3, 4, Side::Left);
  auto right = svd_planar_projection(e, 1, 0, Side::Right);
  ASSERT_EQ(left.size(), 20u);
  EXPECT_EQ(left[7][0], e.left_coords(7, 3));
  EXPECT_EQ(left[7][1], e.left_coords(7, 4));
  EXPECT_EQ(right[2][0], e.right_coords(2, 1));
  EXPECT_THROW(svd_planar_projection(e, 0, 5, Side::Left), Error);
  EXPECT_THROW(svd_planar_projection(e, 2, 2, Side::Left), Error);
  EXPECT_THROW(svd_planar_projection(e, 0, 1, Side::Both), Error);
}
