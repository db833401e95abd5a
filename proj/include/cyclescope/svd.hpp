#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cyclescope/embed.hpp"
#include "cyclescope/error.hpp"
#include "cyclescope/graph.hpp"

namespace cyclescope {

using SparseReal = Eigen::SparseMatrix<double>;

/// D_r^{-1/2} A D_c^{-1/2} with out-degrees D_r and in-degrees D_c; entry
/// (i, j) is 1/sqrt(d_i^out d_j^in). Zero-degree rows and columns stay zero.
inline SparseReal scaled_adjacency(const Digraph& g) {
  const auto out = g.out_degrees();
  const auto in = g.in_degrees();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(g.num_edges());
  for (Vertex u = 0; u < g.num_vertices(); ++u)
    for (Vertex v : g.out_neighbors(u))
      entries.emplace_back(static_cast<int>(u), static_cast<int>(v),
                           1.0 / std::sqrt(static_cast<double>(out[u]) * static_cast<double>(in[v])));
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  SparseReal m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

/// Undirected graph on 2n vertices, stored with both arc directions: edge
/// (i, j) of g becomes {i, n + j}.
inline Digraph bipartite_lift(const Digraph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<EdgePair> arcs;
  arcs.reserve(2 * g.num_edges());
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v : g.out_neighbors(u)) {
      arcs.emplace_back(static_cast<std::int64_t>(u), static_cast<std::int64_t>(n + v));
      arcs.emplace_back(static_cast<std::int64_t>(n + v), static_cast<std::int64_t>(u));
    }
  return from_edge_list(arcs, 2 * n);
}

/// Rank-s SVD: row i of left_coords is U_s^T e_i, of right_coords W_s^T e_i.
struct SvdEmbedding {
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd left_coords;
  Eigen::MatrixXd right_coords;
  std::string scaling = "D_r^-1/2 A D_c^-1/2";
  std::string method;  // "dense" or "lanczos"
  double max_residual = 0.0;

  Eigen::Index rank() const noexcept { return singular_values.size(); }
};

namespace detail {

/// Flips each singular pair so the largest-magnitude entry of u_j is
/// positive (first on ties).
inline void fix_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& w) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < u.rows(); ++i)
      if (std::abs(u(i, j)) > std::abs(u(best, j))) best = i;
    if (u(best, j) < 0.0) {
      u.col(j) *= -1.0;
      w.col(j) *= -1.0;
    }
  }
}

inline double svd_residual(const SparseReal& m, const Eigen::VectorXd& s, const Eigen::MatrixXd& u,
                           const Eigen::MatrixXd& w) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const Eigen::VectorXd mw = m * w.col(j);
    const Eigen::VectorXd mtu = m.transpose() * u.col(j);
    worst = std::max({worst, (mw - s[j] * u.col(j)).norm(), (mtu - s[j] * w.col(j)).norm()});
  }
  return worst;
}

/// Top-s eigenpairs of the symmetric lift [[0, M], [M^T, 0]] by Lanczos with
/// full reorthogonalization; the Krylov space grows until the wanted Ritz
/// pairs converge. On breakdown it continues from a fresh orthogonal vector,
/// which picks up repeated eigenvalues.
inline void lanczos_lift(const SparseReal& m, Eigen::Index s, Eigen::VectorXd& values,
                         Eigen::MatrixXd& vectors) {
  const Eigen::Index rows = m.rows(), cols = m.cols(), dim = rows + cols;
  const SparseReal mt = m.transpose();
  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(dim);
    y.head(rows) = m * x.tail(cols);
    y.tail(cols) = mt * x.head(rows);
    return y;
  };
  std::uint64_t state = 0x2545F4914F6CDD1Dull;
  auto random_vector = [&]() {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    }
    return v;
  };

  Eigen::MatrixXd q(dim, std::min<Eigen::Index>(dim, std::max<Eigen::Index>(2 * s + 20, 60)));
  std::vector<double> alpha, beta;  // beta[j] couples q_j and q_{j+1}
  auto orthogonalize = [&](Eigen::VectorXd& v, Eigen::Index upto) {
    for (int pass = 0; pass < 2; ++pass)
      v -= q.leftCols(upto) * (q.leftCols(upto).transpose() * v);
  };
  Eigen::VectorXd v = random_vector();
  v.normalize();
  q.col(0) = v;
  Eigen::Index j = 0;
  while (true) {
    Eigen::VectorXd w = apply(q.col(j));
    alpha.push_back(q.col(j).dot(w));
    orthogonalize(w, j + 1);
    double b = w.norm();
    ++j;
    // Check convergence at the current size. Right after a breakdown every
    // Ritz residual looks tiny, but the space may still miss further copies
    // of a repeated eigenvalue, so only a full basis is accepted then.
    const bool full = j == dim;
    if (j >= s && (full || (j % 10 == 0 && b >= 1e-12))) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j, j);
      for (Eigen::Index i = 0; i < j; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < j) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      bool ok = true;
      for (Eigen::Index r = 0; r < s; ++r) {
        const Eigen::Index c = j - 1 - r;
        const double theta = es.eigenvalues()[c];
        if (b * std::abs(es.eigenvectors()(j - 1, c)) > 1e-11 * std::max(1.0, std::abs(theta))) {
          ok = false;
          break;
        }
      }
      if (ok || full) {
        values.resize(s);
        vectors.resize(dim, s);
        for (Eigen::Index r = 0; r < s; ++r) {
          const Eigen::Index c = j - 1 - r;
          values[r] = es.eigenvalues()[c];
          vectors.col(r) = q.leftCols(j) * es.eigenvectors().col(c);
        }
        return;
      }
    }
    if (b < 1e-12) {
      // invariant subspace: restart from a new direction
      w = random_vector();
      orthogonalize(w, j);
      b = w.norm();
      if (b < 1e-12) throw NoConvergenceError(b, "Lanczos could not extend the Krylov basis");
      beta.push_back(0.0);
    } else {
      beta.push_back(b);
    }
    if (j == q.cols()) q.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(dim, 2 * q.cols()));
    q.col(j) = w / b;
  }
}

}  // namespace detail

/// Top-s singular triplets of M. Dense SVD when min(rows, cols) is at most
/// dense_threshold, otherwise Lanczos on the symmetric bipartite lift.
/// Throws NoConvergence if any triplet residual exceeds 1e-8.
inline SvdEmbedding truncated_svd(const SparseReal& m, Eigen::Index s,
                                  std::size_t dense_threshold = 4000) {
  const Eigen::Index small = std::min(m.rows(), m.cols());
  if (s < 1 || s > small)
    throw Error(Errc::InvalidArgument,
                "rank must lie in [1, " + std::to_string(small) + "], got " + std::to_string(s));
  SvdEmbedding e;
  Eigen::MatrixXd u, w;
  if (static_cast<std::size_t>(small) <= dense_threshold) {
    e.method = "dense";
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    e.singular_values = svd.singularValues().head(s);
    u = svd.matrixU().leftCols(s);
    w = svd.matrixV().leftCols(s);
  } else {
    e.method = "lanczos";
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    detail::lanczos_lift(m, s, values, vectors);
    e.singular_values.resize(s);
    u.resize(m.rows(), s);
    w.resize(m.cols(), s);
    for (Eigen::Index j = 0; j < s; ++j) {
      const double sigma = std::max(0.0, values[j]);
      e.singular_values[j] = sigma;
      Eigen::VectorXd uj = vectors.col(j).head(m.rows());
      Eigen::VectorXd wj = vectors.col(j).tail(m.cols());
      // For sigma > 0 both halves have norm 1/sqrt(2); near sigma = 0 rebuild
      // the weaker half from the stronger one.
      if (uj.norm() < 1e-6 && wj.norm() > 0.0) {
        wj.normalize();
        uj = m * wj;
        if (uj.norm() > 0.0) uj.normalize();
      } else if (wj.norm() < 1e-6 && uj.norm() > 0.0) {
        uj.normalize();
        wj = m.transpose() * uj;
        if (wj.norm() > 0.0) wj.normalize();
      } else {
        uj.normalize();
        wj.normalize();
      }
      u.col(j) = uj;
      w.col(j) = wj;
    }
  }
  detail::fix_signs(u, w);
  e.max_residual = detail::svd_residual(m, e.singular_values, u, w);
  if (e.max_residual > 1e-8)
    throw NoConvergenceError(e.max_residual, "truncated SVD residual " + std::to_string(e.max_residual));
  e.left_coords = std::move(u);
  e.right_coords = std::move(w);
  return e;
}

/// (coords[i][a], coords[i][b]) on the chosen side, 0-based dims.
inline std::vector<Point> svd_planar_projection(const SvdEmbedding& e, Eigen::Index a, Eigen::Index b,
                                                Side side) {
  if (a < 0 || b < 0 || a >= e.rank() || b >= e.rank())
    throw Error(Errc::IndexOutOfRange, "projection dims must be below the rank " + std::to_string(e.rank()));
  if (a == b) throw Error(Errc::InvalidArgument, "projection dims must differ");
  if (side == Side::Both) throw Error(Errc::InvalidArgument, "project one side at a time");
  const Eigen::MatrixXd& c = side == Side::Left ? e.left_coords : e.right_coords;
  std::vector<Point> out(static_cast<std::size_t>(c.rows()));
  for (Eigen::Index i = 0; i < c.rows(); ++i) out[static_cast<std::size_t>(i)] = {c(i, a), c(i, b)};
  return out;
}

}  // namespace cyclescope
