#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "cyclescope/detail/assignment.hpp"
#include "cyclescope/error.hpp"
#include "cyclescope/graph.hpp"

namespace cyclescope {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;

/// exp(2*pi*i*p/q) with p, q coprime, q >= 1.
struct RootTarget {
  int p = 1;
  int q = 3;

  RootTarget() = default;
  RootTarget(int p_, int q_) : p(p_), q(q_) {
    if (q < 1 || p < 0 || std::gcd(p, q) != 1)
      throw Error(Errc::InvalidArgument,
                  "root target needs coprime p >= 0, q >= 1, got " + to_string());
  }

  cplx value() const {
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(q));
  }

  std::string to_string() const { return std::to_string(p) + "/" + std::to_string(q); }

  /// Parses "p/q".
  static RootTarget parse(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos)
      throw Error(Errc::InvalidArgument, "target must look like p/q, got '" + std::string(text) + "'");
    try {
      return RootTarget(std::stoi(std::string(text.substr(0, slash))),
                        std::stoi(std::string(text.substr(slash + 1))));
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidArgument, "target must look like p/q, got '" + std::string(text) + "'");
    }
  }

  bool operator==(const RootTarget&) const = default;
};

enum class Side { Left, Right, Both };

inline Side parse_side(std::string_view s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  if (s == "both") return Side::Both;
  throw Error(Errc::InvalidArgument, "side must be left, right or both");
}

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Both: return "both";
  }
  return "?";
}

inline bool wants_left(Side s) { return s != Side::Right; }
inline bool wants_right(Side s) { return s != Side::Left; }

/// Eigenvalue with optional unit-norm right vector (B v = lambda v) and left
/// vector (y^* B = lambda y^*), plus the 2-norm residuals of each.
struct EigenPair {
  cplx lambda{};
  std::optional<CVector> right;
  std::optional<CVector> left;
  double right_residual = 0.0;
  double left_residual = 0.0;
};

struct SolverOptions {
  double tol = 1e-10;
  std::size_t dense_threshold = 4000;
  int restart_dim = 40;
  int max_restarts = 200;
  std::function<void(std::string_view)> warn = [](std::string_view) {};
};

class AmbiguousTargetError : public Error {
 public:
  AmbiguousTargetError(EigenPair first, EigenPair second, const std::string& what)
      : Error(Errc::AmbiguousTarget, what), first_(std::move(first)), second_(std::move(second)) {}

  const EigenPair& first() const noexcept { return first_; }
  const EigenPair& second() const noexcept { return second_; }

 private:
  EigenPair first_, second_;
};

/// Rotates v so its largest-magnitude entry (first one on ties) is real and
/// positive. Makes vectors, and thus embeddings, reproducible.
inline void phase_normalize(CVector& v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs <= 0.0) return;
  v *= std::conj(v[best]) / best_abs;
  v[best] = cplx(best_abs, 0.0);
}

/// (||B v - lambda v||, ||y^* B - lambda y^*||) for the vectors present; a
/// missing side reports 0.
inline std::pair<double, double> residual(const TransitionMatrix& b, const EigenPair& pair) {
  if (!pair.right && !pair.left) throw Error(Errc::MissingSide, "eigenpair carries no vectors");
  double rr = 0.0, lr = 0.0;
  if (pair.right) rr = (b.apply(*pair.right) - pair.lambda * *pair.right).norm();
  if (pair.left) {
    // y^* B - lambda y^* = (B^T conj(y) - lambda conj(y))^T
    CVector w = pair.left->conjugate();
    lr = (b.apply_transpose(w) - pair.lambda * w).norm();
  }
  return {rr, lr};
}

namespace detail {

/// Diagonal similarity scaling (power-of-two factors) that equalizes row and
/// column norms. Returns d with A_balanced = D^{-1} A D.
inline Eigen::VectorXd balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  constexpr double radix = 2.0;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        d[i] *= f;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return d;
}

inline void check_dense_size(std::size_t n, std::size_t threshold) {
  if (n > threshold)
    throw Error(Errc::TooLarge, "dense eigensolve of size " + std::to_string(n) +
                                    " exceeds threshold " + std::to_string(threshold));
}

inline std::vector<cplx> dense_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd a = m;
  balance(a);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NoConvergenceError(std::numeric_limits<double>::infinity(),
                             "Hessenberg QR iteration did not converge");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// A tiny complex offset keeps (A - shift I) nonsingular when the shift is an
/// eigenvalue to working precision.
inline cplx inverse_iteration_shift(cplx lambda) {
  const double scale = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lambda));
  return lambda + std::polar(scale, 0.3);
}

inline CVector start_vector(Eigen::Index n) {
  // Fixed deterministic start so runs are reproducible.
  CVector v(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    const double jitter = static_cast<double>(state >> 11) * 0x1.0p-53;
    v[i] = cplx(1.0 + 0.5 * jitter, 0.25 - 0.5 * jitter);
  }
  return v / v.norm();
}

/// Inverse iteration on a dense matrix for the eigenvector closest to lambda.
inline CVector dense_inverse_iteration(const Eigen::MatrixXd& a, cplx lambda, int steps = 3) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd shifted = a.cast<cplx>();
  shifted.diagonal().array() -= inverse_iteration_shift(lambda);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
  CVector x = start_vector(n);
  for (int s = 0; s < steps; ++s) {
    x = lu.solve(x);
    const double nrm = x.norm();
    if (!std::isfinite(nrm) || nrm == 0.0) break;
    x /= nrm;
  }
  return x;
}

struct SparseShiftSolver {
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
  cplx shift;
};

/// Factorizes (A - shift I), nudging the shift off an exact singularity.
inline std::unique_ptr<SparseShiftSolver> factor_shifted(const Eigen::SparseMatrix<cplx>& a, cplx shift) {
  const Eigen::Index n = a.rows();
  double nudge = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    auto solver = std::make_unique<SparseShiftSolver>();
    solver->shift = shift + std::polar(nudge, 0.3);
    Eigen::SparseMatrix<cplx> id(n, n);
    id.setIdentity();
    Eigen::SparseMatrix<cplx> m = a - solver->shift * id;
    m.makeCompressed();
    solver->lu.compute(m);
    if (solver->lu.info() == Eigen::Success) return solver;
    nudge = nudge == 0.0 ? 1e-12 * std::max(1.0, std::abs(shift)) : nudge * 100.0;
  }
  throw NoConvergenceError(std::numeric_limits<double>::infinity(),
                           "sparse LU of shifted operator failed");
}

struct KrylovOutcome {
  CVector vector;
  cplx lambda{};
  double residual = std::numeric_limits<double>::infinity();
  std::vector<cplx> candidates;        // Ritz values, nearest the shift first
  std::vector<double> candidate_error; // rough error estimate per candidate
};

/// Explicitly restarted shift-invert Arnoldi for the eigenpair of op(A)
/// nearest the factored shift, where op(A) is A or A^T. A fixed-shift
/// inverse-iteration polish reuses the factorization; only if that stalls is
/// the operator refactored at the Rayleigh estimate.
inline KrylovOutcome shift_invert_arnoldi(const Eigen::SparseMatrix<cplx>& a,
                                          SparseShiftSolver& factored, bool transposed,
                                          const SolverOptions& opts) {
  const Eigen::Index n = a.rows();
  const cplx shift = factored.shift;
  const Eigen::Index m = std::max<Eigen::Index>(1, std::min<Eigen::Index>(opts.restart_dim, n));
  auto solve = [&](SparseShiftSolver& f, const CVector& x) -> CVector {
    if (transposed) return f.lu.transpose().solve(x);
    return f.lu.solve(x);
  };
  auto apply = [&](const CVector& x) -> CVector {
    if (transposed) return a.transpose() * x;
    return a * x;
  };
  auto true_residual = [&](const CVector& x, cplx lam) { return (apply(x) - lam * x).norm(); };

  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H(m + 1, m);
  CVector v = start_vector(n);
  KrylovOutcome best;

  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    V.col(0) = v;
    H.setZero();
    Eigen::Index used = m;
    for (Eigen::Index j = 0; j < m; ++j) {
      CVector w = solve(factored, V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i <= j; ++i) {
          const cplx h = V.col(i).dot(w);
          H(i, j) += h;
          w -= h * V.col(i);
        }
      }
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta <= 1e-13 * H.topLeftCorner(j + 1, j + 1).norm()) {
        used = j + 1;
        break;
      }
      V.col(j + 1) = w / beta;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H.topLeftCorner(used, used));
    if (es.info() != Eigen::Success) break;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(used));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
    });
    const double tail = used < m ? 0.0 : std::abs(H(used, used - 1));

    const Eigen::Index top = order.front();
    const cplx mu = es.eigenvalues()[top];
    CVector x = V.leftCols(used) * es.eigenvectors().col(top);
    x /= x.norm();
    const cplx lam = shift + 1.0 / mu;
    const double res = true_residual(x, lam);
    if (res < best.residual) {
      best.vector = x;
      best.lambda = lam;
      best.residual = res;
      best.candidates.clear();
      best.candidate_error.clear();
      for (auto idx : order) {
        const cplx mu_i = es.eigenvalues()[idx];
        if (std::abs(mu_i) == 0.0) continue;
        const CVector s = es.eigenvectors().col(idx);
        const double est = tail * std::abs(s[used - 1]) / s.norm() / std::norm(mu_i);
        best.candidates.push_back(shift + 1.0 / mu_i);
        best.candidate_error.push_back(est);
      }
    }
    if (res <= opts.tol || res <= 1e-7) break;
    v = x;
  }
  if (!(best.residual > 0.0) || !std::isfinite(best.residual)) return best;

  auto polish = [&](SparseShiftSolver& f, int steps) {
    CVector x = best.vector;
    for (int step = 0; step < steps && best.residual > 0.1 * opts.tol; ++step) {
      x = solve(f, x);
      const double nrm = x.norm();
      if (!std::isfinite(nrm) || nrm == 0.0) break;
      x /= nrm;
      const cplx rq = x.dot(apply(x));  // x^* op(A) x
      const double res = true_residual(x, rq);
      if (res < best.residual) {
        best.vector = x;
        best.lambda = rq;
        best.residual = res;
      }
    }
  };
  polish(factored, 40);
  if (best.residual > opts.tol) {
    try {
      const auto nearer = factor_shifted(a, inverse_iteration_shift(best.lambda));
      polish(*nearer, 3);
    } catch (const NoConvergenceError&) {
      // keep the Arnoldi estimate
    }
  }
  if (!best.candidates.empty()) best.candidates.front() = best.lambda;
  return best;
}

}  // namespace detail

/// All n eigenvalues, optionally with unit right eigenvectors and residuals.
inline std::vector<EigenPair> dense_spectrum(const TransitionMatrix& b, bool with_vectors = false,
                                             std::size_t dense_threshold = 4000) {
  detail::check_dense_size(b.size(), dense_threshold);
  std::vector<EigenPair> out;
  if (b.size() == 0) return out;
  if (!with_vectors) {
    for (cplx lam : detail::dense_eigenvalues(b.to_dense())) out.push_back({lam, {}, {}, 0.0, 0.0});
    return out;
  }
  Eigen::MatrixXd a = b.to_dense();
  const Eigen::VectorXd d = detail::balance(a);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw NoConvergenceError(std::numeric_limits<double>::infinity(),
                             "Hessenberg QR iteration did not converge");
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  for (Eigen::Index i = 0; i < vecs.cols(); ++i) {
    EigenPair p;
    p.lambda = es.eigenvalues()[i];
    CVector v = d.cast<cplx>().cwiseProduct(vecs.col(i));
    v /= v.norm();
    phase_normalize(v);
    p.right = std::move(v);
    p.right_residual = residual(b, p).first;
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<cplx> eigenvalues_of(const std::vector<EigenPair>& pairs) {
  std::vector<cplx> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.lambda);
  return out;
}

/// Eigenvalues sorted by distance to `target`, nearest first; ties keep the
/// solver's order.
inline std::vector<cplx> sort_by_distance(std::vector<cplx> values, cplx target) {
  std::stable_sort(values.begin(), values.end(), [target](cplx x, cplx y) {
    return std::abs(x - target) < std::abs(y - target);
  });
  return values;
}

/// Full output of a targeted solve: the selected pair plus the nearest
/// eigenvalue estimates seen by the solver.
struct NearestSolve {
  EigenPair pair;
  std::vector<cplx> nearest;  // up to a few, nearest first
  std::string method;         // "dense" or "shift-invert-arnoldi"
};

namespace detail {

inline void check_ambiguity(const std::vector<cplx>& nearest, const std::vector<double>& error,
                            cplx theta) {
  if (nearest.size() < 2) return;
  const double d0 = std::abs(nearest[0] - theta);
  const double d1 = std::abs(nearest[1] - theta);
  const bool reliable = error.empty() || error[1] < 1e-8;
  // A numerically repeated eigenvalue is not a choice between two candidates.
  if (reliable && std::abs(d1 - d0) <= 1e-8 && std::abs(nearest[0] - nearest[1]) > 1e-8) {
    EigenPair a{nearest[0], {}, {}, 0.0, 0.0}, b{nearest[1], {}, {}, 0.0, 0.0};
    throw AmbiguousTargetError(a, b, "two eigenvalues are equidistant from the target");
  }
}

}  // namespace detail

/// Eigenpair whose eigenvalue is nearest to the root of unity. Dense
/// Hessenberg QR plus inverse iteration at or below the dense threshold,
/// shift-invert Arnoldi above it.
inline NearestSolve solve_nearest(const TransitionMatrix& b, RootTarget target, Side side,
                                  const SolverOptions& opts = {}) {
  if (!(opts.tol > 0.0)) throw Error(Errc::InvalidArgument, "tolerance must be positive");
  if (b.size() == 0) throw Error(Errc::InvalidArgument, "empty matrix");
  if (!is_strongly_connected(b.graph()))
    opts.warn("graph is not strongly connected; the spectrum mixes components");
  const cplx theta = target.value();
  NearestSolve out;

  if (b.size() <= opts.dense_threshold) {
    out.method = "dense";
    const Eigen::MatrixXd a = b.to_dense();
    auto values = sort_by_distance(detail::dense_eigenvalues(a), theta);
    detail::check_ambiguity(values, {}, theta);
    out.nearest.assign(values.begin(), values.begin() + std::min<std::size_t>(3, values.size()));
    out.pair.lambda = values.front();
    if (wants_right(side)) {
      CVector x = detail::dense_inverse_iteration(a, out.pair.lambda);
      phase_normalize(x);
      out.pair.right = std::move(x);
    }
    if (wants_left(side)) {
      CVector w = detail::dense_inverse_iteration(a.transpose(), out.pair.lambda);
      CVector y = w.conjugate();
      phase_normalize(y);
      out.pair.left = std::move(y);
    }
  } else {
    out.method = "shift-invert-arnoldi";
    std::optional<detail::KrylovOutcome> right, left;
    const Eigen::SparseMatrix<cplx> a = b.to_sparse<cplx>();
    const auto factored = detail::factor_shifted(a, theta);
    if (wants_right(side)) right = detail::shift_invert_arnoldi(a, *factored, false, opts);
    if (wants_left(side)) left = detail::shift_invert_arnoldi(a, *factored, true, opts);
    const auto& primary = right ? *right : *left;
    auto values = primary.candidates;
    auto errors = primary.candidate_error;
    {
      // Keep candidates in distance order with errors aligned.
      std::vector<std::size_t> idx(values.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(values[x] - theta) < std::abs(values[y] - theta);
      });
      std::vector<cplx> v2;
      std::vector<double> e2;
      for (auto i : idx) {
        v2.push_back(values[i]);
        e2.push_back(errors[i]);
      }
      values.swap(v2);
      errors.swap(e2);
    }
    detail::check_ambiguity(values, errors, theta);
    out.nearest.assign(values.begin(), values.begin() + std::min<std::size_t>(3, values.size()));
    out.pair.lambda = primary.lambda;
    if (right) {
      CVector x = right->vector;
      phase_normalize(x);
      out.pair.right = std::move(x);
    }
    if (left) {
      CVector y = left->vector.conjugate();
      phase_normalize(y);
      out.pair.left = std::move(y);
    }
    if (right && left) {
      // Both sides refine the same eigenvalue; keep the estimate with the
      // smaller combined residual.
      EigenPair alt = out.pair;
      alt.lambda = left->lambda;
      auto [r1, l1] = residual(b, out.pair);
      auto [r2, l2] = residual(b, alt);
      if (std::max(r2, l2) < std::max(r1, l1)) out.pair.lambda = alt.lambda;
    }
  }

  auto [rr, lr] = residual(b, out.pair);
  out.pair.right_residual = rr;
  out.pair.left_residual = lr;
  const double worst = std::max(rr, lr);
  if (!(worst <= opts.tol))
    throw NoConvergenceError(worst, "eigenpair residual " + std::to_string(worst) +
                                        " above tolerance " + std::to_string(opts.tol));
  return out;
}

inline EigenPair nearest_eigenpair(const TransitionMatrix& b, RootTarget target, Side side,
                                   const SolverOptions& opts = {}) {
  return solve_nearest(b, target, side, opts).pair;
}

/// Optimal (min-sum) matching between two equally sized multisets of complex
/// numbers; returns the largest matched distance.
inline double spectral_matching_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size())
    throw Error(Errc::DimensionMismatch, "spectra have different sizes");
  auto match = detail::min_cost_assignment(a.size(), [&](std::size_t i, std::size_t j) {
    return std::abs(a[i] - b[j]);
  });
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[match[i]]));
  return worst;
}

struct LiftCheckReport {
  bool matches = false;
  double max_deviation = 0.0;
  std::vector<cplx> lifted;    // sigma(B_k)
  std::vector<cplx> expected;  // {theta_{p,k} lambda}
};

/// Compares sigma(B_k) of the k-colored lift with k rotated copies of sigma(B).
inline LiftCheckReport lift_spectrum_check(const TransitionMatrix& b, int k, double tol,
                                           std::size_t dense_threshold = 4000) {
  if (k < 2) throw Error(Errc::InvalidArgument, "lift order must be >= 2");
  detail::check_dense_size(static_cast<std::size_t>(k) * b.size(), dense_threshold);
  LiftCheckReport r;
  const auto base = detail::dense_eigenvalues(b.to_dense());
  for (int p = 0; p < k; ++p) {
    const cplx rot = std::polar(1.0, 2.0 * std::numbers::pi * p / k);
    for (cplx lam : base) r.expected.push_back(rot * lam);
  }
  const TransitionMatrix lifted(stateful_lift(b.graph(), k));
  r.lifted = detail::dense_eigenvalues(lifted.to_dense());
  r.max_deviation = spectral_matching_distance(r.lifted, r.expected);
  r.matches = r.max_deviation <= tol;
  return r;
}

}  // namespace cyclescope
