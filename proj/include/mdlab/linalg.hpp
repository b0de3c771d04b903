#pragma once

// Sparse Cholesky, preconditioned MinRes, dense generalized symmetric
// eigensolver and a Lanczos iteration with full reorthogonalization.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "error.hpp"

namespace mdlab {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct LinearOperator {
  Eigen::Index dim = 0;
  std::function<Vector(const Vector&)> apply;
  bool symmetric = true;

  Vector operator()(const Vector& x) const { return apply(x); }
};

inline LinearOperator as_operator(const SparseMatrix& a) {
  return {a.rows(), [&a](const Vector& x) -> Vector { return a * x; }, true};
}

inline LinearOperator identity_operator(Eigen::Index n) {
  return {n, [](const Vector& x) { return x; }, true};
}

/// Largest |<Ax,y> - <x,Ay>| / (|x||y|) over a few random probes.
inline double symmetry_defect(const LinearOperator& op, int probes = 3, unsigned seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    Vector x(op.dim), y(op.dim);
    for (Eigen::Index i = 0; i < op.dim; ++i) {
      x[i] = nd(rng);
      y[i] = nd(rng);
    }
    const double d = std::abs(op(x).dot(y) - x.dot(op(y))) / (x.norm() * y.norm());
    worst = std::max(worst, d);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sparse Cholesky

class SparseCholesky {
 public:
  SparseCholesky() = default;
  explicit SparseCholesky(const SparseMatrix& a) { compute(a); }

  void compute(const SparseMatrix& a) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "Cholesky of a non-square matrix");
    n_ = a.rows();
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) throw Error(ErrorCode::NotSpd, "nonpositive pivot in sparse Cholesky");
  }

  Vector solve(const Vector& b) const { return llt_.solve(b); }
  DenseMatrix solve(const DenseMatrix& b) const { return llt_.solve(b); }
  Eigen::Index size() const { return n_; }

  LinearOperator inverse() const {
    return {n_, [this](const Vector& x) { return solve(x); }, true};
  }

 private:
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  Eigen::Index n_ = 0;
};

/// Dense S = B A^{-1} B^T for sparse B (m x n), with A given by its factor.
/// Columns are solved in blocks to bound memory.
inline DenseMatrix schur_complement(const SparseCholesky& a, const SparseMatrix& b, Eigen::Index block = 64) {
  if (b.cols() != a.size()) throw Error(ErrorCode::DimensionMismatch, "schur_complement dimensions");
  const SparseMatrix bt = b.transpose();
  const Eigen::Index m = b.rows();
  DenseMatrix s(m, m);
  for (Eigen::Index j = 0; j < m; j += block) {
    const Eigen::Index k = std::min(block, m - j);
    const DenseMatrix rhs = DenseMatrix(bt.middleCols(j, k));
    const DenseMatrix x = a.solve(rhs);
    s.middleCols(j, k) = b * x;
  }
  return 0.5 * (s + s.transpose());
}

// ---------------------------------------------------------------------------
// MinRes

struct SolveReport {
  int iterations = 0;
  std::vector<double> history;  // preconditioned residual norms, history[0] = initial
  bool converged = false;
  double wall_time = 0.0;
};

struct MinresOptions {
  double rtol = 1e-10;
  int maxit = 400;
};

/// Preconditioned MinRes (Paige-Saunders recurrences) from the zero initial
/// guess. `precond` applies an SPD approximation of op^{-1}; convergence is
/// measured in the preconditioned residual norm sqrt(r^T P r).
inline Vector minres(const LinearOperator& op, const LinearOperator& precond, const Vector& rhs,
                     SolveReport& report, const MinresOptions& opts = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = op.dim;
  if (rhs.size() != n || precond.dim != n) throw Error(ErrorCode::DimensionMismatch, "minres dimensions");
  report = SolveReport{};
  Vector x = Vector::Zero(n);

  Vector r1 = rhs;
  Vector y = precond(r1);
  double beta2 = r1.dot(y);
  if (beta2 < 0.0) throw Error(ErrorCode::PrecondNotSpd, "<Pr, r> < 0 in minres");
  double beta = std::sqrt(beta2);
  const double beta1 = beta;
  report.history.push_back(beta1);
  auto finish = [&](bool ok) {
    report.converged = ok;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return x;
  };
  if (beta1 == 0.0) return finish(true);

  Vector r2 = r1;
  Vector w = Vector::Zero(n), w1 = Vector::Zero(n), w2 = Vector::Zero(n), v(n);
  double oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta1, cs = -1.0, sn = 0.0;
  const double tiny = std::numeric_limits<double>::epsilon();

  for (int itn = 1; itn <= opts.maxit; ++itn) {
    v = y / beta;
    y = op(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = precond(r2);
    oldb = beta;
    beta2 = r2.dot(y);
    if (beta2 < 0.0) throw Error(ErrorCode::PrecondNotSpd, "<Pr, r> < 0 in minres");
    beta = std::sqrt(beta2);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    report.iterations = itn;
    report.history.push_back(phibar);
    if (phibar <= opts.rtol * beta1 || beta == 0.0) return finish(true);
  }
  return finish(false);
}

// ---------------------------------------------------------------------------
// Dense generalized symmetric eigenproblem

struct DenseEigen {
  Vector values;        // ascending
  DenseMatrix vectors;  // B-orthonormal columns
};

/// All eigenpairs of A x = lambda B x via Cholesky reduction to standard form.
inline DenseEigen dense_geig(const DenseMatrix& a, const DenseMatrix& b, Eigen::Index max_dim = 6000) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "dense_geig dimensions");
  }
  if (a.rows() > max_dim) throw Error(ErrorCode::InvalidArgument, "dense_geig beyond the dense budget");
  Eigen::LLT<DenseMatrix> llt(b);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotSpd, "B is not positive definite");
  const auto l = llt.matrixL();
  DenseMatrix c = l.solve(a);
  c = l.solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(c);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Breakdown, "symmetric eigensolver did not converge");
  DenseEigen out;
  out.values = es.eigenvalues();
  out.vectors = llt.matrixU().solve(es.eigenvectors());
  return out;
}

/// Values only, for callers that do not need the eigenvectors.
inline Vector dense_geig_values(const DenseMatrix& a, const DenseMatrix& b, Eigen::Index max_dim = 6000) {
  if (a.rows() > max_dim) throw Error(ErrorCode::InvalidArgument, "dense_geig beyond the dense budget");
  Eigen::LLT<DenseMatrix> llt(b);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotSpd, "B is not positive definite");
  const auto l = llt.matrixL();
  DenseMatrix c = l.solve(a);
  c = l.solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(c, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Breakdown, "symmetric eigensolver did not converge");
  return es.eigenvalues();
}

// ---------------------------------------------------------------------------
// Lanczos

struct LanczosOptions {
  int max_steps = 200;
  double tol = 1e-9;  // relative residual bound for the tracked Ritz values
  std::uint64_t seed = 42;
  int max_restarts = 3;
};

struct LanczosResult {
  Vector ritz;  // ascending
  int steps = 0;
  bool converged = false;
};

/// Lanczos for an operator S that is self-adjoint in the inner product
/// <x, y>_G = x^T G y, with full reorthogonalization. Stops when the smallest
/// and largest Ritz values have residual estimates below tol * |theta|.
inline LanczosResult lanczos(const LinearOperator& s, const LinearOperator& g, const LanczosOptions& opts = {}) {
  const Eigen::Index n = s.dim;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  const int kmax = static_cast<int>(std::min<Eigen::Index>(opts.max_steps, n));

  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    std::vector<Vector> q, gq;
    std::vector<double> alpha, beta;
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = nd(rng);
    Vector gx = g(x);
    double nrm2 = x.dot(gx);
    if (!(nrm2 > 0.0)) continue;
    double nrm = std::sqrt(nrm2);
    q.push_back(x / nrm);
    gq.push_back(gx / nrm);

    LanczosResult res;
    bool restart = false;
    for (int j = 0; j < kmax; ++j) {
      Vector w = s(q[j]);
      const double a = gq[j].dot(w);
      alpha.push_back(a);
      w -= a * q[j];
      if (j > 0) w -= beta[j - 1] * q[j - 1];
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) w -= gq[i].dot(w) * q[i];
      }
      Vector gw = g(w);
      const double b2 = w.dot(gw);
      const double b = b2 > 0.0 ? std::sqrt(b2) : 0.0;

      const int m = j + 1;
      DenseMatrix t = DenseMatrix::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t);
      const Vector& th = es.eigenvalues();
      const double scale = th.cwiseAbs().maxCoeff();
      const double r_lo = std::abs(b * es.eigenvectors()(m - 1, 0));
      const double r_hi = std::abs(b * es.eigenvectors()(m - 1, m - 1));
      res.ritz = th;
      res.steps = m;

      const bool invariant = b <= 1e-13 * std::max(scale, 1.0);
      if (invariant && j == 0 && std::abs(a) == 0.0) {
        restart = true;
        break;
      }
      const bool done = r_lo <= opts.tol * std::max(std::abs(th[0]), 1e-300) &&
                        r_hi <= opts.tol * std::max(std::abs(th[m - 1]), 1e-300) && m >= 2;
      if (invariant || done || m == n) {
        res.converged = true;
        return res;
      }
      beta.push_back(b);
      q.push_back(w / b);
      gq.push_back(gw / b);
    }
    if (!restart) return res;
  }
  throw Error(ErrorCode::Breakdown, "Lanczos start vectors with zero G-norm");
}

/// Signed extremes (smallest and largest) of A x = lambda B x, given A by
/// application and B by solve and application.
inline std::pair<double, double> lanczos_extremes(const LinearOperator& a, const LinearOperator& b_apply,
                                                  const LinearOperator& b_solve, const LanczosOptions& opts = {}) {
  const LinearOperator s{a.dim, [&](const Vector& x) { return b_solve(a(x)); }, true};
  const auto res = lanczos(s, b_apply, opts);
  return {res.ritz[0], res.ritz[res.ritz.size() - 1]};
}

}  // namespace mdlab
