#pragma once

// Inf-sup and trace-constant measurements:
//
//   Schur      B A^-1 B^T p = lambda_B^2 H(-1/2) p        (trace multiplier problem)
//   Steklov    T^T M T u    = lambda_S^2 A u              (largest value only)
//   mean       lambda_S^2   = m^T A^-1 m / |Gamma|
//   pencil     A y = lambda P y, P the block Riesz map of a preconditioner
//
// plus the fit lambda ~ C sqrt(eps |log eps|).

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "systems.hpp"

namespace mdlab {

struct EigenReport {
  std::string kind;
  std::string method;  // "dense" or "lanczos"
  Vector values;       // full spectrum (ascending) on the dense path, empty otherwise
  double min = 0.0;    // algebraically smallest
  double max = 0.0;    // algebraically largest
  double abs_min = 0.0;  // signed value of smallest magnitude
  double abs_max = 0.0;  // signed value of largest magnitude
  Eigen::Index dofs = 0;
  int lanczos_steps = 0;
  bool converged = true;
};

struct EigenOptions {
  Eigen::Index dense_limit = 2000;  // problem size up to which spectra are computed densely
  LanczosOptions lanczos{300, 1e-8, 42, 3};
};

namespace detail {

inline void fill_extremes(EigenReport& r, const Vector& sorted) {
  r.min = sorted[0];
  r.max = sorted[sorted.size() - 1];
  Eigen::Index imin = 0, imax = 0;
  sorted.cwiseAbs().minCoeff(&imin);
  sorted.cwiseAbs().maxCoeff(&imax);
  r.abs_min = sorted[imin];
  r.abs_max = sorted[imax];
}

/// Extreme eigenvalues of a x = lambda b x with dense SPD b, dense or by Lanczos.
inline EigenReport dense_pencil_extremes(const DenseMatrix& a, const DenseMatrix& b, const EigenOptions& opts) {
  EigenReport r;
  r.dofs = a.rows();
  if (a.rows() <= opts.dense_limit) {
    r.method = "dense";
    r.values = dense_geig_values(a, b, opts.dense_limit);
    fill_extremes(r, r.values);
    return r;
  }
  r.method = "lanczos";
  Eigen::LLT<DenseMatrix> llt(b);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotSpd, "norm matrix not positive definite");
  const LinearOperator s{a.rows(), [&](const Vector& x) -> Vector { return llt.solve(a * x); }, true};
  const LinearOperator g{a.rows(), [&](const Vector& x) -> Vector { return b * x; }, true};
  const auto res = lanczos(s, g, opts.lanczos);
  r.min = res.ritz[0];
  r.max = res.ritz[res.ritz.size() - 1];
  r.abs_max = std::abs(r.min) > std::abs(r.max) ? r.min : r.max;
  r.abs_min = r.min > 0.0 ? r.min : (r.max < 0.0 ? r.max : 0.0);
  r.lanczos_steps = res.steps;
  r.converged = res.converged;
  return r;
}

inline Vector sqrt_clamped(const Vector& v) { return v.cwiseMax(0.0).cwiseSqrt(); }

inline void take_square_roots(EigenReport& r) {
  if (r.values.size() > 0) r.values = sqrt_clamped(r.values);
  r.min = std::sqrt(std::max(0.0, r.min));
  r.max = std::sqrt(std::max(0.0, r.max));
  r.abs_min = r.min;
  r.abs_max = r.max;
}

}  // namespace detail

/// lambda_B of the two-field trace multiplier system.
inline EigenReport schur_eigs(const BlockSystem& sys, const SpectralBasis& basis, const EigenOptions& opts = {}) {
  if (sys.n_c() != 0) throw Error(ErrorCode::InvalidArgument, "schur_eigs expects a two-field trace multiplier system");
  if (basis.size() != sys.n_p()) throw Error(ErrorCode::DimensionMismatch, "basis does not match the multiplier space");
  const SparseCholesky fac(sys.a);
  const DenseMatrix s = schur_complement(fac, sys.b_omega);
  auto r = detail::dense_pencil_extremes(s, norm_matrix(basis, -0.5), opts);
  detail::take_square_roots(r);
  r.kind = "schur";
  return r;
}

/// lambda_S of int_Gamma u v = lambda^2 int grad u . grad v on the domain space
/// of `d`, through the curve-reduced matrix L^T T A^-1 T^T L with M = L L^T.
inline EigenReport steklov_eigs(const Discretization& d, const EigenOptions& opts = {}) {
  const SparseMatrix a = apply_dirichlet(stiffness_2d(d.space), Vector::Zero(d.space.num_dofs), d.boundary_dofs,
                                         Vector::Zero(static_cast<Eigen::Index>(d.boundary_dofs.size())))
                             .a;
  const SparseMatrix m = curve_matrices(*d.curve, d.space.degree).mass;
  Eigen::LLT<DenseMatrix> llt{DenseMatrix(m)};
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotSpd, "curve mass not positive definite");
  const DenseMatrix l = llt.matrixL();
  const SparseMatrix tt = d.trace.transpose();
  const DenseMatrix rhs = tt * l;
  const SparseCholesky fac(a);
  const DenseMatrix x = fac.solve(rhs);
  DenseMatrix red = rhs.transpose() * x;
  red = 0.5 * (red + red.transpose()).eval();
  auto r = detail::dense_pencil_extremes(red, DenseMatrix::Identity(red.rows(), red.rows()), opts);
  detail::take_square_roots(r);
  r.kind = "steklov";
  return r;
}

/// lambda_S of the mean-value Steklov problem: sqrt(m^T A^-1 m / |Gamma|).
inline double mean_steklov(const Discretization& d) {
  const SparseMatrix a = apply_dirichlet(stiffness_2d(d.space), Vector::Zero(d.space.num_dofs), d.boundary_dofs,
                                         Vector::Zero(static_cast<Eigen::Index>(d.boundary_dofs.size())))
                             .a;
  const auto mv = mean_value_vector(d.space, *d.curve);
  const SparseCholesky fac(a);
  return std::sqrt(mv.m.dot(fac.solve(mv.m)) / mv.length);
}

/// lambda_B of the mean-value system with the multiplier norm |Gamma| q^2.
inline double mean_schur(const MeanSystem& sys) {
  const SparseCholesky fac(sys.a);
  const DenseMatrix s = schur_complement(fac, SparseMatrix(sys.m.transpose().sparseView()));
  return std::sqrt(s(0, 0) / sys.length);
}

/// Nonzero spectrum of the full pencil [A B^T; B 0] y = -lambda [0 0; 0 N] y,
/// returned as lambda_B = sqrt(lambda), ascending. Dense and unsymmetric; a
/// small-mesh oracle for schur_eigs.
inline Vector qin_eigs(const BlockSystem& sys, const SpectralBasis& basis) {
  if (sys.n_c() != 0) throw Error(ErrorCode::InvalidArgument, "qin_eigs expects a two-field trace multiplier system");
  const Eigen::Index n = sys.size(), np = sys.n_p();
  const DenseMatrix k(sys.matrix());
  DenseMatrix dmat = DenseMatrix::Zero(n, n);
  dmat.bottomRightCorner(np, np) = norm_matrix(basis, -0.5);
  const DenseMatrix kd = Eigen::PartialPivLU<DenseMatrix>(k).solve(dmat);
  Eigen::EigenSolver<DenseMatrix> es(kd, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Breakdown, "unsymmetric eigensolver did not converge");
  const Eigen::VectorXcd nu = es.eigenvalues();
  const double scale = nu.cwiseAbs().maxCoeff();
  std::vector<double> lam;
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    if (std::abs(nu[i]) <= 1e-10 * scale) continue;
    // K^-1 D y = nu y  <=>  K y = (1/nu) D y, and the pencil has -lambda.
    lam.push_back(std::sqrt(std::max(0.0, -1.0 / nu[i].real())));
  }
  std::sort(lam.begin(), lam.end());
  return Eigen::Map<Vector>(lam.data(), static_cast<Eigen::Index>(lam.size()));
}

/// Signed extremes of A y = lambda P y for a block system and its preconditioner.
/// Beyond the dense limit the largest magnitudes come from Lanczos on P^-1 A and
/// the smallest from Lanczos on A^-1 P, both self-adjoint in the P inner product.
inline EigenReport conditioning_eigs(const BlockSystem& sys, const BlockPreconditioner& pre,
                                     const EigenOptions& opts = {}) {
  EigenReport r;
  r.kind = "conditioning";
  r.dofs = sys.size();
  const LinearOperator riesz = pre.riesz();
  if (sys.size() <= opts.dense_limit) {
    const Eigen::Index n = sys.size();
    DenseMatrix p = DenseMatrix::Zero(n, n);
    p.topLeftCorner(pre.nu, pre.nu) = DenseMatrix(*pre.a);
    if (pre.nc > 0) p.block(pre.nu, pre.nu, pre.nc, pre.nc) = DenseMatrix(*pre.a_dot);
    p.bottomRightCorner(pre.np, pre.np) = *pre.mult_norm;
    r.method = "dense";
    r.values = dense_geig_values(DenseMatrix(sys.matrix()), p, opts.dense_limit);
    detail::fill_extremes(r, r.values);
    return r;
  }
  r.method = "lanczos";
  const LinearOperator a_op = sys.as_operator();
  const LinearOperator p_inv = pre.apply();
  const LinearOperator s{sys.size(), [&](const Vector& x) { return p_inv(a_op(x)); }, true};
  const auto hi = lanczos(s, riesz, opts.lanczos);
  const SaddleSolver solver(sys);
  const LinearOperator si{sys.size(), [&](const Vector& x) { return solver.solve(riesz(x)); }, true};
  const auto lo = lanczos(si, riesz, opts.lanczos);
  r.min = hi.ritz[0];
  r.max = hi.ritz[hi.ritz.size() - 1];
  r.abs_max = std::abs(r.min) > std::abs(r.max) ? r.min : r.max;
  // Largest |1/lambda| of the inverse gives the eigenvalue nearest zero.
  const double inv_lo = lo.ritz[0], inv_hi = lo.ritz[lo.ritz.size() - 1];
  r.abs_min = 1.0 / (std::abs(inv_lo) > std::abs(inv_hi) ? inv_lo : inv_hi);
  r.lanczos_steps = hi.steps + lo.steps;
  r.converged = hi.converged && lo.converged;
  return r;
}

// ---------------------------------------------------------------------------
// Scaling fit

struct FitResult {
  double c = 0.0;
  double residual = 0.0;  // relative RMS of lambda_i - C g_i
  std::vector<double> radii;
  std::string model = "C*sqrt(eps*abs(log eps))";
};

inline double scaling_model(double eps) { return std::sqrt(eps * std::abs(std::log(eps))); }

/// Least-squares fit of lambda = C sqrt(eps |log eps|) over the points with eps < 0.1.
inline FitResult fit_scaling(const std::vector<std::pair<double, double>>& points) {
  FitResult out;
  double num = 0.0, den = 0.0;
  std::vector<std::pair<double, double>> used;
  for (const auto& [eps, lam] : points) {
    if (!(eps > 0.0 && eps < 0.1)) continue;
    const double g = scaling_model(eps);
    num += lam * g;
    den += g * g;
    used.emplace_back(eps, lam);
  }
  if (used.size() < 3) throw Error(ErrorCode::InsufficientPoints, "scaling fit needs at least 3 points with eps < 0.1");
  out.c = num / den;
  double rss = 0.0;
  for (const auto& [eps, lam] : used) {
    const double rel = (lam - out.c * scaling_model(eps)) / lam;
    rss += rel * rel;
    out.radii.push_back(eps);
  }
  out.residual = std::sqrt(rss / static_cast<double>(used.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Refinement sequences

struct RefinementTrace {
  std::vector<double> values;  // one per level, starting at the first level
  bool converged = false;      // relative change dropped below the tolerance
};

/// Evaluates eval(level) for increasing levels until the relative change between
/// consecutive levels is below tol, or the last level is reached.
inline RefinementTrace refine_until_stable(const std::function<double(int)>& eval, int first, int last,
                                           double tol = 1e-3) {
  RefinementTrace t;
  for (int l = first; l <= last; ++l) {
    t.values.push_back(eval(l));
    const std::size_t k = t.values.size();
    if (k >= 2 && std::abs(t.values[k - 1] - t.values[k - 2]) < tol * std::abs(t.values[k - 2])) {
      t.converged = true;
      break;
    }
  }
  return t;
}

}  // namespace mdlab
