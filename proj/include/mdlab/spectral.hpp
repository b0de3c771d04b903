#pragma once

// Fractional Sobolev norms on a closed curve from the generalized
// eigendecomposition (A + M) v = mu M v, V^T M V = I.
//
//   H(s)                  = W diag(mu^s) W^T,      W = M V
//   [sum_i w_i H(s_i)]^-1 = V diag(1 / sum_i w_i mu^s_i) V^T

#include <cmath>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace mdlab {

struct SpectralBasis {
  Vector mu;         // ascending
  DenseMatrix v;     // M-orthonormal eigenvectors
  DenseMatrix w;     // M V
  SparseMatrix mass;

  Eigen::Index size() const { return mu.size(); }
};

/// (exponent s, weight w) terms of a weighted intersection norm.
struct IntersectionWeights {
  std::vector<std::pair<double, double>> terms;

  IntersectionWeights() = default;
  IntersectionWeights(std::initializer_list<std::pair<double, double>> t) : terms(t) { validate(); }
  explicit IntersectionWeights(std::vector<std::pair<double, double>> t) : terms(std::move(t)) { validate(); }

  void validate() const {
    if (terms.empty()) throw Error(ErrorCode::InvalidArgument, "intersection weights must be nonempty");
    for (const auto& [s, w] : terms) {
      if (!(s >= -1.0 && s <= 1.0)) throw Error(ErrorCode::InvalidArgument, "exponent outside [-1, 1]");
      if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "weights must be finite and positive");
    }
  }

  /// Sum of w_i mu^{s_i} for every mode.
  Vector symbol(const Vector& mu) const {
    Vector out = Vector::Zero(mu.size());
    for (const auto& [s, w] : terms) out += w * mu.array().pow(s).matrix();
    return out;
  }
};

inline SpectralBasis eig_curve(const SparseMatrix& a, const SparseMatrix& m) {
  const DenseMatrix k = DenseMatrix(a) + DenseMatrix(m);
  auto eig = dense_geig(k, DenseMatrix(m), 10000);
  SpectralBasis b;
  b.mu = std::move(eig.values);
  b.v = std::move(eig.vectors);
  // Rayleigh quotients with the sparse operators: the reduced dense problem
  // only resolves mu to about eps * mu_max in absolute terms.
  const SparseMatrix ks = a + m;
  for (Eigen::Index i = 0; i < b.v.cols(); ++i) {
    const Vector x = b.v.col(i);
    b.mu[i] = x.dot(ks * x) / x.dot(m * x);
  }
  b.w = m * b.v;
  b.mass = m;
  return b;
}

inline DenseMatrix norm_matrix(const SpectralBasis& basis, const IntersectionWeights& weights) {
  const Vector sym = weights.symbol(basis.mu);
  return basis.w * sym.asDiagonal() * basis.w.transpose();
}

inline DenseMatrix norm_matrix(const SpectralBasis& basis, double s) {
  return norm_matrix(basis, IntersectionWeights{{s, 1.0}});
}

/// Application of the inverse of sum_i w_i H(s_i). The basis must outlive the operator.
inline LinearOperator riesz_inverse(const SpectralBasis& basis, const IntersectionWeights& weights) {
  const Vector inv = weights.symbol(basis.mu).cwiseInverse();
  return {basis.size(), [&basis, inv](const Vector& q) -> Vector { return basis.v * (inv.asDiagonal() * (basis.v.transpose() * q)); },
          true};
}

/// Dense matrix of riesz_inverse, for assembling block preconditioners.
inline DenseMatrix riesz_inverse_matrix(const SpectralBasis& basis, const IntersectionWeights& weights) {
  const Vector inv = weights.symbol(basis.mu).cwiseInverse();
  return basis.v * inv.asDiagonal() * basis.v.transpose();
}

inline double dual_norm(const Vector& q, const SpectralBasis& basis, const IntersectionWeights& weights) {
  const Vector c = basis.w.transpose() * q;
  const Vector sym = weights.symbol(basis.mu);
  return std::sqrt(std::max(0.0, c.cwiseAbs2().dot(sym)));
}

}  // namespace mdlab
