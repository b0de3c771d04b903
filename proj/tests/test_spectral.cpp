#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mdlab/assembly.hpp"
#include "mdlab/spectral.hpp"

using namespace mdlab;

namespace {

struct Loop {
  TriMesh mesh;
  CurveComplex curve;
  CurveMatrices mats;
  SpectralBasis basis;
};

Loop make_loop(double eps, double h, int refinements = 0) {
  Loop l;
  l.mesh = refine_uniform(build_mesh(DomainShape::Disk, {InclusionShape::Circle, eps}, h), refinements);
  l.curve = extract_curve(l.mesh, 0);
  l.mats = curve_matrices(l.curve, 1);
  l.basis = eig_curve(l.mats.stiffness, l.mats.mass);
  return l;
}

Vector random_vec(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

double rel(const DenseMatrix& a, const DenseMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(EigCurve, Invariants) {
  const auto l = make_loop(0.1, 0.2, 2);
  const auto& b = l.basis;
  const DenseMatrix m(l.mats.mass);
  const DenseMatrix k = DenseMatrix(l.mats.stiffness) + m;
  EXPECT_LT((b.v.transpose() * m * b.v - DenseMatrix::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const Vector x = b.v.col(i);
    EXPECT_LE((k * x - b.mu[i] * (m * x)).norm(), 1e-10 * b.mu[i] * (m * x).norm());
    EXPECT_GE(b.mu[i], 1.0 - 1e-10);
  }
  EXPECT_NEAR(b.mu[0], 1.0, 1e-12);
  const Vector v0 = b.v.col(0);
  EXPECT_LT((v0 - Vector::Constant(v0.size(), v0[0])).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(rel(m * b.v * b.mu.asDiagonal() * b.v.transpose() * m, k), 1e-9);
}

TEST(EigCurve, FourierModesOfCircle) {
  // Modes k = 1 of the circle Laplacian: mu = 1 + 1/eps^2 (double eigenvalue).
  const double eps = 0.1;
  const auto l = make_loop(eps, 0.2, 3);
  const double expect = 1.0 + 1.0 / (eps * eps);
  EXPECT_NEAR(l.basis.mu[1], expect, 0.05 * expect);
  EXPECT_NEAR(l.basis.mu[2], expect, 0.05 * expect);
}

TEST(NormMatrix, Powers) {
  const auto l = make_loop(0.2, 0.2, 1);
  const DenseMatrix m(l.mats.mass);
  EXPECT_LT(rel(norm_matrix(l.basis, 0.0), m), 1e-10);
  EXPECT_LT(rel(norm_matrix(l.basis, 1.0), DenseMatrix(l.mats.stiffness) + m), 1e-9);
  const Vector one = Vector::Ones(l.basis.size());
  EXPECT_NEAR(one.dot(norm_matrix(l.basis, -1.0) * one), l.curve.length(), 1e-9);
}

TEST(RieszInverse, InversePairs) {
  const auto l = make_loop(0.1, 0.2, 1);
  const Vector x = random_vec(l.basis.size(), 3);
  for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const auto inv = riesz_inverse(l.basis, {{s, 1.0}});
    const Vector y = inv(norm_matrix(l.basis, s) * x);
    EXPECT_LT((y - x).norm(), 1e-9 * x.norm()) << s;
  }
  const IntersectionWeights w{{-0.5, 2.0}, {-1.0, 0.3}, {0.5, 1e-3}};
  const Vector z = riesz_inverse(l.basis, w)(norm_matrix(l.basis, w) * x);
  EXPECT_LT((z - x).norm(), 1e-8 * x.norm());
}

TEST(RieszInverse, DominanceAndHomogeneity) {
  const auto l = make_loop(0.1, 0.2, 1);
  const Vector q = random_vec(l.basis.size(), 4);
  const Vector a = riesz_inverse(l.basis, {{-0.5, 1.0}, {-1.0, 1e-8}})(q);
  const Vector b = riesz_inverse(l.basis, {{-0.5, 1.0}})(q);
  EXPECT_LT((a - b).norm(), 1e-6 * b.norm());
  const Vector c = riesz_inverse(l.basis, {{-0.5, 4.0}, {-1.0, 4e-8}})(q);
  EXPECT_LT((4.0 * c - a).norm(), 1e-12 * a.norm());
}

TEST(DualNorm, ValuesAndTriangleInequality) {
  const auto l = make_loop(0.3, 0.2, 1);
  const IntersectionWeights w{{-0.5, 1.0}, {-1.0, 10.0}};
  EXPECT_EQ(dual_norm(Vector::Zero(l.basis.size()), l.basis, w), 0.0);
  EXPECT_NEAR(dual_norm(Vector::Ones(l.basis.size()), l.basis, {{-1.0, 1.0}}), std::sqrt(l.curve.length()), 1e-6);
  for (unsigned k = 0; k < 20; ++k) {
    const Vector p = random_vec(l.basis.size(), 10 + k), q = random_vec(l.basis.size(), 50 + k);
    EXPECT_LE(dual_norm(p + q, l.basis, w), dual_norm(p, l.basis, w) + dual_norm(q, l.basis, w) + 1e-12);
  }
  const Vector q = random_vec(l.basis.size(), 99);
  EXPECT_NEAR(dual_norm(q, l.basis, w), std::sqrt(q.dot(norm_matrix(l.basis, w) * q)), 1e-10);
}

TEST(Spectral, LogConvexityInExponent) {
  const auto l = make_loop(0.1, 0.2, 1);
  const DenseMatrix h0 = norm_matrix(l.basis, 0.0), hm = norm_matrix(l.basis, -0.5), h1 = norm_matrix(l.basis, -1.0);
  for (unsigned k = 0; k < 10; ++k) {
    Vector q = random_vec(l.basis.size(), 300 + k);
    q.array() -= q.mean();
    EXPECT_LE(q.dot(hm * q), std::sqrt(q.dot(h0 * q) * q.dot(h1 * q)) + 1e-10);
  }
}

TEST(Spectral, PermutationEquivariance) {
  const auto l = make_loop(0.1, 0.2, 0);
  const Eigen::Index n = l.basis.size();
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
  perm.setIdentity();
  std::mt19937 rng(5);
  std::shuffle(perm.indices().data(), perm.indices().data() + n, rng);
  const SparseMatrix a = perm * l.mats.stiffness * perm.transpose();
  const SparseMatrix m = perm * l.mats.mass * perm.transpose();
  const auto pb = eig_curve(a, m);
  const IntersectionWeights w{{-0.5, 1.0}, {-1.0, 3.0}};
  const DenseMatrix h = norm_matrix(l.basis, w);
  const DenseMatrix hp = norm_matrix(pb, w);
  EXPECT_LT(rel(DenseMatrix(perm * h * perm.transpose()), hp), 1e-10);
  const Vector q = random_vec(n, 8);
  EXPECT_NEAR(dual_norm(q, l.basis, w), dual_norm(perm * q, pb, w), 1e-10);
}

TEST(IntersectionWeights, Validation) {
  EXPECT_THROW(IntersectionWeights(std::vector<std::pair<double, double>>{}), Error);
  EXPECT_THROW((IntersectionWeights{{-0.5, 0.0}}), Error);
  EXPECT_THROW((IntersectionWeights{{-2.0, 1.0}}), Error);
}
