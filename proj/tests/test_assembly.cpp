#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "mdlab/assembly.hpp"

using namespace mdlab;

namespace {

TriMesh unit_right_triangle() {
  TriMesh m;
  m.vertices = {Point(0, 0), Point(1, 0), Point(0, 1)};
  m.cells = {{0, 1, 2}};
  m.cell_depth = {0};
  return m;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

DenseMatrix dense(const SparseMatrix& a) { return DenseMatrix(a); }

}  // namespace

TEST(Quadrature, ExactToDegreeFour) {
  const auto& rule = triangle_rule_deg4();
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double q = 0.0;
      for (std::size_t k = 0; k < rule.weights.size(); ++k) {
        const double x = rule.bary[k][1], y = rule.bary[k][2];
        q += 0.5 * rule.weights[k] * std::pow(x, a) * std::pow(y, b);
      }
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      EXPECT_NEAR(q, exact, 1e-13 * exact) << a << "," << b;
    }
  }
}

TEST(Stiffness, UnitRightTriangle) {
  const auto m = unit_right_triangle();
  const auto a = dense(stiffness_2d(make_space(m, 1)));
  DenseMatrix ref(3, 3);
  ref << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  ref *= 0.5;
  EXPECT_LT((a - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Stiffness, ConstantKernelAndScaling) {
  const auto mesh = build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.2}, 0.2);
  for (int deg : {1, 2}) {
    const auto s = make_space(mesh, deg);
    const SparseMatrix a = stiffness_2d(s);
    EXPECT_LT((a * Vector::Ones(a.rows())).cwiseAbs().maxCoeff(), 1e-12);
    const SparseMatrix big = stiffness_2d(s, 1e8);
    EXPECT_LT((dense(big) - 1e8 * dense(a)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((dense(a) - dense(a).transpose()).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Stiffness, GalerkinEnergyOfLinearFunction) {
  const auto mesh = build_mesh(DomainShape::Disk, {InclusionShape::Circle, 0.3}, 0.2);
  double area = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) area += mesh.signed_area(c);
  for (int deg : {1, 2}) {
    const auto s = make_space(mesh, deg);
    const Vector v = interpolate(s, [](const Point& p) { return 2.0 * p.x() - 3.0 * p.y() + 0.5; });
    const double e = v.dot(stiffness_2d(s) * v);
    EXPECT_NEAR(e, 13.0 * area, 1e-12 * 13.0 * area);
  }
}

TEST(Mass, PartitionOfUnity) {
  const auto mesh = build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.2}, 0.3);
  for (int deg : {1, 2}) {
    const auto s = make_space(mesh, deg);
    const SparseMatrix m = mass_2d(s);
    const Vector one = Vector::Ones(m.rows());
    EXPECT_NEAR(one.dot(m * one), 4.0, 1e-12);
  }
}

TEST(Space, P2DofCounts) {
  const auto mesh = build_mesh(DomainShape::Disk, {InclusionShape::Circle, 0.3}, 0.3);
  const auto s = make_space(mesh, 2);
  EXPECT_EQ(s.num_dofs, mesh.num_vertices() + mesh.edges().size());
}

TEST(CurveMatrices, UniformLoopCirculant) {
  const auto mesh = build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.1}, 0.2);
  const auto curve = extract_curve(mesh, 0);
  const double l = curve.arclengths[0];
  const auto [k, m] = curve_matrices(curve, 1);
  const int n = static_cast<int>(curve.num_vertices());
  const DenseMatrix md = dense(m);
  for (int i = 0; i < n; ++i) {
    EXPECT_NEAR(md(i, i), 2 * l / 3, 1e-15);
    EXPECT_NEAR(md(i, (i + 1) % n), l / 6, 1e-15);
    EXPECT_NEAR(md(i, (i + n - 1) % n), l / 6, 1e-15);
  }
}

TEST(CurveMatrices, ConstantsAndLength) {
  const auto mesh = build_mesh(DomainShape::Disk, {InclusionShape::Circle, 0.3}, 0.1);
  const auto curve = extract_curve(mesh, 0);
  for (int deg : {1, 2}) {
    const auto [k, m] = curve_matrices(curve, deg);
    const Vector one = Vector::Ones(m.rows());
    EXPECT_NEAR(one.dot(m * one), curve.length(), 1e-12);
    EXPECT_LT((k * one).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CurveMatrices, P2AgainstQuadratureOracle) {
  // Element matrices of a single segment of length 0.7 by 5-point Gauss.
  const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                        0.2369268850561891};
  const double l = 0.7;
  auto phi = [](int i, double t) {
    return i == 0 ? (1 - t) * (1 - 2 * t) : i == 1 ? t * (2 * t - 1) : 4 * t * (1 - t);
  };
  auto dphi = [](int i, double t) { return i == 0 ? 4 * t - 3 : i == 1 ? 4 * t - 1 : 4 - 8 * t; };
  CurveComplex c;
  c.points = {Point(0, 0), Point(l, 0)};
  c.segments = {{0, 1}, {1, 0}};
  c.arclengths = {l, l};
  c.mesh_dof = {0, 1};
  const auto cs = make_curve_space(c, 2);
  const auto [k, m] = curve_matrices(cs);
  // Segment 0 contributes rows/cols {0, 1, 2}; segment 1 adds {1, 0, 3}.
  DenseMatrix ko = DenseMatrix::Zero(4, 4), mo = DenseMatrix::Zero(4, 4);
  const int dofs[2][3] = {{0, 1, 2}, {1, 0, 3}};
  for (const auto& d : dofs) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int q = 0; q < 5; ++q) {
          const double t = 0.5 * (xs[q] + 1.0), w = 0.5 * ws[q];
          ko(d[i], d[j]) += w * dphi(i, t) * dphi(j, t) / l;
          mo(d[i], d[j]) += w * phi(i, t) * phi(j, t) * l;
        }
  }
  EXPECT_LT((dense(k) - ko).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((dense(m) - mo).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Trace, SelectsCurveValues) {
  const auto mesh = build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.1}, 0.1);
  const auto curve = extract_curve(mesh, 0);
  for (int deg : {1, 2}) {
    const auto s = make_space(mesh, deg);
    const auto cs = make_curve_space(curve, deg);
    const SparseMatrix t = trace_map(s, cs);
    EXPECT_EQ((t * Vector::Ones(t.cols()) - Vector::Ones(t.rows())).cwiseAbs().maxCoeff(), 0.0);
    const Vector vx = interpolate(s, [](const Point& p) { return p.x(); });
    const Vector tx = t * vx;
    for (std::size_t i = 0; i < cs.num_dofs; ++i) EXPECT_EQ(tx[static_cast<Eigen::Index>(i)], cs.dof_coords[i].x());
    const DenseMatrix td = dense(t);
    for (int r = 0; r < td.rows(); ++r) {
      EXPECT_EQ((td.row(r).array() != 0.0).count(), 1);
      EXPECT_EQ(td.row(r).sum(), 1.0);
    }
  }
}

TEST(Trace, P2MatchesDofCoordinates) {
  const auto mesh = build_mesh(DomainShape::Disk, {InclusionShape::Circle, 0.2}, 0.2);
  const auto curve = extract_curve(mesh, 0);
  const auto s = make_space(mesh, 2);
  const auto cs = make_curve_space(curve, 2);
  const DenseMatrix t = dense(trace_map(s, cs));
  for (int r = 0; r < t.rows(); ++r) {
    Eigen::Index col = 0;
    t.row(r).maxCoeff(&col);
    EXPECT_EQ(s.dof_coords[static_cast<std::size_t>(col)], cs.dof_coords[static_cast<std::size_t>(r)]);
  }
}

TEST(Trace, NonconformingCurve) {
  const auto mesh = build_mesh(DomainShape::Disk, {InclusionShape::Circle, 0.2}, 0.2);
  auto curve = extract_curve(mesh, 0);
  curve.points[0].x() += 1e-3;
  try {
    trace_map(make_space(mesh, 1), curve);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Nonconforming);
  }
}

TEST(Coupling, KernelPairingLinearity) {
  const auto mesh = build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.15}, 0.15);
  const auto curve = extract_curve(mesh, 0);
  const auto s = make_space(mesh, 1);
  const auto cs = make_curve_space(curve, 1);
  const auto b = coupling_block(s, cs, cs);
  const SparseMatrix bf = b.full();
  const Vector v = interpolate(s, [](const Point& p) { return std::sin(3 * p.x()) + p.y(); });
  const Vector vc = trace_map(s, cs) * v;
  Vector x(bf.cols());
  x << v, vc;
  EXPECT_LT((bf * x).cwiseAbs().maxCoeff(), 1e-14);
  x << Vector::Ones(v.size()), Vector::Zero(vc.size());
  EXPECT_NEAR(Vector::Ones(bf.rows()).dot(bf * x), curve.length(), 1e-12);
  Vector y = Vector::LinSpaced(bf.cols(), -1.0, 2.0);
  EXPECT_LT((bf * (3.5 * y) - 3.5 * (bf * y)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Coupling, EntrywiseAgainstSegmentQuadrature) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> eps_d(0.05, 0.4), h_d(0.15, 0.3);
  for (int trial = 0; trial < 3; ++trial) {
    const double eps = eps_d(rng), h = h_d(rng);
    const auto mesh = build_mesh(trial == 1 ? DomainShape::Disk : DomainShape::Square,
                                 {trial == 2 ? InclusionShape::SquareContour : InclusionShape::Circle, eps}, h);
    const auto curve = extract_curve(mesh, 0);
    for (int deg : {1, 2}) {
      const auto s = make_space(mesh, deg);
      const auto cs = make_curve_space(curve, 1);
      const DenseMatrix bo = dense(coupling_block(s, cs, cs).omega);
      // Oracle: integrate hat_i(x) * phi_j(x) along each chord by evaluating the
      // 2d basis function phi_j through point location (4-point Gauss).
      DenseMatrix ref = DenseMatrix::Zero(bo.rows(), bo.cols());
      const double gx[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281, 0.9305681557970263};
      const double gw[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731, 0.1739274225687269};
      for (std::size_t k = 0; k < curve.num_segments(); ++k) {
        const auto [i0, i1] = curve.segments[k];
        const Point a = curve.points[i0], c = curve.points[i1];
        for (int q = 0; q < 4; ++q) {
          const Point x = (1 - gx[q]) * a + gx[q] * c;
          const double w = gw[q] * curve.arclengths[k];
          for (std::size_t j = 0; j < s.num_dofs; ++j) {
            if ((s.dof_coords[j] - x).norm() > 2 * h) continue;
            Vector e = Vector::Zero(static_cast<Eigen::Index>(s.num_dofs));
            e[static_cast<Eigen::Index>(j)] = 1.0;
            const double pj = evaluate(s, e, x);
            ref(i0, static_cast<Eigen::Index>(j)) += w * (1 - gx[q]) * pj;
            ref(i1, static_cast<Eigen::Index>(j)) += w * gx[q] * pj;
          }
        }
      }
      EXPECT_LT((bo - ref).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial << " deg " << deg;
    }
  }
}

TEST(MeanValue, SumsAndSymmetry) {
  const auto mesh = build_mesh(DomainShape::Disk, {InclusionShape::Circle, 0.1}, 0.1);
  const auto curve = extract_curve(mesh, 0);
  const auto s = make_space(mesh, 1);
  const auto [m, len] = mean_value_vector(s, curve);
  EXPECT_NEAR(m.sum(), len, 1e-12);
  EXPECT_NEAR(m.dot(Vector::Ones(m.size())) / len, 1.0, 1e-12);
  const Vector vx = interpolate(s, [](const Point& p) { return p.x(); });
  EXPECT_LT(std::abs(m.dot(vx) / len), 1e-3);
  const auto cs = make_curve_space(curve, 1);
  const SparseMatrix mt = curve_matrices(cs).mass * trace_map(s, cs);
  const Vector colsum = mt.transpose() * Vector::Ones(mt.rows());
  EXPECT_LT((colsum - m).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dirichlet, LinearInterpolant) {
  // 1d Laplacian on nodes 0, 1/2, 1 (h = 1/2).
  SparseMatrix a(3, 3);
  std::vector<Triplet> t{{0, 0, 2}, {0, 1, -2}, {1, 0, -2}, {1, 1, 4}, {1, 2, -2}, {2, 1, -2}, {2, 2, 2}};
  a.setFromTriplets(t.begin(), t.end());
  Vector g(2);
  g << 0.0, 1.0;
  const auto r = apply_dirichlet(a, Vector::Zero(3), {0, 2}, g);
  const Vector u = DenseMatrix(r.a).lu().solve(r.rhs);
  EXPECT_NEAR(u[0], 0.0, 1e-15);
  EXPECT_NEAR(u[1], 0.5, 1e-15);
  EXPECT_NEAR(u[2], 1.0, 1e-15);
}

TEST(Dirichlet, HomogeneousAndIdempotent) {
  const auto mesh = build_mesh(DomainShape::Square, {InclusionShape::Circle, 0.2}, 0.3);
  const auto s = make_space(mesh, 1);
  const SparseMatrix a = stiffness_2d(s);
  const Vector f = Vector::LinSpaced(a.rows(), 0.0, 1.0);
  const auto bd = s.boundary_dofs();
  const auto r0 = apply_dirichlet(a, f, bd, Vector::Zero(static_cast<Eigen::Index>(bd.size())));
  std::vector<char> isb(static_cast<std::size_t>(a.rows()), 0);
  for (int d : bd) isb[static_cast<std::size_t>(d)] = 1;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (!isb[static_cast<std::size_t>(i)]) {
      EXPECT_EQ(r0.rhs[i], f[i]);
    }
  }
  const Vector g = Vector::Constant(static_cast<Eigen::Index>(bd.size()), 0.7);
  const auto r1 = apply_dirichlet(a, f, bd, g);
  const auto r2 = apply_dirichlet(r1.a, r1.rhs, bd, g);
  EXPECT_LT((dense(r1.a) - dense(r2.a)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((r1.rhs - r2.rhs).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MatrixMarket, Header) {
  SparseMatrix a(2, 2);
  a.insert(0, 1) = 0.5;
  std::ostringstream os;
  write_matrix_market(os, a);
  EXPECT_EQ(os.str(), "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 0.5\n");
}
