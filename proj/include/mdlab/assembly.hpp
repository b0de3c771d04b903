#pragma once

// Lagrange P1/P2 spaces on triangle meshes and on extracted curve complexes,
// with the matrices of the coupled problems: stiffness, mass, trace selection,
// curve coupling, mean-value functional and Dirichlet elimination.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "error.hpp"
#include "geometry.hpp"

namespace mdlab {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// ---------------------------------------------------------------------------
// Quadrature

struct TriangleRule {
  std::vector<std::array<double, 3>> bary;  // barycentric points
  std::vector<double> weights;              // sum to 1 (multiply by area)
};

/// Symmetric 6-point rule, exact for polynomials of degree 4.
inline const TriangleRule& triangle_rule_deg4() {
  static const TriangleRule rule = [] {
    const double r = std::sqrt(38.0 - 44.0 * std::sqrt(0.4));
    const double a1 = (8.0 - std::sqrt(10.0) + r) / 18.0;
    const double a2 = (8.0 - std::sqrt(10.0) - r) / 18.0;
    const double q = std::sqrt(213125.0 - 53320.0 * std::sqrt(10.0));
    const double w1 = (620.0 + q) / 3720.0;
    const double w2 = (620.0 - q) / 3720.0;
    TriangleRule t;
    for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
      const double b = 1.0 - 2.0 * a;
      t.bary.push_back({a, a, b});
      t.bary.push_back({a, b, a});
      t.bary.push_back({b, a, a});
      for (int k = 0; k < 3; ++k) t.weights.push_back(w);
    }
    return t;
  }();
  return rule;
}

/// 3-point Gauss-Legendre on [0,1], exact for degree 5.
inline const std::array<std::pair<double, double>, 3>& gauss3_unit() {
  static const std::array<std::pair<double, double>, 3> rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return std::array<std::pair<double, double>, 3>{
        std::pair{0.5 - d, 5.0 / 18.0}, std::pair{0.5, 8.0 / 18.0}, std::pair{0.5 + d, 5.0 / 18.0}};
  }();
  return rule;
}

// ---------------------------------------------------------------------------
// Element geometry and Lagrange shape functions in barycentric form

struct ElementGeometry {
  double area;
  std::array<Eigen::Vector2d, 3> grad_bary;  // gradients of the barycentric coordinates
};

inline ElementGeometry element_geometry(const Point& p0, const Point& p1, const Point& p2) {
  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  ElementGeometry g;
  g.area = 0.5 * det;
  g.grad_bary[0] = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / det;
  g.grad_bary[1] = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / det;
  g.grad_bary[2] = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / det;
  return g;
}

/// Local edge order for P2: (0,1), (1,2), (2,0).
inline constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{0, 1}, {1, 2}, {2, 0}}};

inline int local_dof_count(int degree) { return degree == 1 ? 3 : 6; }

inline void shape_values(int degree, const std::array<double, 3>& l, double* phi) {
  if (degree == 1) {
    for (int i = 0; i < 3; ++i) phi[i] = l[i];
    return;
  }
  for (int i = 0; i < 3; ++i) phi[i] = l[i] * (2.0 * l[i] - 1.0);
  for (int e = 0; e < 3; ++e) phi[3 + e] = 4.0 * l[kLocalEdges[e][0]] * l[kLocalEdges[e][1]];
}

inline void shape_gradients(int degree, const std::array<double, 3>& l, const ElementGeometry& g,
                            Eigen::Vector2d* grad) {
  if (degree == 1) {
    for (int i = 0; i < 3; ++i) grad[i] = g.grad_bary[i];
    return;
  }
  for (int i = 0; i < 3; ++i) grad[i] = (4.0 * l[i] - 1.0) * g.grad_bary[i];
  for (int e = 0; e < 3; ++e) {
    const int a = kLocalEdges[e][0], b = kLocalEdges[e][1];
    grad[3 + e] = 4.0 * (l[a] * g.grad_bary[b] + l[b] * g.grad_bary[a]);
  }
}

// ---------------------------------------------------------------------------
// Spaces

/// Continuous Lagrange space on a triangle mesh. The mesh must outlive the space.
struct FeSpace {
  const TriMesh* mesh = nullptr;
  int degree = 1;
  std::size_t num_dofs = 0;
  std::vector<int> cell_dofs;  // local_dof_count(degree) entries per cell
  std::vector<Point> dof_coords;
  std::map<EdgeKey, int> edge_dof;  // degree 2 only

  int local_dofs() const { return local_dof_count(degree); }
  std::span<const int> dofs_of(std::size_t cell) const {
    return {cell_dofs.data() + cell * local_dofs(), static_cast<std::size_t>(local_dofs())};
  }

  /// Dofs on edges tagged as the outer boundary.
  std::vector<int> boundary_dofs() const {
    std::set<int> out;
    for (const auto& [e, tag] : mesh->edge_markers) {
      if (tag != kOuterTag) continue;
      out.insert(e.first);
      out.insert(e.second);
      if (degree == 2) out.insert(edge_dof.at(e));
    }
    return {out.begin(), out.end()};
  }
};

inline FeSpace make_space(const TriMesh& mesh, int degree) {
  if (degree != 1 && degree != 2) throw Error(ErrorCode::InvalidArgument, "degree must be 1 or 2");
  FeSpace s;
  s.mesh = &mesh;
  s.degree = degree;
  s.dof_coords = mesh.vertices;
  const int nl = s.local_dofs();
  s.cell_dofs.resize(mesh.cells.size() * nl);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    for (int i = 0; i < 3; ++i) s.cell_dofs[c * nl + i] = t[i];
    if (degree == 2) {
      for (int e = 0; e < 3; ++e) {
        const int a = t[kLocalEdges[e][0]], b = t[kLocalEdges[e][1]];
        const EdgeKey key = make_edge(a, b);
        auto it = s.edge_dof.find(key);
        if (it == s.edge_dof.end()) {
          it = s.edge_dof.emplace(key, static_cast<int>(s.dof_coords.size())).first;
          s.dof_coords.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
        }
        s.cell_dofs[c * nl + 3 + e] = it->second;
      }
    }
  }
  s.num_dofs = s.dof_coords.size();
  return s;
}

/// Lagrange space on a closed curve complex: vertex dofs first, then one
/// midpoint dof per segment for degree 2.
struct CurveSpace {
  const CurveComplex* curve = nullptr;
  int degree = 1;
  std::size_t num_dofs = 0;
  std::vector<std::array<int, 3>> segment_dofs;  // (start, end, midpoint or -1)
  std::vector<Point> dof_coords;
};

inline CurveSpace make_curve_space(const CurveComplex& curve, int degree) {
  if (degree != 1 && degree != 2) throw Error(ErrorCode::InvalidArgument, "degree must be 1 or 2");
  CurveSpace s;
  s.curve = &curve;
  s.degree = degree;
  s.dof_coords = curve.points;
  const int nv = static_cast<int>(curve.num_vertices());
  for (std::size_t k = 0; k < curve.num_segments(); ++k) {
    const auto& seg = curve.segments[k];
    int mid = -1;
    if (degree == 2) {
      mid = nv + static_cast<int>(k);
      s.dof_coords.push_back(0.5 * (curve.points[seg[0]] + curve.points[seg[1]]));
    }
    s.segment_dofs.push_back({seg[0], seg[1], mid});
  }
  s.num_dofs = s.dof_coords.size();
  return s;
}

// ---------------------------------------------------------------------------
// 2d matrices

inline SparseMatrix stiffness_2d(const FeSpace& space, double coeff = 1.0) {
  const auto& mesh = *space.mesh;
  const auto& rule = triangle_rule_deg4();
  const int nl = space.local_dofs();
  std::vector<Triplet> trip;
  trip.reserve(mesh.cells.size() * nl * nl);
  std::array<Eigen::Vector2d, 6> grad;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    const auto g = element_geometry(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
    if (space.degree == 1) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ke(i, j) = g.area * g.grad_bary[i].dot(g.grad_bary[j]);
    } else {
      for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        shape_gradients(2, rule.bary[q], g, grad.data());
        const double w = rule.weights[q] * g.area;
        for (int i = 0; i < nl; ++i)
          for (int j = 0; j < nl; ++j) ke(i, j) += w * grad[i].dot(grad[j]);
      }
    }
    const auto dofs = space.dofs_of(c);
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trip.emplace_back(dofs[i], dofs[j], coeff * ke(i, j));
  }
  SparseMatrix a(space.num_dofs, space.num_dofs);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

inline SparseMatrix mass_2d(const FeSpace& space, double coeff = 1.0) {
  const auto& mesh = *space.mesh;
  const auto& rule = triangle_rule_deg4();
  const int nl = space.local_dofs();
  std::vector<Triplet> trip;
  trip.reserve(mesh.cells.size() * nl * nl);
  std::array<double, 6> phi{};
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    const auto g = element_geometry(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      shape_values(space.degree, rule.bary[q], phi.data());
      const double w = rule.weights[q] * g.area;
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) me(i, j) += w * phi[i] * phi[j];
    }
    const auto dofs = space.dofs_of(c);
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) trip.emplace_back(dofs[i], dofs[j], coeff * me(i, j));
  }
  SparseMatrix m(space.num_dofs, space.num_dofs);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Load vector (f, phi_i) with the degree-4 rule on straight triangles.
inline Vector load_2d(const FeSpace& space, const std::function<double(const Point&, std::size_t cell)>& f) {
  const auto& mesh = *space.mesh;
  const auto& rule = triangle_rule_deg4();
  const int nl = space.local_dofs();
  Vector b = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs));
  std::array<double, 6> phi{};
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    const Point& p0 = mesh.vertices[t[0]];
    const Point& p1 = mesh.vertices[t[1]];
    const Point& p2 = mesh.vertices[t[2]];
    const auto g = element_geometry(p0, p1, p2);
    const auto dofs = space.dofs_of(c);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.bary[q];
      const Point x = l[0] * p0 + l[1] * p1 + l[2] * p2;
      shape_values(space.degree, l, phi.data());
      const double w = rule.weights[q] * g.area * f(x, c);
      for (int i = 0; i < nl; ++i) b[dofs[i]] += w * phi[i];
    }
  }
  return b;
}

inline Vector interpolate(const FeSpace& space, const std::function<double(const Point&)>& f) {
  Vector v(static_cast<Eigen::Index>(space.num_dofs));
  for (std::size_t i = 0; i < space.num_dofs; ++i) v[static_cast<Eigen::Index>(i)] = f(space.dof_coords[i]);
  return v;
}

inline Vector interpolate(const CurveSpace& space, const std::function<double(const Point&)>& f) {
  Vector v(static_cast<Eigen::Index>(space.num_dofs));
  for (std::size_t i = 0; i < space.num_dofs; ++i) v[static_cast<Eigen::Index>(i)] = f(space.dof_coords[i]);
  return v;
}

/// Cell containing p (brute force) and its barycentric coordinates.
inline std::optional<std::pair<std::size_t, std::array<double, 3>>> locate(const TriMesh& mesh, const Point& p,
                                                                          double tol = 1e-12) {
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    const auto g = element_geometry(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    std::array<double, 3> l{};
    bool inside = true;
    for (int i = 0; i < 3; ++i) {
      const Point& vi = mesh.vertices[t[i]];
      l[i] = 1.0 + g.grad_bary[i].dot(p - vi);
      inside = inside && l[i] >= -tol;
    }
    if (inside) return std::pair{c, l};
  }
  return std::nullopt;
}

inline double evaluate(const FeSpace& space, const Vector& coeffs, const Point& p) {
  const auto hit = locate(*space.mesh, p);
  if (!hit) throw Error(ErrorCode::InvalidArgument, "evaluation point outside the mesh");
  std::array<double, 6> phi{};
  shape_values(space.degree, hit->second, phi.data());
  const auto dofs = space.dofs_of(hit->first);
  double v = 0.0;
  for (int i = 0; i < space.local_dofs(); ++i) v += phi[i] * coeffs[dofs[i]];
  return v;
}

// ---------------------------------------------------------------------------
// Curve matrices

namespace detail {

inline double curve_shape(int degree, int i, double t) {
  if (degree == 1) return i == 0 ? 1.0 - t : t;
  switch (i) {
    case 0: return (1.0 - t) * (1.0 - 2.0 * t);
    case 1: return t * (2.0 * t - 1.0);
    default: return 4.0 * t * (1.0 - t);
  }
}

}  // namespace detail

struct CurveMatrices {
  SparseMatrix stiffness;  // A_Lambda
  SparseMatrix mass;       // M_Lambda
};

/// Element matrices on chord-length segments; P1 and P2 in closed form.
inline CurveMatrices curve_matrices(const CurveSpace& space) {
  const auto& curve = *space.curve;
  std::vector<Triplet> kt, mt;
  for (std::size_t k = 0; k < curve.num_segments(); ++k) {
    const double l = curve.arclengths[k];
    const auto& d = space.segment_dofs[k];
    if (space.degree == 1) {
      const double ke[2][2] = {{1.0 / l, -1.0 / l}, {-1.0 / l, 1.0 / l}};
      const double me[2][2] = {{l / 3.0, l / 6.0}, {l / 6.0, l / 3.0}};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          kt.emplace_back(d[i], d[j], ke[i][j]);
          mt.emplace_back(d[i], d[j], me[i][j]);
        }
    } else {
      const double ke[3][3] = {{7, 1, -8}, {1, 7, -8}, {-8, -8, 16}};
      const double me[3][3] = {{4, -1, 2}, {-1, 4, 2}, {2, 2, 16}};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          kt.emplace_back(d[i], d[j], ke[i][j] / (3.0 * l));
          mt.emplace_back(d[i], d[j], me[i][j] * l / 30.0);
        }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.num_dofs);
  CurveMatrices out{SparseMatrix(n, n), SparseMatrix(n, n)};
  out.stiffness.setFromTriplets(kt.begin(), kt.end());
  out.mass.setFromTriplets(mt.begin(), mt.end());
  return out;
}

inline CurveMatrices curve_matrices(const CurveComplex& curve, int degree) {
  return curve_matrices(make_curve_space(curve, degree));
}

/// Mass matrix with rows from `test` and columns from `trial`, both on the same curve.
inline SparseMatrix curve_mass_mixed(const CurveSpace& test, const CurveSpace& trial) {
  if (test.curve != trial.curve && test.curve->num_segments() != trial.curve->num_segments()) {
    throw Error(ErrorCode::DimensionMismatch, "curve spaces on different complexes");
  }
  const int nt = test.degree + 1;
  const int nr = trial.degree + 1;
  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < test.segment_dofs.size(); ++k) {
    const double l = test.curve->arclengths[k];
    for (int i = 0; i < nt; ++i) {
      for (int j = 0; j < nr; ++j) {
        double v = 0.0;
        for (const auto& [t, w] : gauss3_unit()) {
          v += w * detail::curve_shape(test.degree, i, t) * detail::curve_shape(trial.degree, j, t);
        }
        trip.emplace_back(test.segment_dofs[k][i], trial.segment_dofs[k][j], l * v);
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(test.num_dofs), static_cast<Eigen::Index>(trial.num_dofs));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Load vector on the curve, integrating f(x) along chords with 3-point Gauss.
inline Vector load_curve(const CurveSpace& space, const std::function<double(const Point&)>& f) {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs));
  const int nl = space.degree + 1;
  for (std::size_t k = 0; k < space.segment_dofs.size(); ++k) {
    const auto& seg = space.curve->segments[k];
    const Point& a = space.curve->points[seg[0]];
    const Point& c = space.curve->points[seg[1]];
    const double l = space.curve->arclengths[k];
    for (const auto& [t, w] : gauss3_unit()) {
      const double fx = f((1.0 - t) * a + t * c);
      for (int i = 0; i < nl; ++i) b[space.segment_dofs[k][i]] += l * w * fx * detail::curve_shape(space.degree, i, t);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Trace, coupling and mean value

/// Dof selection matrix T (curve dofs x domain dofs). The curve space must have
/// the degree of the domain space.
inline SparseMatrix trace_map(const FeSpace& space, const CurveSpace& cspace) {
  if (cspace.degree != space.degree) {
    throw Error(ErrorCode::DimensionMismatch, "trace needs curve and domain spaces of equal degree");
  }
  const auto& curve = *cspace.curve;
  const auto& mesh = *space.mesh;
  std::vector<Triplet> trip;
  std::vector<int> target(cspace.num_dofs, -1);
  for (std::size_t k = 0; k < curve.num_vertices(); ++k) {
    const int v = curve.mesh_dof[k];
    if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size() || mesh.vertices[v] != curve.points[k]) {
      throw Error(ErrorCode::Nonconforming, "curve vertex without matching mesh vertex");
    }
    target[k] = v;
  }
  if (cspace.degree == 2) {
    for (const auto& d : cspace.segment_dofs) {
      const auto it = space.edge_dof.find(make_edge(target[d[0]], target[d[1]]));
      if (it == space.edge_dof.end()) throw Error(ErrorCode::Nonconforming, "curve segment is not a mesh edge");
      target[d[2]] = it->second;
    }
  }
  for (std::size_t i = 0; i < target.size(); ++i) trip.emplace_back(static_cast<int>(i), target[i], 1.0);
  SparseMatrix t(static_cast<Eigen::Index>(cspace.num_dofs), static_cast<Eigen::Index>(space.num_dofs));
  t.setFromTriplets(trip.begin(), trip.end());
  return t;
}

inline SparseMatrix trace_map(const FeSpace& space, const CurveComplex& curve) {
  return trace_map(space, make_curve_space(curve, space.degree));
}

/// The coupling B = [M_{Q,trace} T, -M_{Q,curve}] with multiplier space Q.
struct CouplingBlocks {
  SparseMatrix omega;  // multiplier x domain dofs
  SparseMatrix curve;  // multiplier x curve-field dofs
  SparseMatrix full() const {
    SparseMatrix b(omega.rows(), omega.cols() + curve.cols());
    std::vector<Triplet> trip;
    for (int k = 0; k < omega.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(omega, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < curve.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(curve, k); it; ++it)
        trip.emplace_back(it.row(), omega.cols() + it.col(), it.value());
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
  }
};

inline CouplingBlocks coupling_block(const FeSpace& space2d, const CurveSpace& field, const CurveSpace& multiplier) {
  const CurveSpace trace_space = make_curve_space(*multiplier.curve, space2d.degree);
  const SparseMatrix t = trace_map(space2d, trace_space);
  CouplingBlocks b;
  b.omega = curve_mass_mixed(multiplier, trace_space) * t;
  b.curve = -curve_mass_mixed(multiplier, field);
  return b;
}

/// m_i = integral over the curve of phi_i, and the curve length.
struct MeanValue {
  Vector m;
  double length;
};

inline MeanValue mean_value_vector(const FeSpace& space, const CurveComplex& curve) {
  const CurveSpace cs = make_curve_space(curve, space.degree);
  const SparseMatrix t = trace_map(space, cs);
  const SparseMatrix mc = curve_matrices(cs).mass;
  const Vector ones = Vector::Ones(mc.rows());
  return {t.transpose() * (mc * ones), curve.length()};
}

// ---------------------------------------------------------------------------
// Dirichlet elimination

struct DirichletResult {
  SparseMatrix a;
  Vector rhs;
};

/// Symmetric elimination: rhs -= A g, constrained rows and columns zeroed, unit
/// diagonal, rhs set to the prescribed values. Applying it twice is a no-op.
inline DirichletResult apply_dirichlet(const SparseMatrix& a, const Vector& rhs, const std::vector<int>& bdofs,
                                       const Vector& values) {
  if (a.rows() != a.cols() || a.rows() != rhs.size() || static_cast<std::size_t>(values.size()) != bdofs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_dirichlet dimensions");
  }
  std::vector<char> fixed(static_cast<std::size_t>(a.rows()), 0);
  Vector g = Vector::Zero(a.rows());
  for (std::size_t i = 0; i < bdofs.size(); ++i) {
    fixed[static_cast<std::size_t>(bdofs[i])] = 1;
    g[bdofs[i]] = values[static_cast<Eigen::Index>(i)];
  }
  DirichletResult out;
  out.rhs = rhs - a * g;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (!fixed[static_cast<std::size_t>(it.row())] && !fixed[static_cast<std::size_t>(it.col())]) {
        trip.emplace_back(it.row(), it.col(), it.value());
      }
    }
  }
  for (int d : bdofs) {
    trip.emplace_back(d, d, 1.0);
    out.rhs[d] = g[d];
  }
  out.a = SparseMatrix(a.rows(), a.cols());
  out.a.setFromTriplets(trip.begin(), trip.end());
  return out;
}

/// Zero rows and columns of a rectangular block at the given column dofs.
inline SparseMatrix zero_columns(const SparseMatrix& b, const std::vector<int>& cols) {
  std::vector<char> fixed(static_cast<std::size_t>(b.cols()), 0);
  for (int c : cols) fixed[static_cast<std::size_t>(c)] = 1;
  SparseMatrix out = b;
  out.prune([&](const Eigen::Index, const Eigen::Index col, const double&) { return !fixed[static_cast<std::size_t>(col)]; });
  return out;
}

// ---------------------------------------------------------------------------
// Debug export

inline void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << detail::format_double(it.value()) << '\n';
    }
  }
}

}  // namespace mdlab
