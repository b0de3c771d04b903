#pragma once

// Coupled saddle-point systems on a mesh with one inclusion curve:
//
//   2d-1d      [[A, 0, (M T)^T], [0, kd (A_L + M_L), -M_L], [M T, -M_L, 0]]
//   trace-LM   [[A, (M T)^T], [M T, 0]]
//   2d-0d      [[A, -m], [-m^T, 0]]
//
// plus block-diagonal Riesz-map preconditioners and a manufactured solution.
//
// Sign convention: the multiplier enters the first row as +(M T)^T p, so on a
// circle p = d_r u(outside) - d_r u(inside).

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "assembly.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "linalg.hpp"
#include "spectral.hpp"

namespace mdlab {

/// Spaces, curve and fixed operators shared by the systems on one mesh.
/// Heap-held so that the raw pointers inside the spaces stay valid on copy.
struct Discretization {
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const CurveComplex> curve;
  int tag = 0;
  FeSpace space;           // domain space, degree 1 or 2
  CurveSpace field_space;  // curve unknown, P1
  CurveSpace mult_space;   // multiplier, P1
  CurveMatrices curve_p1;  // A_L, M_L on the P1 curve space
  SparseMatrix trace;      // domain space -> its own-degree curve space
  std::vector<int> boundary_dofs;
};

inline std::shared_ptr<const Discretization> make_discretization(std::shared_ptr<const TriMesh> mesh, int degree = 1,
                                                                 int tag = 0) {
  auto d = std::make_shared<Discretization>();
  d->mesh = std::move(mesh);
  d->curve = std::make_shared<const CurveComplex>(extract_curve(*d->mesh, tag));
  d->tag = tag;
  d->space = make_space(*d->mesh, degree);
  d->field_space = make_curve_space(*d->curve, 1);
  d->mult_space = make_curve_space(*d->curve, 1);
  d->curve_p1 = curve_matrices(d->field_space);
  d->trace = trace_map(d->space, make_curve_space(*d->curve, degree));
  d->boundary_dofs = d->space.boundary_dofs();
  return d;
}

inline std::shared_ptr<const Discretization> make_discretization(const TriMesh& mesh, int degree = 1, int tag = 0) {
  return make_discretization(std::make_shared<const TriMesh>(mesh), degree, tag);
}

/// Spectral basis of the shifted P1 curve operator (the multiplier norms).
inline SpectralBasis curve_basis(const Discretization& d) {
  return eig_curve(d.curve_p1.stiffness, d.curve_p1.mass);
}

// ---------------------------------------------------------------------------
// Block system

/// Symmetric saddle system with unknowns [u, u_dot, p]; u_dot is absent
/// (n_c = 0) for two-field problems.
struct BlockSystem {
  std::shared_ptr<const Discretization> disc;
  SparseMatrix a;        // domain block (Dirichlet rows eliminated)
  SparseMatrix a_dot;    // curve block
  SparseMatrix b_omega;  // multiplier x domain
  SparseMatrix b_curve;  // multiplier x curve
  Vector f, f_dot, g;
  double kappa = 1.0;
  double kappa_dot = 1.0;
  double eps = 0.0;

  Eigen::Index n_u() const { return a.rows(); }
  Eigen::Index n_c() const { return a_dot.rows(); }
  Eigen::Index n_p() const { return b_omega.rows(); }
  Eigen::Index size() const { return n_u() + n_c() + n_p(); }
  Eigen::Index n_primal() const { return n_u() + n_c(); }

  Vector rhs() const {
    Vector r(size());
    r << f, f_dot, g;
    return r;
  }

  /// Constraint block B = [b_omega, b_curve] as one sparse matrix.
  SparseMatrix b() const {
    if (n_c() == 0) return b_omega;
    return CouplingBlocks{b_omega, b_curve}.full();
  }

  SparseMatrix primal() const {
    SparseMatrix k(n_primal(), n_primal());
    std::vector<Triplet> t;
    auto put = [&](const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0) {
      for (int j = 0; j < m.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(m, j); it; ++it)
          t.emplace_back(static_cast<int>(r0 + it.row()), static_cast<int>(c0 + it.col()), it.value());
    };
    put(a, 0, 0);
    put(a_dot, n_u(), n_u());
    k.setFromTriplets(t.begin(), t.end());
    return k;
  }

  SparseMatrix matrix() const {
    std::vector<Triplet> t;
    auto put = [&](const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0, bool transpose) {
      for (int j = 0; j < m.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
          const auto r = static_cast<int>(r0 + (transpose ? it.col() : it.row()));
          const auto c = static_cast<int>(c0 + (transpose ? it.row() : it.col()));
          t.emplace_back(r, c, it.value());
        }
    };
    const Eigen::Index p0 = n_primal();
    put(a, 0, 0, false);
    put(a_dot, n_u(), n_u(), false);
    put(b_omega, p0, 0, false);
    put(b_omega, 0, p0, true);
    if (n_c() > 0) {
      put(b_curve, p0, n_u(), false);
      put(b_curve, n_u(), p0, true);
    }
    SparseMatrix m(size(), size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  LinearOperator as_operator() const {
    auto self = std::make_shared<const BlockSystem>(*this);
    return {size(),
            [self](const Vector& x) -> Vector {
              const auto nu = self->n_u(), nc = self->n_c(), np = self->n_p();
              Vector y(x.size());
              const auto u = x.head(nu);
              const auto p = x.tail(np);
              y.head(nu) = self->a * u + self->b_omega.transpose() * p;
              Vector bx = self->b_omega * u;
              if (nc > 0) {
                const auto ud = x.segment(nu, nc);
                y.segment(nu, nc) = self->a_dot * ud + self->b_curve.transpose() * p;
                bx += self->b_curve * ud;
              }
              y.tail(np) = bx;
              return y;
            },
            true};
  }
};

namespace detail {

inline void check_interior_coupling(const SparseMatrix& b, const std::vector<int>& bdofs) {
  std::vector<char> fixed(static_cast<std::size_t>(b.cols()), 0);
  for (int d : bdofs) fixed[static_cast<std::size_t>(d)] = 1;
  for (int j = 0; j < b.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(b, j); it; ++it)
      if (fixed[static_cast<std::size_t>(it.col())] && it.value() != 0.0) {
        throw Error(ErrorCode::Nonconforming, "inclusion curve touches the Dirichlet boundary");
      }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Manufactured solution on (-1,1)^2 with a circle of radius eps
//
//   u      = sin(pi x) sin(pi y) + chi_{r<eps} (eps^2 - r^2)
//   u_dot  = cos(theta),  theta = s / eps
//   p      = d_r u(out) - d_r u(in) = 2 eps
//   f      = 2 pi^2 sin sin + 4 chi
//   f_dot  = kd (1/eps^2 + 1) cos(theta) - 2 eps
//   g      = u|_Gamma - u_dot

struct ManufacturedCase {
  double eps = 0.1;
  double kappa_dot = 1.0;
  std::function<double(const Point&, bool inside)> u;
  std::function<Eigen::Vector2d(const Point&, bool inside)> grad_u;
  std::function<double(const Point&, bool inside)> f;
  std::function<double(const Point&)> u_dot;           // by polar angle of x
  std::function<Eigen::Vector2d(const Point&)> grad_u_dot;  // of the angular extension
  std::function<double(const Point&)> p;
  std::function<double(const Point&)> f_dot;
  std::function<double(const Point&)> g;
  /// Exact field as a function of the arclength coordinate s on the circle.
  std::function<double(double)> u_dot_of_s;
};

inline ManufacturedCase manufactured_case(double eps, double kappa_dot) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "manufactured case needs 0 < eps < 1");
  const double pi = std::numbers::pi;
  ManufacturedCase c;
  c.eps = eps;
  c.kappa_dot = kappa_dot;
  c.u = [eps, pi](const Point& x, bool inside) {
    const double smooth = std::sin(pi * x.x()) * std::sin(pi * x.y());
    return inside ? smooth + eps * eps - x.squaredNorm() : smooth;
  };
  c.grad_u = [pi](const Point& x, bool inside) -> Eigen::Vector2d {
    Eigen::Vector2d gr(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
    if (inside) gr -= 2.0 * x;
    return gr;
  };
  c.f = [pi](const Point& x, bool inside) {
    return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()) + (inside ? 4.0 : 0.0);
  };
  c.u_dot = [](const Point& x) { return std::cos(std::atan2(x.y(), x.x())); };
  c.grad_u_dot = [](const Point& x) -> Eigen::Vector2d {
    const double th = std::atan2(x.y(), x.x());
    return Eigen::Vector2d(-x.y(), x.x()) * (-std::sin(th) / x.squaredNorm());
  };
  c.p = [eps](const Point&) { return 2.0 * eps; };
  c.f_dot = [eps, kappa_dot](const Point& x) {
    return kappa_dot * (1.0 / (eps * eps) + 1.0) * std::cos(std::atan2(x.y(), x.x())) - 2.0 * eps;
  };
  c.g = [pi](const Point& x) {
    return std::sin(pi * x.x()) * std::sin(pi * x.y()) - std::cos(std::atan2(x.y(), x.x()));
  };
  c.u_dot_of_s = [eps](double s) { return std::cos(s / eps); };
  return c;
}

// ---------------------------------------------------------------------------
// Assembly of the three systems

struct Assemble2d1dOptions {
  double kappa = 1.0;
  const ManufacturedCase* data = nullptr;  // zero data when null
};

inline BlockSystem assemble_2d1d(std::shared_ptr<const Discretization> disc, double kappa_dot,
                                 const Assemble2d1dOptions& opts = {}) {
  const auto& d = *disc;
  BlockSystem sys;
  sys.disc = disc;
  sys.kappa = opts.kappa;
  sys.kappa_dot = kappa_dot;
  if (const auto& geo = d.mesh->geometry; geo && d.tag < static_cast<int>(geo->inclusions.size())) {
    sys.eps = geo->inclusions[static_cast<std::size_t>(d.tag)].radius;
  }

  const SparseMatrix a_raw = stiffness_2d(d.space, opts.kappa);
  Vector f = Vector::Zero(a_raw.rows());
  Vector gd = Vector::Zero(static_cast<Eigen::Index>(d.boundary_dofs.size()));
  const auto coupling = coupling_block(d.space, d.field_space, d.mult_space);
  const SparseMatrix m_l = d.curve_p1.mass;
  sys.a_dot = kappa_dot * (d.curve_p1.stiffness + m_l);
  sys.b_curve = coupling.curve;
  sys.f_dot = Vector::Zero(sys.a_dot.rows());
  sys.g = Vector::Zero(m_l.rows());

  if (opts.data) {
    const auto& mc = *opts.data;
    const auto& mesh = *d.mesh;
    f = load_2d(d.space, [&](const Point& x, std::size_t cell) { return mc.f(x, mesh.cell_inside(cell, d.tag)); });
    for (std::size_t i = 0; i < d.boundary_dofs.size(); ++i) {
      gd[static_cast<Eigen::Index>(i)] = mc.u(d.space.dof_coords[static_cast<std::size_t>(d.boundary_dofs[i])], false);
    }
    sys.f_dot = load_curve(d.field_space, mc.f_dot);
    sys.g = m_l * interpolate(d.mult_space, mc.g);
  }
  detail::check_interior_coupling(coupling.omega, d.boundary_dofs);
  auto bc = apply_dirichlet(a_raw, f, d.boundary_dofs, gd);
  sys.a = std::move(bc.a);
  sys.f = std::move(bc.rhs);
  sys.b_omega = coupling.omega;
  return sys;
}

/// Two-field problem: -Delta u = f, u = g on the curve via a multiplier,
/// u = 0 on the outer boundary.
inline BlockSystem assemble_trace_lm(std::shared_ptr<const Discretization> disc,
                                     const std::function<double(const Point&)>& g,
                                     const std::function<double(const Point&)>& f = {}) {
  const auto& d = *disc;
  BlockSystem sys;
  sys.disc = disc;
  if (const auto& geo = d.mesh->geometry; geo && d.tag < static_cast<int>(geo->inclusions.size())) {
    sys.eps = geo->inclusions[static_cast<std::size_t>(d.tag)].radius;
  }
  const SparseMatrix a_raw = stiffness_2d(d.space);
  Vector rhs = f ? load_2d(d.space, [&](const Point& x, std::size_t) { return f(x); }) : Vector::Zero(a_raw.rows());
  const auto coupling = coupling_block(d.space, d.field_space, d.mult_space);
  detail::check_interior_coupling(coupling.omega, d.boundary_dofs);
  auto bc = apply_dirichlet(a_raw, rhs, d.boundary_dofs,
                            Vector::Zero(static_cast<Eigen::Index>(d.boundary_dofs.size())));
  sys.a = std::move(bc.a);
  sys.f = std::move(bc.rhs);
  sys.a_dot = SparseMatrix(0, 0);
  sys.f_dot = Vector(0);
  sys.b_omega = coupling.omega;
  sys.b_curve = SparseMatrix(sys.b_omega.rows(), 0);
  sys.g = d.curve_p1.mass * interpolate(d.mult_space, g);
  return sys;
}

/// Mean-value constrained problem [[A, -m], [-m^T, 0]] with a one-dimensional multiplier.
struct MeanSystem {
  std::shared_ptr<const Discretization> disc;
  SparseMatrix a;
  Vector m;
  double length = 0.0;
  Vector f;
  double g = 0.0;  // constraint right-hand side: -m^T u = g

  SparseMatrix matrix() const {
    const Eigen::Index n = a.rows();
    std::vector<Triplet> t;
    for (int j = 0; j < a.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(a, j); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (m[i] != 0.0) {
        t.emplace_back(static_cast<int>(i), static_cast<int>(n), -m[i]);
        t.emplace_back(static_cast<int>(n), static_cast<int>(i), -m[i]);
      }
    }
    SparseMatrix k(n + 1, n + 1);
    k.setFromTriplets(t.begin(), t.end());
    return k;
  }
};

inline MeanSystem assemble_2d0d(std::shared_ptr<const Discretization> disc,
                                const std::function<double(const Point&)>& f = {}, double mean_value = 0.0) {
  const auto& d = *disc;
  MeanSystem sys;
  sys.disc = disc;
  const SparseMatrix a_raw = stiffness_2d(d.space);
  Vector rhs = f ? load_2d(d.space, [&](const Point& x, std::size_t) { return f(x); }) : Vector::Zero(a_raw.rows());
  auto bc = apply_dirichlet(a_raw, rhs, d.boundary_dofs,
                            Vector::Zero(static_cast<Eigen::Index>(d.boundary_dofs.size())));
  sys.a = std::move(bc.a);
  sys.f = std::move(bc.rhs);
  auto mv = mean_value_vector(d.space, *d.curve);
  for (int b : d.boundary_dofs) {
    if (mv.m[b] != 0.0) throw Error(ErrorCode::Nonconforming, "inclusion curve touches the Dirichlet boundary");
  }
  sys.m = std::move(mv.m);
  sys.length = mv.length;
  sys.g = -mv.length * mean_value;
  return sys;
}

struct MeanSolution {
  Vector u;
  double p = 0.0;
};

/// Direct solve through the rank-one Schur complement m^T A^{-1} m.
inline MeanSolution solve_mean(const MeanSystem& sys) {
  const SparseCholesky fac(sys.a);
  const Vector am = fac.solve(sys.m);
  const Vector af = fac.solve(sys.f);
  const double s = sys.m.dot(am);
  MeanSolution out;
  out.p = -(sys.g + sys.m.dot(af)) / s;
  out.u = af + out.p * am;
  return out;
}

// ---------------------------------------------------------------------------
// Direct saddle solver

/// Exact solver via sparse Cholesky of the primal blocks and the dense Schur
/// complement S = B K^{-1} B^T at multiplier size.
class SaddleSolver {
 public:
  explicit SaddleSolver(const BlockSystem& sys)
      : nu_(sys.n_u()), nc_(sys.n_c()), np_(sys.n_p()),
        a_(std::make_shared<SparseCholesky>(sys.a)),
        b_omega_(sys.b_omega),
        b_curve_(sys.b_curve) {
    s_ = schur_complement(*a_, b_omega_);
    if (nc_ > 0) {
      ad_ = std::make_shared<SparseCholesky>(sys.a_dot);
      s_ += schur_complement(*ad_, b_curve_);
    }
    llt_.compute(s_);
    if (llt_.info() != Eigen::Success) throw Error(ErrorCode::NotSpd, "Schur complement not positive definite");
  }

  const DenseMatrix& schur() const { return s_; }

  Vector solve(const Vector& rhs) const {
    const Vector r_u = rhs.head(nu_);
    const Vector r_p = rhs.tail(np_);
    Vector x_u = a_->solve(r_u);
    Vector x_c;
    Vector bx = b_omega_ * x_u;
    if (nc_ > 0) {
      x_c = ad_->solve(Vector(rhs.segment(nu_, nc_)));
      bx += b_curve_ * x_c;
    }
    const Vector p = llt_.solve(bx - r_p);
    x_u -= a_->solve(Vector(b_omega_.transpose() * p));
    Vector out(nu_ + nc_ + np_);
    out.head(nu_) = x_u;
    if (nc_ > 0) {
      x_c -= ad_->solve(Vector(b_curve_.transpose() * p));
      out.segment(nu_, nc_) = x_c;
    }
    out.tail(np_) = p;
    return out;
  }

  LinearOperator inverse() const {
    auto self = std::make_shared<const SaddleSolver>(*this);
    return {nu_ + nc_ + np_, [self](const Vector& x) { return self->solve(x); }, true};
  }

 private:
  Eigen::Index nu_, nc_, np_;
  std::shared_ptr<SparseCholesky> a_, ad_;
  SparseMatrix b_omega_, b_curve_;
  DenseMatrix s_;
  Eigen::LLT<DenseMatrix> llt_;
};

// ---------------------------------------------------------------------------
// Preconditioners

enum class PrecondVariant { B0, B1, Generic };

struct PrecondSpec {
  PrecondVariant variant = PrecondVariant::B1;
  IntersectionWeights weights;

  static PrecondSpec b0() { return {PrecondVariant::B0, IntersectionWeights{{-0.5, 1.0}}}; }
  static PrecondSpec b1(double kappa_dot) {
    return {PrecondVariant::B1, IntersectionWeights{{-0.5, 1.0}, {-1.0, 1.0 / kappa_dot}}};
  }
  static PrecondSpec generic(IntersectionWeights w) { return {PrecondVariant::Generic, std::move(w)}; }
};

inline std::string to_string(PrecondVariant v) {
  switch (v) {
    case PrecondVariant::B0: return "B0";
    case PrecondVariant::B1: return "B1";
    case PrecondVariant::Generic: return "GENERIC";
  }
  return "?";
}

/// Block-diagonal Riesz map: exact Cholesky solves on the primal blocks and
/// the spectral inverse of sum_i w_i H(s_i) on the multiplier.
struct BlockPreconditioner {
  Eigen::Index nu = 0, nc = 0, np = 0;
  std::shared_ptr<SparseCholesky> a_fac, ad_fac;
  std::shared_ptr<const SparseMatrix> a, a_dot;
  std::shared_ptr<const DenseMatrix> mult_norm;     // sum_i w_i H(s_i)
  std::shared_ptr<const DenseMatrix> mult_inverse;  // its inverse

  Eigen::Index size() const { return nu + nc + np; }

  /// The preconditioner itself (approximate inverse of the system).
  LinearOperator apply() const {
    const BlockPreconditioner self = *this;
    return {size(),
            [self](const Vector& x) -> Vector {
              Vector y(x.size());
              y.head(self.nu) = self.a_fac->solve(Vector(x.head(self.nu)));
              if (self.nc > 0) y.segment(self.nu, self.nc) = self.ad_fac->solve(Vector(x.segment(self.nu, self.nc)));
              y.tail(self.np) = *self.mult_inverse * x.tail(self.np);
              return y;
            },
            true};
  }

  /// The inverse of the preconditioner: block diagonal of the norm matrices.
  LinearOperator riesz() const {
    const BlockPreconditioner self = *this;
    return {size(),
            [self](const Vector& x) -> Vector {
              Vector y(x.size());
              y.head(self.nu) = *self.a * x.head(self.nu);
              if (self.nc > 0) y.segment(self.nu, self.nc) = *self.a_dot * x.segment(self.nu, self.nc);
              y.tail(self.np) = *self.mult_norm * x.tail(self.np);
              return y;
            },
            true};
  }
};

inline BlockPreconditioner build_preconditioner(const BlockSystem& sys, const PrecondSpec& spec,
                                                const SpectralBasis& basis) {
  if (basis.size() != sys.n_p()) throw Error(ErrorCode::DimensionMismatch, "basis does not match the multiplier space");
  spec.weights.validate();
  BlockPreconditioner p;
  p.nu = sys.n_u();
  p.nc = sys.n_c();
  p.np = sys.n_p();
  p.a = std::make_shared<const SparseMatrix>(sys.a);
  p.a_fac = std::make_shared<SparseCholesky>(sys.a);
  if (p.nc > 0) {
    p.a_dot = std::make_shared<const SparseMatrix>(sys.a_dot);
    p.ad_fac = std::make_shared<SparseCholesky>(sys.a_dot);
  }
  p.mult_norm = std::make_shared<const DenseMatrix>(norm_matrix(basis, spec.weights));
  p.mult_inverse = std::make_shared<const DenseMatrix>(riesz_inverse_matrix(basis, spec.weights));
  return p;
}

// ---------------------------------------------------------------------------
// Errors against the manufactured solution

struct ErrorNorms {
  double e_u = 0.0;     // H1 seminorm on the domain
  double e_udot = 0.0;  // H1 norm on the curve
  double e_p = 0.0;     // intersection dual norm
};

/// Errors of a 2d-1d solution [u, u_dot, p]. Domain and curve errors use
/// quadrature against the exact fields; the multiplier error is the dual norm
/// of p_h minus the nodal interpolant of p.
inline ErrorNorms error_norms(const BlockSystem& sys, const Vector& x, const ManufacturedCase& mc,
                              const SpectralBasis& basis, const IntersectionWeights& weights) {
  const auto& d = *sys.disc;
  const auto& mesh = *d.mesh;
  const Vector uh = x.head(sys.n_u());
  const Vector udh = x.segment(sys.n_u(), sys.n_c());
  const Vector ph = x.tail(sys.n_p());
  ErrorNorms e;

  const auto& rule = triangle_rule_deg4();
  const int nl = d.space.local_dofs();
  std::array<Eigen::Vector2d, 6> grad;
  double eu2 = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& t = mesh.cells[c];
    const Point &p0 = mesh.vertices[t[0]], &p1 = mesh.vertices[t[1]], &p2 = mesh.vertices[t[2]];
    const auto g = element_geometry(p0, p1, p2);
    const auto dofs = d.space.dofs_of(c);
    const bool inside = mesh.cell_inside(c, d.tag);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.bary[q];
      shape_gradients(d.space.degree, l, g, grad.data());
      Eigen::Vector2d gh = Eigen::Vector2d::Zero();
      for (int i = 0; i < nl; ++i) gh += uh[dofs[i]] * grad[i];
      const Point xq = l[0] * p0 + l[1] * p1 + l[2] * p2;
      eu2 += rule.weights[q] * g.area * (gh - mc.grad_u(xq, inside)).squaredNorm();
    }
  }
  e.e_u = std::sqrt(eu2);

  // 4-point Gauss on each chord; the exact curve field is evaluated through
  // the polar angle of the chord point and differentiated along the chord.
  static constexpr double gx[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281, 0.9305681557970263};
  static constexpr double gw[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731, 0.1739274225687269};
  const auto& curve = *d.curve;
  double ec2 = 0.0;
  for (std::size_t k = 0; k < curve.num_segments(); ++k) {
    const auto [i0, i1] = curve.segments[k];
    const Point a = curve.points[i0], b = curve.points[i1];
    const double len = curve.arclengths[k];
    const Eigen::Vector2d tau = (b - a) / len;
    const double dh = (udh[i1] - udh[i0]) / len;
    for (int q = 0; q < 4; ++q) {
      const Point xq = (1 - gx[q]) * a + gx[q] * b;
      const double vh = (1 - gx[q]) * udh[i0] + gx[q] * udh[i1];
      const double ve = mc.u_dot(xq);
      const double de = mc.grad_u_dot(xq).dot(tau);
      ec2 += gw[q] * len * ((vh - ve) * (vh - ve) + (dh - de) * (dh - de));
    }
  }
  e.e_udot = std::sqrt(ec2);

  const Vector pe = interpolate(d.mult_space, mc.p);
  e.e_p = dual_norm(ph - pe, basis, weights);
  return e;
}

}  // namespace mdlab
