#pragma once

// Curve-conforming triangulations of the unit disk and the square (-1,1)^2
// with embedded inclusion curves, uniform refinement and curve extraction.
//
// Meshes are built from concentric rings of vertices. Every inclusion curve is
// one ring, so conformity holds by construction. Between rings with equal
// vertex counts quadrilaterals are split into two triangles; where the count
// doubles, each coarse segment fans into three triangles.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "error.hpp"

namespace mdlab {

using Point = Eigen::Vector2d;

enum class DomainShape { Disk, Square };
enum class InclusionShape { Circle, SquareContour };

struct InclusionSpec {
  InclusionShape shape = InclusionShape::Circle;
  double radius = 0.1;
};

/// Edge tags. Non-negative values denote inclusion curve i.
inline constexpr int kOuterTag = -1;
inline constexpr int curve_tag(int i) { return i; }

using EdgeKey = std::pair<int, int>;

inline EdgeKey make_edge(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Exact geometry the mesh conforms to; used to snap new boundary vertices.
struct MeshGeometry {
  DomainShape domain = DomainShape::Square;
  std::vector<InclusionSpec> inclusions;  // indexed by curve tag
};

/// Largest inclusion radius; ring meshes morph into the domain shape beyond it.
inline double blend_start(const MeshGeometry& g) {
  double r = 0.0;
  for (const auto& inc : g.inclusions) r = std::max(r, inc.radius);
  return r;
}

struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> cells;  // counterclockwise
  std::map<EdgeKey, int> edge_markers;
  /// Number of inclusion loops enclosing each cell.
  std::vector<int> cell_depth;
  int level = 0;
  std::optional<MeshGeometry> geometry;
  /// Ring coordinates (rho, theta) per vertex for ring meshes, empty otherwise.
  /// Refinement bisects edges in these coordinates so the mesh stays a smooth
  /// image of a structured grid.
  std::vector<Point> param;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return cells.size(); }

  double signed_area(std::size_t c) const {
    const auto& [a, b, d] = cells[c];
    const Point e1 = vertices[b] - vertices[a];
    const Point e2 = vertices[d] - vertices[a];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  }

  /// Whether cell c lies inside the loop of curve tag i.
  bool cell_inside(std::size_t c, int tag) const {
    // Loops are nested with tag 0 outermost; depth counts enclosing loops.
    return cell_depth.empty() ? false : cell_depth[c] > tag;
  }

  std::set<int> curve_tags() const {
    std::set<int> tags;
    for (const auto& [e, t] : edge_markers) {
      if (t >= 0) tags.insert(t);
    }
    return tags;
  }

  /// All distinct edges, in deterministic order of first appearance in cells.
  std::vector<EdgeKey> edges() const {
    std::vector<EdgeKey> out;
    std::map<EdgeKey, int> seen;
    for (const auto& c : cells) {
      for (int k = 0; k < 3; ++k) {
        const EdgeKey e = make_edge(c[k], c[(k + 1) % 3]);
        if (seen.emplace(e, static_cast<int>(out.size())).second) out.push_back(e);
      }
    }
    return out;
  }

  double max_edge_length() const {
    double h = 0.0;
    for (const auto& c : cells) {
      for (int k = 0; k < 3; ++k) {
        h = std::max(h, (vertices[c[k]] - vertices[c[(k + 1) % 3]]).norm());
      }
    }
    return h;
  }
};

/// Ordered 1d segment complex extracted from a tagged loop of mesh edges.
struct CurveComplex {
  std::vector<std::array<int, 2>> segments;  // local vertex indices
  std::vector<double> arclengths;            // chord length per segment
  std::vector<int> mesh_dof;                 // local vertex -> mesh vertex
  std::vector<Point> points;                 // local vertex coordinates
  bool closed = true;

  std::size_t num_vertices() const { return mesh_dof.size(); }
  std::size_t num_segments() const { return segments.size(); }
  double length() const {
    double l = 0.0;
    for (double s : arclengths) l += s;
    return l;
  }
};

namespace detail {

inline double shape_factor(bool square, double theta) {
  if (!square) return 1.0;
  return 1.0 / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
}

struct Ring {
  double rho;
  int n;
  int shift = 0;  // 1: vertices offset by half a segment
};

/// Half-segment offsets so that consecutive rings are staggered (a near
/// equilateral lattice) wherever possible. Curve rings and the outer ring keep
/// offset 0; a stretch between two of them without a count change and with an
/// odd number of steps gets one aligned step in its middle.
inline void assign_shifts(std::vector<Ring>& rings, const std::vector<bool>& anchor) {
  const int nr = static_cast<int>(rings.size());
  std::vector<int> anchors;
  for (int j = 0; j < nr; ++j) {
    if (anchor[static_cast<std::size_t>(j)]) anchors.push_back(j);
  }
  for (int j : anchors) rings[static_cast<std::size_t>(j)].shift = 0;
  for (int j = anchors.front() - 1; j >= 0; --j) {
    rings[static_cast<std::size_t>(j)].shift = 1 - rings[static_cast<std::size_t>(j + 1)].shift;
  }
  for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
    const int a = anchors[i], b = anchors[i + 1];
    int last_transition = -1;
    for (int j = a + 1; j <= b; ++j) {
      if (rings[static_cast<std::size_t>(j)].n != rings[static_cast<std::size_t>(j - 1)].n) last_transition = j;
    }
    const int mid = (a + b) / 2;
    const bool aligned_mid = last_transition < 0 && (b - a) % 2 == 1;
    for (int j = a + 1; j < b; ++j) {
      auto& r = rings[static_cast<std::size_t>(j)];
      const int prev = rings[static_cast<std::size_t>(j - 1)].shift;
      if (j == last_transition) {
        r.shift = (b - j) % 2;
      } else if (aligned_mid && j == mid + 1) {
        r.shift = prev;
      } else {
        r.shift = 1 - prev;
      }
    }
  }
}

struct RingLayout {
  DomainShape domain;
  InclusionShape inclusion;
  double blend_start;  // largest inclusion radius; rings beyond it morph into the domain shape

  Point point(double rho, int k, int n) const { return point(rho, 2.0 * std::numbers::pi * k / n); }

  Point point(double rho, double theta) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const bool inc_sq = inclusion == InclusionShape::SquareContour;
    const bool dom_sq = domain == DomainShape::Square;
    // Exact placement on pure squares so that one coordinate is exactly +-rho.
    auto on_square = [&](double r) -> Point {
      if (std::abs(c) >= std::abs(s)) return {std::copysign(r, c), r * s / std::abs(c)};
      return {r * c / std::abs(s), std::copysign(r, s)};
    };
    if (rho <= blend_start) {
      if (inc_sq) return on_square(rho);
      return {rho * c, rho * s};
    }
    if (rho >= 1.0) {
      if (dom_sq) return on_square(1.0);
      return {c, s};
    }
    const double t = (rho - blend_start) / (1.0 - blend_start);
    const double f = (1.0 - t) * shape_factor(inc_sq, theta) + t * shape_factor(dom_sq, theta);
    return {rho * f * c, rho * f * s};
  }
};

inline double perimeter_factor(bool square) { return square ? 8.0 : 2.0 * std::numbers::pi; }

inline void orient_ccw(TriMesh& mesh) {
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (mesh.signed_area(c) < 0.0) std::swap(mesh.cells[c][1], mesh.cells[c][2]);
  }
}

/// Distance from an inclusion curve to the domain boundary (both centred at 0).
inline double boundary_gap(DomainShape domain, const InclusionSpec& inc) {
  const double reach = inc.shape == InclusionShape::SquareContour && domain == DomainShape::Disk
                           ? std::sqrt(2.0) * inc.radius
                           : inc.radius;
  return 1.0 - reach;
}

inline TriMesh build_ring_mesh(DomainShape domain, InclusionShape shape,
                               const std::vector<double>& radii_in_tag_order, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidArgument, "h_target must be positive");
  }
  // Radii sorted descending, remembering the curve tag of each.
  std::vector<std::pair<double, int>> req;
  for (std::size_t i = 0; i < radii_in_tag_order.size(); ++i) {
    req.emplace_back(radii_in_tag_order[i], static_cast<int>(i));
  }
  std::sort(req.begin(), req.end(), [](auto a, auto b) { return a.first > b.first; });

  const bool any_square = shape == InclusionShape::SquareContour || domain == DomainShape::Square;
  const bool inc_sq = shape == InclusionShape::SquareContour;
  const double arc_target = any_square ? h / 2.0 : h / 1.2;
  const double radial_cap = h / 1.5;
  const double r_out = req.front().first;
  const double r_in = req.back().first;
  auto perim = [&](double rho) {
    const double f = rho <= r_out ? perimeter_factor(inc_sq) : perimeter_factor(any_square);
    return f * rho;
  };

  int n0 = 16;
  while (perim(r_in) / n0 > arc_target) n0 *= 2;

  // Inward march towards the centre fan.
  std::vector<Ring> inner;
  {
    double rho = r_in;
    int n = n0;
    while (n > 8) {
      const double d = std::min(radial_cap, perim(rho) / n);
      const double next = rho - d;
      int n_next = n;
      // Keep the ring next to a curve structured: no transition touches a curve.
      if (!inner.empty() && perim(next) / (n / 2) <= arc_target) n_next = n / 2;
      inner.push_back({next, n_next});
      rho = next;
      n = n_next;
    }
  }

  // Outward march, landing exactly on every required radius and on 1.
  std::vector<Ring> outer{{r_in, n0}};
  {
    std::vector<double> targets;
    for (auto it = req.rbegin() + 1; it != req.rend(); ++it) targets.push_back(it->first);
    targets.push_back(1.0);
    std::size_t ti = 0;
    double rho = r_in;
    int n = n0;
    bool from_curve = true;
    while (rho < 1.0) {
      const double d = std::min(radial_cap, perim(rho) / n);
      double next = rho + d;
      const double target = targets[ti];
      bool onto_curve = false;
      if (next > target - 0.5 * d) {
        next = target;
        onto_curve = ti + 1 < targets.size();
        ++ti;
      }
      int n_next = n;
      if (!from_curve && !onto_curve && perim(next) / n > arc_target) n_next = 2 * n;
      from_curve = onto_curve;
      outer.push_back({next, n_next});
      rho = next;
      n = n_next;
    }
  }

  std::vector<Ring> rings(inner.rbegin(), inner.rend());
  rings.insert(rings.end(), outer.begin(), outer.end());
  {
    std::vector<bool> anchor(rings.size(), false);
    for (std::size_t j = 0; j < rings.size(); ++j) {
      for (const auto& r : req) anchor[j] = anchor[j] || rings[j].rho == r.first;
    }
    anchor.back() = true;
    assign_shifts(rings, anchor);
  }

  RingLayout layout{domain, shape, r_out};
  TriMesh mesh;
  mesh.vertices.push_back(Point::Zero());
  mesh.param.push_back(Point::Zero());
  std::vector<int> offset;
  for (const auto& ring : rings) {
    offset.push_back(static_cast<int>(mesh.vertices.size()));
    for (int k = 0; k < ring.n; ++k) {
      const double theta = std::numbers::pi * (2 * k + ring.shift) / ring.n;
      mesh.vertices.push_back(layout.point(ring.rho, theta));
      mesh.param.push_back({ring.rho, theta});
    }
  }

  auto depth_at = [&](double rho_outer) {
    int d = 0;
    for (const auto& r : req) d += (r.first >= rho_outer) ? 1 : 0;
    return d;
  };
  auto add = [&](int a, int b, int c, int depth) {
    mesh.cells.push_back({a, b, c});
    mesh.cell_depth.push_back(depth);
  };

  // Centre fan.
  {
    const int n = rings.front().n;
    const int depth = depth_at(rings.front().rho);
    for (int k = 0; k < n; ++k) add(0, offset[0] + k, offset[0] + (k + 1) % n, depth);
  }
  for (std::size_t j = 0; j + 1 < rings.size(); ++j) {
    const int na = rings[j].n;
    const int nb = rings[j + 1].n;
    const int oa = offset[j];
    const int ob = offset[j + 1];
    const int depth = depth_at(rings[j + 1].rho);
    const int sa = rings[j].shift, sb = rings[j + 1].shift;
    auto A = [&](int k) { return oa + ((k % na) + na) % na; };
    if (nb == na) {
      // Relabel b so that b(k) sits at or just after a(k).
      const int rel = sa == 1 && sb == 0 ? 1 : 0;
      auto B = [&](int k) { return ob + (((k + rel) % nb) + nb) % nb; };
      for (int k = 0; k < na; ++k) {
        if (sa == sb) {
          add(A(k), B(k + 1), B(k), depth);
          add(A(k), A(k + 1), B(k + 1), depth);
        } else {
          add(A(k), A(k + 1), B(k), depth);
          add(A(k + 1), B(k + 1), B(k), depth);
        }
      }
    } else {
      // In fine units a(k) sits at 2k + sa and b(m) at m + sb / 2.
      auto B = [&](int m) { return ob + (((m + sa) % nb) + nb) % nb; };
      for (int k = 0; k < na; ++k) {
        if (sb == 0) {
          add(A(k), B(2 * k), B(2 * k + 1), depth);
          add(A(k), B(2 * k + 1), A(k + 1), depth);
          add(A(k + 1), B(2 * k + 1), B(2 * k + 2), depth);
        } else {
          add(A(k), A(k + 1), B(2 * k), depth);
          add(A(k + 1), B(2 * k), B(2 * k + 1), depth);
          add(A(k + 1), B(2 * k + 1), B(2 * k + 2), depth);
        }
      }
    }
  }
  orient_ccw(mesh);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (!(mesh.signed_area(c) > 0.0)) throw Error(ErrorCode::Degenerate, "triangle with non-positive area");
  }

  auto tag_ring = [&](std::size_t j, int tag) {
    const int n = rings[j].n;
    for (int k = 0; k < n; ++k) mesh.edge_markers[make_edge(offset[j] + k, offset[j] + (k + 1) % n)] = tag;
  };
  for (std::size_t j = 0; j < rings.size(); ++j) {
    for (const auto& [r, tag] : req) {
      if (rings[j].rho == r) tag_ring(j, curve_tag(tag));
    }
  }
  tag_ring(rings.size() - 1, kOuterTag);

  MeshGeometry geom{domain, {}};
  for (double r : radii_in_tag_order) geom.inclusions.push_back({shape, r});
  mesh.geometry = geom;
  return mesh;
}

}  // namespace detail

/// Curve-conforming mesh of the unit disk or (-1,1)^2 with one inclusion (tag 0).
inline TriMesh build_mesh(DomainShape domain, const InclusionSpec& inclusion, double h_target) {
  if (!(inclusion.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "inclusion radius must be positive");
  const double gap = detail::boundary_gap(domain, inclusion);
  if (gap <= 0.0 || gap < 2.0 * h_target) {
    throw Error(ErrorCode::InclusionTooClose, "inclusion strictly interior with gap >= 2*h_target required");
  }
  return detail::build_ring_mesh(domain, inclusion.shape, {inclusion.radius}, h_target);
}

/// Mesh conforming to several concentric circles at once; radii[i] gets tag i.
inline TriMesh build_layered_mesh(DomainShape domain, const std::vector<double>& radii, double h_target) {
  if (radii.empty()) throw Error(ErrorCode::InvalidArgument, "radii must be nonempty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "radii must be positive");
    if (i + 1 < radii.size()) {
      if (!(radii[i] > radii[i + 1])) throw Error(ErrorCode::InvalidArgument, "radii must be strictly decreasing");
      if (radii[i] / radii[i + 1] < 2.0) throw Error(ErrorCode::RadiiTooClose, "adjacent radii ratio below 2");
    }
  }
  const InclusionSpec outermost{InclusionShape::Circle, radii.front()};
  const double gap = detail::boundary_gap(domain, outermost);
  if (gap <= 0.0 || gap < 2.0 * h_target) {
    throw Error(ErrorCode::InclusionTooClose, "inclusion strictly interior with gap >= 2*h_target required");
  }
  return detail::build_ring_mesh(domain, InclusionShape::Circle, radii, h_target);
}

/// Red refinement: every triangle split into four. Ring meshes bisect edges in
/// ring coordinates; otherwise new boundary and curve vertices are snapped to
/// the exact geometry when it is known.
inline TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh out;
  out.vertices = mesh.vertices;
  out.level = mesh.level + 1;
  out.geometry = mesh.geometry;
  const bool use_param = mesh.geometry && !mesh.geometry->inclusions.empty() &&
                         mesh.param.size() == mesh.vertices.size();
  std::optional<detail::RingLayout> layout;
  if (use_param) {
    const auto& g = *mesh.geometry;
    layout = detail::RingLayout{g.domain, g.inclusions.front().shape, blend_start(g)};
    out.param = mesh.param;
  }
  std::map<EdgeKey, int> mid;

  auto snap = [&](const EdgeKey& e, Point p) -> Point {
    if (!mesh.geometry) return p;
    auto it = mesh.edge_markers.find(e);
    if (it == mesh.edge_markers.end()) return p;
    const int tag = it->second;
    if (tag == kOuterTag) {
      if (mesh.geometry->domain == DomainShape::Disk) return p / p.norm();
      return p;
    }
    const auto& inc = mesh.geometry->inclusions.at(static_cast<std::size_t>(tag));
    if (inc.shape == InclusionShape::Circle) return p * (inc.radius / p.norm());
    return p;
  };
  auto midpoint = [&](int a, int b) {
    const EdgeKey e = make_edge(a, b);
    auto it = mid.find(e);
    if (it != mid.end()) return it->second;
    const int id = static_cast<int>(out.vertices.size());
    if (layout) {
      const Point& pa = mesh.param[a];
      const Point& pb = mesh.param[b];
      constexpr double two_pi = 2.0 * std::numbers::pi;
      double ta = pa.y();
      double tb = pb.y();
      // The centre has no angle; otherwise take the short way round.
      if (pa.x() == 0.0) ta = tb;
      if (pb.x() == 0.0) tb = ta;
      if (tb - ta > std::numbers::pi) tb -= two_pi;
      if (ta - tb > std::numbers::pi) ta -= two_pi;
      double t = 0.5 * (ta + tb);
      if (t < 0.0) t += two_pi;
      const double rho = 0.5 * (pa.x() + pb.x());
      out.param.push_back({rho, t});
      out.vertices.push_back(layout->point(rho, t));
    } else {
      out.vertices.push_back(snap(e, 0.5 * (mesh.vertices[a] + mesh.vertices[b])));
    }
    mid.emplace(e, id);
    return id;
  };

  out.cells.reserve(4 * mesh.cells.size());
  out.cell_depth.reserve(4 * mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto [a, b, d] = mesh.cells[c];
    const int ab = midpoint(a, b);
    const int bd = midpoint(b, d);
    const int da = midpoint(d, a);
    out.cells.push_back({a, ab, da});
    out.cells.push_back({ab, b, bd});
    out.cells.push_back({da, bd, d});
    out.cells.push_back({ab, bd, da});
    const int depth = mesh.cell_depth.empty() ? 0 : mesh.cell_depth[c];
    for (int k = 0; k < 4; ++k) out.cell_depth.push_back(depth);
  }
  for (const auto& [e, tag] : mesh.edge_markers) {
    const int m = mid.at(e);
    out.edge_markers[make_edge(e.first, m)] = tag;
    out.edge_markers[make_edge(m, e.second)] = tag;
  }
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    if (!(out.signed_area(c) > 0.0)) throw Error(ErrorCode::Degenerate, "refinement produced an inverted triangle");
  }
  return out;
}

inline TriMesh refine_uniform(const TriMesh& mesh, int times) {
  TriMesh m = mesh;
  for (int i = 0; i < times; ++i) m = refine_uniform(m);
  return m;
}

/// Ordered counterclockwise loop of the edges carrying curve tag `tag`.
inline CurveComplex extract_curve(const TriMesh& mesh, int tag) {
  std::map<int, std::vector<int>> adj;
  for (const auto& [e, t] : mesh.edge_markers) {
    if (t != tag) continue;
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  if (adj.empty()) throw Error(ErrorCode::TagNotFound, "no edges with tag " + std::to_string(tag));
  for (const auto& [v, nb] : adj) {
    if (nb.size() != 2) throw Error(ErrorCode::OpenLoop, "curve vertex without exactly two neighbours");
  }

  std::vector<int> order{adj.begin()->first};
  int prev = -1;
  int cur = order.front();
  while (true) {
    const auto& nb = adj.at(cur);
    const int next = nb[0] != prev ? nb[0] : nb[1];
    if (next == order.front()) break;
    if (order.size() > adj.size()) throw Error(ErrorCode::OpenLoop, "curve traversal did not close");
    order.push_back(next);
    prev = cur;
    cur = next;
  }
  if (order.size() != adj.size()) throw Error(ErrorCode::OpenLoop, "tagged edges form more than one loop");

  double area2 = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Point& p = mesh.vertices[order[k]];
    const Point& q = mesh.vertices[order[(k + 1) % order.size()]];
    area2 += p.x() * q.y() - p.y() * q.x();
  }
  if (area2 < 0.0) std::reverse(order.begin() + 1, order.end());

  CurveComplex curve;
  const int n = static_cast<int>(order.size());
  curve.mesh_dof = order;
  for (int k = 0; k < n; ++k) {
    curve.points.push_back(mesh.vertices[order[k]]);
    curve.segments.push_back({k, (k + 1) % n});
  }
  for (const auto& s : curve.segments) {
    curve.arclengths.push_back((curve.points[s[1]] - curve.points[s[0]]).norm());
  }
  curve.closed = true;
  return curve;
}

/// Structural and geometric invariant violations; empty when the mesh is valid.
inline std::vector<std::string> check_invariants(const TriMesh& mesh, double geom_tol = 1e-12) {
  std::vector<std::string> issues;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (!(mesh.signed_area(c) > 0.0)) {
      issues.push_back("cell " + std::to_string(c) + " has non-positive area");
      break;
    }
  }
  std::map<EdgeKey, int> count;
  for (const auto& c : mesh.cells) {
    for (int k = 0; k < 3; ++k) ++count[make_edge(c[k], c[(k + 1) % 3])];
  }
  for (const auto& [e, tag] : mesh.edge_markers) {
    auto it = count.find(e);
    const int n = it == count.end() ? 0 : it->second;
    if (tag == kOuterTag && n != 1) issues.push_back("outer edge not on exactly one triangle");
    if (tag >= 0 && n != 2) issues.push_back("curve edge not shared by exactly two triangles");
  }
  for (const auto& [e, n] : count) {
    if (n == 1 && !mesh.edge_markers.contains(e)) {
      issues.push_back("boundary edge without outer tag");
      break;
    }
  }
  const long long v = static_cast<long long>(mesh.vertices.size());
  const long long ed = static_cast<long long>(count.size());
  const long long f = static_cast<long long>(mesh.cells.size());
  if (v - ed + f != 1) issues.push_back("Euler characteristic V - E + F != 1");

  for (int tag : mesh.curve_tags()) {
    try {
      (void)extract_curve(mesh, tag);
    } catch (const Error& err) {
      issues.push_back(err.what());
    }
    if (mesh.geometry && static_cast<std::size_t>(tag) < mesh.geometry->inclusions.size()) {
      const auto& inc = mesh.geometry->inclusions[static_cast<std::size_t>(tag)];
      for (const auto& [e, t] : mesh.edge_markers) {
        if (t != tag) continue;
        for (int vtx : {e.first, e.second}) {
          const Point& p = mesh.vertices[vtx];
          const double dev = inc.shape == InclusionShape::Circle
                                 ? std::abs(p.norm() - inc.radius)
                                 : std::abs(std::max(std::abs(p.x()), std::abs(p.y())) - inc.radius);
          if (dev > geom_tol) {
            issues.push_back("curve vertex off the inclusion geometry");
            goto next_tag;
          }
        }
      }
    }
  next_tag:;
  }
  return issues;
}

// ---------------------------------------------------------------------------
// ASCII mesh container
//
//   mdmesh 1
//   vertices N      followed by N lines "x y"
//   cells M         followed by M lines "i j k"
//   edges K         followed by K lines "i j tag"   (tag -1 = outer, i >= 0 = curve i)
//
// Coordinates are written with 17 significant digits so reading them back is exact.

namespace detail {

inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(const std::string& tok) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::Io, "bad number '" + tok + "'");
  }
  return v;
}

}  // namespace detail

inline void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os << "mdmesh 1\n";
  os << "vertices " << mesh.vertices.size() << '\n';
  for (const auto& p : mesh.vertices) {
    os << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << '\n';
  }
  os << "cells " << mesh.cells.size() << '\n';
  for (const auto& c : mesh.cells) os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  os << "edges " << mesh.edge_markers.size() << '\n';
  for (const auto& [e, tag] : mesh.edge_markers) os << e.first << ' ' << e.second << ' ' << tag << '\n';
}

inline TriMesh read_mesh(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw Error(ErrorCode::Io, "expected '" + word + "'");
  };
  auto read_count = [&]() {
    long long n = -1;
    if (!(is >> n) || n < 0) throw Error(ErrorCode::Io, "bad count");
    return static_cast<std::size_t>(n);
  };
  expect("mdmesh");
  if (read_count() != 1) throw Error(ErrorCode::Io, "unsupported mdmesh version");
  TriMesh mesh;
  expect("vertices");
  const std::size_t nv = read_count();
  mesh.vertices.resize(nv);
  for (auto& p : mesh.vertices) {
    std::string x, y;
    if (!(is >> x >> y)) throw Error(ErrorCode::Io, "truncated vertex block");
    p = {detail::parse_double(x), detail::parse_double(y)};
  }
  expect("cells");
  const std::size_t nc = read_count();
  mesh.cells.resize(nc);
  for (auto& c : mesh.cells) {
    if (!(is >> c[0] >> c[1] >> c[2])) throw Error(ErrorCode::Io, "truncated cell block");
    for (int v : c) {
      if (v < 0 || static_cast<std::size_t>(v) >= nv) throw Error(ErrorCode::Io, "cell vertex out of range");
    }
  }
  expect("edges");
  const std::size_t ne = read_count();
  for (std::size_t i = 0; i < ne; ++i) {
    int a = 0, b = 0, tag = 0;
    if (!(is >> a >> b >> tag)) throw Error(ErrorCode::Io, "truncated edge block");
    mesh.edge_markers[make_edge(a, b)] = tag;
  }
  return mesh;
}

}  // namespace mdlab
