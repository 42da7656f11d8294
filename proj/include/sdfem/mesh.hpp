#pragma once

// Interface-matched triangulations of a Stokes region and a Darcy region.

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sdfem/common.hpp"
#include "sdfem/quadrature.hpp"

namespace sdfem {

enum class EdgeClass { interior_s, interior_d, interface, boundary_s, boundary_d };

inline const char* to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::interior_s: return "interior_s";
    case EdgeClass::interior_d: return "interior_d";
    case EdgeClass::interface: return "interface";
    case EdgeClass::boundary_s: return "boundary_s";
    case EdgeClass::boundary_d: return "boundary_d";
  }
  return "?";
}

/// Physical label carried by a boundary edge (from MSH physical groups).
enum class BoundaryMarker { none, lid, wall };

struct Triangle {
  std::array<int, 3> v{};  // counter-clockwise
  Subdomain domain = Subdomain::stokes;
};

struct Edge {
  std::array<int, 2> v{};           // v[0] < v[1]
  std::array<int, 2> tris{-1, -1};  // interface: {stokes, darcy}; interior: ascending; boundary: {t, -1}
  EdgeClass cls = EdgeClass::interior_s;
  BoundaryMarker marker = BoundaryMarker::none;
  Vec2 normal = Vec2::Zero();   // from tris[0] towards tris[1] (outward on the boundary, n^s on the interface)
  Vec2 tangent = Vec2::Zero();  // normal rotated by +90 degrees
  double length = 0.0;
};

struct EdgeGeometry {
  Vec2 normal;
  Vec2 tangent;
  double length;
};

struct MarkedSegment {
  int a = 0;
  int b = 0;
  BoundaryMarker marker = BoundaryMarker::none;
};

class Mesh {
public:
  Mesh() = default;

  /// Builds and classifies a mesh. Triangles are reoriented counter-clockwise;
  /// degenerate triangles are rejected.
  static Mesh from_triangles(std::vector<Point> vertices, std::vector<std::array<int, 3>> tris,
                             std::vector<Subdomain> tags, const std::vector<MarkedSegment>& markers = {}) {
    if (tris.size() != tags.size()) throw MeshError("triangle/tag count mismatch");
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.triangles_.reserve(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
      Triangle tri{tris[t], tags[t]};
      for (int i : tri.v)
        if (i < 0 || i >= static_cast<int>(m.vertices_.size())) throw MeshError("triangle references missing vertex");
      double a = signed_area(m.vertices_[tri.v[0]], m.vertices_[tri.v[1]], m.vertices_[tri.v[2]]);
      if (a < 0.0) {
        std::swap(tri.v[1], tri.v[2]);
        a = -a;
      }
      if (!(a > 0.0)) throw MeshError("degenerate triangle " + std::to_string(t));
      m.triangles_.push_back(tri);
    }
    m.build_edges(markers);
    return m;
  }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const Triangle& triangle(int t) const { return triangles_.at(static_cast<std::size_t>(t)); }
  const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }

  /// Local edge i of a triangle is the edge opposite local vertex i.
  const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[static_cast<std::size_t>(t)]; }
  /// +1 if the stored edge normal points out of triangle t, -1 otherwise.
  const std::array<int, 3>& triangle_edge_signs(int t) const { return tri_edge_signs_[static_cast<std::size_t>(t)]; }

  std::array<Point, 3> triangle_points(int t) const {
    const auto& v = triangles_[static_cast<std::size_t>(t)].v;
    return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
  }

  double area(int t) const {
    const auto p = triangle_points(t);
    return signed_area(p[0], p[1], p[2]);
  }

  /// Longest edge of triangle t.
  double diameter(int t) const {
    const auto p = triangle_points(t);
    return std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
  }

  double h() const {
    double h = 0.0;
    for (int t = 0; t < n_triangles(); ++t) h = std::max(h, diameter(t));
    return h;
  }

  std::vector<int> triangles_in(Subdomain d) const {
    std::vector<int> out;
    for (int t = 0; t < n_triangles(); ++t)
      if (triangles_[static_cast<std::size_t>(t)].domain == d) out.push_back(t);
    return out;
  }

  std::vector<int> edges_of_class(EdgeClass c) const {
    std::vector<int> out;
    for (int e = 0; e < n_edges(); ++e)
      if (edges_[static_cast<std::size_t>(e)].cls == c) out.push_back(e);
    return out;
  }

  std::vector<int> interface_edges() const { return edges_of_class(EdgeClass::interface); }

  /// Edges touching subdomain d (its interior, boundary, and the interface).
  bool edge_in(int e, Subdomain d) const {
    const auto& ed = edges_[static_cast<std::size_t>(e)];
    for (int t : ed.tris)
      if (t >= 0 && triangles_[static_cast<std::size_t>(t)].domain == d) return true;
    return false;
  }

  int find_edge(int a, int b) const {
    const auto it = edge_index_.find(std::minmax(a, b));
    return it == edge_index_.end() ? -1 : it->second;
  }

  double subdomain_area(Subdomain d) const {
    double s = 0.0;
    for (int t = 0; t < n_triangles(); ++t)
      if (triangles_[static_cast<std::size_t>(t)].domain == d) s += area(t);
    return s;
  }

  /// Point on edge e at parameter s, measured from the lower-numbered vertex.
  Point edge_point(int e, double s) const {
    const auto& ed = edges_[static_cast<std::size_t>(e)];
    return (1.0 - s) * vertices_[ed.v[0]] + s * vertices_[ed.v[1]];
  }

  /// Barycentric coordinates, in triangle t, of the point at parameter s on edge e.
  Bary edge_point_bary(int t, int e, double s) const {
    const auto& ed = edges_[static_cast<std::size_t>(e)];
    const auto& tv = triangles_[static_cast<std::size_t>(t)].v;
    Bary b{0.0, 0.0, 0.0};
    bool found0 = false, found1 = false;
    for (int i = 0; i < 3; ++i) {
      if (tv[i] == ed.v[0]) {
        b[i] = 1.0 - s;
        found0 = true;
      } else if (tv[i] == ed.v[1]) {
        b[i] = s;
        found1 = true;
      }
    }
    if (!found0 || !found1) throw MeshError("edge is not part of triangle");
    return b;
  }

private:
  void build_edges(const std::vector<MarkedSegment>& markers) {
    tri_edges_.assign(triangles_.size(), {-1, -1, -1});
    tri_edge_signs_.assign(triangles_.size(), {1, 1, 1});
    for (int t = 0; t < n_triangles(); ++t) {
      const auto& v = triangles_[static_cast<std::size_t>(t)].v;
      for (int i = 0; i < 3; ++i) {
        const auto key = std::minmax(v[(i + 1) % 3], v[(i + 2) % 3]);
        auto [it, inserted] = edge_index_.try_emplace(key, n_edges());
        if (inserted) {
          Edge e;
          e.v = {key.first, key.second};
          e.tris = {t, -1};
          edges_.push_back(e);
        } else {
          auto& e = edges_[static_cast<std::size_t>(it->second)];
          if (e.tris[1] >= 0) throw MeshError("non-manifold edge shared by more than two triangles");
          e.tris[1] = t;
        }
        tri_edges_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = it->second;
      }
    }
    for (auto& e : edges_) {
      if (e.tris[1] < 0) {
        e.cls = triangles_[static_cast<std::size_t>(e.tris[0])].domain == Subdomain::stokes ? EdgeClass::boundary_s
                                                                                          : EdgeClass::boundary_d;
      } else {
        const auto d0 = triangles_[static_cast<std::size_t>(e.tris[0])].domain;
        const auto d1 = triangles_[static_cast<std::size_t>(e.tris[1])].domain;
        if (d0 != d1) {
          e.cls = EdgeClass::interface;
          if (d0 == Subdomain::darcy) std::swap(e.tris[0], e.tris[1]);
        } else {
          e.cls = d0 == Subdomain::stokes ? EdgeClass::interior_s : EdgeClass::interior_d;
          if (e.tris[0] > e.tris[1]) std::swap(e.tris[0], e.tris[1]);
        }
      }
      const Point& a = vertices_[e.v[0]];
      const Point& b = vertices_[e.v[1]];
      const Vec2 d = b - a;
      e.length = d.norm();
      Vec2 n(d.y(), -d.x());
      n /= e.length;
      // Orient the normal out of tris[0].
      const auto& tv = triangles_[static_cast<std::size_t>(e.tris[0])].v;
      int opposite = -1;
      for (int i : tv)
        if (i != e.v[0] && i != e.v[1]) opposite = i;
      if (n.dot(vertices_[opposite] - a) > 0.0) n = -n;
      e.normal = n;
      e.tangent = Vec2(-n.y(), n.x());
    }
    for (int t = 0; t < n_triangles(); ++t)
      for (int i = 0; i < 3; ++i) {
        const auto& e = edges_[static_cast<std::size_t>(tri_edges_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)])];
        tri_edge_signs_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = e.tris[0] == t ? 1 : -1;
      }
    for (const auto& s : markers) {
      const int e = find_edge(s.a, s.b);
      if (e < 0) throw MeshError("marked boundary segment is not a mesh edge");
      auto& ed = edges_[static_cast<std::size_t>(e)];
      if (ed.tris[1] >= 0) continue;  // markers only label external boundary edges
      // lid wins over wall at shared vertices; on an edge the first marker sticks unless it is lid.
      if (ed.marker == BoundaryMarker::none || s.marker == BoundaryMarker::lid) ed.marker = s.marker;
    }
  }

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<int, 3>> tri_edge_signs_;
  std::map<std::pair<int, int>, int> edge_index_;
};

inline EdgeGeometry edge_geometry(const Mesh& mesh, int edge_id) {
  if (edge_id < 0 || edge_id >= mesh.n_edges()) throw MeshError("edge id out of range: " + std::to_string(edge_id));
  const auto& e = mesh.edge(edge_id);
  return {e.normal, e.tangent, e.length};
}

template <class F>
double integrate_on_triangle(const TriangleRule& rule, const Mesh& mesh, int tri_id, F&& integrand) {
  return integrate_on_triangle(rule, mesh.triangle_points(tri_id), std::forward<F>(integrand));
}

// ---------------------------------------------------------------------------
// Structured generation

struct Rect {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

/// Two axis-aligned rectangles sharing a full horizontal edge, with the number
/// of grid cells of each rectangle at refinement level 0.
struct RectanglePair {
  Rect stokes;
  Rect darcy;
  int nx = 2;
  int ny_stokes = 2;
  int ny_darcy = 2;
};

/// Uniform grid of each rectangle, every cell split along the diagonal from
/// its lower-left corner. Each level halves the cell size.
inline Mesh generate_structured(const RectanglePair& dom, int refine_level) {
  if (refine_level < 0) throw MeshError("refine level must be non-negative");
  const auto& s = dom.stokes;
  const auto& d = dom.darcy;
  constexpr double tol = 1e-12;
  auto close = [](double a, double b) { return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b)); };
  if (!(s.xmax > s.xmin && s.ymax > s.ymin && d.xmax > d.xmin && d.ymax > d.ymin))
    throw MeshError("empty rectangle");
  if (!close(s.xmin, d.xmin) || !close(s.xmax, d.xmax))
    throw MeshError("rectangles do not share a full horizontal edge");
  const bool stokes_above = close(s.ymin, d.ymax);
  const bool stokes_below = close(s.ymax, d.ymin);
  if (!stokes_above && !stokes_below) throw MeshError("rectangles do not share a full horizontal edge");
  if (dom.nx < 1 || dom.ny_stokes < 1 || dom.ny_darcy < 1) throw MeshError("cell counts must be positive");

  const int f = 1 << refine_level;
  const int nx = dom.nx * f;
  const int nys = dom.ny_stokes * f;
  const int nyd = dom.ny_darcy * f;
  // Rows of vertices from bottom to top; the interface row is shared.
  std::vector<double> ys;
  std::vector<Subdomain> row_domain;  // domain of the cell row above row j
  const Rect& lower = stokes_above ? d : s;
  const Rect& upper = stokes_above ? s : d;
  const int ny_lower = stokes_above ? nyd : nys;
  const int ny_upper = stokes_above ? nys : nyd;
  for (int j = 0; j <= ny_lower; ++j) ys.push_back(lower.ymin + (lower.ymax - lower.ymin) * j / ny_lower);
  for (int j = 1; j <= ny_upper; ++j) ys.push_back(upper.ymin + (upper.ymax - upper.ymin) * j / ny_upper);
  ys[static_cast<std::size_t>(ny_lower)] = stokes_above ? s.ymin : s.ymax;

  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>((nx + 1) * ys.size()));
  for (std::size_t j = 0; j < ys.size(); ++j)
    for (int i = 0; i <= nx; ++i) verts.emplace_back(s.xmin + (s.xmax - s.xmin) * i / nx, ys[j]);
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<std::array<int, 3>> tris;
  std::vector<Subdomain> tags;
  const int nrows = ny_lower + ny_upper;
  for (int j = 0; j < nrows; ++j) {
    const Subdomain dom_j = (j < ny_lower) == stokes_above ? Subdomain::darcy : Subdomain::stokes;
    for (int i = 0; i < nx; ++i) {
      const int ll = vid(i, j), lr = vid(i + 1, j), ur = vid(i + 1, j + 1), ul = vid(i, j + 1);
      tris.push_back({ll, lr, ur});
      tris.push_back({ll, ur, ul});
      tags.push_back(dom_j);
      tags.push_back(dom_j);
    }
  }
  return Mesh::from_triangles(std::move(verts), std::move(tris), std::move(tags));
}

// ---------------------------------------------------------------------------
// Point location

/// Bucket grid for locating the triangle containing a physical point.
class PointLocator {
public:
  explicit PointLocator(const Mesh& mesh, int bins_per_axis = 0) : mesh_(&mesh) {
    lo_ = hi_ = mesh.vertices().front();
    for (const auto& p : mesh.vertices()) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    n_ = bins_per_axis > 0 ? bins_per_axis
                           : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.n_triangles()) / 2.0)));
    bins_.assign(static_cast<std::size_t>(n_ * n_), {});
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const auto p = mesh.triangle_points(t);
      Point a = p[0].cwiseMin(p[1]).cwiseMin(p[2]);
      Point b = p[0].cwiseMax(p[1]).cwiseMax(p[2]);
      const auto [i0, j0] = bin(a);
      const auto [i1, j1] = bin(b);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j * n_ + i)].push_back(t);
    }
  }

  /// Triangle containing p and its barycentric coordinates; nullopt outside the mesh.
  std::optional<std::pair<int, Bary>> locate(const Point& p, double tol = 1e-12) const {
    if ((p.array() < lo_.array() - tol).any() || (p.array() > hi_.array() + tol).any()) return std::nullopt;
    const auto [i, j] = bin(p);
    for (int t : bins_[static_cast<std::size_t>(j * n_ + i)]) {
      const Bary b = barycentric(t, p);
      if (b[0] >= -tol && b[1] >= -tol && b[2] >= -tol) return std::make_pair(t, b);
    }
    return std::nullopt;
  }

  Bary barycentric(int t, const Point& p) const {
    const auto v = mesh_->triangle_points(t);
    const double a = signed_area(v[0], v[1], v[2]);
    return {signed_area(p, v[1], v[2]) / a, signed_area(v[0], p, v[2]) / a, signed_area(v[0], v[1], p) / a};
  }

private:
  std::pair<int, int> bin(const Point& p) const {
    auto clampi = [this](double x) { return std::clamp(static_cast<int>(x), 0, n_ - 1); };
    const Vec2 ext = (hi_ - lo_).cwiseMax(Vec2::Constant(1e-300));
    return {clampi((p.x() - lo_.x()) / ext.x() * n_), clampi((p.y() - lo_.y()) / ext.y() * n_)};
  }

  const Mesh* mesh_;
  Point lo_, hi_;
  int n_ = 1;
  std::vector<std::vector<int>> bins_;
};

}  // namespace sdfem
