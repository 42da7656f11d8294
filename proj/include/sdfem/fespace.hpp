#pragma once

// Discrete spaces: bubble-enriched vector Lagrange on the Stokes region,
// Raviart-Thomas on the Darcy region, discontinuous pressures on the whole
// mesh, and a scalar multiplier space on interface edges.

#include <iostream>
#include <memory>

#include "sdfem/basis.hpp"
#include "sdfem/mesh.hpp"

namespace sdfem {

enum class FamilyTag { lagrange_bubble_vec, raviart_thomas, discontinuous, trace };

/// `k` is the velocity order of the pair: P_k^+ / RT_{k-1} / P_{k-1} / P_{k-1}(e).
struct ElementFamily {
  FamilyTag tag = FamilyTag::lagrange_bubble_vec;
  int k = 2;
};

inline const char* to_string(FamilyTag t) {
  switch (t) {
    case FamilyTag::lagrange_bubble_vec: return "lagrange_bubble_vec";
    case FamilyTag::raviart_thomas: return "raviart_thomas";
    case FamilyTag::discontinuous: return "discontinuous";
    case FamilyTag::trace: return "trace";
  }
  return "?";
}

enum class DofKind { vertex_value, edge_value, cell_value, bubble, edge_moment, interior_moment, trace_moment };

struct DofMeta {
  DofKind kind = DofKind::vertex_value;
  int anchor = -1;     // vertex, edge or triangle id
  int component = -1;  // vector component for Lagrange dofs
  int index = 0;       // moment / node index on the anchor
  Point location = Point::Zero();
};

class Space {
public:
  ElementFamily family;
  const Mesh* mesh = nullptr;
  int n_dofs = 0;
  std::vector<int> cells;                   // triangle ids, or interface edge ids for the trace space
  std::vector<std::vector<int>> cell_dofs;  // local -> global, per entry of `cells`
  std::vector<DofMeta> dof_meta;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_local() const { return cell_dofs.empty() ? 0 : static_cast<int>(cell_dofs.front().size()); }
  bool is_vector() const {
    return family.tag == FamilyTag::lagrange_bubble_vec || family.tag == FamilyTag::raviart_thomas;
  }
  /// Position of mesh entity `id` in `cells`, or -1.
  int cell_index(int id) const {
    return id >= 0 && id < static_cast<int>(cell_of_.size()) ? cell_of_[static_cast<std::size_t>(id)] : -1;
  }

  void index_cells(int n_entities) {
    cell_of_.assign(static_cast<std::size_t>(n_entities), -1);
    for (int c = 0; c < n_cells(); ++c) cell_of_[static_cast<std::size_t>(cells[static_cast<std::size_t>(c)])] = c;
  }

private:
  std::vector<int> cell_of_;
};

/// Number of scalar Lagrange functions per triangle (P_k plus bubbles).
inline int lagrange_local_size(int k) { return k == 2 ? 7 : 12; }
inline int rt_local_size(int k) { return k == 2 ? 8 : 15; }
inline int pressure_local_size(int k) { return k == 2 ? 3 : 6; }

inline void check_k(int k) {
  if (k != 2 && k != 3) throw Error("polynomial order k must be 2 or 3, got " + std::to_string(k));
}

// ---------------------------------------------------------------------------
// Local elements

struct BasisEval {
  std::vector<double> scalar;  // scalar families
  std::vector<Vec2> grad;      // scalar families
  std::vector<Vec2> value;     // vector families
  std::vector<Mat2> jac;       // vector families, jac(i,j) = d v_i / d x_j
  std::vector<double> div;     // vector families
};

/// Scalar Lagrange P_k^+ shape functions on triangle t. Edge nodes for k = 3
/// are ordered from the lower global vertex of each edge.
inline std::vector<LPoly> stokes_scalar_shapes(const Mesh& mesh, int t, int k) {
  check_k(k);
  if (k == 2) {
    auto s = lagrange_p2();
    s.push_back(cubic_bubble(27.0));
    return s;
  }
  std::vector<LPoly> s;
  for (int i = 0; i < 3; ++i) s.push_back(lagrange_p3_vertex(i));
  const auto& tv = mesh.triangle(t).v;
  for (int i = 0; i < 3; ++i) {
    int a = (i + 1) % 3, b = (i + 2) % 3;
    if (tv[static_cast<std::size_t>(a)] > tv[static_cast<std::size_t>(b)]) std::swap(a, b);
    s.push_back(lagrange_p3_edge(a, b));
    s.push_back(lagrange_p3_edge(b, a));
  }
  s.push_back(cubic_bubble(27.0));
  for (int i = 0; i < 2; ++i) s.push_back(cubic_bubble(81.0) * lambda_poly(i));
  return s;
}

/// Barycentric anchors of the Lagrange nodes (not the bubbles).
inline std::vector<Bary> stokes_node_bary(const Mesh& mesh, int t, int k) {
  std::vector<Bary> nodes = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto& tv = mesh.triangle(t).v;
  for (int i = 0; i < 3; ++i) {
    int a = (i + 1) % 3, b = (i + 2) % 3;
    if (k == 2) {
      Bary m{0, 0, 0};
      m[static_cast<std::size_t>(a)] = m[static_cast<std::size_t>(b)] = 0.5;
      nodes.push_back(m);
    } else {
      if (tv[static_cast<std::size_t>(a)] > tv[static_cast<std::size_t>(b)]) std::swap(a, b);
      Bary n0{0, 0, 0}, n1{0, 0, 0};
      n0[static_cast<std::size_t>(a)] = 2.0 / 3.0;
      n0[static_cast<std::size_t>(b)] = 1.0 / 3.0;
      n1[static_cast<std::size_t>(a)] = 1.0 / 3.0;
      n1[static_cast<std::size_t>(b)] = 2.0 / 3.0;
      nodes.push_back(n0);
      nodes.push_back(n1);
    }
  }
  return nodes;
}

/// Interior sample points used to fix the interior coefficients in interpolation.
inline std::vector<Bary> stokes_interior_points(int k) {
  if (k == 2) return {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return {{0.5, 0.25, 0.25}, {0.25, 0.5, 0.25}, {0.25, 0.25, 0.5}};
}

inline std::vector<LPoly> pressure_shapes(int k) {
  check_k(k);
  if (k == 2) return {lambda_poly(0), lambda_poly(1), lambda_poly(2)};
  return lagrange_p2();
}

inline std::vector<Bary> pressure_node_bary(int k) {
  std::vector<Bary> n = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  if (k == 3) {
    n.push_back({0, 0.5, 0.5});
    n.push_back({0.5, 0, 0.5});
    n.push_back({0.5, 0.5, 0});
  }
  return n;
}

/// Raw (non-nodal) RT_{k-1} functions. For k = 2 these are the Bernstein-Bezier
/// functions; for k = 3, [P_2]^2 monomials in l plus (x - z0) times quadratics.
inline std::vector<VPoly> rt_raw_basis(const TriangleGeometry& g, int k) {
  check_k(k);
  std::vector<VPoly> out;
  const auto& E = g.E;
  const double A = g.area;
  auto l = [](int i) { return lambda_poly(i); };
  if (k == 2) {
    const double a = 1.0 / (2.0 * A), b = 1.0 / A;
    VPoly c;
    c = {};
    c.add(l(1), a * E[2]).add(l(2), -a * E[1]);
    out.push_back(c);
    c = {};
    c.add(l(2), a * E[0]).add(l(0), -a * E[2]);
    out.push_back(c);
    c = {};
    c.add(l(0), a * E[1]).add(l(1), -a * E[0]);
    out.push_back(c);
    c = {};
    c.add(l(2), b * E[1]).add(l(1), b * E[2]);
    out.push_back(c);
    c = {};
    c.add(l(2), b * E[0]).add(l(0), b * E[2]);
    out.push_back(c);
    c = {};
    c.add(l(1), b * E[0]).add(l(0), b * E[1]);
    out.push_back(c);
    c = {};
    c.add(l(0) * l(1), b * E[2]).add(l(0) * l(2), -b * E[1]);
    out.push_back(c);
    c = {};
    c.add(l(0) * l(2), b * E[1]).add(l(1) * l(2), -b * E[0]);
    out.push_back(c);
    return out;
  }
  const std::array<std::array<int, 2>, 6> quad = {{{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}}};
  for (const auto& [i, j] : quad)
    for (int comp = 0; comp < 2; ++comp) {
      VPoly c;
      c.add(l(i) * l(j), comp == 0 ? Vec2(1, 0) : Vec2(0, 1));
      out.push_back(c);
    }
  const double h = std::max({E[0].norm(), E[1].norm(), E[2].norm()});
  // x - z0 = l1 E2 - l2 E1
  for (const auto& [i, j] : std::array<std::array<int, 2>, 3>{{{1, 1}, {1, 2}, {2, 2}}}) {
    VPoly c;
    c.add(l(1) * l(i) * l(j), E[2] / h).add(l(2) * l(i) * l(j), -E[1] / h);
    out.push_back(c);
  }
  return out;
}

/// Interior moment weights c for RT_{k-1}: (1,0),(0,1) for k = 2; e_x l_i, e_y l_i for k = 3.
inline Vec2 rt_interior_weight(int k, int m, const Bary& b) {
  const Vec2 e = m % 2 == 0 ? Vec2(1, 0) : Vec2(0, 1);
  return k == 2 ? e : b[static_cast<std::size_t>(m / 2)] * e;
}

inline int rt_interior_count(int k) { return k == 2 ? 2 : 6; }

/// Applies the RT_{k-1} degree-of-freedom functionals of triangle t to `v`:
/// for each local edge, (1/|e|) int_e v.n_e L_m(s) with the mesh edge normal and
/// s running from the lower global vertex; then (1/|T|) int_T v.c.
template <class F>
Eigen::VectorXd rt_functionals(const Mesh& mesh, int t, int k, F&& v) {
  const int n = rt_local_size(k);
  Eigen::VectorXd out(n);
  const auto& er = edge_rule(2 * k + 4);
  const auto& edges = mesh.triangle_edges(t);
  int row = 0;
  for (int i = 0; i < 3; ++i) {
    const int e = edges[static_cast<std::size_t>(i)];
    const Vec2& nrm = mesh.edge(e).normal;
    for (int m = 0; m < k; ++m) {
      double s = 0.0;
      for (std::size_t q = 0; q < er.size(); ++q) {
        const Bary b = mesh.edge_point_bary(t, e, er.points[q]);
        s += er.weights[q] * v(b).dot(nrm) * legendre01(m, er.points[q]);
      }
      out(row++) = s;
    }
  }
  const auto& tr = triangle_rule(default_quadrature_degree);
  for (int m = 0; m < rt_interior_count(k); ++m) {
    double s = 0.0;
    for (std::size_t q = 0; q < tr.size(); ++q) s += tr.weights[q] * v(tr.points[q]).dot(rt_interior_weight(k, m, tr.points[q]));
    out(row++) = 2.0 * s;  // (1/|T|) * 2|T| * sum
  }
  return out;
}

/// Nodal RT_{k-1} basis on one triangle: phi_j = sum_m chi_m Minv(m, j).
struct LocalRT {
  TriangleGeometry geo;
  int k = 2;
  std::vector<VPoly> raw;
  Eigen::MatrixXd M;     // M(i, j) = l_i(chi_j)
  Eigen::MatrixXd Minv;
  double cond = 0.0;     // 1-norm condition estimate of M

  LocalRT(const Mesh& mesh, int t, int k_) : geo(mesh.triangle_points(t)), k(k_), raw(rt_raw_basis(geo, k_)) {
    const int n = rt_local_size(k);
    M.resize(n, n);
    for (int j = 0; j < n; ++j)
      M.col(j) = rt_functionals(mesh, t, k, [&](const Bary& b) { return Vec2(raw[static_cast<std::size_t>(j)].x.value(b), raw[static_cast<std::size_t>(j)].y.value(b)); });
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Minv = lu.inverse();
    cond = M.cwiseAbs().colwise().sum().maxCoeff() * Minv.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(cond)) throw SolverError("singular local Raviart-Thomas matrix on triangle " + std::to_string(t));
    if (cond > 1e8) std::cerr << "warning: local RT matrix condition " << cond << " on triangle " << t << "\n";
  }

  int size() const { return static_cast<int>(raw.size()); }

  void eval(const Bary& b, std::vector<Vec2>& val, std::vector<Mat2>* jac = nullptr) const {
    const int n = size();
    std::vector<Vec2> rv(static_cast<std::size_t>(n));
    std::vector<Mat2> rj(jac ? static_cast<std::size_t>(n) : 0);
    for (int m = 0; m < n; ++m) {
      rv[static_cast<std::size_t>(m)] = Vec2(raw[static_cast<std::size_t>(m)].x.value(b), raw[static_cast<std::size_t>(m)].y.value(b));
      if (jac) rj[static_cast<std::size_t>(m)] = geo.jacobian(raw[static_cast<std::size_t>(m)], b);
    }
    val.assign(static_cast<std::size_t>(n), Vec2::Zero());
    if (jac) jac->assign(static_cast<std::size_t>(n), Mat2::Zero());
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) {
        const double c = Minv(m, j);
        if (c == 0.0) continue;
        val[static_cast<std::size_t>(j)] += c * rv[static_cast<std::size_t>(m)];
        if (jac) (*jac)[static_cast<std::size_t>(j)] += c * rj[static_cast<std::size_t>(m)];
      }
  }
};

/// Shape functions of one cell of a triangle-based space.
class LocalElement {
public:
  LocalElement(const Space& space, int cell) : space_(&space), tri_(space.cells.at(static_cast<std::size_t>(cell))),
                                                geo_(space.mesh->triangle_points(tri_)) {
    const int k = space.family.k;
    switch (space.family.tag) {
      case FamilyTag::lagrange_bubble_vec: scalar_ = stokes_scalar_shapes(*space.mesh, tri_, k); break;
      case FamilyTag::discontinuous: scalar_ = pressure_shapes(k); break;
      case FamilyTag::raviart_thomas: rt_ = std::make_shared<LocalRT>(*space.mesh, tri_, k); break;
      case FamilyTag::trace: throw Error("LocalElement: trace space cells are edges");
    }
  }

  int triangle() const { return tri_; }
  const TriangleGeometry& geometry() const { return geo_; }
  const LocalRT* rt() const { return rt_.get(); }

  BasisEval eval(const Bary& b, bool derivatives = true) const {
    BasisEval r;
    switch (space_->family.tag) {
      case FamilyTag::discontinuous:
        for (const auto& p : scalar_) {
          r.scalar.push_back(p.value(b));
          if (derivatives) r.grad.push_back(geo_.gradient(p, b));
        }
        break;
      case FamilyTag::lagrange_bubble_vec:
        for (const auto& p : scalar_) {
          const double v = p.value(b);
          const Vec2 g = derivatives ? geo_.gradient(p, b) : Vec2::Zero();
          for (int comp = 0; comp < 2; ++comp) {
            r.value.push_back(comp == 0 ? Vec2(v, 0.0) : Vec2(0.0, v));
            if (derivatives) {
              Mat2 J = Mat2::Zero();
              J.row(comp) = g.transpose();
              r.jac.push_back(J);
              r.div.push_back(g(comp));
            }
          }
        }
        break;
      case FamilyTag::raviart_thomas:
        rt_->eval(b, r.value, derivatives ? &r.jac : nullptr);
        if (derivatives)
          for (const auto& J : r.jac) r.div.push_back(J.trace());
        break;
      case FamilyTag::trace: break;
    }
    return r;
  }

private:
  const Space* space_;
  int tri_;
  TriangleGeometry geo_;
  std::vector<LPoly> scalar_;
  std::shared_ptr<LocalRT> rt_;
};

/// Basis values, gradients and divergences of all local functions of cell
/// `cell` (triangle spaces) at barycentric point `b`.
inline BasisEval eval_basis(const Space& space, int cell, const Bary& b) { return LocalElement(space, cell).eval(b); }

/// Trace space shape functions on [0,1]: shifted Legendre polynomials.
inline std::vector<double> eval_trace_basis(const Space& space, double s) {
  std::vector<double> v;
  for (int m = 0; m < space.family.k; ++m) v.push_back(legendre01(m, s));
  return v;
}

// ---------------------------------------------------------------------------
// Space construction

namespace detail {

inline Space build_stokes(const Mesh& mesh, int k) {
  Space sp;
  sp.family = {FamilyTag::lagrange_bubble_vec, k};
  sp.mesh = &mesh;
  sp.cells = mesh.triangles_in(Subdomain::stokes);
  if (sp.cells.empty()) throw Error("build_space: Stokes family needs Stokes triangles");
  std::vector<int> vnum(static_cast<std::size_t>(mesh.n_vertices()), -1), enum_(static_cast<std::size_t>(mesh.n_edges()), -1);
  for (int t : sp.cells)
    for (int v : mesh.triangle(t).v) vnum[static_cast<std::size_t>(v)] = 0;
  for (int t : sp.cells)
    for (int e : mesh.triangle_edges(t)) enum_[static_cast<std::size_t>(e)] = 0;
  int n = 0;
  std::vector<DofMeta> scalar_meta;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (vnum[static_cast<std::size_t>(v)] == 0) {
      vnum[static_cast<std::size_t>(v)] = n++;
      scalar_meta.push_back({DofKind::vertex_value, v, -1, 0, mesh.vertices()[static_cast<std::size_t>(v)]});
    }
  const int per_edge = k - 1;
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (enum_[static_cast<std::size_t>(e)] == 0) {
      enum_[static_cast<std::size_t>(e)] = n;
      for (int j = 0; j < per_edge; ++j)
        scalar_meta.push_back({DofKind::edge_value, e, -1, j, mesh.edge_point(e, (j + 1.0) / k)});
      n += per_edge;
    }
  const int per_cell = k == 2 ? 1 : 3;
  std::vector<int> cnum;
  for (int t : sp.cells) {
    cnum.push_back(n);
    const auto p = mesh.triangle_points(t);
    const Point c = (p[0] + p[1] + p[2]) / 3.0;
    for (int j = 0; j < per_cell; ++j)
      scalar_meta.push_back({k == 3 && j == 0 ? DofKind::cell_value : DofKind::bubble, t, -1, j, c});
    n += per_cell;
  }
  sp.n_dofs = 2 * n;
  for (const auto& m : scalar_meta)
    for (int comp = 0; comp < 2; ++comp) {
      DofMeta d = m;
      d.component = comp;
      sp.dof_meta.push_back(d);
    }
  for (std::size_t c = 0; c < sp.cells.size(); ++c) {
    const int t = sp.cells[c];
    const auto& tv = mesh.triangle(t).v;
    const auto& te = mesh.triangle_edges(t);
    std::vector<int> scalar;
    for (int v : tv) scalar.push_back(vnum[static_cast<std::size_t>(v)]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < per_edge; ++j) scalar.push_back(enum_[static_cast<std::size_t>(te[static_cast<std::size_t>(i)])] + j);
    for (int j = 0; j < per_cell; ++j) scalar.push_back(cnum[c] + j);
    std::vector<int> dofs;
    for (int s : scalar) {
      dofs.push_back(2 * s);
      dofs.push_back(2 * s + 1);
    }
    sp.cell_dofs.push_back(std::move(dofs));
  }
  sp.index_cells(mesh.n_triangles());
  return sp;
}

inline Space build_rt(const Mesh& mesh, int k) {
  Space sp;
  sp.family = {FamilyTag::raviart_thomas, k};
  sp.mesh = &mesh;
  sp.cells = mesh.triangles_in(Subdomain::darcy);
  if (sp.cells.empty()) throw Error("build_space: Raviart-Thomas family needs Darcy triangles");
  std::vector<int> enum_(static_cast<std::size_t>(mesh.n_edges()), -1);
  for (int t : sp.cells)
    for (int e : mesh.triangle_edges(t)) enum_[static_cast<std::size_t>(e)] = 0;
  int n = 0;
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (enum_[static_cast<std::size_t>(e)] == 0) {
      enum_[static_cast<std::size_t>(e)] = n;
      for (int m = 0; m < k; ++m) sp.dof_meta.push_back({DofKind::edge_moment, e, -1, m, mesh.edge_point(e, 0.5)});
      n += k;
    }
  const int per_cell = rt_interior_count(k);
  for (int t : sp.cells) {
    const auto p = mesh.triangle_points(t);
    std::vector<int> dofs;
    for (int e : mesh.triangle_edges(t))
      for (int m = 0; m < k; ++m) dofs.push_back(enum_[static_cast<std::size_t>(e)] + m);
    for (int j = 0; j < per_cell; ++j) {
      dofs.push_back(n + j);
      sp.dof_meta.push_back({DofKind::interior_moment, t, -1, j, (p[0] + p[1] + p[2]) / 3.0});
    }
    n += per_cell;
    sp.cell_dofs.push_back(std::move(dofs));
  }
  sp.n_dofs = n;
  sp.index_cells(mesh.n_triangles());
  return sp;
}

inline Space build_pressure(const Mesh& mesh, int k) {
  Space sp;
  sp.family = {FamilyTag::discontinuous, k};
  sp.mesh = &mesh;
  const int nl = pressure_local_size(k);
  const auto nodes = pressure_node_bary(k);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    sp.cells.push_back(t);
    std::vector<int> dofs;
    const auto p = mesh.triangle_points(t);
    for (int i = 0; i < nl; ++i) {
      dofs.push_back(nl * t + i);
      sp.dof_meta.push_back({DofKind::cell_value, t, -1, i, bary_to_point(p, nodes[static_cast<std::size_t>(i)])});
    }
    sp.cell_dofs.push_back(std::move(dofs));
  }
  sp.n_dofs = nl * mesh.n_triangles();
  sp.index_cells(mesh.n_triangles());
  return sp;
}

inline Space build_trace(const Mesh& mesh, int k) {
  Space sp;
  sp.family = {FamilyTag::trace, k};
  sp.mesh = &mesh;
  sp.cells = mesh.interface_edges();
  if (sp.cells.empty()) throw Error("build_space: trace family needs interface edges");
  for (std::size_t c = 0; c < sp.cells.size(); ++c) {
    std::vector<int> dofs;
    for (int m = 0; m < k; ++m) {
      dofs.push_back(static_cast<int>(c) * k + m);
      sp.dof_meta.push_back({DofKind::trace_moment, sp.cells[c], -1, m, mesh.edge_point(sp.cells[c], 0.5)});
    }
    sp.cell_dofs.push_back(std::move(dofs));
  }
  sp.n_dofs = k * sp.n_cells();
  sp.index_cells(mesh.n_edges());
  return sp;
}

}  // namespace detail

inline Space build_space(const Mesh& mesh, ElementFamily family) {
  check_k(family.k);
  switch (family.tag) {
    case FamilyTag::lagrange_bubble_vec: return detail::build_stokes(mesh, family.k);
    case FamilyTag::raviart_thomas: return detail::build_rt(mesh, family.k);
    case FamilyTag::discontinuous: return detail::build_pressure(mesh, family.k);
    case FamilyTag::trace: return detail::build_trace(mesh, family.k);
  }
  throw Error("build_space: unknown family");
}

/// The four spaces of the coupled discretization.
struct Spaces {
  int k = 2;
  Space stokes, darcy, pressure, trace;
};

inline Spaces build_spaces(const Mesh& mesh, int k) {
  return {k,
          build_space(mesh, {FamilyTag::lagrange_bubble_vec, k}),
          build_space(mesh, {FamilyTag::raviart_thomas, k}),
          build_space(mesh, {FamilyTag::discontinuous, k}),
          build_space(mesh, {FamilyTag::trace, k})};
}

// ---------------------------------------------------------------------------
// Discrete fields

class FieldFunction {
public:
  FieldFunction() = default;
  FieldFunction(const Space& space, Eigen::VectorXd coeffs) : space_(&space), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != space.n_dofs) throw Error("FieldFunction: coefficient size does not match space");
  }

  const Space& space() const { return *space_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  Eigen::VectorXd local_coeffs(int cell) const {
    const auto& d = space_->cell_dofs[static_cast<std::size_t>(cell)];
    Eigen::VectorXd c(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) c(static_cast<Eigen::Index>(i)) = coeffs_(d[i]);
    return c;
  }

  Vec2 vector_value(const LocalElement& el, int cell, const Bary& b) const {
    const auto ev = el.eval(b, false);
    const auto c = local_coeffs(cell);
    Vec2 v = Vec2::Zero();
    for (std::size_t i = 0; i < ev.value.size(); ++i) v += c(static_cast<Eigen::Index>(i)) * ev.value[i];
    return v;
  }

  Mat2 jacobian(const LocalElement& el, int cell, const Bary& b) const {
    const auto ev = el.eval(b, true);
    const auto c = local_coeffs(cell);
    Mat2 J = Mat2::Zero();
    for (std::size_t i = 0; i < ev.jac.size(); ++i) J += c(static_cast<Eigen::Index>(i)) * ev.jac[i];
    return J;
  }

  double scalar_value(const LocalElement& el, int cell, const Bary& b) const {
    const auto ev = el.eval(b, false);
    const auto c = local_coeffs(cell);
    double v = 0.0;
    for (std::size_t i = 0; i < ev.scalar.size(); ++i) v += c(static_cast<Eigen::Index>(i)) * ev.scalar[i];
    return v;
  }

  /// Value at a physical point inside triangle `tri` (vector families).
  Vec2 vector_at(int tri, const Point& p) const {
    const int c = checked_cell(tri);
    LocalElement el(*space_, c);
    return vector_value(el, c, el.geometry().bary(p));
  }

  double scalar_at(int tri, const Point& p) const {
    const int c = checked_cell(tri);
    LocalElement el(*space_, c);
    return scalar_value(el, c, el.geometry().bary(p));
  }

private:
  int checked_cell(int tri) const {
    const int c = space_->cell_index(tri);
    if (c < 0) throw Error("FieldFunction: triangle outside the space support");
    return c;
  }

  const Space* space_ = nullptr;
  Eigen::VectorXd coeffs_;
};

/// Applies the degree-of-freedom functionals of a vector space to `f`.
inline FieldFunction interpolate(const Space& space, const VectorField& f) {
  const Mesh& mesh = *space.mesh;
  const int k = space.family.k;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(space.n_dofs);
  if (space.family.tag == FamilyTag::raviart_thomas) {
    for (int c = 0; c < space.n_cells(); ++c) {
      const int t = space.cells[static_cast<std::size_t>(c)];
      const TriangleGeometry g(mesh.triangle_points(t));
      const auto l = rt_functionals(mesh, t, k, [&](const Bary& b) { return f(g.point(b)); });
      const auto& d = space.cell_dofs[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < d.size(); ++i) x(d[i]) = l(static_cast<Eigen::Index>(i));
    }
    return {space, x};
  }
  if (space.family.tag != FamilyTag::lagrange_bubble_vec) throw Error("interpolate: vector field into scalar space");
  for (int c = 0; c < space.n_cells(); ++c) {
    const int t = space.cells[static_cast<std::size_t>(c)];
    const TriangleGeometry g(mesh.triangle_points(t));
    const auto shapes = stokes_scalar_shapes(mesh, t, k);
    const auto nodes = stokes_node_bary(mesh, t, k);
    const auto inner = stokes_interior_points(k);
    const std::size_t nn = nodes.size();
    const std::size_t ni = shapes.size() - nn;
    const auto& d = space.cell_dofs[static_cast<std::size_t>(c)];
    std::vector<Vec2> coef(shapes.size(), Vec2::Zero());
    for (std::size_t i = 0; i < nn; ++i) coef[i] = f(g.point(nodes[i]));
    Eigen::MatrixXd A(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(ni));
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(ni), 2);
    for (std::size_t r = 0; r < ni; ++r) {
      Vec2 v = f(g.point(inner[r]));
      for (std::size_t i = 0; i < nn; ++i) v -= shapes[i].value(inner[r]) * coef[i];
      rhs.row(static_cast<Eigen::Index>(r)) = v.transpose();
      for (std::size_t j = 0; j < ni; ++j) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = shapes[nn + j].value(inner[r]);
    }
    const Eigen::MatrixXd sol = A.partialPivLu().solve(rhs);
    for (std::size_t j = 0; j < ni; ++j) coef[nn + j] = sol.row(static_cast<Eigen::Index>(j)).transpose();
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      x(d[2 * i]) = coef[i].x();
      x(d[2 * i + 1]) = coef[i].y();
    }
  }
  return {space, x};
}

/// Nodal interpolation (pressure) or Legendre moments (trace) of a scalar field
/// given separately on the Stokes and Darcy regions.
inline FieldFunction interpolate(const Space& space, const ScalarField& fs, const ScalarField& fd) {
  const Mesh& mesh = *space.mesh;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(space.n_dofs);
  if (space.family.tag == FamilyTag::discontinuous) {
    const auto nodes = pressure_node_bary(space.family.k);
    for (int c = 0; c < space.n_cells(); ++c) {
      const int t = space.cells[static_cast<std::size_t>(c)];
      const auto p = mesh.triangle_points(t);
      const auto& f = mesh.triangle(t).domain == Subdomain::stokes ? fs : fd;
      const auto& d = space.cell_dofs[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < d.size(); ++i) x(d[i]) = f(bary_to_point(p, nodes[i]));
    }
    return {space, x};
  }
  if (space.family.tag == FamilyTag::trace) {
    const auto& er = edge_rule(max_edge_degree);
    for (int c = 0; c < space.n_cells(); ++c) {
      const int e = space.cells[static_cast<std::size_t>(c)];
      for (int m = 0; m < space.family.k; ++m) {
        double s = 0.0;
        for (std::size_t q = 0; q < er.size(); ++q) s += er.weights[q] * fd(mesh.edge_point(e, er.points[q])) * legendre01(m, er.points[q]);
        x(space.cell_dofs[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)]) = (2 * m + 1) * s;
      }
    }
    return {space, x};
  }
  throw Error("interpolate: scalar field into vector space");
}

inline FieldFunction interpolate(const Space& space, const ScalarField& f) { return interpolate(space, f, f); }

}  // namespace sdfem
