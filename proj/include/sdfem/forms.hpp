#pragma once

// Element and edge contributions of the coupled Stokes-Darcy forms.

#include "sdfem/fespace.hpp"

namespace sdfem {

struct ModelParams {
  double mu = 1.0;
  double K = 1e-4;                      // scalar permeability
  double alpha1_over_sqrt_kappa = 1.0;  // BJS coefficient
  double penalty = 0.0;                 // <= 0 selects 1e10 * (mu + 1)

  double penalty_weight() const { return penalty > 0.0 ? penalty : 1e10 * (mu + 1.0); }

  void validate() const {
    if (!(mu > 0.0)) throw Error("viscosity mu must be positive");
    if (!(K > 0.0)) throw Error("permeability K must be positive");
    if (!(alpha1_over_sqrt_kappa >= 0.0)) throw Error("BJS coefficient must be non-negative");
    if (!(penalty_weight() > 0.0)) throw Error("penalty must be positive");
  }
};

/// Dense block with global row and column ids (each within its own space).
struct LocalBlock {
  std::vector<int> rows, cols;
  Eigen::MatrixXd mat;
};

/// Dirichlet data: u^s on the Stokes boundary (the marker lets the lid differ
/// from the walls) and u^d whose normal component is imposed on the Darcy boundary.
struct DirichletSpec {
  std::function<Vec2(const Point&, BoundaryMarker)> stokes;
  VectorField darcy;
};

struct ProblemData {
  VectorField fs, fd;  // body forces
  ScalarField gs, gd;  // divergence data
  DirichletSpec bc;
};

inline int matrix_quadrature_degree(int k) { return 2 * k; }

/// 2 mu (D(u), D(v)) on Stokes cell `cell`.
inline LocalBlock local_a_stokes(const Space& stokes, int cell, const ModelParams& prm) {
  const LocalElement el(stokes, cell);
  const auto& rule = triangle_rule(matrix_quadrature_degree(stokes.family.k));
  const int n = stokes.n_local();
  LocalBlock b{stokes.cell_dofs[static_cast<std::size_t>(cell)], stokes.cell_dofs[static_cast<std::size_t>(cell)],
               Eigen::MatrixXd::Zero(n, n)};
  const double jac = 2.0 * el.geometry().area;
  std::vector<Mat2> D(static_cast<std::size_t>(n));
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto ev = el.eval(rule.points[q]);
    for (int i = 0; i < n; ++i) D[static_cast<std::size_t>(i)] = 0.5 * (ev.jac[static_cast<std::size_t>(i)] + ev.jac[static_cast<std::size_t>(i)].transpose());
    const double w = 2.0 * prm.mu * rule.weights[q] * jac;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double v = w * D[static_cast<std::size_t>(i)].cwiseProduct(D[static_cast<std::size_t>(j)]).sum();
        b.mat(i, j) += v;
        if (j != i) b.mat(j, i) += v;
      }
  }
  return b;
}

/// mu K^{-1} (u, v) on Darcy cell `cell`.
inline LocalBlock local_a_darcy(const Space& darcy, int cell, const ModelParams& prm) {
  const LocalElement el(darcy, cell);
  const auto& rule = triangle_rule(matrix_quadrature_degree(darcy.family.k));
  const int n = darcy.n_local();
  LocalBlock b{darcy.cell_dofs[static_cast<std::size_t>(cell)], darcy.cell_dofs[static_cast<std::size_t>(cell)],
               Eigen::MatrixXd::Zero(n, n)};
  const double jac = 2.0 * el.geometry().area;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto ev = el.eval(rule.points[q], false);
    const double w = prm.mu / prm.K * rule.weights[q] * jac;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double v = w * ev.value[static_cast<std::size_t>(i)].dot(ev.value[static_cast<std::size_t>(j)]);
        b.mat(i, j) += v;
        if (j != i) b.mat(j, i) += v;
      }
  }
  return b;
}

/// Values of the Stokes shape functions of the Stokes triangle adjacent to
/// interface/boundary edge `edge` at edge parameter s.
inline std::vector<Vec2> stokes_trace_values(const LocalElement& el, const Mesh& mesh, int edge, double s) {
  return el.eval(mesh.edge_point_bary(el.triangle(), edge, s), false).value;
}

/// (alpha1 mu / sqrt(kappa)) <u.tau, v.tau> on interface edge `edge`.
inline LocalBlock local_a_interface(const Space& stokes, int edge, const ModelParams& prm) {
  const Mesh& mesh = *stokes.mesh;
  const auto& ed = mesh.edge(edge);
  if (ed.cls != EdgeClass::interface) throw Error("local_a_interface: edge is not on the interface");
  const int cell = stokes.cell_index(ed.tris[0]);
  const LocalElement el(stokes, cell);
  const int n = stokes.n_local();
  LocalBlock b{stokes.cell_dofs[static_cast<std::size_t>(cell)], stokes.cell_dofs[static_cast<std::size_t>(cell)],
               Eigen::MatrixXd::Zero(n, n)};
  const double c = prm.alpha1_over_sqrt_kappa * prm.mu;
  if (c == 0.0) return b;
  const auto& rule = edge_rule(2 * stokes.family.k + 2);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto v = stokes_trace_values(el, mesh, edge, rule.points[q]);
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) t(i) = v[static_cast<std::size_t>(i)].dot(ed.tangent);
    b.mat += c * rule.weights[q] * ed.length * t * t.transpose();
  }
  return b;
}

/// b(v, q) = -(div v, q) on triangle `tri` for a Stokes or Darcy velocity space;
/// rows are pressure dofs, columns velocity dofs.
inline LocalBlock local_b(const Space& velocity, const Space& pressure, int tri) {
  const int vc = velocity.cell_index(tri);
  const int pc = pressure.cell_index(tri);
  if (vc < 0 || pc < 0) throw Error("local_b: triangle outside the space support");
  const LocalElement ve(velocity, vc);
  const LocalElement pe(pressure, pc);
  const auto& rule = triangle_rule(matrix_quadrature_degree(velocity.family.k));
  const int nv = velocity.n_local(), np = pressure.n_local();
  LocalBlock b{pressure.cell_dofs[static_cast<std::size_t>(pc)], velocity.cell_dofs[static_cast<std::size_t>(vc)],
               Eigen::MatrixXd::Zero(np, nv)};
  const double jac = 2.0 * ve.geometry().area;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto ev = ve.eval(rule.points[q]);
    const auto qv = pe.eval(rule.points[q], false);
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < nv; ++j)
        b.mat(i, j) -= rule.weights[q] * jac * qv.scalar[static_cast<std::size_t>(i)] * ev.div[static_cast<std::size_t>(j)];
  }
  return b;
}

struct MultiplierBlocks {
  LocalBlock stokes;  // + <v^s . n^s, mu_h>
  LocalBlock darcy;   // + <v^d . n^d, mu_h> = - <v^d . n^s, mu_h>
};

/// Weak normal continuity <v^s.n^s + v^d.n^d, mu_h>_e on interface edge `edge`.
inline MultiplierBlocks local_interface_multiplier(const Spaces& sp, int edge) {
  const Mesh& mesh = *sp.stokes.mesh;
  const auto& ed = mesh.edge(edge);
  if (ed.cls != EdgeClass::interface) throw Error("local_interface_multiplier: edge is not on the interface");
  const int tc = sp.trace.cell_index(edge);
  const int sc = sp.stokes.cell_index(ed.tris[0]);
  const int dc = sp.darcy.cell_index(ed.tris[1]);
  const LocalElement se(sp.stokes, sc), de(sp.darcy, dc);
  const int nt = sp.trace.n_local(), ns = sp.stokes.n_local(), nd = sp.darcy.n_local();
  const auto& rows = sp.trace.cell_dofs[static_cast<std::size_t>(tc)];
  MultiplierBlocks out{{rows, sp.stokes.cell_dofs[static_cast<std::size_t>(sc)], Eigen::MatrixXd::Zero(nt, ns)},
                       {rows, sp.darcy.cell_dofs[static_cast<std::size_t>(dc)], Eigen::MatrixXd::Zero(nt, nd)}};
  const auto& rule = edge_rule(2 * sp.k + 2);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double s = rule.points[q];
    const double w = rule.weights[q] * ed.length;
    const auto vs = se.eval(mesh.edge_point_bary(ed.tris[0], edge, s), false).value;
    const auto vd = de.eval(mesh.edge_point_bary(ed.tris[1], edge, s), false).value;
    const auto mu = eval_trace_basis(sp.trace, s);
    for (int m = 0; m < nt; ++m) {
      for (int j = 0; j < ns; ++j) out.stokes.mat(m, j) += w * mu[static_cast<std::size_t>(m)] * vs[static_cast<std::size_t>(j)].dot(ed.normal);
      for (int j = 0; j < nd; ++j) out.darcy.mat(m, j) -= w * mu[static_cast<std::size_t>(m)] * vd[static_cast<std::size_t>(j)].dot(ed.normal);
    }
  }
  return out;
}

/// Single row: int_T q_i for each pressure shape function of triangle `tri`.
inline LocalBlock local_mean_constraint(const Space& pressure, int tri) {
  const int pc = pressure.cell_index(tri);
  const LocalElement pe(pressure, pc);
  const auto& rule = triangle_rule(pressure.family.k);
  const int np = pressure.n_local();
  LocalBlock b{{0}, pressure.cell_dofs[static_cast<std::size_t>(pc)], Eigen::MatrixXd::Zero(1, np)};
  const double jac = 2.0 * pe.geometry().area;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto ev = pe.eval(rule.points[q], false);
    for (int i = 0; i < np; ++i) b.mat(0, i) += rule.weights[q] * jac * ev.scalar[static_cast<std::size_t>(i)];
  }
  return b;
}

// ---------------------------------------------------------------------------
// Right-hand sides

/// (f, v_j) for every shape function of a vector space over its cells.
inline Eigen::VectorXd load_vector(const Space& space, const VectorField& f) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.n_dofs);
  if (!f) return r;
  const auto& rule = triangle_rule(default_quadrature_degree);
  for (int c = 0; c < space.n_cells(); ++c) {
    const LocalElement el(space, c);
    const double jac = 2.0 * el.geometry().area;
    const auto& d = space.cell_dofs[static_cast<std::size_t>(c)];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 fv = f(el.geometry().point(rule.points[q]));
      const auto ev = el.eval(rule.points[q], false);
      for (std::size_t i = 0; i < d.size(); ++i) r(d[i]) += rule.weights[q] * jac * fv.dot(ev.value[i]);
    }
  }
  return r;
}

/// -(g, q_i): the pressure rows of b(u_h, q) = -(div u_h, q) = -(g, q).
inline Eigen::VectorXd divergence_load(const Space& pressure, const ScalarField& gs, const ScalarField& gd) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(pressure.n_dofs);
  const auto& rule = triangle_rule(default_quadrature_degree);
  for (int c = 0; c < pressure.n_cells(); ++c) {
    const int t = pressure.cells[static_cast<std::size_t>(c)];
    const auto& g = pressure.mesh->triangle(t).domain == Subdomain::stokes ? gs : gd;
    if (!g) continue;
    const LocalElement el(pressure, c);
    const double jac = 2.0 * el.geometry().area;
    const auto& d = pressure.cell_dofs[static_cast<std::size_t>(c)];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double gv = g(el.geometry().point(rule.points[q]));
      const auto ev = el.eval(rule.points[q], false);
      for (std::size_t i = 0; i < d.size(); ++i) r(d[i]) -= rule.weights[q] * jac * gv * ev.scalar[i];
    }
  }
  return r;
}

/// Classical load blocks: Stokes velocity, Darcy velocity, pressure.
struct LoadBlocks {
  Eigen::VectorXd stokes, darcy, pressure;
};

inline LoadBlocks rhs_classical(const Spaces& sp, const ProblemData& data) {
  return {load_vector(sp.stokes, data.fs), load_vector(sp.darcy, data.fd),
          divergence_load(sp.pressure, data.gs, data.gd)};
}

// ---------------------------------------------------------------------------
// Dirichlet data

/// Prescribed value of one constrained dof.
struct ConstrainedDof {
  int dof;       // id within its space
  double value;
};

struct BoundaryConstraints {
  std::vector<ConstrainedDof> stokes;
  std::vector<ConstrainedDof> darcy;
};

/// Stokes dofs on the exterior Stokes boundary (vertex and edge nodes, both
/// components) and RT edge moments on the exterior Darcy boundary. The lid
/// marker wins at vertices shared with a wall.
inline BoundaryConstraints boundary_constraints(const Spaces& sp, const DirichletSpec& bc) {
  const Mesh& mesh = *sp.stokes.mesh;
  BoundaryConstraints out;
  const auto bs = mesh.edges_of_class(EdgeClass::boundary_s);
  if (!bs.empty() && !bc.stokes) throw Error("Dirichlet data for the Stokes boundary is missing");
  std::map<int, BoundaryMarker> vertex_marker;
  for (int e : bs) {
    const auto& ed = mesh.edge(e);
    for (int v : ed.v) {
      auto [it, fresh] = vertex_marker.emplace(v, ed.marker);
      if (!fresh && ed.marker == BoundaryMarker::lid) it->second = BoundaryMarker::lid;
    }
  }
  std::map<int, double> values;  // keyed by Stokes dof
  auto put = [&](int scalar_dof, const Vec2& v) {
    values[2 * scalar_dof] = v.x();
    values[2 * scalar_dof + 1] = v.y();
  };
  for (int c = 0; c < sp.stokes.n_cells(); ++c) {
    const int t = sp.stokes.cells[static_cast<std::size_t>(c)];
    const auto& tv = mesh.triangle(t).v;
    const auto& te = mesh.triangle_edges(t);
    const auto& d = sp.stokes.cell_dofs[static_cast<std::size_t>(c)];
    const auto nodes = stokes_node_bary(mesh, t, sp.k);
    const auto pts = mesh.triangle_points(t);
    for (int i = 0; i < 3; ++i) {
      const auto it = vertex_marker.find(tv[static_cast<std::size_t>(i)]);
      if (it != vertex_marker.end()) put(d[2 * static_cast<std::size_t>(i)] / 2, bc.stokes(pts[static_cast<std::size_t>(i)], it->second));
    }
    const int per_edge = sp.k - 1;
    for (int i = 0; i < 3; ++i) {
      const auto& ed = mesh.edge(te[static_cast<std::size_t>(i)]);
      if (ed.cls != EdgeClass::boundary_s) continue;
      for (int j = 0; j < per_edge; ++j) {
        const std::size_t local = 3 + static_cast<std::size_t>(i * per_edge + j);
        put(d[2 * local] / 2, bc.stokes(bary_to_point(pts, nodes[local]), ed.marker));
      }
    }
  }
  for (const auto& [dof, v] : values) out.stokes.push_back({dof, v});

  const auto bd = mesh.edges_of_class(EdgeClass::boundary_d);
  const auto& er = edge_rule(max_edge_degree);
  for (int e : bd) {
    const auto& ed = mesh.edge(e);
    const int c = sp.darcy.cell_index(ed.tris[0]);
    const auto& te = mesh.triangle_edges(ed.tris[0]);
    const int local = static_cast<int>(std::find(te.begin(), te.end(), e) - te.begin());
    for (int m = 0; m < sp.k; ++m) {
      double s = 0.0;
      if (bc.darcy)
        for (std::size_t q = 0; q < er.size(); ++q)
          s += er.weights[q] * bc.darcy(mesh.edge_point(e, er.points[q])).dot(ed.normal) * legendre01(m, er.points[q]);
      out.darcy.push_back({sp.darcy.cell_dofs[static_cast<std::size_t>(c)][static_cast<std::size_t>(local * sp.k + m)], s});
    }
  }
  return out;
}

}  // namespace sdfem
