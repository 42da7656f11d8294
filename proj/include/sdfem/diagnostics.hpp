#pragma once

// Executable checks of the reconstruction invariants, the pressure consistency
// functionals and a discrete inf-sup probe.

#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sdfem/system.hpp"

namespace sdfem {

// ---------------------------------------------------------------------------
// Velocity subspaces defined by homogeneous constraints

/// Constraint rows on the free velocity unknowns (Stokes then Darcy, exterior
/// boundary unknowns removed). Without divergence rows this describes V_h; with
/// them, V_h(0).
struct VelocityConstraints {
  SparseMatrix rows;
  std::vector<int> free;  // velocity unknown of each column
  int n_stokes = 0, n_darcy = 0;
  int n_velocity() const { return n_stokes + n_darcy; }
};

inline DirichletSpec homogeneous_dirichlet() {
  return {[](const Point&, BoundaryMarker) { return Vec2(0.0, 0.0); }, [](const Point&) { return Vec2(0.0, 0.0); }};
}

inline std::vector<int> free_velocity_dofs(const Spaces& sp) {
  const auto bc = boundary_constraints(sp, homogeneous_dirichlet());
  const int ns = sp.stokes.n_dofs, nv = ns + sp.darcy.n_dofs;
  std::vector<char> fixed(static_cast<std::size_t>(nv), 0);
  for (const auto& d : bc.stokes) fixed[static_cast<std::size_t>(d.dof)] = 1;
  for (const auto& d : bc.darcy) fixed[static_cast<std::size_t>(ns + d.dof)] = 1;
  std::vector<int> out;
  for (int i = 0; i < nv; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

inline VelocityConstraints velocity_constraints(const Spaces& sp, bool divergence_rows) {
  VelocityConstraints vc;
  vc.n_stokes = sp.stokes.n_dofs;
  vc.n_darcy = sp.darcy.n_dofs;
  vc.free = free_velocity_dofs(sp);
  std::vector<int> col_of(static_cast<std::size_t>(vc.n_velocity()), -1);
  for (std::size_t j = 0; j < vc.free.size(); ++j) col_of[static_cast<std::size_t>(vc.free[j])] = static_cast<int>(j);

  const SparseMatrix A = assemble_saddle_matrix(sp, ModelParams{});
  const BlockMap bm = BlockMap::of(sp);
  // The constant pressure row is a combination of the lowest-order multiplier
  // rows on V_h, so the first pressure row is dropped to keep full row rank.
  const int first = divergence_rows ? bm.p + 1 : bm.lam;
  Triplets t;
  for (int col = 0; col < bm.p; ++col) {
    const int j = col_of[static_cast<std::size_t>(col)];
    if (j < 0) continue;
    for (SparseMatrix::InnerIterator it(A, col); it; ++it)
      if (it.row() >= first && it.row() < bm.mean) t.emplace_back(static_cast<int>(it.row()) - first, j, it.value());
  }
  vc.rows.resize(bm.mean - first, static_cast<Eigen::Index>(vc.free.size()));
  vc.rows.setFromTriplets(t.begin(), t.end());
  vc.rows.makeCompressed();
  return vc;
}

/// Orthogonal projection of random vectors onto the null space of the
/// constraint rows, via one sparse factorization of [I C^T; C 0].
class ConstrainedSampler {
public:
  ConstrainedSampler(const Spaces& sp, bool divergence_free) : vc_(velocity_constraints(sp, divergence_free)) {
    const auto nf = static_cast<int>(vc_.free.size());
    const auto nc = static_cast<int>(vc_.rows.rows());
    Triplets t;
    for (int i = 0; i < nf; ++i) t.emplace_back(i, i, 1.0);
    for (int col = 0; col < vc_.rows.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(vc_.rows, col); it; ++it) {
        t.emplace_back(nf + static_cast<int>(it.row()), col, it.value());
        t.emplace_back(col, nf + static_cast<int>(it.row()), it.value());
      }
    K_.resize(nf + nc, nf + nc);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();
    lu_.compute(K_);
    if (lu_.info() != Eigen::Success) throw SolverError("ConstrainedSampler: constraint rows are rank deficient");
  }

  const VelocityConstraints& constraints() const { return vc_; }

  /// Projection of r (on free unknowns) onto the constrained subspace.
  Eigen::VectorXd project(const Eigen::VectorXd& r) const {
    const auto nf = static_cast<Eigen::Index>(vc_.free.size());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K_.rows());
    rhs.head(nf) = r;
    Eigen::VectorXd x = lu_.solve(rhs);
    const Eigen::VectorXd res = rhs - K_ * x;
    x += lu_.solve(res);
    return x.head(nf);
  }

  /// Random member expanded to all velocity unknowns (Stokes, then Darcy).
  Eigen::VectorXd sample(std::mt19937_64& rng) const {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd r(static_cast<Eigen::Index>(vc_.free.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = n(rng);
    return expand(project(r));
  }

  Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(vc_.n_velocity());
    for (std::size_t j = 0; j < vc_.free.size(); ++j) v(vc_.free[j]) = free_values(static_cast<Eigen::Index>(j));
    return v;
  }

  /// |C v| / |v| on the free unknowns.
  double residual(const Eigen::VectorXd& v) const {
    Eigen::VectorXd f(static_cast<Eigen::Index>(vc_.free.size()));
    for (std::size_t j = 0; j < vc_.free.size(); ++j) f(static_cast<Eigen::Index>(j)) = v(vc_.free[j]);
    return (vc_.rows * f).norm() / std::max(f.norm(), 1e-300);
  }

private:
  VelocityConstraints vc_;
  SparseMatrix K_;
  Eigen::UmfPackLU<SparseMatrix> lu_;
};

// ---------------------------------------------------------------------------
// Pointwise invariants of Pi_h v_h

struct InvariantMaxima {
  double divergence = 0.0;       // max |div Pi v| over both subdomains
  double interface_jump = 0.0;   // max |(Pi^s v - Pi^d v) . n| on the interface
  double boundary_normal = 0.0;  // max |Pi v . n| on the exterior boundary
  double scale = 0.0;            // max |Pi v|

  void merge(const InvariantMaxima& o) {
    divergence = std::max(divergence, o.divergence);
    interface_jump = std::max(interface_jump, o.interface_jump);
    boundary_normal = std::max(boundary_normal, o.boundary_normal);
    scale = std::max(scale, o.scale);
  }
};

inline std::vector<Bary> diagnostic_cell_points() {
  std::vector<Bary> pts = triangle_rule(8).points;
  pts.push_back({1, 0, 0});
  pts.push_back({0, 1, 0});
  pts.push_back({0, 0, 1});
  return pts;
}

inline std::vector<double> diagnostic_edge_points() {
  std::vector<double> s = edge_rule(8).points;
  s.push_back(0.0);
  s.push_back(1.0);
  return s;
}

inline InvariantMaxima invariant_maxima(const Spaces& sp, const ReconstructedField& pf) {
  const Mesh& m = *sp.stokes.mesh;
  InvariantMaxima r;
  const auto cell_pts = diagnostic_cell_points();
  for (int t = 0; t < m.n_triangles(); ++t)
    for (const auto& b : cell_pts) {
      const auto [v, div] = pf.eval(t, b);
      r.divergence = std::max(r.divergence, std::abs(div));
      r.scale = std::max(r.scale, v.norm());
    }
  const auto edge_pts = diagnostic_edge_points();
  for (int e : m.interface_edges()) {
    const auto& ed = m.edge(e);
    for (double s : edge_pts) {
      const Vec2 vs = pf.eval(ed.tris[0], m.edge_point_bary(ed.tris[0], e, s)).first;
      const Vec2 vd = pf.eval(ed.tris[1], m.edge_point_bary(ed.tris[1], e, s)).first;
      r.interface_jump = std::max(r.interface_jump, std::abs((vs - vd).dot(ed.normal)));
    }
  }
  for (EdgeClass cls : {EdgeClass::boundary_s, EdgeClass::boundary_d})
    for (int e : m.edges_of_class(cls)) {
      const auto& ed = m.edge(e);
      for (double s : edge_pts)
        r.boundary_normal = std::max(r.boundary_normal, std::abs(pf.eval(ed.tris[0], m.edge_point_bary(ed.tris[0], e, s)).first.dot(ed.normal)));
    }
  return r;
}

inline InvariantMaxima invariant_maxima(const Spaces& sp, const ReconstructionCache& cache, const Eigen::VectorXd& velocity) {
  const int ns = sp.stokes.n_dofs;
  const ReconstructedField pf(cache, velocity.head(ns), FieldFunction(sp.darcy, velocity.tail(sp.darcy.n_dofs)));
  return invariant_maxima(sp, pf);
}

struct InvariantReport {
  bool divergence_free = true;  // samples drawn from V_h(0) rather than V_h
  int samples = 0;
  int free_dofs = 0;
  int constraint_rows = 0;
  double membership_residual = 0.0;  // max |C v| / |v|
  InvariantMaxima worst;             // maxima of the ratios to the field scale
};

/// Draws `n_random` members of V_h(0) (or of V_h when `divergence_free` is
/// false), applies Pi_h and records the invariant violations relative to the
/// field scale.
inline InvariantReport check_reconstruction_invariants(const Spaces& sp, int n_random, std::uint64_t seed = 1, bool divergence_free = true) {
  const ConstrainedSampler sampler(sp, divergence_free);
  const ReconstructionCache cache(sp.stokes);
  std::mt19937_64 rng(seed);
  InvariantReport rep;
  rep.divergence_free = divergence_free;
  rep.free_dofs = static_cast<int>(sampler.constraints().free.size());
  rep.constraint_rows = static_cast<int>(sampler.constraints().rows.rows());
  for (int i = 0; i < n_random; ++i) {
    const Eigen::VectorXd v = sampler.sample(rng);
    rep.membership_residual = std::max(rep.membership_residual, sampler.residual(v));
    const auto mx = invariant_maxima(sp, cache, v);
    const double s = std::max(mx.scale, 1e-300);
    rep.worst.merge({mx.divergence / s, mx.interface_jump / s, mx.boundary_normal / s, mx.scale});
    ++rep.samples;
  }
  return rep;
}

/// Largest moment of (Pi psi - psi) over all Stokes shape functions, with
/// quadrature of degree 11 on edges and 10 in cells.
inline double reconstruction_moment_defect(const Spaces& sp, const ReconstructionCache& cache) {
  const Mesh& m = *sp.stokes.mesh;
  const int k = sp.k;
  const auto& er = edge_rule(11);
  const auto& tr = triangle_rule(10);
  double worst = 0.0;
  for (int c = 0; c < sp.stokes.n_cells(); ++c) {
    const int t = sp.stokes.cells[static_cast<std::size_t>(c)];
    const LocalElement el(sp.stokes, c);
    const auto& rt = cache.rt(c);
    for (int j = 0; j < sp.stokes.n_local(); ++j) {
      const Eigen::VectorXd nodal = cache.moments(c).col(j);
      auto defect = [&](const Bary& b) {
        std::vector<Vec2> phi;
        rt.eval(b, phi);
        Vec2 v = -el.eval(b, false).value[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < phi.size(); ++i) v += nodal(static_cast<Eigen::Index>(i)) * phi[i];
        return v;
      };
      for (int e : m.triangle_edges(t))
        for (int mm = 0; mm < k; ++mm) {
          double s = 0.0;
          for (std::size_t q = 0; q < er.size(); ++q)
            s += er.weights[q] * defect(m.edge_point_bary(t, e, er.points[q])).dot(m.edge(e).normal) * legendre01(mm, er.points[q]);
          worst = std::max(worst, std::abs(s));
        }
      for (int mm = 0; mm < rt_interior_count(k); ++mm) {
        double s = 0.0;
        for (std::size_t q = 0; q < tr.size(); ++q) s += tr.weights[q] * defect(tr.points[q]).dot(rt_interior_weight(k, mm, tr.points[q]));
        worst = std::max(worst, std::abs(s));
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Pressure consistency functionals

namespace detail {

/// Value and divergence of the unreconstructed field v_h.
struct PlainVelocity {
  const Spaces* sp;
  FieldFunction us, ud;

  std::pair<Vec2, double> eval(int tri, const Bary& b) const {
    const bool stokes = sp->stokes.cell_index(tri) >= 0;
    const FieldFunction& f = stokes ? us : ud;
    const int c = f.space().cell_index(tri);
    const LocalElement el(f.space(), c);
    const auto ev = el.eval(b);
    const auto loc = f.local_coeffs(c);
    Vec2 v = Vec2::Zero();
    double div = 0.0;
    for (std::size_t i = 0; i < ev.value.size(); ++i) {
      v += loc(static_cast<Eigen::Index>(i)) * ev.value[i];
      div += loc(static_cast<Eigen::Index>(i)) * ev.div[i];
    }
    return {v, div};
  }
};

/// b(v, p) - <v^s.n^s + v^d.n^d, p^d>_Gamma for a field given by `eval`.
template <class Field>
double pressure_functional(const Mesh& m, const Field& f, const ScalarField& ps, const ScalarField& pd) {
  const auto& tr = triangle_rule(10);
  double b = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const TriangleGeometry g(m.triangle_points(t));
    const auto& p = m.triangle(t).domain == Subdomain::stokes ? ps : pd;
    for (std::size_t q = 0; q < tr.size(); ++q) b -= tr.weights[q] * 2.0 * g.area * f.eval(t, tr.points[q]).second * p(g.point(tr.points[q]));
  }
  const auto& er = edge_rule(11);
  double gamma = 0.0;
  for (int e : m.interface_edges()) {
    const auto& ed = m.edge(e);
    for (std::size_t q = 0; q < er.size(); ++q) {
      const double s = er.points[q];
      const Vec2 vs = f.eval(ed.tris[0], m.edge_point_bary(ed.tris[0], e, s)).first;
      const Vec2 vd = f.eval(ed.tris[1], m.edge_point_bary(ed.tris[1], e, s)).first;
      gamma += er.weights[q] * ed.length * (vs - vd).dot(ed.normal) * pd(m.edge_point(e, s));
    }
  }
  return b - gamma;
}

}  // namespace detail

/// (|v^s|_1^2 + |v^d|^2 + |div v^d|^2)^(1/2) for a velocity vector (Stokes, then Darcy).
inline double x_norm(const Spaces& sp, const Eigen::VectorXd& velocity) {
  const auto& rule = triangle_rule(2 * sp.k + 2);
  const int ns = sp.stokes.n_dofs;
  double s = 0.0;
  for (const Space* space : {&sp.stokes, &sp.darcy}) {
    const bool stokes = space == &sp.stokes;
    const int off = stokes ? 0 : ns;
    for (int c = 0; c < space->n_cells(); ++c) {
      const LocalElement el(*space, c);
      const auto& d = space->cell_dofs[static_cast<std::size_t>(c)];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto ev = el.eval(rule.points[q]);
        Mat2 G = Mat2::Zero();
        Vec2 v = Vec2::Zero();
        double div = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
          const double a = velocity(off + d[i]);
          G += a * ev.jac[i];
          v += a * ev.value[i];
          div += a * ev.div[i];
        }
        const double w = rule.weights[q] * 2.0 * el.geometry().area;
        s += w * (stokes ? G.squaredNorm() : v.squaredNorm() + div * div);
      }
    }
  }
  return std::sqrt(s);
}

struct ThetaReport {
  int samples = 0;
  double h = 0.0;
  double theta = 0.0;  // max |theta_p(psi)| / |psi|_X
  double aleph = 0.0;  // max |aleph_p(psi)| / |psi|_X
};

/// theta_p and aleph_p on random members of V_h(0) for the pressure pair (ps, pd).
inline ThetaReport check_theta_functional(const Spaces& sp, const ScalarField& ps, const ScalarField& pd, int n_random,
                                          std::uint64_t seed = 1) {
  const Mesh& m = *sp.stokes.mesh;
  const ConstrainedSampler sampler(sp, true);
  const ReconstructionCache cache(sp.stokes);
  std::mt19937_64 rng(seed);
  ThetaReport rep;
  rep.h = m.h();
  const int ns = sp.stokes.n_dofs;
  for (int i = 0; i < n_random; ++i) {
    const Eigen::VectorXd v = sampler.sample(rng);
    const double nx = std::max(x_norm(sp, v), 1e-300);
    const detail::PlainVelocity plain{&sp, FieldFunction(sp.stokes, v.head(ns)), FieldFunction(sp.darcy, v.tail(sp.darcy.n_dofs))};
    const ReconstructedField pf(cache, v.head(ns), plain.ud);
    rep.theta = std::max(rep.theta, std::abs(detail::pressure_functional(m, plain, ps, pd)) / nx);
    rep.aleph = std::max(rep.aleph, std::abs(detail::pressure_functional(m, pf, ps, pd)) / nx);
    ++rep.samples;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Inf-sup probe

struct InfSupReport {
  double beta = 0.0;  // smallest singular value, constant pressure excluded
  int velocity_dofs = 0;
  int pressure_dofs = 0;
  int multiplier_rows = 0;
  double h = 0.0;
};

/// min over q (zero mean) of sup over v in ker L of b(v,q) / (|v|_X |q|), from
/// the dense Schur complement B K^{-1} B^T with K = [X L^T; L 0].
inline double infsup_estimate(const SparseMatrix& X, const SparseMatrix& L, const SparseMatrix& B, const Eigen::MatrixXd& Mq,
                              const Eigen::VectorXd& constant) {
  const auto nv = X.rows(), nl = L.rows(), np = B.rows();
  Triplets t;
  for (const SparseMatrix* S : {&X, &L})
    for (int col = 0; col < S->outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(*S, col); it; ++it) {
        if (S == &X) {
          t.emplace_back(static_cast<int>(it.row()), col, it.value());
        } else {
          t.emplace_back(static_cast<int>(nv + it.row()), col, it.value());
          t.emplace_back(col, static_cast<int>(nv + it.row()), it.value());
        }
      }
  SparseMatrix K(nv + nl, nv + nl);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  Eigen::UmfPackLU<SparseMatrix> lu(K);
  if (lu.info() != Eigen::Success) throw SolverError("infsup_estimate: velocity Gram system is singular");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv + nl, np);
  rhs.topRows(nv) = Eigen::MatrixXd(B.transpose());
  const Eigen::MatrixXd Y = lu.solve(rhs);
  Eigen::MatrixXd S = B * Y.topRows(nv);
  S = 0.5 * (S + S.transpose()).eval();
  // Lift the constant pressure mode far above the rest of the spectrum.
  const Eigen::VectorXd w = Mq * constant;
  S += 10.0 * w * w.transpose() / constant.dot(w);
  const Eigen::LLT<Eigen::MatrixXd> llt(Mq);
  const auto Lm = llt.matrixL();
  Eigen::MatrixXd C = Lm.solve(S);
  C = Lm.solve(C.transpose()).transpose();
  C = 0.5 * (C + C.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
}

/// Probe for the coupled pair V_h x Q_h: X-norm on velocities, L2 on pressures,
/// interface rows as side constraints.
inline InfSupReport infsup_probe(const Spaces& sp) {
  const Mesh& m = *sp.stokes.mesh;
  const auto free = free_velocity_dofs(sp);
  const int ns = sp.stokes.n_dofs;
  std::vector<int> col_of(static_cast<std::size_t>(ns + sp.darcy.n_dofs), -1);
  for (std::size_t j = 0; j < free.size(); ++j) col_of[static_cast<std::size_t>(free[j])] = static_cast<int>(j);
  const auto nf = static_cast<int>(free.size());

  Triplets tx, tb, tl;
  const auto& rule = triangle_rule(2 * sp.k + 2);
  for (const Space* space : {&sp.stokes, &sp.darcy}) {
    const bool stokes = space == &sp.stokes;
    const int off = stokes ? 0 : ns;
    for (int c = 0; c < space->n_cells(); ++c) {
      const LocalElement el(*space, c);
      const auto& d = space->cell_dofs[static_cast<std::size_t>(c)];
      const auto n = static_cast<Eigen::Index>(d.size());
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto ev = el.eval(rule.points[q]);
        const double w = rule.weights[q] * 2.0 * el.geometry().area;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j) {
            const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
            G(i, j) += w * (stokes ? (ev.jac[a].array() * ev.jac[b].array()).sum() : ev.value[a].dot(ev.value[b]) + ev.div[a] * ev.div[b]);
          }
      }
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const int r = col_of[static_cast<std::size_t>(off + d[static_cast<std::size_t>(i)])];
          const int s = col_of[static_cast<std::size_t>(off + d[static_cast<std::size_t>(j)])];
          if (r >= 0 && s >= 0) tx.emplace_back(r, s, G(i, j));
        }
    }
  }
  for (int tri = 0; tri < m.n_triangles(); ++tri) {
    const bool stokes = m.triangle(tri).domain == Subdomain::stokes;
    const auto b = local_b(stokes ? sp.stokes : sp.darcy, sp.pressure, tri);
    const int off = stokes ? 0 : ns;
    for (std::size_t i = 0; i < b.rows.size(); ++i)
      for (std::size_t j = 0; j < b.cols.size(); ++j) {
        const int s = col_of[static_cast<std::size_t>(off + b.cols[j])];
        if (s >= 0) tb.emplace_back(b.rows[i], s, b.mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
  }
  for (int e : m.interface_edges()) {
    const auto mb = local_interface_multiplier(sp, e);
    for (const auto* blk : {&mb.stokes, &mb.darcy}) {
      const int off = blk == &mb.stokes ? 0 : ns;
      for (std::size_t i = 0; i < blk->rows.size(); ++i)
        for (std::size_t j = 0; j < blk->cols.size(); ++j) {
          const int s = col_of[static_cast<std::size_t>(off + blk->cols[j])];
          if (s >= 0) tl.emplace_back(blk->rows[i], s, blk->mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
    }
  }
  const int np = sp.pressure.n_dofs;
  SparseMatrix X(nf, nf), B(np, nf), L(sp.trace.n_dofs, nf);
  X.setFromTriplets(tx.begin(), tx.end());
  B.setFromTriplets(tb.begin(), tb.end());
  L.setFromTriplets(tl.begin(), tl.end());

  Eigen::MatrixXd Mq = Eigen::MatrixXd::Zero(np, np);
  for (int c = 0; c < sp.pressure.n_cells(); ++c) {
    const LocalElement el(sp.pressure, c);
    const auto& d = sp.pressure.cell_dofs[static_cast<std::size_t>(c)];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto ev = el.eval(rule.points[q], false);
      const double w = rule.weights[q] * 2.0 * el.geometry().area;
      for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j) Mq(d[i], d[j]) += w * ev.scalar[i] * ev.scalar[j];
    }
  }
  InfSupReport rep;
  rep.beta = infsup_estimate(X, L, B, Mq, Eigen::VectorXd::Ones(np));
  rep.velocity_dofs = nf;
  rep.pressure_dofs = np;
  rep.multiplier_rows = sp.trace.n_dofs;
  rep.h = m.h();
  return rep;
}

/// Negative control: continuous P1 velocity with discontinuous P1 pressure on
/// the Stokes subdomain, velocity clamped on its whole boundary.
inline InfSupReport infsup_probe_p1_p1disc(const Mesh& m) {
  const auto cells = m.triangles_in(Subdomain::stokes);
  std::vector<char> clamped(static_cast<std::size_t>(m.n_vertices()), 0);
  for (int e = 0; e < m.n_edges(); ++e) {
    const auto& ed = m.edge(e);
    if (ed.cls == EdgeClass::boundary_s || ed.cls == EdgeClass::interface)
      for (int v : ed.v) clamped[static_cast<std::size_t>(v)] = 1;
  }
  std::vector<int> vdof(static_cast<std::size_t>(m.n_vertices()), -1);
  int nv = 0;
  for (int t : cells)
    for (int v : m.triangle(t).v)
      if (!clamped[static_cast<std::size_t>(v)] && vdof[static_cast<std::size_t>(v)] < 0) vdof[static_cast<std::size_t>(v)] = nv++;
  const int np = 3 * static_cast<int>(cells.size());
  Triplets tx, tb;
  Eigen::MatrixXd Mq = Eigen::MatrixXd::Zero(np, np);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const int t = cells[c];
    const auto p = m.triangle_points(t);
    const double area = m.area(t);
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
      const Vec2 edge = p[static_cast<std::size_t>((i + 2) % 3)] - p[static_cast<std::size_t>((i + 1) % 3)];
      g[static_cast<std::size_t>(i)] = Vec2(-edge.y(), edge.x()) / (2.0 * area);
    }
    const auto& tv = m.triangle(t).v;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) Mq(3 * static_cast<int>(c) + a, 3 * static_cast<int>(c) + b) += area / 12.0 * (a == b ? 2.0 : 1.0);
      const int da = vdof[static_cast<std::size_t>(tv[static_cast<std::size_t>(a)])];
      if (da < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int db = vdof[static_cast<std::size_t>(tv[static_cast<std::size_t>(b)])];
        const double kab = area * g[static_cast<std::size_t>(a)].dot(g[static_cast<std::size_t>(b)]);
        if (db >= 0)
          for (int comp = 0; comp < 2; ++comp) tx.emplace_back(2 * da + comp, 2 * db + comp, kab);
      }
      for (int i = 0; i < 3; ++i)
        for (int comp = 0; comp < 2; ++comp) tb.emplace_back(3 * static_cast<int>(c) + i, 2 * da + comp, -g[static_cast<std::size_t>(a)](comp) * area / 3.0);
    }
  }
  SparseMatrix X(2 * nv, 2 * nv), B(np, 2 * nv), L(0, 2 * nv);
  X.setFromTriplets(tx.begin(), tx.end());
  B.setFromTriplets(tb.begin(), tb.end());
  InfSupReport rep;
  rep.beta = infsup_estimate(X, L, B, Mq, Eigen::VectorXd::Ones(np));
  rep.velocity_dofs = 2 * nv;
  rep.pressure_dofs = np;
  rep.h = m.h();
  return rep;
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::json to_json(const InvariantMaxima& m) {
  return {{"divergence", m.divergence}, {"interface_jump", m.interface_jump}, {"boundary_normal", m.boundary_normal}, {"scale", m.scale}};
}

inline nlohmann::json to_json(const InvariantReport& r) {
  return {{"subspace", r.divergence_free ? "V_h(0)" : "V_h"}, {"samples", r.samples}, {"free_dofs", r.free_dofs},
          {"constraint_rows", r.constraint_rows}, {"membership_residual", r.membership_residual}, {"relative_maxima", to_json(r.worst)}};
}

inline nlohmann::json to_json(const ThetaReport& r) {
  return {{"samples", r.samples}, {"h", r.h}, {"theta", r.theta}, {"aleph", r.aleph}};
}

inline nlohmann::json to_json(const InfSupReport& r) {
  return {{"beta", r.beta}, {"velocity_dofs", r.velocity_dofs}, {"pressure_dofs", r.pressure_dofs}, {"multiplier_rows", r.multiplier_rows}, {"h", r.h}};
}

inline std::ostream& operator<<(std::ostream& os, const InvariantReport& r) {
  os << (r.divergence_free ? "V_h(0)" : "V_h") << " samples=" << r.samples << " free=" << r.free_dofs
     << " membership=" << r.membership_residual << " max|div Pi v|/s=" << r.worst.divergence
     << " max|jump|/s=" << r.worst.interface_jump << " max|Pi v.n|_bnd/s=" << r.worst.boundary_normal;
  return os;
}

inline std::ostream& operator<<(std::ostream& os, const ThetaReport& r) {
  os << "h=" << r.h << " samples=" << r.samples << " max|theta|/|v|_X=" << r.theta << " max|aleph|/|v|_X=" << r.aleph;
  return os;
}

inline std::ostream& operator<<(std::ostream& os, const InfSupReport& r) {
  os << "h=" << r.h << " velocity=" << r.velocity_dofs << " pressure=" << r.pressure_dofs << " beta=" << r.beta;
  return os;
}

}  // namespace sdfem
