#pragma once

// Element-wise Raviart-Thomas reconstruction of Stokes test functions and the
// pressure-robust load vector built from it.

#include "sdfem/forms.hpp"

namespace sdfem {

struct LocalReconstruction {
  int tri = -1;
  Eigen::VectorXd w;           // coefficients in the raw (Bernstein-Bezier for k = 2) basis
  Eigen::VectorXd moments;     // RT degree-of-freedom functionals of psi (nodal coefficients)
  Eigen::MatrixXd dof_matrix;  // M(i, j) = l_i(chi_j)
  double residual = 0.0;       // |M w - moments| / |moments|
};

/// Reconstruction of one local field psi (a callable on barycentric points of `tri`).
template <class F>
LocalReconstruction local_reconstruct(const Mesh& mesh, int tri, int k, F&& psi) {
  const LocalRT rt(mesh, tri, k);
  LocalReconstruction r;
  r.tri = tri;
  r.dof_matrix = rt.M;
  r.moments = rt_functionals(mesh, tri, k, std::forward<F>(psi));
  r.w = rt.M.partialPivLu().solve(r.moments);
  const double scale = std::max(r.moments.norm(), 1e-300);
  r.residual = (rt.M * r.w - r.moments).norm() / scale;
  return r;
}

/// Per Stokes cell: the local RT element and L(i, j) = l_i(psi_j) for every
/// local Stokes shape function psi_j. Independent of the data, so it is kept
/// across parameter sweeps on one mesh.
class ReconstructionCache {
public:
  ReconstructionCache() = default;

  explicit ReconstructionCache(const Space& stokes) : stokes_(&stokes) {
    const Mesh& mesh = *stokes.mesh;
    const int k = stokes.family.k;
    rts_.reserve(static_cast<std::size_t>(stokes.n_cells()));
    L_.reserve(static_cast<std::size_t>(stokes.n_cells()));
    for (int c = 0; c < stokes.n_cells(); ++c) {
      const int t = stokes.cells[static_cast<std::size_t>(c)];
      const LocalElement el(stokes, c);
      rts_.emplace_back(mesh, t, k);
      const int n = stokes.n_local();
      // Evaluate all shape functions once per functional quadrature point.
      std::map<std::array<double, 3>, std::vector<Vec2>> memo;
      auto values = [&](const Bary& b) -> const std::vector<Vec2>& {
        auto it = memo.find(b);
        if (it == memo.end()) it = memo.emplace(b, el.eval(b, false).value).first;
        return it->second;
      };
      Eigen::MatrixXd L(rt_local_size(k), n);
      for (int j = 0; j < n; ++j)
        L.col(j) = rt_functionals(mesh, t, k, [&](const Bary& b) { return values(b)[static_cast<std::size_t>(j)]; });
      L_.push_back(std::move(L));
    }
  }

  const Space& stokes() const { return *stokes_; }
  const LocalRT& rt(int cell) const { return rts_[static_cast<std::size_t>(cell)]; }
  /// Nodal RT coefficients of the reconstructed local shape functions (one column each).
  const Eigen::MatrixXd& moments(int cell) const { return L_[static_cast<std::size_t>(cell)]; }
  bool empty() const { return stokes_ == nullptr; }

private:
  const Space* stokes_ = nullptr;
  std::vector<LocalRT> rts_;
  std::vector<Eigen::MatrixXd> L_;
};

/// (f, Pi psi_j) for every Stokes basis function psi_j.
inline Eigen::VectorXd reconstructed_load(const ReconstructionCache& cache, const VectorField& f) {
  const Space& stokes = cache.stokes();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(stokes.n_dofs);
  if (!f) return r;
  const auto& rule = triangle_rule(default_quadrature_degree);
  for (int c = 0; c < stokes.n_cells(); ++c) {
    const LocalRT& rt = cache.rt(c);
    const double jac = 2.0 * rt.geo.area;
    Eigen::VectorXd F = Eigen::VectorXd::Zero(rt.size());
    std::vector<Vec2> phi;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 fv = f(rt.geo.point(rule.points[q]));
      rt.eval(rule.points[q], phi);
      for (int i = 0; i < rt.size(); ++i) F(i) += rule.weights[q] * jac * fv.dot(phi[static_cast<std::size_t>(i)]);
    }
    const Eigen::VectorXd local = cache.moments(c).transpose() * F;
    const auto& d = stokes.cell_dofs[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < d.size(); ++j) r(d[j]) += local(static_cast<Eigen::Index>(j));
  }
  return r;
}

/// Robust load blocks: the Stokes block tests f against Pi psi_j; Darcy and
/// pressure blocks are the classical ones.
inline LoadBlocks rhs_robust(const Spaces& sp, const ReconstructionCache& cache, const ProblemData& data) {
  return {reconstructed_load(cache, data.fs), load_vector(sp.darcy, data.fd),
          divergence_load(sp.pressure, data.gs, data.gd)};
}

inline LoadBlocks rhs_robust(const Spaces& sp, const ProblemData& data) {
  const ReconstructionCache cache(sp.stokes);
  return rhs_robust(sp, cache, data);
}

/// Pi_h v_h: the Stokes part replaced by its element-wise RT reconstruction,
/// the Darcy part unchanged.
class ReconstructedField {
public:
  ReconstructedField(const ReconstructionCache& cache, const Eigen::VectorXd& stokes_coeffs, FieldFunction darcy)
      : cache_(&cache), darcy_(std::move(darcy)) {
    const Space& s = cache.stokes();
    if (stokes_coeffs.size() != s.n_dofs) throw Error("reconstruct_field: Stokes coefficient size mismatch");
    nodal_.reserve(static_cast<std::size_t>(s.n_cells()));
    for (int c = 0; c < s.n_cells(); ++c) {
      const auto& d = s.cell_dofs[static_cast<std::size_t>(c)];
      Eigen::VectorXd loc(static_cast<Eigen::Index>(d.size()));
      for (std::size_t i = 0; i < d.size(); ++i) loc(static_cast<Eigen::Index>(i)) = stokes_coeffs(d[i]);
      nodal_.push_back(cache.moments(c) * loc);
    }
  }

  /// Value and divergence at barycentric point b of triangle tri.
  std::pair<Vec2, double> eval(int tri, const Bary& b) const {
    const Space& s = cache_->stokes();
    const int c = s.cell_index(tri);
    if (c >= 0) {
      std::vector<Vec2> phi;
      std::vector<Mat2> jac;
      cache_->rt(c).eval(b, phi, &jac);
      Vec2 v = Vec2::Zero();
      double div = 0.0;
      for (std::size_t i = 0; i < phi.size(); ++i) {
        v += nodal_[static_cast<std::size_t>(c)](static_cast<Eigen::Index>(i)) * phi[i];
        div += nodal_[static_cast<std::size_t>(c)](static_cast<Eigen::Index>(i)) * jac[i].trace();
      }
      return {v, div};
    }
    const int dc = darcy_.space().cell_index(tri);
    if (dc < 0) throw Error("ReconstructedField: triangle outside both subdomains");
    const LocalElement el(darcy_.space(), dc);
    const auto ev = el.eval(b);
    const auto loc = darcy_.local_coeffs(dc);
    Vec2 v = Vec2::Zero();
    double div = 0.0;
    for (std::size_t i = 0; i < ev.value.size(); ++i) {
      v += loc(static_cast<Eigen::Index>(i)) * ev.value[i];
      div += loc(static_cast<Eigen::Index>(i)) * ev.div[i];
    }
    return {v, div};
  }

  const Eigen::VectorXd& stokes_moments(int cell) const { return nodal_[static_cast<std::size_t>(cell)]; }
  const FieldFunction& darcy() const { return darcy_; }

private:
  const ReconstructionCache* cache_;
  std::vector<Eigen::VectorXd> nodal_;
  FieldFunction darcy_;
};

inline ReconstructedField reconstruct_field(const ReconstructionCache& cache, const Eigen::VectorXd& stokes_coeffs,
                                            const FieldFunction& darcy) {
  return {cache, stokes_coeffs, darcy};
}

}  // namespace sdfem
