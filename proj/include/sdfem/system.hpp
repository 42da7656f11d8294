#pragma once

// Global saddle-point system: assembly, penalty boundary rows, sparse LU solve.

#include <chrono>
#include <filesystem>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>
#include <unsupported/Eigen/SparseExtra>

#include "sdfem/reconstruction.hpp"

namespace sdfem {

enum class Method { classical, robust };

inline const char* to_string(Method m) { return m == Method::classical ? "classical" : "robust"; }

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Unknown ordering: Stokes velocity, Darcy velocity, pressure, interface
/// multipliers, pressure-mean multiplier (last).
struct BlockMap {
  int us = 0, ud = 0, p = 0, lam = 0, mean = 0, n = 0;

  static BlockMap of(const Spaces& sp) {
    BlockMap b;
    b.us = 0;
    b.ud = sp.stokes.n_dofs;
    b.p = b.ud + sp.darcy.n_dofs;
    b.lam = b.p + sp.pressure.n_dofs;
    b.mean = b.lam + sp.trace.n_dofs;
    b.n = b.mean + 1;
    return b;
  }

  const char* block_of(int row) const {
    if (row < ud) return "stokes_velocity";
    if (row < p) return "darcy_velocity";
    if (row < lam) return "pressure";
    if (row < mean) return "interface_multiplier";
    return "mean_multiplier";
  }
};

struct SaddleSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  BlockMap blocks;
  Method method = Method::classical;
  BoundaryConstraints constraints;
  double penalty = 0.0;
};

namespace detail {

inline void scatter(Triplets& t, const LocalBlock& b, int row_off, int col_off, bool transpose_too) {
  for (std::size_t i = 0; i < b.rows.size(); ++i)
    for (std::size_t j = 0; j < b.cols.size(); ++j) {
      const double v = b.mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v == 0.0) continue;
      t.emplace_back(row_off + b.rows[i], col_off + b.cols[j], v);
      if (transpose_too) t.emplace_back(col_off + b.cols[j], row_off + b.rows[i], v);
    }
}

}  // namespace detail

/// Saddle matrix without boundary penalties.
inline SparseMatrix assemble_saddle_matrix(const Spaces& sp, const ModelParams& prm) {
  prm.validate();
  const Mesh& mesh = *sp.stokes.mesh;
  const BlockMap bm = BlockMap::of(sp);
  if (sp.trace.n_cells() == 0) throw Error("assemble: empty interface");
  Triplets t;
  for (int c = 0; c < sp.stokes.n_cells(); ++c) detail::scatter(t, local_a_stokes(sp.stokes, c, prm), bm.us, bm.us, false);
  for (int c = 0; c < sp.darcy.n_cells(); ++c) detail::scatter(t, local_a_darcy(sp.darcy, c, prm), bm.ud, bm.ud, false);
  for (int e : mesh.interface_edges()) detail::scatter(t, local_a_interface(sp.stokes, e, prm), bm.us, bm.us, false);
  for (int tri = 0; tri < mesh.n_triangles(); ++tri) {
    const bool stokes = mesh.triangle(tri).domain == Subdomain::stokes;
    detail::scatter(t, local_b(stokes ? sp.stokes : sp.darcy, sp.pressure, tri), bm.p, stokes ? bm.us : bm.ud, true);
    auto mean = local_mean_constraint(sp.pressure, tri);
    mean.rows = {0};
    detail::scatter(t, mean, bm.mean, bm.p, true);
  }
  for (int e : mesh.interface_edges()) {
    const auto blocks = local_interface_multiplier(sp, e);
    detail::scatter(t, blocks.stokes, bm.lam, bm.us, true);
    detail::scatter(t, blocks.darcy, bm.lam, bm.ud, true);
  }
  SparseMatrix A(bm.n, bm.n);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

/// Weak penalty for Dirichlet dofs: diagonal += P, rhs += P * value.
inline void apply_penalty_dirichlet(SaddleSystem& sys, const BoundaryConstraints& bc, const ModelParams& prm,
                                    bool modify_matrix = true) {
  const double P = prm.penalty_weight();
  sys.penalty = P;
  sys.constraints = bc;
  auto apply = [&](int off, const std::vector<ConstrainedDof>& list) {
    for (const auto& d : list) {
      if (modify_matrix) sys.matrix.coeffRef(off + d.dof, off + d.dof) += P;
      sys.rhs(off + d.dof) += P * d.value;
    }
  };
  apply(sys.blocks.us, bc.stokes);
  apply(sys.blocks.ud, bc.darcy);
}

/// Right-hand side with penalty terms for the given method.
inline Eigen::VectorXd assemble_rhs(const Spaces& sp, const ProblemData& data, Method method,
                                    const ReconstructionCache* cache, const BoundaryConstraints& bc,
                                    const ModelParams& prm) {
  const BlockMap bm = BlockMap::of(sp);
  LoadBlocks lb;
  if (method == Method::classical) {
    lb = rhs_classical(sp, data);
  } else if (cache && !cache->empty()) {
    lb = rhs_robust(sp, *cache, data);
  } else {
    lb = rhs_robust(sp, data);
  }
  SaddleSystem tmp;
  tmp.blocks = bm;
  tmp.rhs = Eigen::VectorXd::Zero(bm.n);
  tmp.rhs.segment(bm.us, lb.stokes.size()) = lb.stokes;
  tmp.rhs.segment(bm.ud, lb.darcy.size()) = lb.darcy;
  tmp.rhs.segment(bm.p, lb.pressure.size()) = lb.pressure;
  apply_penalty_dirichlet(tmp, bc, prm, false);
  return tmp.rhs;
}

/// Full system for one method. The matrix does not depend on the method.
inline SaddleSystem assemble(const Spaces& sp, const ModelParams& prm, const ProblemData& data, Method method,
                             const ReconstructionCache* cache = nullptr) {
  SaddleSystem sys;
  sys.blocks = BlockMap::of(sp);
  sys.method = method;
  sys.matrix = assemble_saddle_matrix(sp, prm);
  const auto bc = boundary_constraints(sp, data.bc);
  sys.rhs = Eigen::VectorXd::Zero(sys.blocks.n);
  apply_penalty_dirichlet(sys, bc, prm, true);
  sys.rhs = assemble_rhs(sp, data, method, cache, bc, prm);
  return sys;
}

// ---------------------------------------------------------------------------
// Solve

struct SolverStats {
  double factor_seconds = 0.0;
  double solve_seconds = 0.0;
  double relative_residual = 0.0;
};

struct Solution {
  FieldFunction velocity_s, velocity_d, pressure, multiplier;
  double mean_multiplier = 0.0;
  Eigen::VectorXd x;
  SolverStats stats;
};

/// Rows of blocks that are entirely zero; used to explain a singular factorization.
inline std::string singular_diagnostic(const SparseMatrix& A, const BlockMap& bm) {
  Eigen::VectorXd rowmax = Eigen::VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      rowmax(it.row()) = std::max(rowmax(it.row()), std::abs(it.value()));
  std::map<std::string, int> zero_rows;
  for (int r = 0; r < A.rows(); ++r)
    if (rowmax(r) == 0.0) ++zero_rows[bm.block_of(r)];
  std::ostringstream os;
  os << "numerically singular saddle matrix";
  if (zero_rows.empty()) {
    os << " (no structurally empty rows; check mesh/space consistency)";
  } else {
    os << "; zero-pivot rows in block(s):";
    for (const auto& [name, n] : zero_rows) os << " " << name << " (" << n << " rows)";
  }
  return os.str();
}

/// Symmetric Ruiz equilibration: D such that D A D has rows and columns of
/// unit max-norm (approximately). Penalty rows are otherwise 1e10 times larger
/// than their neighbours and the LU loses the pressure modes to round-off.
inline Eigen::VectorXd ruiz_scaling(const SparseMatrix& A, int iterations = 10) {
  Eigen::VectorXd d = Eigen::VectorXd::Ones(A.rows());
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd colmax = Eigen::VectorXd::Zero(A.cols());
    for (int c = 0; c < A.outerSize(); ++c)
      for (SparseMatrix::InnerIterator e(A, c); e; ++e)
        colmax(c) = std::max(colmax(c), std::abs(d(e.row()) * e.value() * d(c)));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (colmax(i) == 0.0) continue;
      d(i) /= std::sqrt(colmax(i));
      worst = std::max(worst, std::abs(1.0 - colmax(i)));
    }
    if (worst < 1e-3) break;
  }
  return d;
}

/// Sparse LU factorization (UMFPACK) of the equilibrated matrix, reused across
/// right-hand sides, with one step of iterative refinement.
class SaddleSolver {
public:
  explicit SaddleSolver(const SparseMatrix& A, const BlockMap& bm) : A_(&A), bm_(bm) {
    const auto t0 = std::chrono::steady_clock::now();
    d_ = ruiz_scaling(A);
    scaled_ = d_.asDiagonal() * A * d_.asDiagonal();
    scaled_.makeCompressed();
    lu_.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
    lu_.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
    lu_.compute(scaled_);
    factor_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (lu_.info() != Eigen::Success) throw SolverError(singular_diagnostic(A, bm));
  }

  Eigen::VectorXd solve_vector(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = d_.asDiagonal() * lu_.solve(Eigen::VectorXd(d_.asDiagonal() * b));
    const Eigen::VectorXd r = b - *A_ * x;
    x += d_.asDiagonal() * lu_.solve(Eigen::VectorXd(d_.asDiagonal() * r));
    return x;
  }

  Solution solve(const Spaces& sp, const Eigen::VectorXd& b) const {
    const auto t0 = std::chrono::steady_clock::now();
    Solution s;
    s.x = solve_vector(b);
    s.stats.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.stats.factor_seconds = factor_seconds_;
    if (lu_.info() != Eigen::Success || !s.x.allFinite()) throw SolverError(singular_diagnostic(*A_, bm_));
    const double bn = b.norm();
    s.stats.relative_residual = (*A_ * s.x - b).norm() / (bn > 0.0 ? bn : 1.0);
    s.velocity_s = FieldFunction(sp.stokes, s.x.segment(bm_.us, sp.stokes.n_dofs));
    s.velocity_d = FieldFunction(sp.darcy, s.x.segment(bm_.ud, sp.darcy.n_dofs));
    s.pressure = FieldFunction(sp.pressure, s.x.segment(bm_.p, sp.pressure.n_dofs));
    s.multiplier = FieldFunction(sp.trace, s.x.segment(bm_.lam, sp.trace.n_dofs));
    s.mean_multiplier = s.x(bm_.mean);
    return s;
  }

  double factor_seconds() const { return factor_seconds_; }

private:
  const SparseMatrix* A_;
  BlockMap bm_;
  Eigen::VectorXd d_;
  SparseMatrix scaled_;
  Eigen::UmfPackLU<SparseMatrix> lu_;
  double factor_seconds_ = 0.0;
};

inline Solution solve(const Spaces& sp, const SaddleSystem& sys) {
  const SaddleSolver solver(sys.matrix, sys.blocks);
  return solver.solve(sp, sys.rhs);
}

/// Largest violation of the pressure rows (b(u_h, q) = -(g, q)) and of the
/// interface multiplier rows, each relative to `scale`.
struct ConstraintResidual {
  double divergence = 0.0;
  double interface = 0.0;
};

inline ConstraintResidual constraint_residual(const SaddleSystem& sys, const Eigen::VectorXd& x) {
  const auto& bm = sys.blocks;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(bm.n);
  u.head(bm.p) = x.head(bm.p);
  const Eigen::VectorXd r = sys.matrix * u - sys.rhs;
  return {r.segment(bm.p, bm.lam - bm.p).cwiseAbs().maxCoeff(),
          bm.mean > bm.lam ? r.segment(bm.lam, bm.mean - bm.lam).cwiseAbs().maxCoeff() : 0.0};
}

/// MatrixMarket coordinate files `<stem>_matrix.mtx` and `<stem>_rhs.mtx`.
inline void dump_system(const SaddleSystem& sys, const std::filesystem::path& stem) {
  if (!Eigen::saveMarket(sys.matrix, stem.string() + "_matrix.mtx"))
    throw Error("cannot write " + stem.string() + "_matrix.mtx");
  if (!Eigen::saveMarketVector(sys.rhs, stem.string() + "_rhs.mtx"))
    throw Error("cannot write " + stem.string() + "_rhs.mtx");
}

}  // namespace sdfem
