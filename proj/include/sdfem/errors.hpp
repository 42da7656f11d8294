#pragma once

// Error norms against analytic solutions and empirical convergence orders.

#include <limits>
#include <ostream>

#include "sdfem/system.hpp"

namespace sdfem {

/// Analytic solution with the derivatives needed by the error norms.
struct ExactSolution {
  VectorField us, ud;
  TensorField grad_us;  // grad(i, j) = d u_i / d x_j
  ScalarField div_ud;
  ScalarField ps, pd;
};

struct ErrorReport {
  double E_h = 0.0;     // X-norm of the velocity error
  double E_h_s = 0.0;   // Stokes H1 seminorm
  double E_h1_d = 0.0;  // Darcy L2
  double E_h2_d = 0.0;  // Darcy divergence L2
  double e_h = 0.0;     // pressure L2
  double e_h_s = 0.0;
  double e_h_d = 0.0;
  int dof = 0;
  double h = 0.0;
  double wall_time = 0.0;
};

inline ErrorReport compute_errors(const Solution& sol, const ExactSolution& ex, int quadrature_degree = default_quadrature_degree) {
  const Space& ss = sol.velocity_s.space();
  const Space& ds = sol.velocity_d.space();
  const Space& ps = sol.pressure.space();
  const Mesh& mesh = *ss.mesh;
  const auto& rule = triangle_rule(quadrature_degree);
  double es = 0.0, ed1 = 0.0, ed2 = 0.0, eps = 0.0, epd = 0.0;
  for (int c = 0; c < ss.n_cells(); ++c) {
    const LocalElement el(ss, c);
    const auto loc = sol.velocity_s.local_coeffs(c);
    const double jac = 2.0 * el.geometry().area;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto ev = el.eval(rule.points[q]);
      Mat2 G = Mat2::Zero();
      for (std::size_t i = 0; i < ev.jac.size(); ++i) G += loc(static_cast<Eigen::Index>(i)) * ev.jac[i];
      es += rule.weights[q] * jac * (ex.grad_us(el.geometry().point(rule.points[q])) - G).squaredNorm();
    }
  }
  for (int c = 0; c < ds.n_cells(); ++c) {
    const LocalElement el(ds, c);
    const auto loc = sol.velocity_d.local_coeffs(c);
    const double jac = 2.0 * el.geometry().area;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto ev = el.eval(rule.points[q]);
      Vec2 v = Vec2::Zero();
      double d = 0.0;
      for (std::size_t i = 0; i < ev.value.size(); ++i) {
        v += loc(static_cast<Eigen::Index>(i)) * ev.value[i];
        d += loc(static_cast<Eigen::Index>(i)) * ev.div[i];
      }
      const Point x = el.geometry().point(rule.points[q]);
      ed1 += rule.weights[q] * jac * (ex.ud(x) - v).squaredNorm();
      ed2 += rule.weights[q] * jac * std::pow(ex.div_ud(x) - d, 2);
    }
  }
  for (int c = 0; c < ps.n_cells(); ++c) {
    const LocalElement el(ps, c);
    const auto loc = sol.pressure.local_coeffs(c);
    const double jac = 2.0 * el.geometry().area;
    const bool stokes = mesh.triangle(ps.cells[static_cast<std::size_t>(c)]).domain == Subdomain::stokes;
    const auto& pex = stokes ? ex.ps : ex.pd;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto ev = el.eval(rule.points[q], false);
      double p = 0.0;
      for (std::size_t i = 0; i < ev.scalar.size(); ++i) p += loc(static_cast<Eigen::Index>(i)) * ev.scalar[i];
      acc += rule.weights[q] * jac * std::pow(pex(el.geometry().point(rule.points[q])) - p, 2);
    }
    (stokes ? eps : epd) += acc;
  }
  ErrorReport r;
  r.E_h_s = std::sqrt(es);
  r.E_h1_d = std::sqrt(ed1);
  r.E_h2_d = std::sqrt(ed2);
  r.E_h = std::sqrt(es + ed1 + ed2);
  r.e_h_s = std::sqrt(eps);
  r.e_h_d = std::sqrt(epd);
  r.e_h = std::sqrt(eps + epd);
  r.h = mesh.h();
  r.dof = static_cast<int>(sol.x.size());
  return r;
}

/// Order between consecutive refinements. `valid` is false when an error is
/// zero or not finite; the order is then NaN.
struct Rate {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

struct ConvergenceRates {
  std::vector<Rate> by_h;    // log(e_{i-1}/e_i) / log(h_{i-1}/h_i)
  std::vector<Rate> by_dof;  // log(e_{i-1}/e_i) / log(dof_i/dof_{i-1})
};

inline Rate rate_between(double e0, double e1, double x0, double x1) {
  Rate r;
  if (!(e0 > 0.0) || !(e1 > 0.0) || !std::isfinite(e0) || !std::isfinite(e1) || x0 == x1) return r;
  r.value = std::log(e0 / e1) / std::log(x0 / x1);
  r.valid = std::isfinite(r.value);
  return r;
}

/// Orders of `errors` (one per level, ordered by refinement) against mesh size
/// and against the number of unknowns.
inline ConvergenceRates convergence_rates(const std::vector<double>& errors, const std::vector<double>& h,
                                          const std::vector<double>& dof) {
  if (errors.size() < 2 || errors.size() != h.size() || errors.size() != dof.size())
    throw Error("convergence_rates: need at least two levels with matching h and dof");
  ConvergenceRates out;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    out.by_h.push_back(rate_between(errors[i - 1], errors[i], h[i - 1], h[i]));
    out.by_dof.push_back(rate_between(errors[i - 1], errors[i], dof[i], dof[i - 1]));
  }
  return out;
}

/// log2 of consecutive error ratios (meshes with halving h).
inline std::vector<Rate> convergence_rates(const std::vector<double>& errors) {
  if (errors.size() < 2) throw Error("convergence_rates: need at least two levels");
  std::vector<Rate> out;
  for (std::size_t i = 1; i < errors.size(); ++i) out.push_back(rate_between(errors[i - 1], errors[i], 2.0, 1.0));
  return out;
}

/// Least-squares slope of log(error) against log(x) over the last `n` entries.
inline double asymptotic_order(const std::vector<double>& errors, const std::vector<double>& x, std::size_t n = 3) {
  if (errors.size() < n || x.size() != errors.size()) throw Error("asymptotic_order: not enough levels");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = errors.size() - n; i < errors.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(n);
  return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// CSV

struct RunRecord {
  std::string method, example;
  int k = 2, level = 0;
  ErrorReport err;
  double gamma = 0.0, mu = 1.0, lambda = 0.0;
  double time_s = 0.0;
};

inline const char* csv_header() {
  return "method,example,k,level,dof,h,E_h,E_h^s,E_h1_d,E_h2_d,e_h,e_h^s,e_h^d,gamma,mu,lambda,time_s";
}

inline void write_csv_row(std::ostream& os, const RunRecord& r) {
  const auto& e = r.err;
  const auto old = os.precision(10);
  os << r.method << ',' << r.example << ',' << r.k << ',' << r.level << ',' << e.dof << ',' << e.h << ',' << e.E_h
     << ',' << e.E_h_s << ',' << e.E_h1_d << ',' << e.E_h2_d << ',' << e.e_h << ',' << e.e_h_s << ',' << e.e_h_d
     << ',' << r.gamma << ',' << r.mu << ',' << r.lambda << ',' << r.time_s << '\n';
  os.precision(old);
}

}  // namespace sdfem
