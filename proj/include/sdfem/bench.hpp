#pragma once

// The three benchmark problems and the sweep driver.

#include <fstream>
#include <future>
#include <optional>

#include "sdfem/errors.hpp"
#include "sdfem/msh_io.hpp"

namespace sdfem {

struct Benchmark {
  std::string id;
  ModelParams params;
  ProblemData data;
  std::optional<ExactSolution> exact;
  double gamma = 0.0, lambda = 0.0;
};

/// Unit square, Stokes on top of y = 1/2. Exact pressures carry the
/// parameter gamma; the BJS coefficient is fixed by the solution.
inline Benchmark example1(double gamma, double mu = 1.0, double K = 1e-4) {
  if (!(gamma > 0.0)) throw Error("example1: gamma must be positive");
  Benchmark b;
  b.id = "ex1";
  b.gamma = gamma;
  b.params.mu = mu;
  b.params.K = K;
  b.params.alpha1_over_sqrt_kappa = (1.0 + 4.0 * pi * pi) / 2.0;

  ExactSolution ex;
  ex.us = [](const Point& x) {
    const double E = std::exp(x.y() / 2), S = std::sin(pi * x.x()), C = std::cos(pi * x.x());
    return Vec2(-E * S / (2 * pi * pi), E * C / pi);
  };
  ex.ud = [](const Point& x) {
    const double E = std::exp(x.y() / 2), S = std::sin(pi * x.x()), C = std::cos(pi * x.x());
    return Vec2(-2 * E * S, E * C / pi);
  };
  ex.grad_us = [](const Point& x) {
    const double E = std::exp(x.y() / 2), S = std::sin(pi * x.x()), C = std::cos(pi * x.x());
    Mat2 G;
    G << -E * C / (2 * pi), -E * S / (4 * pi * pi), -E * S, E * C / (2 * pi);
    return G;
  };
  ex.div_ud = [](const Point& x) {
    return std::exp(x.y() / 2) * std::cos(pi * x.x()) * (1.0 / (2 * pi) - 2 * pi);
  };
  ex.ps = [gamma](const Point& x) { return -gamma * std::exp(x.y() / 2) * std::cos(pi * x.x()) / pi; };
  ex.pd = [gamma](const Point& x) { return -(gamma + 1) * std::exp(x.y() / 2) * std::cos(pi * x.x()) / pi; };

  b.data.fs = [gamma, mu](const Point& x) {
    const double E = std::exp(x.y() / 2), S = std::sin(pi * x.x()), C = std::cos(pi * x.x());
    const Vec2 lap(E * S / 2 - E * S / (8 * pi * pi), -pi * E * C + E * C / (4 * pi));
    const Vec2 gp(gamma * E * S, -gamma * E * C / (2 * pi));
    return Vec2(-mu * lap + gp);
  };
  b.data.fd = [gamma, mu, K, ud = ex.ud](const Point& x) {
    const double E = std::exp(x.y() / 2), S = std::sin(pi * x.x()), C = std::cos(pi * x.x());
    const Vec2 gp((gamma + 1) * E * S, -(gamma + 1) * E * C / (2 * pi));
    return Vec2(mu / K * ud(x) + gp);
  };
  b.data.gs = [](const Point&) { return 0.0; };
  b.data.gd = ex.div_ud;
  b.data.bc.stokes = [us = ex.us](const Point& x, BoundaryMarker) { return us(x); };
  b.data.bc.darcy = ex.ud;
  b.exact = std::move(ex);
  return b;
}

/// Additive pressure constant of the second example.
inline constexpr double example2_pressure_shift = 1669.0 / (87.0 * pi * pi);

/// Stokes on (0, pi)^2 above Darcy on (0, pi) x (-pi, 0); tangential
/// velocity and shear vanish on the interface, so any BJS coefficient works.
inline Benchmark example2(double mu, double K = 1e-4, double alpha1_over_sqrt_kappa = 1.0) {
  Benchmark b;
  b.id = "ex2";
  b.params.mu = mu;
  b.params.K = K;
  b.params.alpha1_over_sqrt_kappa = alpha1_over_sqrt_kappa;
  const double c0 = example2_pressure_shift;

  ExactSolution ex;
  ex.us = [](const Point& x) {
    const double sy = std::sin(x.y());
    return Vec2(std::sin(2 * x.y()) * std::cos(x.x()), (sy * sy - 2) * std::sin(x.x()));
  };
  ex.ud = [](const Point& x) {
    return Vec2(-2 * std::sinh(x.y()) * std::cos(x.x()), -2 * std::cosh(x.y()) * std::sin(x.x()));
  };
  ex.grad_us = [](const Point& x) {
    const double sy = std::sin(x.y());
    Mat2 G;
    G << -std::sin(2 * x.y()) * std::sin(x.x()), 2 * std::cos(2 * x.y()) * std::cos(x.x()),
        (sy * sy - 2) * std::cos(x.x()), std::sin(2 * x.y()) * std::sin(x.x());
    return G;
  };
  ex.div_ud = [](const Point&) { return 0.0; };
  ex.ps = [c0](const Point& x) { return std::sin(x.x()) * std::sin(x.y()) + c0; };
  ex.pd = [c0](const Point& x) { return 2 * std::sinh(x.y()) * std::sin(x.x()) + c0; };

  b.data.fs = [mu](const Point& x) {
    const double sx = std::sin(x.x()), cx = std::cos(x.x()), sy = std::sin(x.y()), cy = std::cos(x.y());
    const Vec2 lap(-5 * std::sin(2 * x.y()) * cx, -(sy * sy - 2) * sx + 2 * std::cos(2 * x.y()) * sx);
    return Vec2(-mu * lap + Vec2(cx * sy, sx * cy));
  };
  b.data.fd = [mu, K, ud = ex.ud](const Point& x) {
    const Vec2 gp(2 * std::sinh(x.y()) * std::cos(x.x()), 2 * std::cosh(x.y()) * std::sin(x.x()));
    return Vec2(mu / K * ud(x) + gp);
  };
  b.data.gs = [](const Point&) { return 0.0; };
  b.data.gd = [](const Point&) { return 0.0; };
  b.data.bc.stokes = [us = ex.us](const Point& x, BoundaryMarker) { return us(x); };
  b.data.bc.darcy = ex.ud;
  b.exact = std::move(ex);
  return b;
}

/// Lid-driven cavity over a porous bed with the irrotational forcing
/// grad(lambda sin(pi x) sin(pi y)). No exact solution.
inline Benchmark example3(double mu, double lambda, double K = 1e-4, double alpha1 = 1.0) {
  Benchmark b;
  b.id = "ex3";
  b.lambda = lambda;
  b.params.mu = mu;
  b.params.K = K;
  b.params.alpha1_over_sqrt_kappa = alpha1;
  const VectorField f = [lambda](const Point& x) {
    return Vec2(lambda * pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                lambda * pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  b.data.fs = f;
  b.data.fd = f;
  b.data.gs = [](const Point&) { return 0.0; };
  b.data.gd = [](const Point&) { return 0.0; };
  b.data.bc.stokes = [](const Point&, BoundaryMarker m) {
    return m == BoundaryMarker::lid ? Vec2(1.0, 0.0) : Vec2(0.0, 0.0);
  };
  b.data.bc.darcy = [](const Point&) { return Vec2(0.0, 0.0); };
  return b;
}

// ---------------------------------------------------------------------------
// Meshes

inline RectanglePair example1_domain() { return {{0.0, 1.0, 0.5, 1.0}, {0.0, 1.0, 0.0, 0.5}, 4, 2, 2}; }
inline RectanglePair example2_domain() { return {{0.0, pi, 0.0, pi}, {0.0, pi, -pi, 0.0}, 2, 2, 2}; }

/// Structured mesh of refinement `level` for ex1/ex2, or the given file for ex3.
inline Mesh benchmark_mesh(const std::string& id, int level, const std::string& mesh_path = {}) {
  if (id == "ex1") return generate_structured(example1_domain(), level);
  if (id == "ex2") return generate_structured(example2_domain(), level);
  if (id == "ex3") {
    if (mesh_path.empty()) throw Error("example3 requires a cavity mesh file (--mesh)");
    if (!std::filesystem::exists(mesh_path)) throw Error("cavity mesh file not found: " + mesh_path);
    return load_msh(mesh_path);
  }
  throw Error("unknown example '" + id + "'");
}

/// Benchmark for one value of the swept parameter: gamma (ex1), mu (ex2), lambda (ex3).
struct BenchmarkOptions {
  double mu = 1.0;
  double alpha1 = 1.0;  // ex2, ex3
  double K = 1e-4;
};

inline Benchmark make_benchmark(const std::string& id, double value, const BenchmarkOptions& opt = {}) {
  if (id == "ex1") return example1(value, opt.mu, opt.K);
  if (id == "ex2") return example2(value, opt.K, opt.alpha1);
  if (id == "ex3") return example3(opt.mu, value, opt.K, opt.alpha1);
  throw Error("unknown example '" + id + "'");
}

inline const char* swept_parameter(const std::string& id) {
  return id == "ex1" ? "gamma" : id == "ex2" ? "mu" : "lambda";
}

// ---------------------------------------------------------------------------
// Field samples

struct FieldSample {
  double x, y;
  int subdomain;  // 0 Stokes, 1 Darcy, -1 outside
  double u1, u2, p;
};

/// Velocity and pressure on an n x n grid of the mesh bounding box (cell centres).
inline std::vector<FieldSample> sample_fields(const Solution& sol, int n = 64) {
  const Mesh& mesh = *sol.velocity_s.space().mesh;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& v : mesh.vertices()) {
    x0 = std::min(x0, v.x());
    x1 = std::max(x1, v.x());
    y0 = std::min(y0, v.y());
    y1 = std::max(y1, v.y());
  }
  const PointLocator loc(mesh);
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point p(x0 + (i + 0.5) * (x1 - x0) / n, y0 + (j + 0.5) * (y1 - y0) / n);
      FieldSample s{p.x(), p.y(), -1, 0.0, 0.0, 0.0};
      if (const auto hit = loc.locate(p)) {
        const int t = hit->first;
        const bool stokes = mesh.triangle(t).domain == Subdomain::stokes;
        s.subdomain = stokes ? 0 : 1;
        const Vec2 u = (stokes ? sol.velocity_s : sol.velocity_d).vector_at(t, p);
        s.u1 = u.x();
        s.u2 = u.y();
        s.p = sol.pressure.scalar_at(t, p);
      }
      out.push_back(s);
    }
  return out;
}

inline void write_field_samples(std::ostream& os, const std::vector<FieldSample>& samples) {
  const auto old = os.precision(10);
  os << "x,y,subdomain,u1,u2,p\n";
  for (const auto& s : samples)
    os << s.x << ',' << s.y << ',' << s.subdomain << ',' << s.u1 << ',' << s.u2 << ',' << s.p << '\n';
  os.precision(old);
}

/// Largest velocity magnitude over quadrature points of both subdomains.
inline double max_velocity(const Solution& sol) {
  const auto& rule = triangle_rule(4);
  double m = 0.0;
  for (const FieldFunction* f : {&sol.velocity_s, &sol.velocity_d}) {
    const Space& s = f->space();
    for (int c = 0; c < s.n_cells(); ++c) {
      const LocalElement el(s, c);
      for (std::size_t q = 0; q < rule.size(); ++q) m = std::max(m, f->vector_value(el, c, rule.points[q]).norm());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
  std::string example = "ex1";
  std::vector<Method> methods{Method::classical, Method::robust};
  int k = 2;
  std::vector<int> levels{0, 1, 2, 3};
  std::vector<double> values{1.0};  // gamma, mu or lambda
  BenchmarkOptions options;
  std::string mesh_path;            // ex3
  bool keep_solutions = false;      // retain Solution objects (velocity comparisons)
  int jobs = 1;                     // levels solved concurrently
};

struct SweepRun {
  RunRecord record;
  bool ok = false;
  std::string error;
  double max_velocity = 0.0;
  double relative_residual = 0.0;
  std::optional<Solution> solution;
  std::vector<FieldSample> samples;  // ex3 only
};

struct SweepLevel {
  int level = 0;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const Spaces> spaces;
};

namespace detail {

inline std::vector<SweepRun> run_sweep_level(const SweepConfig& cfg, int level, SweepLevel& out) {
  std::vector<SweepRun> runs;
  const bool need_cache =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::robust) != cfg.methods.end();
  auto mesh = std::make_shared<const Mesh>(benchmark_mesh(cfg.example, level, cfg.mesh_path));
  auto sp = std::make_shared<const Spaces>(build_spaces(*mesh, cfg.k));
  out = {level, mesh, sp};
  ReconstructionCache cache;
  if (need_cache) cache = ReconstructionCache(sp->stokes);

  std::optional<ModelParams> factored_for;
  SparseMatrix A;
  std::unique_ptr<SaddleSolver> solver;
  std::string factor_error;
  for (double value : cfg.values) {
    const Benchmark bm = make_benchmark(cfg.example, value, cfg.options);
    const auto same = [](const ModelParams& a, const ModelParams& b) {
      return a.mu == b.mu && a.K == b.K && a.alpha1_over_sqrt_kappa == b.alpha1_over_sqrt_kappa &&
             a.penalty_weight() == b.penalty_weight();
    };
    double factor_time = 0.0;
    if (!factored_for || !same(*factored_for, bm.params)) {
      solver.reset();
      factor_error.clear();
      factored_for = bm.params;
      try {
        SaddleSystem sys = assemble(*sp, bm.params, bm.data, Method::classical, nullptr);
        A = std::move(sys.matrix);
        solver = std::make_unique<SaddleSolver>(A, sys.blocks);
        factor_time = solver->factor_seconds();
      } catch (const std::exception& e) {
        factor_error = e.what();
      }
    }
    const auto bc = boundary_constraints(*sp, bm.data.bc);
    for (Method m : cfg.methods) {
      SweepRun run;
      run.record.method = to_string(m);
      run.record.example = cfg.example;
      run.record.k = cfg.k;
      run.record.level = level;
      run.record.gamma = bm.gamma;
      run.record.mu = bm.params.mu;
      run.record.lambda = bm.lambda;
      run.record.err.h = mesh->h();
      run.record.err.dof = BlockMap::of(*sp).n;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (!solver) throw SolverError(factor_error);
        const Eigen::VectorXd rhs = assemble_rhs(*sp, bm.data, m, &cache, bc, bm.params);
        Solution sol = solver->solve(*sp, rhs);
        run.relative_residual = sol.stats.relative_residual;
        if (bm.exact) run.record.err = compute_errors(sol, *bm.exact);
        run.max_velocity = max_velocity(sol);
        if (cfg.example == "ex3") run.samples = sample_fields(sol);
        if (cfg.keep_solutions) run.solution = std::move(sol);
        run.ok = true;
      } catch (const std::exception& e) {
        run.error = e.what();
      }
      run.record.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() + factor_time;
      factor_time = 0.0;
      run.record.err.wall_time = run.record.time_s;
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

}  // namespace detail

/// Runs every (level, value, method) combination and returns them in that
/// order. One factorization is shared by all runs whose matrix parameters
/// agree; solver failures are recorded per run. With `jobs` > 1, levels are
/// processed concurrently; the result order is unchanged.
inline std::vector<SweepRun> run_sweep(const SweepConfig& cfg, std::vector<SweepLevel>* levels_out = nullptr) {
  check_k(cfg.k);
  if (cfg.values.empty()) throw Error("run_sweep: parameter list is empty");
  if (cfg.levels.empty()) throw Error("run_sweep: no refinement levels");
  if (cfg.jobs < 1) throw Error("run_sweep: jobs must be at least 1");
  const std::size_t n = cfg.levels.size();
  std::vector<std::vector<SweepRun>> per_level(n);
  std::vector<SweepLevel> levels(n);
  const auto jobs = static_cast<std::size_t>(cfg.jobs);
  for (std::size_t first = 0; first < n; first += jobs) {
    const std::size_t last = std::min(n, first + jobs);
    if (last - first == 1) {
      per_level[first] = detail::run_sweep_level(cfg, cfg.levels[first], levels[first]);
      continue;
    }
    std::vector<std::future<std::vector<SweepRun>>> pending;
    for (std::size_t i = first; i < last; ++i)
      pending.push_back(std::async(std::launch::async, [&cfg, &levels, i] {
        return detail::run_sweep_level(cfg, cfg.levels[i], levels[i]);
      }));
    for (std::size_t i = first; i < last; ++i) per_level[i] = pending[i - first].get();
  }
  std::vector<SweepRun> runs;
  for (auto& r : per_level)
    for (auto& run : r) runs.push_back(std::move(run));
  if (levels_out)
    for (auto& l : levels) levels_out->push_back(std::move(l));
  return runs;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRun>& runs) {
  os << csv_header() << '\n';
  for (const auto& r : runs) write_csv_row(os, r.record);
}

}  // namespace sdfem
