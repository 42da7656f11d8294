// Command-line driver: benchmark sweeps, single solves and diagnostics.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "sdfem/bench.hpp"
#include "sdfem/diagnostics.hpp"

namespace fs = std::filesystem;
using namespace sdfem;

namespace {

struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string example = "ex1";
  std::string method = "both";
  int k = 2;
  int levels = 4;
  int first_level = 0;
  std::vector<double> gamma, mu, lambda;
  double alpha = 1.0;
  double K = 1e-4;
  std::string mesh;
  std::string out;
  int jobs = 1;
  bool dump_system = false;
};

struct DiagnoseConfig {
  std::string check = "reconstruction";
  std::string example = "ex1";
  int k = 2;
  int level = 2;
  int samples = 20;
};

fs::path output_dir(const std::string& flag) {
  fs::path dir = "sdfem_out";
  if (!flag.empty()) {
    dir = flag;
  } else if (const char* env = std::getenv("SDFEM_OUT_DIR"); env && *env) {
    dir = env;
  }
  fs::create_directories(dir);
  return dir;
}

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<Method> parse_methods(const std::string& m) {
  if (m == "classical") return {Method::classical};
  if (m == "robust") return {Method::robust};
  return {Method::classical, Method::robust};
}

/// Swept values and the outer viscosity loop for one example.
struct Plan {
  std::vector<double> swept;
  std::vector<double> outer_mu;
};

Plan plan_for(const RunConfig& c) {
  Plan p;
  if (c.example == "ex1") {
    if (!c.lambda.empty()) throw FlagError("--lambda applies to ex3 only");
    p.swept = c.gamma.empty() ? std::vector<double>{1.0} : c.gamma;
    p.outer_mu = c.mu.empty() ? std::vector<double>{1.0} : c.mu;
  } else if (c.example == "ex2") {
    if (!c.gamma.empty()) throw FlagError("--gamma applies to ex1 only");
    if (!c.lambda.empty()) throw FlagError("--lambda applies to ex3 only");
    p.swept = c.mu.empty() ? std::vector<double>{1.0} : c.mu;
    p.outer_mu = {1.0};
  } else {
    if (!c.gamma.empty()) throw FlagError("--gamma applies to ex1 only");
    if (c.mesh.empty()) throw FlagError("ex3 needs --mesh <cavity.msh>");
    if (!fs::exists(c.mesh)) throw FlagError("mesh file not found: " + c.mesh);
    p.swept = c.lambda.empty() ? std::vector<double>{0.0} : c.lambda;
    p.outer_mu = c.mu.empty() ? std::vector<double>{1.0} : c.mu;
  }
  for (double v : p.swept)
    if (!(v >= 0.0) || (c.example != "ex3" && !(v > 0.0))) throw FlagError("parameter values must be positive");
  for (double v : p.outer_mu)
    if (!(v > 0.0)) throw FlagError("--mu values must be positive");
  return p;
}

std::string order_cell(const Rate& r) {
  std::ostringstream os;
  if (r.valid)
    os << std::fixed << std::setprecision(3) << r.value;
  else
    os << "-";
  return os.str();
}

/// Table per (method, value): dof, E_h, order, e_h, order, time, with orders
/// against the unknown count, log(e_{i-1}/e_i) / log(N_i/N_{i-1}). The last two
/// columns repeat the orders against mesh size.
void print_summary(std::ostream& os, const std::string& example, const std::vector<SweepRun>& runs) {
  std::map<std::tuple<std::string, double, double>, std::vector<const SweepRun*>> groups;
  std::vector<std::tuple<std::string, double, double>> order;
  for (const auto& r : runs) {
    const double v = example == "ex1" ? r.record.gamma : example == "ex2" ? r.record.mu : r.record.lambda;
    const double outer = example == "ex2" ? 0.0 : r.record.mu;
    const auto key = std::make_tuple(r.record.method, outer, v);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    const auto& g = groups[key];
    os << "\n[" << example << " " << std::get<0>(key) << " k=" << g.front()->record.k;
    if (example != "ex2") os << " mu=" << fmt_value(std::get<1>(key));
    os << " " << swept_parameter(example) << "=" << fmt_value(std::get<2>(key)) << "]\n";
    if (example == "ex3") {
      os << std::setw(8) << "dof" << std::setw(14) << "max|u|" << std::setw(10) << "time\n";
      for (const auto* r : g)
        os << std::setw(8) << r->record.err.dof << std::setw(14) << std::setprecision(4) << std::scientific
           << r->max_velocity << std::fixed << std::setw(9) << std::setprecision(2) << r->record.time_s << "\n";
      os << std::defaultfloat;
      continue;
    }
    os << std::setw(8) << "dof" << std::setw(13) << "E_h" << std::setw(8) << "order" << std::setw(13) << "e_h"
       << std::setw(8) << "order" << std::setw(9) << "time" << std::setw(10) << "E_h(h)" << std::setw(10) << "e_h(h)\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto& e = g[i]->record.err;
      Rate rE, re, hE, he;
      if (i > 0) {
        const auto& p = g[i - 1]->record.err;
        rE = rate_between(p.E_h, e.E_h, e.dof, p.dof);
        re = rate_between(p.e_h, e.e_h, e.dof, p.dof);
        hE = rate_between(p.E_h, e.E_h, p.h, e.h);
        he = rate_between(p.e_h, e.e_h, p.h, e.h);
      }
      os << std::setw(8) << e.dof << std::setw(13) << std::setprecision(4) << std::scientific << e.E_h << std::setw(8)
         << order_cell(rE) << std::setw(13) << std::scientific << e.e_h << std::setw(8) << order_cell(re) << std::fixed
         << std::setw(9) << std::setprecision(2) << g[i]->record.time_s << std::setw(10) << order_cell(hE) << std::setw(10)
         << order_cell(he);
      if (!g[i]->ok) os << "  FAILED: " << g[i]->error;
      os << "\n" << std::defaultfloat;
    }
  }
}

void dump_systems(const RunConfig& c, const SweepConfig& sc, const fs::path& dir) {
  for (int level : sc.levels) {
    const Mesh mesh = benchmark_mesh(sc.example, level, sc.mesh_path);
    const Spaces sp = build_spaces(mesh, sc.k);
    for (double v : sc.values) {
      const Benchmark b = make_benchmark(sc.example, v, sc.options);
      for (Method m : sc.methods) {
        const auto sys = assemble(sp, b.params, b.data, m);
        std::ostringstream stem;
        stem << sc.example << "_" << to_string(m) << "_k" << c.k << "_L" << level << "_mu" << fmt_value(sc.options.mu)
             << "_" << swept_parameter(sc.example) << fmt_value(v);
        dump_system(sys, dir / stem.str());
      }
    }
  }
}

int run_solve(const RunConfig& c) {
  const Plan plan = plan_for(c);
  const fs::path dir = output_dir(c.out);
  SweepConfig sc;
  sc.example = c.example;
  sc.methods = parse_methods(c.method);
  sc.k = c.k;
  sc.levels.clear();
  if (c.example == "ex3") {
    sc.levels = {0};
  } else {
    for (int l = 0; l < c.levels; ++l) sc.levels.push_back(c.first_level + l);
  }
  sc.values = plan.swept;
  sc.options.alpha1 = c.alpha;
  sc.options.K = c.K;
  sc.mesh_path = c.mesh;
  sc.jobs = c.jobs;

  std::vector<SweepRun> all;
  for (double mu : plan.outer_mu) {
    sc.options.mu = mu;
    if (c.dump_system) dump_systems(c, sc, dir);
    auto runs = run_sweep(sc);
    for (auto& r : runs) all.push_back(std::move(r));
  }

  bool failed = false;
  for (Method m : sc.methods) {
    const fs::path csv = dir / (c.example + "_" + to_string(m) + "_k" + std::to_string(c.k) + ".csv");
    std::ofstream os(csv);
    os << csv_header() << '\n';
    for (const auto& r : all)
      if (r.record.method == to_string(m)) write_csv_row(os, r.record);
    std::cout << "wrote " << csv.string() << "\n";
  }
  for (const auto& r : all) {
    failed = failed || !r.ok;
    if (c.example == "ex3" && r.ok) {
      const fs::path f = dir / ("ex3_" + r.record.method + "_k" + std::to_string(c.k) + "_mu" + fmt_value(r.record.mu) +
                                "_lambda" + fmt_value(r.record.lambda) + "_fields.csv");
      std::ofstream os(f);
      write_field_samples(os, r.samples);
    }
  }
  std::ostringstream summary;
  print_summary(summary, c.example, all);
  std::cout << summary.str();
  std::ofstream(dir / (c.example + "_summary.txt")) << summary.str();
  if (failed) {
    std::cerr << "error: at least one run failed\n";
    return 1;
  }
  return 0;
}

int run_diagnose(const DiagnoseConfig& d, const std::string& out, std::uint64_t seed) {
  const fs::path dir = output_dir(out);
  nlohmann::json report;
  bool ok = true;
  const bool all = d.check == "all";
  auto mesh_at = [&](int level) { return benchmark_mesh(d.example, level); };

  if (all || d.check == "reconstruction") {
    const Mesh m = mesh_at(d.level);
    const auto sp = build_spaces(m, d.k);
    const auto r0 = check_reconstruction_invariants(sp, d.samples, seed, true);
    const auto r1 = check_reconstruction_invariants(sp, std::max(1, d.samples / 4), seed + 1, false);
    const double defect = reconstruction_moment_defect(sp, ReconstructionCache(sp.stokes));
    std::cout << "reconstruction (" << d.example << ", k=" << d.k << ", level " << d.level << ")\n  " << r0 << "\n  " << r1
              << "\n  max moment defect of (Pi psi - psi) over Stokes shape functions: " << defect << "\n";
    const bool pass = r0.worst.divergence < 1e-9 && r0.worst.interface_jump < 1e-9 && r0.worst.boundary_normal < 1e-9 &&
                      r1.worst.interface_jump < 1e-9 && defect < 1e-12;
    std::cout << "  " << (pass ? "PASS" : "FAIL") << " (thresholds: relative maxima < 1e-9, moments < 1e-12)\n";
    ok = ok && pass;
    report["reconstruction"] = {{"V_h0", to_json(r0)}, {"V_h", to_json(r1)}, {"moment_defect", defect}, {"pass", pass}};
  }
  if (all || d.check == "theta") {
    const ScalarField ps = [](const Point& p) { return std::sin(3 * p.x()) * std::cos(2 * p.y()) + p.x(); };
    const ScalarField pd = [](const Point& p) { return std::exp(p.x() * p.y()); };
    nlohmann::json levels = nlohmann::json::array();
    std::cout << "pressure functionals (" << d.example << ", k=" << d.k << ")\n";
    double prev = 0.0;
    bool pass = true;
    for (int l = 0; l <= d.level; ++l) {
      const Mesh m = mesh_at(l);
      const auto r = check_theta_functional(build_spaces(m, d.k), ps, pd, std::max(1, d.samples / 2), seed);
      std::cout << "  level " << l << ": " << r;
      if (l > 0) std::cout << " ratio=" << prev / r.theta;
      std::cout << "\n";
      pass = pass && r.aleph < 1e-9 && (l == 0 || prev / r.theta >= std::pow(2.0, d.k - 1.2));
      prev = r.theta;
      levels.push_back(to_json(r));
    }
    std::cout << "  " << (pass ? "PASS" : "FAIL") << " (aleph < 1e-9, theta ratio >= 2^(k-1.2))\n";
    ok = ok && pass;
    report["theta"] = {{"levels", levels}, {"pass", pass}};
  }
  if (all || d.check == "infsup") {
    nlohmann::json stable = nlohmann::json::array(), control = nlohmann::json::array();
    std::vector<double> beta;
    std::cout << "inf-sup probe (" << d.example << ", k=" << d.k << ")\n";
    for (int l = 0; l <= d.level; ++l) {
      const Mesh m = mesh_at(l);
      const auto r = infsup_probe(build_spaces(m, d.k));
      const auto n = infsup_probe_p1_p1disc(m);
      std::cout << "  level " << l << ": " << r << " | P1/P1-disc control beta=" << n.beta << "\n";
      beta.push_back(r.beta);
      stable.push_back(to_json(r));
      control.push_back(to_json(n));
    }
    const bool pass = beta.front() > 0.0 && beta.back() / beta.front() >= 0.5;
    std::cout << "  " << (pass ? "PASS" : "FAIL") << " (finest/coarsest >= 0.5)\n";
    ok = ok && pass;
    report["infsup"] = {{"levels", stable}, {"p1_p1disc", control}, {"pass", pass}};
  }
  const fs::path jf = dir / ("diagnostics_" + d.check + ".json");
  std::ofstream(jf) << report.dump(2) << '\n';
  std::cout << "wrote " << jf.string() << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stokes-Darcy finite elements: classical and pressure-robust discretizations"};
  app.require_subcommand(1);
  RunConfig rc;
  DiagnoseConfig dc;

  auto* solve = app.add_subcommand("solve", "Run a benchmark sweep and write CSV files and a summary table");
  solve->add_option("--example", rc.example, "Benchmark")->check(CLI::IsMember({"ex1", "ex2", "ex3"}));
  solve->add_option("--method", rc.method, "Discretization")->check(CLI::IsMember({"classical", "robust", "both"}));
  solve->add_option("--k", rc.k, "Polynomial degree")->check(CLI::IsMember({2, 3}));
  solve->add_option("--levels", rc.levels, "Number of refinement levels (ex1, ex2)")->check(CLI::PositiveNumber);
  solve->add_option("--first-level", rc.first_level, "Coarsest refinement level")->check(CLI::NonNegativeNumber);
  solve->add_option("--gamma", rc.gamma, "Pressure scaling values (ex1)")->delimiter(',');
  solve->add_option("--mu", rc.mu, "Viscosity values (swept for ex2)")->delimiter(',');
  solve->add_option("--lambda", rc.lambda, "Gradient forcing amplitudes (ex3)")->delimiter(',');
  solve->add_option("--alpha", rc.alpha, "BJS coefficient alpha_1/sqrt(kappa) (ex2, ex3)")->check(CLI::PositiveNumber);
  solve->add_option("--K", rc.K, "Permeability")->check(CLI::PositiveNumber);
  solve->add_option("--mesh", rc.mesh, "Gmsh mesh of the cavity (ex3)");
  solve->add_option("--out", rc.out, "Output directory (default: $SDFEM_OUT_DIR or ./sdfem_out)");
  solve->add_option("--jobs", rc.jobs, "Refinement levels solved concurrently")->check(CLI::PositiveNumber);
  solve->add_flag("--dump-system", rc.dump_system, "Write MatrixMarket files of every assembled system");

  std::string diag_out;
  std::uint64_t diag_seed = 1;
  auto* diag = app.add_subcommand("diagnose", "Structural checks of the discretization");
  diag->add_option("--check", dc.check, "Which check")->check(CLI::IsMember({"reconstruction", "theta", "infsup", "all"}));
  diag->add_option("--example", dc.example, "Mesh family")->check(CLI::IsMember({"ex1", "ex2"}));
  diag->add_option("--k", dc.k, "Polynomial degree")->check(CLI::IsMember({2, 3}));
  diag->add_option("--level", dc.level, "Refinement level")->check(CLI::Range(0, 4));
  diag->add_option("--samples", dc.samples, "Random members of the discrete subspace")->check(CLI::PositiveNumber);
  diag->add_option("--out", diag_out, "Output directory (default: $SDFEM_OUT_DIR or ./sdfem_out)");
  diag->add_option("--seed", diag_seed, "Seed for the random members");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return run_solve(rc);
    return run_diagnose(dc, diag_out, diag_seed);
  } catch (const FlagError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
