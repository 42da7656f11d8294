#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "sdfem/bench.hpp"

using namespace sdfem;

namespace {

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
  const SparseMatrix d = a - b;
  double m = 0.0;
  for (int c = 0; c < d.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(d, c); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

/// Coefficient vector of the exact solution: interpolants of velocity and
/// pressure, multiplier = Darcy pressure trace, mean multiplier 0.
Eigen::VectorXd exact_vector(const Spaces& sp, const ExactSolution& ex) {
  const BlockMap bm = BlockMap::of(sp);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(bm.n);
  x.segment(bm.us, sp.stokes.n_dofs) = interpolate(sp.stokes, ex.us).coeffs();
  x.segment(bm.ud, sp.darcy.n_dofs) = interpolate(sp.darcy, ex.ud).coeffs();
  x.segment(bm.p, sp.pressure.n_dofs) = interpolate(sp.pressure, ex.ps, ex.pd).coeffs();
  x.segment(bm.lam, sp.trace.n_dofs) = interpolate(sp.trace, ex.pd, ex.pd).coeffs();
  return x;
}

}  // namespace

TEST(Assemble, MatrixIdenticalForBothMethods) {
  for (const std::string id : {"ex1", "ex2"}) {
    const Mesh m = benchmark_mesh(id, 1);
    for (int k : {2, 3}) {
      const auto sp = build_spaces(m, k);
      const Benchmark b = make_benchmark(id, id == "ex1" ? 10.0 : 1e-3);
      const auto a = assemble(sp, b.params, b.data, Method::classical);
      const auto r = assemble(sp, b.params, b.data, Method::robust);
      ASSERT_EQ(a.matrix.nonZeros(), r.matrix.nonZeros());
      EXPECT_EQ(max_abs_diff(a.matrix, r.matrix), 0.0);
      EXPECT_GT((a.rhs - r.rhs).norm(), 0.0);
    }
  }
}

TEST(Assemble, DimensionsAndSymmetryBeforePenalty) {
  const Mesh m = benchmark_mesh("ex1", 0);
  const auto sp = build_spaces(m, 2);
  const auto A = assemble_saddle_matrix(sp, ModelParams{});
  EXPECT_EQ(A.rows(), 319);
  const SparseMatrix At = A.transpose();
  EXPECT_LT(max_abs_diff(A, At), 1e-12);
}

TEST(Assemble, RejectsMeshWithoutInterface) {
  const Mesh m = Mesh::from_triangles({Point(0, 0), Point(1, 0), Point(0, 1), Point(1, 1)}, {{0, 1, 2}, {1, 3, 2}},
                                      {Subdomain::stokes, Subdomain::stokes});
  EXPECT_THROW(assemble_saddle_matrix(build_spaces(m, 2), ModelParams{}), Error);
}

TEST(Solve, HomogeneousDataGivesZero) {
  const Mesh m = benchmark_mesh("ex1", 0);
  const auto sp = build_spaces(m, 2);
  ProblemData d;
  d.bc.stokes = [](const Point&, BoundaryMarker) { return Vec2(0, 0); };
  const auto sys = assemble(sp, ModelParams{}, d, Method::robust);
  const auto sol = solve(sp, sys);
  EXPECT_LT(sol.x.norm(), 1e-9);
}

TEST(Solve, ExampleOneCoarseContracts) {
  const Mesh m = benchmark_mesh("ex1", 0);
  const auto sp = build_spaces(m, 2);
  const Benchmark b = example1(1.0);
  for (Method method : {Method::classical, Method::robust}) {
    const auto sys = assemble(sp, b.params, b.data, method);
    const auto sol = solve(sp, sys);
    EXPECT_LT(sol.stats.relative_residual, 1e-9);
    // pressure mean
    const auto row_sum = [&] {
      double s = 0.0;
      for (int t = 0; t < m.n_triangles(); ++t) {
        const auto r = local_mean_constraint(sp.pressure, t);
        s += r.mat.row(0).dot(sol.pressure.local_coeffs(sp.pressure.cell_index(t)));
      }
      return s;
    }();
    EXPECT_LT(std::abs(row_sum), 1e-9);
    // discrete constraints hold
    const auto cr = constraint_residual(sys, sol.x);
    const double scale = sys.rhs.segment(sys.blocks.p, sp.pressure.n_dofs).cwiseAbs().maxCoeff() + 1.0;
    EXPECT_LT(cr.divergence, 1e-9 * scale);
    EXPECT_LT(cr.interface, 1e-9 * scale);
    // Dirichlet trace close to the data
    double worst = 0.0, umax = 0.0;
    for (const auto& c : sys.constraints.stokes) {
      worst = std::max(worst, std::abs(sol.velocity_s.coeffs()(c.dof) - c.value));
      umax = std::max(umax, std::abs(c.value));
    }
    EXPECT_LT(worst, 1e-6 * umax);
  }
}

TEST(Solve, HomogeneousStokesTraceIsSmall) {
  const Mesh m = load_msh(std::string(SDFEM_DATA_DIR) + "/cavity_coarse.msh");
  const auto sp = build_spaces(m, 2);
  Benchmark b = example3(1.0, 0.0);
  b.data.bc.stokes = [](const Point&, BoundaryMarker) { return Vec2(0, 0); };
  b.data.fs = [](const Point& p) { return Vec2(std::sin(3 * p.y()), p.x()); };
  const auto sys = assemble(sp, b.params, b.data, Method::classical);
  const auto sol = solve(sp, sys);
  double trace = 0.0;
  for (const auto& c : sys.constraints.stokes) trace = std::max(trace, std::abs(sol.velocity_s.coeffs()(c.dof)));
  EXPECT_LT(trace, 1e-6 * sol.velocity_s.coeffs().cwiseAbs().maxCoeff());
}

TEST(Solve, DoublingPenaltyHalvesBoundaryDefect) {
  const Mesh m = benchmark_mesh("ex1", 0);
  const auto sp = build_spaces(m, 2);
  Benchmark b = example1(1.0);
  auto defect = [&](double P) {
    b.params.penalty = P;
    const auto sys = assemble(sp, b.params, b.data, Method::classical);
    const auto sol = solve(sp, sys);
    double w = 0.0;
    for (const auto& c : sys.constraints.stokes) w = std::max(w, std::abs(sol.velocity_s.coeffs()(c.dof) - c.value));
    return w;
  };
  const double d1 = defect(1e4), d2 = defect(2e4);
  EXPECT_GT(d1, 0.0);
  EXPECT_LE(d2, d1 / 1.9);
}

TEST(Solve, MissingMeanRowIsReportedSingular) {
  const Mesh m = benchmark_mesh("ex1", 0);
  const auto sp = build_spaces(m, 2);
  const Benchmark b = example1(1.0);
  auto sys = assemble(sp, b.params, b.data, Method::classical);
  const int r = sys.blocks.mean;
  for (int c = 0; c < sys.matrix.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(sys.matrix, c); it; ++it)
      if (it.row() == r || it.col() == r) it.valueRef() = 0.0;
  try {
    solve(sp, sys);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("mean_multiplier"), std::string::npos) << e.what();
  }
}

TEST(Solve, DenseOracleOnBorderedSpdSystem) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  const int n = 40, m = 10;
  Eigen::MatrixXd R(n, n), B(m, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = g(rng);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = g(rng);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = R * R.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  K.topRightCorner(n, m) = B.transpose();
  K.bottomLeftCorner(m, n) = B;
  Eigen::VectorXd rhs(n + m);
  for (int i = 0; i < n + m; ++i) rhs(i) = g(rng);
  const SparseMatrix S = K.sparseView();
  BlockMap bm;
  bm.n = n + m;
  const SaddleSolver solver(S, bm);
  const Eigen::VectorXd x = solver.solve_vector(rhs);
  const Eigen::VectorXd y = K.fullPivLu().solve(rhs);
  EXPECT_LT((x - y).norm() / y.norm(), 1e-10);
}

TEST(Solve, InvariantUnderVertexRenumbering) {
  const Mesh m = benchmark_mesh("ex1", 1);
  std::vector<int> perm(static_cast<std::size_t>(m.n_vertices()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point> verts(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) verts[static_cast<std::size_t>(perm[i])] = m.vertices()[i];
  std::vector<std::array<int, 3>> tris;
  std::vector<Subdomain> tags;
  for (const auto& t : m.triangles()) {
    tris.push_back({perm[static_cast<std::size_t>(t.v[1])], perm[static_cast<std::size_t>(t.v[2])], perm[static_cast<std::size_t>(t.v[0])]});
    tags.push_back(t.domain);
  }
  const Mesh pm = Mesh::from_triangles(verts, tris, tags);
  const Benchmark b = example1(1.0);
  auto run = [&](const Mesh& mesh, const Spaces& sp) {
    (void)mesh;
    return solve(sp, assemble(sp, b.params, b.data, Method::robust));
  };
  for (int k : {2, 3}) {
    const auto s1 = build_spaces(m, k), s2 = build_spaces(pm, k);
    const auto a = run(m, s1), c = run(pm, s2);
    const PointLocator l1(m), l2(pm);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 50; ++i) {
      const Point p(u(rng), u(rng));
      const auto h1 = l1.locate(p), h2 = l2.locate(p);
      ASSERT_TRUE(h1 && h2);
      const bool st = m.triangle(h1->first).domain == Subdomain::stokes;
      const Vec2 v1 = (st ? a.velocity_s : a.velocity_d).vector_at(h1->first, p);
      const Vec2 v2 = (st ? c.velocity_s : c.velocity_d).vector_at(h2->first, p);
      EXPECT_LT((v1 - v2).norm(), 1e-9);
      EXPECT_NEAR(a.pressure.scalar_at(h1->first, p), c.pressure.scalar_at(h2->first, p), 1e-9);
    }
  }
}

TEST(Solve, ExactInterpolantResidualDecreases) {
  std::vector<double> res;
  for (int level = 0; level < 3; ++level) {
    const Mesh m = benchmark_mesh("ex1", level);
    const auto sp = build_spaces(m, 2);
    const Benchmark b = example1(1.0);
    const auto sys = assemble(sp, b.params, b.data, Method::classical);
    const Eigen::VectorXd r = sys.matrix * exact_vector(sp, *b.exact) - sys.rhs;
    res.push_back(r.head(sys.blocks.p).norm());
  }
  EXPECT_LT(res[1], res[0] / 2);
  EXPECT_LT(res[2], res[1] / 2);
}

TEST(Solve, DumpWritesMatrixMarket) {
  const Mesh m = benchmark_mesh("ex1", 0);
  const auto sp = build_spaces(m, 2);
  const Benchmark b = example1(1.0);
  const auto sys = assemble(sp, b.params, b.data, Method::classical);
  const auto stem = std::filesystem::temp_directory_path() / "sdfem_dump_test";
  dump_system(sys, stem);
  SparseMatrix back;
  ASSERT_TRUE(Eigen::loadMarket(back, stem.string() + "_matrix.mtx"));
  EXPECT_EQ(back.rows(), sys.matrix.rows());
  EXPECT_LT(max_abs_diff(back, sys.matrix), 1e-6);
}
