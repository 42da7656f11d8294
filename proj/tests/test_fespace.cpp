#include <random>

#include <gtest/gtest.h>

#include "sdfem/fespace.hpp"

using namespace sdfem;

namespace {

Mesh unit_mesh(int level) { return generate_structured({{0, 1, 0.5, 1}, {0, 1, 0, 0.5}, 2, 2, 2}, level); }

Bary random_bary(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return {1.0 - a - b, a, b};
}

}  // namespace

TEST(BuildSpace, DimensionsK2) {
  const Mesh m = unit_mesh(0);
  const auto s = build_spaces(m, 2);
  EXPECT_EQ(s.stokes.n_dofs, 2 * (9 + 16 + 8));
  EXPECT_EQ(s.darcy.n_dofs, 2 * (16 + 8));
  EXPECT_EQ(s.pressure.n_dofs, 48);
  EXPECT_EQ(s.trace.n_dofs, 4);
}

TEST(BuildSpace, DimensionsK3) {
  const Mesh m = unit_mesh(1);
  // Stokes: 25 vertices, 56 edges, 32 triangles; Darcy: 56 edges, 32 triangles.
  const auto s = build_spaces(m, 3);
  EXPECT_EQ(s.stokes.n_dofs, 2 * (25 + 2 * 56 + 3 * 32));
  EXPECT_EQ(s.darcy.n_dofs, 3 * 56 + 6 * 32);
  EXPECT_EQ(s.pressure.n_dofs, 6 * 64);
  EXPECT_EQ(s.trace.n_dofs, 3 * 4);
}

TEST(BuildSpace, RejectsMismatch) {
  const Mesh only_darcy = Mesh::from_triangles({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}}, {Subdomain::darcy});
  EXPECT_THROW(build_space(only_darcy, {FamilyTag::lagrange_bubble_vec, 2}), Error);
  EXPECT_THROW(build_space(only_darcy, {FamilyTag::trace, 2}), Error);
  EXPECT_THROW(build_space(only_darcy, {FamilyTag::raviart_thomas, 4}), Error);
}

TEST(BuildSpace, SharedEntitiesShareIds) {
  const Mesh m = unit_mesh(1);
  const auto s = build_spaces(m, 3);
  // The same physical node must get the same global id from every triangle.
  std::map<int, Point> where;
  for (int c = 0; c < s.stokes.n_cells(); ++c) {
    const int t = s.stokes.cells[static_cast<std::size_t>(c)];
    const auto nodes = stokes_node_bary(m, t, 3);
    const auto p = m.triangle_points(t);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const int g = s.stokes.cell_dofs[static_cast<std::size_t>(c)][2 * i];
      const Point x = bary_to_point(p, nodes[i]);
      auto [it, fresh] = where.emplace(g, x);
      if (!fresh) {
        EXPECT_LT((it->second - x).norm(), 1e-14);
      }
      EXPECT_LT((s.stokes.dof_meta[static_cast<std::size_t>(g)].location - x).norm(), 1e-14);
    }
  }
}

TEST(EvalBasis, LagrangeNodalAndBubble) {
  const Mesh m = unit_mesh(0);
  for (int k : {2, 3}) {
    const auto sp = build_space(m, {FamilyTag::lagrange_bubble_vec, k});
    const int t = sp.cells[0];
    const auto nodes = stokes_node_bary(m, t, k);
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      const auto ev = eval_basis(sp, 0, nodes[a]);
      for (std::size_t i = 0; i < static_cast<std::size_t>(lagrange_local_size(k)); ++i)
        EXPECT_NEAR(ev.value[2 * i].x(), i == a ? 1.0 : 0.0, 1e-14) << k << " " << a << " " << i;
    }
    const auto ev = eval_basis(sp, 0, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    EXPECT_NEAR(ev.value[2 * nodes.size()].x(), 1.0, 1e-14);
  }
}

TEST(EvalBasis, PartitionOfUnity) {
  std::mt19937 rng(1);
  const Mesh m = unit_mesh(1);
  for (int k : {2, 3}) {
    const auto sp = build_space(m, {FamilyTag::lagrange_bubble_vec, k});
    // P_k nodal functions; for k = 3 the centroid function 27 l0 l1 l2 follows the edge nodes.
    const auto n_nodes = stokes_node_bary(m, sp.cells[0], k).size() + (k == 3 ? 1 : 0);
    for (int trial = 0; trial < 20; ++trial) {
      const auto ev = eval_basis(sp, trial % sp.n_cells(), random_bary(rng));
      double s = 0.0;
      for (std::size_t i = 0; i < n_nodes; ++i) s += ev.value[2 * i].x();
      EXPECT_NEAR(s, 1.0, 1e-13);
    }
    const auto ps = build_space(m, {FamilyTag::discontinuous, k});
    const auto ev = eval_basis(ps, 3, random_bary(rng));
    double s = 0.0;
    for (double v : ev.scalar) s += v;
    EXPECT_NEAR(s, 1.0, 1e-13);
  }
}

TEST(EvalBasis, RtBiorthogonalityOnReference) {
  const Mesh m = Mesh::from_triangles({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}}, {Subdomain::darcy});
  for (int k : {2, 3}) {
    const LocalRT rt(m, 0, k);
    EXPECT_LT(rt.cond, k == 2 ? 1e3 : 1e4) << k;
    for (int j = 0; j < rt.size(); ++j) {
      const auto l = rt_functionals(m, 0, k, [&](const Bary& b) {
        std::vector<Vec2> v;
        rt.eval(b, v);
        return v[static_cast<std::size_t>(j)];
      });
      for (int i = 0; i < rt.size(); ++i) EXPECT_NEAR(l(i), i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(EvalBasis, RtDivergenceMatchesFiniteDifferences) {
  std::mt19937 rng(3);
  const Mesh m = unit_mesh(0);
  for (int k : {2, 3}) {
    const auto sp = build_space(m, {FamilyTag::raviart_thomas, k});
    for (int c = 0; c < sp.n_cells(); ++c) {
      const LocalElement el(sp, c);
      const Bary b = random_bary(rng);
      const Point x = el.geometry().point(b);
      const auto ev = el.eval(b);
      const double eps = 1e-5;
      auto val = [&](const Point& p) { return el.eval(el.geometry().bary(p), false).value; };
      const auto xp = val(x + Vec2(eps, 0)), xm = val(x - Vec2(eps, 0));
      const auto yp = val(x + Vec2(0, eps)), ym = val(x - Vec2(0, eps));
      for (std::size_t j = 0; j < ev.div.size(); ++j) {
        const double fd = (xp[j].x() - xm[j].x() + yp[j].y() - ym[j].y()) / (2 * eps);
        EXPECT_NEAR(ev.div[j], fd, 1e-6 * (1.0 + std::abs(fd)));
        EXPECT_NEAR(ev.div[j], ev.jac[j].trace(), 1e-13 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST(EvalBasis, RtNormalContinuity) {
  std::mt19937 rng(5);
  std::normal_distribution<double> n01;
  const Mesh m = unit_mesh(1);
  for (int k : {2, 3}) {
    const auto sp = build_space(m, {FamilyTag::raviart_thomas, k});
    Eigen::VectorXd x(sp.n_dofs);
    for (int i = 0; i < sp.n_dofs; ++i) x(i) = n01(rng);
    const FieldFunction f(sp, x);
    for (int e : m.edges_of_class(EdgeClass::interior_d)) {
      const auto& ed = m.edge(e);
      for (double s : {0.1, 0.5, 0.83}) {
        const Point p = m.edge_point(e, s);
        const double a = f.vector_at(ed.tris[0], p).dot(ed.normal);
        const double b = f.vector_at(ed.tris[1], p).dot(ed.normal);
        EXPECT_NEAR(a, b, 1e-12 * (1.0 + std::abs(a)));
      }
    }
  }
}

TEST(Interpolate, LinearFieldIntoStokes) {
  std::mt19937 rng(11);
  const Mesh m = unit_mesh(1);
  const VectorField lin = [](const Point& p) { return Vec2(1.0 + 2 * p.x() - p.y(), -0.5 + 0.3 * p.x() + 4 * p.y()); };
  for (int k : {2, 3}) {
    const auto sp = build_space(m, {FamilyTag::lagrange_bubble_vec, k});
    const auto f = interpolate(sp, lin);
    for (int i = 0; i < 50; ++i) {
      const int c = static_cast<int>(rng() % static_cast<unsigned>(sp.n_cells()));
      const LocalElement el(sp, c);
      const Bary b = random_bary(rng);
      EXPECT_LT((f.vector_value(el, c, b) - lin(el.geometry().point(b))).norm(), 1e-12);
    }
  }
}

TEST(Interpolate, StokesReproducesItsOwnSpace) {
  // A quartic field (k=3) / cubic (k=2) that lies in P_k but is not affine.
  const Mesh m = unit_mesh(1);
  for (int k : {2, 3}) {
    const VectorField f = [k](const Point& p) {
      const double x = p.x(), y = p.y();
      return k == 2 ? Vec2(x * x - x * y, y * y + 2 * x) : Vec2(x * x * y - y * y * y, x * y * y + x);
    };
    const auto sp = build_space(m, {FamilyTag::lagrange_bubble_vec, k});
    const auto fi = interpolate(sp, f);
    const LocalElement el(sp, 5);
    const Bary b{0.2, 0.3, 0.5};
    EXPECT_LT((fi.vector_value(el, 5, b) - f(el.geometry().point(b))).norm(), 1e-12);
  }
}

TEST(Interpolate, RtReproducesLinearField) {
  std::mt19937 rng(13);
  const Mesh m = unit_mesh(1);
  const VectorField xy = [](const Point& p) { return Vec2(p.x(), p.y()); };
  for (int k : {2, 3}) {
    const auto sp = build_space(m, {FamilyTag::raviart_thomas, k});
    const auto f = interpolate(sp, xy);
    for (int i = 0; i < 30; ++i) {
      const int c = static_cast<int>(rng() % static_cast<unsigned>(sp.n_cells()));
      const LocalElement el(sp, c);
      const Bary b = random_bary(rng);
      EXPECT_LT((f.vector_value(el, c, b) - xy(el.geometry().point(b))).norm(), 1e-12);
    }
  }
}

TEST(Interpolate, ConstantPressure) {
  const Mesh m = unit_mesh(0);
  for (int k : {2, 3}) {
    const auto sp = build_space(m, {FamilyTag::discontinuous, k});
    const auto f = interpolate(sp, [](const Point&) { return 1.0; });
    for (int i = 0; i < sp.n_dofs; ++i) EXPECT_EQ(f.coeffs()(i), 1.0);
  }
}

TEST(Interpolate, TraceMomentsReproducePolynomial) {
  const Mesh m = unit_mesh(0);
  const auto sp = build_space(m, {FamilyTag::trace, 3});
  const auto f = interpolate(sp, [](const Point& p) { return p.x() * p.x(); });
  for (int c = 0; c < sp.n_cells(); ++c) {
    const int e = sp.cells[static_cast<std::size_t>(c)];
    for (double s : {0.0, 0.3, 1.0}) {
      const auto phi = eval_trace_basis(sp, s);
      double v = 0.0;
      for (int j = 0; j < 3; ++j) v += f.coeffs()(sp.cell_dofs[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]) * phi[static_cast<std::size_t>(j)];
      EXPECT_NEAR(v, std::pow(m.edge_point(e, s).x(), 2), 1e-13);
    }
  }
}
