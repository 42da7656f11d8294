#include <set>

#include <gtest/gtest.h>

#include "sdfem/mesh.hpp"

using namespace sdfem;

namespace {

RectanglePair unit_square() { return {{0, 1, 0.5, 1}, {0, 1, 0, 0.5}, 2, 2, 2}; }
RectanglePair example2_geometry() { return {{0, pi, 0, pi}, {0, pi, -pi, 0}, 2, 2, 2}; }

int vertices_in(const Mesh& m, Subdomain d) {
  std::set<int> v;
  for (int t : m.triangles_in(d))
    for (int i : m.triangle(t).v) v.insert(i);
  return static_cast<int>(v.size());
}

int edges_in(const Mesh& m, Subdomain d) {
  int n = 0;
  for (int e = 0; e < m.n_edges(); ++e) n += m.edge_in(e, d);
  return n;
}

}  // namespace

TEST(StructuredMesh, CoarsestCounts) {
  const Mesh m = generate_structured(unit_square(), 0);
  EXPECT_EQ(m.n_triangles(), 16);
  EXPECT_EQ(m.interface_edges().size(), 2u);
  // cells are 0.5 x 0.25
  EXPECT_NEAR(m.h(), std::hypot(0.5, 0.25), 1e-15);
  EXPECT_EQ(vertices_in(m, Subdomain::stokes), 9);
  EXPECT_EQ(edges_in(m, Subdomain::stokes), 16);
  EXPECT_EQ(m.triangles_in(Subdomain::stokes).size(), 8u);
}

TEST(StructuredMesh, SquareCellsHypotenuse) {
  const Mesh m = generate_structured({{0, 1, 0.5, 1}, {0, 1, 0, 0.5}, 2, 1, 1}, 0);
  EXPECT_NEAR(m.h(), 0.5 * std::sqrt(2.0), 1e-15);
}

TEST(StructuredMesh, RefinementQuadruples) {
  for (int level = 0; level <= 3; ++level) {
    const Mesh m = generate_structured(unit_square(), level);
    EXPECT_EQ(m.n_triangles(), 16 * (1 << (2 * level)));
    EXPECT_NEAR(m.h(), std::hypot(0.5, 0.25) / (1 << level), 1e-14);
  }
}

TEST(StructuredMesh, InterfaceOnExample2Line) {
  const Mesh m = generate_structured(example2_geometry(), 2);
  for (int e : m.interface_edges()) {
    const auto& ed = m.edge(e);
    EXPECT_EQ(m.vertices()[ed.v[0]].y(), 0.0);
    EXPECT_EQ(m.vertices()[ed.v[1]].y(), 0.0);
  }
  EXPECT_EQ(m.interface_edges().size(), 8u);
}

TEST(StructuredMesh, StokesBelowDarcy) {
  const Mesh m = generate_structured({{0, 1, 0, 0.5}, {0, 1, 0.5, 1}, 2, 2, 2}, 1);
  for (int t : m.triangles_in(Subdomain::stokes)) {
    const auto p = m.triangle_points(t);
    EXPECT_LE((p[0].y() + p[1].y() + p[2].y()) / 3.0, 0.5);
  }
  for (int e : m.interface_edges()) EXPECT_NEAR(m.edge(e).normal.y(), 1.0, 1e-15);
}

TEST(StructuredMesh, RejectsDisjointRectangles) {
  EXPECT_THROW(generate_structured({{0, 1, 0.6, 1}, {0, 1, 0, 0.5}, 2, 2, 2}, 0), MeshError);
  EXPECT_THROW(generate_structured({{0, 1, 0.5, 1}, {0, 0.8, 0, 0.5}, 2, 2, 2}, 0), MeshError);
  EXPECT_THROW(generate_structured(unit_square(), -1), MeshError);
}

TEST(MeshInvariants, AreasPerSubdomain) {
  const Mesh m = generate_structured(example2_geometry(), 3);
  EXPECT_NEAR(m.subdomain_area(Subdomain::stokes), pi * pi, 1e-12 * pi * pi);
  EXPECT_NEAR(m.subdomain_area(Subdomain::darcy), pi * pi, 1e-12 * pi * pi);
  for (int t = 0; t < m.n_triangles(); ++t) EXPECT_GT(m.area(t), 0.0);
}

TEST(MeshInvariants, EdgeClassification) {
  const Mesh m = generate_structured(unit_square(), 2);
  int total = 0;
  for (auto c : {EdgeClass::interior_s, EdgeClass::interior_d, EdgeClass::interface, EdgeClass::boundary_s,
                 EdgeClass::boundary_d})
    total += static_cast<int>(m.edges_of_class(c).size());
  EXPECT_EQ(total, m.n_edges());
  for (const auto& e : m.edges()) {
    const bool boundary = e.cls == EdgeClass::boundary_s || e.cls == EdgeClass::boundary_d;
    EXPECT_EQ(boundary, e.tris[1] < 0);
    if (e.cls == EdgeClass::interface) {
      EXPECT_EQ(m.triangle(e.tris[0]).domain, Subdomain::stokes);
      EXPECT_EQ(m.triangle(e.tris[1]).domain, Subdomain::darcy);
      EXPECT_NEAR(e.normal.y(), -1.0, 1e-15);
    }
  }
}

TEST(MeshInvariants, EulerPerSubdomain) {
  const Mesh m = generate_structured(unit_square(), 2);
  for (auto d : {Subdomain::stokes, Subdomain::darcy}) {
    const int V = vertices_in(m, d), E = edges_in(m, d), F = static_cast<int>(m.triangles_in(d).size());
    EXPECT_EQ(V - E + F, 1);
  }
}

TEST(MeshInvariants, ClosedBoundaryFlux) {
  const Mesh m = generate_structured(example2_geometry(), 1);
  for (int t = 0; t < m.n_triangles(); ++t) {
    Vec2 s = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
      const auto& e = m.edge(m.triangle_edges(t)[static_cast<std::size_t>(i)]);
      s += m.triangle_edge_signs(t)[static_cast<std::size_t>(i)] * e.length * e.normal;
    }
    EXPECT_LT(s.norm(), 1e-12);
  }
}

TEST(EdgeGeometry, OrthonormalFrame) {
  const Mesh m = generate_structured(unit_square(), 1);
  for (int e = 0; e < m.n_edges(); ++e) {
    const auto g = edge_geometry(m, e);
    EXPECT_NEAR(g.normal.norm(), 1.0, 1e-15);
    EXPECT_NEAR(g.tangent.norm(), 1.0, 1e-15);
    EXPECT_NEAR(g.normal.dot(g.tangent), 0.0, 1e-15);
    EXPECT_GT(g.length, 0.0);
    const Vec2 rot(-g.normal.y(), g.normal.x());
    EXPECT_NEAR(std::abs(rot.dot(g.tangent)), 1.0, 1e-15);
  }
  EXPECT_THROW(edge_geometry(m, -1), MeshError);
  EXPECT_THROW(edge_geometry(m, m.n_edges()), MeshError);
}

TEST(EdgeGeometry, UnitEdgeLength) {
  const Mesh m = Mesh::from_triangles({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 2}}, {Subdomain::stokes});
  EXPECT_NEAR(edge_geometry(m, m.find_edge(0, 1)).length, 1.0, 1e-15);
  EXPECT_NEAR(edge_geometry(m, m.find_edge(0, 1)).normal.y(), -1.0, 1e-15);
}

TEST(Mesh, ReorientsClockwiseAndRejectsDegenerate) {
  const Mesh m = Mesh::from_triangles({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 2, 1}}, {Subdomain::darcy});
  EXPECT_GT(m.area(0), 0.0);
  EXPECT_THROW(Mesh::from_triangles({Point(0, 0), Point(1, 0), Point(2, 0)}, {{0, 1, 2}}, {Subdomain::darcy}),
               MeshError);
}

TEST(PointLocator, FindsContainingTriangle) {
  const Mesh m = generate_structured(unit_square(), 2);
  const PointLocator loc(m);
  for (double x : {0.01, 0.33, 0.5, 0.77, 0.99})
    for (double y : {0.02, 0.4, 0.5, 0.61, 0.98}) {
      const auto hit = loc.locate(Point(x, y));
      ASSERT_TRUE(hit.has_value());
      const auto p = m.triangle_points(hit->first);
      const Point back = bary_to_point(p, hit->second);
      EXPECT_NEAR((back - Point(x, y)).norm(), 0.0, 1e-14);
    }
  EXPECT_FALSE(loc.locate(Point(1.5, 0.5)).has_value());
}
