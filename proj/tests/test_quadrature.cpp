#include <random>

#include <gtest/gtest.h>

#include "sdfem/mesh.hpp"
#include "sdfem/quadrature.hpp"

using namespace sdfem;

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// int_ref x^a y^b = a! b! / (a+b+2)!
double beta_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

double integrate_monomial(const TriangleRule& r, int a, int b) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q][1], a) * std::pow(r.points[q][2], b);
  return s;
}

}  // namespace

TEST(TriangleRule, ReferenceArea) {
  for (int d = 1; d <= max_triangle_degree; ++d) {
    double s = 0.0;
    for (double w : triangle_rule(d).weights) s += w;
    EXPECT_NEAR(s, 0.5, 1e-15) << d;
  }
}

TEST(TriangleRule, ExactnessSweep) {
  for (int d = 1; d <= max_triangle_degree; ++d) {
    const auto& r = triangle_rule(d);
    EXPECT_GE(r.exact_degree, d);
    for (int a = 0; a <= r.exact_degree; ++a)
      for (int b = 0; a + b <= r.exact_degree; ++b) {
        const double exact = beta_integral(a, b);
        EXPECT_NEAR(integrate_monomial(r, a, b), exact, 1e-13 * exact) << "degree " << d << " x^" << a << " y^" << b;
      }
  }
}

TEST(TriangleRule, PositiveWeightsInsidePoints) {
  for (int d = 1; d <= max_triangle_degree; ++d)
    for (std::size_t q = 0; q < triangle_rule(d).size(); ++q) {
      EXPECT_GT(triangle_rule(d).weights[q], 0.0);
      for (double l : triangle_rule(d).points[q]) EXPECT_GT(l, 0.0);
    }
}

TEST(TriangleRule, DegreeEightSixteenPoints) {
  EXPECT_EQ(triangle_rule(8).size(), 16u);
  EXPECT_NEAR(integrate_monomial(triangle_rule(8), 4, 4), 1.0 / 6300.0, 1e-13 / 6300.0);
}

TEST(TriangleRule, RejectsUnsupportedDegree) {
  EXPECT_THROW(triangle_rule(0), Error);
  EXPECT_THROW(triangle_rule(11), Error);
}

TEST(EdgeRule, ClosedForms) {
  const auto& r5 = edge_rule(9);
  EXPECT_EQ(r5.size(), 5u);
  double s = 0.0, one = 0.0;
  for (std::size_t q = 0; q < r5.size(); ++q) {
    s += r5.weights[q] * std::pow(r5.points[q], 8);
    one += r5.weights[q];
  }
  EXPECT_NEAR(s, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(one, 1.0, 1e-15);
  const auto& r2 = edge_rule(3);
  EXPECT_EQ(r2.size(), 2u);
  double c = 0.0;
  for (std::size_t q = 0; q < r2.size(); ++q) c += r2.weights[q] * std::pow(r2.points[q], 3);
  EXPECT_NEAR(c, 0.25, 1e-15);
}

TEST(EdgeRule, ExactnessSweep) {
  for (int d = 0; d <= max_edge_degree; ++d) {
    const auto& r = edge_rule(d);
    EXPECT_GE(r.exact_degree, d);
    for (int p = 0; p <= r.exact_degree; ++p) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q], p);
      EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14) << d << " " << p;
    }
  }
}

TEST(IntegrateOnTriangle, ConstantGivesArea) {
  const std::array<Point, 3> v = {Point(0.3, -0.2), Point(2.0, 0.1), Point(0.7, 1.9)};
  const double area = std::abs(signed_area(v[0], v[1], v[2]));
  EXPECT_NEAR(integrate_on_triangle(triangle_rule(8), v, [](const Point&) { return 1.0; }), area, 1e-14);
}

TEST(IntegrateOnTriangle, LinearOnReference) {
  const std::array<Point, 3> v = {Point(0, 0), Point(1, 0), Point(0, 1)};
  EXPECT_NEAR(integrate_on_triangle(triangle_rule(1), v, [](const Point& p) { return p.x(); }), 1.0 / 6.0, 1e-15);
}

TEST(IntegrateOnTriangle, DegreeEightPolynomial) {
  // 3 x^5 y^3 - 2 x^2 y^6 + x^8 + 7 on the reference triangle
  const std::array<Point, 3> v = {Point(0, 0), Point(1, 0), Point(0, 1)};
  const double exact = 3 * beta_integral(5, 3) - 2 * beta_integral(2, 6) + beta_integral(8, 0) + 7 * 0.5;
  const double got = integrate_on_triangle(triangle_rule(8), v, [](const Point& p) {
    const double x = p.x(), y = p.y();
    return 3 * std::pow(x, 5) * std::pow(y, 3) - 2 * x * x * std::pow(y, 6) + std::pow(x, 8) + 7.0;
  });
  EXPECT_NEAR(got, exact, 1e-13 * exact);
}

TEST(IntegrateOnTriangle, AffineInvariance) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto f = [](const Point& p) { return std::sin(p.x()) * std::exp(0.3 * p.y()) + p.x() * p.y(); };
  const std::array<Point, 3> ref = {Point(0, 0), Point(1, 0), Point(0, 1)};
  for (int trial = 0; trial < 20; ++trial) {
    Mat2 A;
    A << u(rng), u(rng), u(rng), u(rng);
    if (std::abs(A.determinant()) < 0.1) continue;
    const Vec2 b(u(rng), u(rng));
    const std::array<Point, 3> img = {A * ref[0] + b, A * ref[1] + b, A * ref[2] + b};
    const double lhs = integrate_on_triangle(triangle_rule(8), img, f);
    const double rhs = std::abs(A.determinant()) *
                       integrate_on_triangle(triangle_rule(8), ref, [&](const Point& p) { return f(A * p + b); });
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST(IntegrateOnTriangle, MeshOverload) {
  const Mesh m = generate_structured({{0, 1, 0.5, 1}, {0, 1, 0, 0.5}, 2, 2, 2}, 0);
  for (int t = 0; t < m.n_triangles(); ++t)
    EXPECT_NEAR(integrate_on_triangle(triangle_rule(2), m, t, [](const Point&) { return 1.0; }), m.area(t), 1e-15);
}
