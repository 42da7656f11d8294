#pragma once

// Local shape functions written as polynomials in barycentric coordinates.

#include <vector>

#include "sdfem/common.hpp"
#include "sdfem/quadrature.hpp"

namespace sdfem {

/// c * l0^a0 * l1^a1 * l2^a2
struct Mono {
  double c = 0.0;
  std::array<int, 3> a{};
};

struct LPoly {
  std::vector<Mono> terms;

  LPoly() = default;
  LPoly(std::initializer_list<Mono> t) : terms(t) {}

  double value(const Bary& l) const {
    double s = 0.0;
    for (const auto& m : terms) s += m.c * ipow(l[0], m.a[0]) * ipow(l[1], m.a[1]) * ipow(l[2], m.a[2]);
    return s;
  }

  /// Partial derivatives with respect to l0, l1, l2 treated as independent.
  std::array<double, 3> dlambda(const Bary& l) const {
    std::array<double, 3> d{0.0, 0.0, 0.0};
    for (const auto& m : terms) {
      const double p0 = ipow(l[0], m.a[0]), p1 = ipow(l[1], m.a[1]), p2 = ipow(l[2], m.a[2]);
      if (m.a[0] > 0) d[0] += m.c * m.a[0] * ipow(l[0], m.a[0] - 1) * p1 * p2;
      if (m.a[1] > 0) d[1] += m.c * m.a[1] * p0 * ipow(l[1], m.a[1] - 1) * p2;
      if (m.a[2] > 0) d[2] += m.c * m.a[2] * p0 * p1 * ipow(l[2], m.a[2] - 1);
    }
    return d;
  }

  LPoly& add(double c, int a0, int a1, int a2) {
    terms.push_back({c, {a0, a1, a2}});
    return *this;
  }

  LPoly& add(const LPoly& o, double scale = 1.0) {
    for (auto m : o.terms) {
      m.c *= scale;
      terms.push_back(m);
    }
    return *this;
  }

  LPoly operator*(const LPoly& o) const {
    LPoly r;
    for (const auto& x : terms)
      for (const auto& y : o.terms)
        r.terms.push_back({x.c * y.c, {x.a[0] + y.a[0], x.a[1] + y.a[1], x.a[2] + y.a[2]}});
    return r;
  }

private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }
};

inline LPoly lambda_poly(int i, double c = 1.0) {
  LPoly p;
  std::array<int, 3> a{0, 0, 0};
  a[static_cast<std::size_t>(i)] = 1;
  p.terms.push_back({c, a});
  return p;
}

inline LPoly constant_poly(double c) { return LPoly{{c, {0, 0, 0}}}; }

/// Vector polynomial: x and y components.
struct VPoly {
  LPoly x, y;

  VPoly& add(const LPoly& p, const Vec2& w) {
    x.add(p, w.x());
    y.add(p, w.y());
    return *this;
  }
};

/// Affine geometry of one triangle. Local edge i is opposite vertex i, with
/// edge vector E_i = z_{i+2} - z_{i+1} (counter-clockwise tangent times length).
struct TriangleGeometry {
  std::array<Point, 3> z;
  std::array<Vec2, 3> E;
  std::array<Vec2, 3> grad_lambda;
  double area = 0.0;

  explicit TriangleGeometry(const std::array<Point, 3>& pts) : z(pts) {
    area = signed_area(z[0], z[1], z[2]);
    if (!(area > 0.0)) throw MeshError("triangle must be counter-clockwise and non-degenerate");
    for (int i = 0; i < 3; ++i) {
      E[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>((i + 2) % 3)] - z[static_cast<std::size_t>((i + 1) % 3)];
      const Vec2& e = E[static_cast<std::size_t>(i)];
      grad_lambda[static_cast<std::size_t>(i)] = Vec2(-e.y(), e.x()) / (2.0 * area);
    }
  }

  Point point(const Bary& b) const { return bary_to_point(z, b); }

  Bary bary(const Point& p) const {
    return {signed_area(p, z[1], z[2]) / area, signed_area(z[0], p, z[2]) / area, signed_area(z[0], z[1], p) / area};
  }

  Vec2 gradient(const LPoly& p, const Bary& l) const {
    const auto d = p.dlambda(l);
    return d[0] * grad_lambda[0] + d[1] * grad_lambda[1] + d[2] * grad_lambda[2];
  }

  /// Jacobian J(i,j) = d v_i / d x_j.
  Mat2 jacobian(const VPoly& v, const Bary& l) const {
    Mat2 J;
    J.row(0) = gradient(v.x, l).transpose();
    J.row(1) = gradient(v.y, l).transpose();
    return J;
  }
};

/// Shifted Legendre polynomials on [0,1].
inline double legendre01(int m, double s) {
  switch (m) {
    case 0: return 1.0;
    case 1: return 2.0 * s - 1.0;
    case 2: return 6.0 * s * s - 6.0 * s + 1.0;
    default: throw Error("legendre01: degree > 2 not needed");
  }
}

// ---------------------------------------------------------------------------
// Scalar Lagrange shape functions

/// P2 nodal functions: vertices 0..2, then midpoints of edges 0..2.
inline std::vector<LPoly> lagrange_p2() {
  std::vector<LPoly> out;
  for (int i = 0; i < 3; ++i) {
    LPoly p;
    std::array<int, 3> sq{0, 0, 0}, lin{0, 0, 0};
    sq[static_cast<std::size_t>(i)] = 2;
    lin[static_cast<std::size_t>(i)] = 1;
    p.terms.push_back({2.0, sq});
    p.terms.push_back({-1.0, lin});
    out.push_back(p);
  }
  for (int i = 0; i < 3; ++i) {
    std::array<int, 3> a{0, 0, 0};
    a[static_cast<std::size_t>((i + 1) % 3)] = 1;
    a[static_cast<std::size_t>((i + 2) % 3)] = 1;
    out.push_back(LPoly{{4.0, a}});
  }
  return out;
}

/// P3 vertex function of local vertex i: l(3l-1)(3l-2)/2.
inline LPoly lagrange_p3_vertex(int i) {
  const LPoly l = lambda_poly(i);
  LPoly a = lambda_poly(i, 3.0);
  a.add(constant_poly(-1.0));
  LPoly b = lambda_poly(i, 3.0);
  b.add(constant_poly(-2.0));
  LPoly r = l * a * b;
  for (auto& m : r.terms) m.c *= 0.5;
  return r;
}

/// P3 edge node function at the point with l_a = 2/3, l_b = 1/3: 9/2 l_a l_b (3 l_a - 1).
inline LPoly lagrange_p3_edge(int a, int b) {
  LPoly t = lambda_poly(a, 3.0);
  t.add(constant_poly(-1.0));
  LPoly r = lambda_poly(a) * lambda_poly(b) * t;
  for (auto& m : r.terms) m.c *= 4.5;
  return r;
}

inline LPoly cubic_bubble(double c) { return LPoly{{c, {1, 1, 1}}}; }

}  // namespace sdfem
