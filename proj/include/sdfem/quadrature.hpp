#pragma once

// Symmetric Gauss rules on the reference triangle and Gauss-Legendre rules on
// [0,1]. Triangle rules are the Strang-Fix / Dunavant families with orbit
// parameters refined to 25 digits (scripts/refine_triangle_rules.py); all
// weights are positive and all points lie inside the triangle.

#include <span>
#include <string>
#include <vector>

#include "sdfem/common.hpp"

namespace sdfem {

struct TriangleRule {
  std::vector<Bary> points;     // barycentric coordinates
  std::vector<double> weights;  // sum to 1/2 (reference area)
  int exact_degree = 0;

  std::size_t size() const { return points.size(); }
};

struct EdgeRule {
  std::vector<double> points;   // parameter in [0,1]
  std::vector<double> weights;  // sum to 1
  int exact_degree = 0;

  std::size_t size() const { return points.size(); }
};

namespace detail {

struct OrbitRule {
  double centroid_weight = 0.0;  // 0 => no centroid point
  std::vector<std::array<double, 2>> s21;   // (a, w): points (a, a, 1-2a)
  std::vector<std::array<double, 3>> s111;  // (a, b, w): permutations of (a, b, 1-a-b)
  int degree = 0;
};

inline TriangleRule expand(const OrbitRule& o) {
  TriangleRule r;
  r.exact_degree = o.degree;
  auto add = [&r](double l0, double l1, double l2, double w) {
    r.points.push_back({l0, l1, l2});
    r.weights.push_back(0.5 * w);
  };
  if (o.centroid_weight > 0.0) add(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, o.centroid_weight);
  for (const auto& [a, w] : o.s21) {
    const double b = 1.0 - 2.0 * a;
    add(a, a, b, w);
    add(a, b, a, w);
    add(b, a, a, w);
  }
  for (const auto& [a, b, w] : o.s111) {
    const double c = 1.0 - a - b;
    add(a, b, c, w);
    add(a, c, b, w);
    add(b, a, c, w);
    add(b, c, a, w);
    add(c, a, b, w);
    add(c, b, a, w);
  }
  return r;
}

inline const std::vector<OrbitRule>& orbit_table() {
  static const std::vector<OrbitRule> table = {
      {1.0, {}, {}, 1},
      {0.0, {{0.1666666666666666666666667, 0.3333333333333333333333333}}, {}, 2},
      {0.225,
       {{0.1012865073234563388009874, 0.1259391805448271525956839},
        {0.4701420641051150897704412, 0.1323941527885061807376494}},
       {},
       5},
      {0.0,
       {{0.2492867451709104212916386, 0.1167862757263793660252896},
        {0.0630890144915022283403316, 0.05084490637020681692093681}},
       {{0.05314504984481694735324967, 0.3103524510337844054166077, 0.08285107561837357519355346}},
       6},
      {0.1443156076777871682510911,
       {{0.4592925882927231560288155, 0.0950916342672846247938961},
        {0.1705693077517602066222935, 0.1032173705347182502817916},
        {0.05054722831703097545842355, 0.03245849762319808031092593}},
       {{0.008394777409957605337213835, 0.2631128296346381134217858, 0.02723031417443499426484469}},
       8},
      {0.0908179903827535800952866,
       {{0.4855776333836573773675075, 0.03672595775646670471700607},
        {0.1094815754850370547954586, 0.04532105943552793478260564}},
       {{0.1417072194148799547566833, 0.307939838764120950165155, 0.07275791684542010860431518},
        {0.02500353476268638607398848, 0.2466725606399026939172765, 0.02832724253105748483673706},
        {0.00954081540029945758015281, 0.06680325101220026577354021, 0.009421666963732823459927471}},
       10},
  };
  return table;
}

}  // namespace detail

inline constexpr int max_triangle_degree = 10;
inline constexpr int max_edge_degree = 11;

/// Cheapest tabulated symmetric rule that integrates every polynomial of total
/// degree <= `degree` exactly on a triangle.
inline const TriangleRule& triangle_rule(int degree) {
  if (degree < 1) throw Error("triangle_rule: degree must be >= 1, got " + std::to_string(degree));
  if (degree > max_triangle_degree)
    throw Error("triangle_rule: degree " + std::to_string(degree) + " exceeds the supported table (max " +
                std::to_string(max_triangle_degree) + ")");
  static const std::vector<TriangleRule> rules = [] {
    std::vector<TriangleRule> out;
    for (const auto& o : detail::orbit_table()) out.push_back(detail::expand(o));
    return out;
  }();
  for (const auto& r : rules)
    if (r.exact_degree >= degree) return r;
  return rules.back();
}

/// Gauss-Legendre rule on [0,1] exact for polynomials of degree <= `degree`.
inline const EdgeRule& edge_rule(int degree) {
  if (degree < 0) throw Error("edge_rule: negative degree");
  if (degree > max_edge_degree)
    throw Error("edge_rule: degree " + std::to_string(degree) + " exceeds the supported table");
  static const std::vector<EdgeRule> rules = [] {
    const std::vector<std::vector<std::array<double, 2>>> gl = {
        {{0.5, 1.0}},
        {{0.2113248654051871177454, 0.5}, {0.7886751345948128822546, 0.5}},
        {{0.1127016653792583114821, 0.2777777777777777777778},
         {0.5, 0.4444444444444444444444},
         {0.8872983346207416885179, 0.2777777777777777777778}},
        {{0.06943184420297371238803, 0.1739274225687269286865},
         {0.3300094782075718675987, 0.3260725774312730713135},
         {0.6699905217924281324013, 0.3260725774312730713135},
         {0.930568155797026287612, 0.1739274225687269286865}},
        {{0.04691007703066800360119, 0.1184634425280945437571},
         {0.2307653449471584544818, 0.2393143352496832340206},
         {0.5, 0.2844444444444444444444},
         {0.7692346550528415455182, 0.2393143352496832340206},
         {0.9530899229693319963988, 0.1184634425280945437571}},
        {{0.03376524289842398609385, 0.08566224618958517252015},
         {0.1693953067668677431693, 0.1803807865240693037849},
         {0.3806904069584015456847, 0.2339569672863455236949},
         {0.6193095930415984543153, 0.2339569672863455236949},
         {0.8306046932331322568307, 0.1803807865240693037849},
         {0.9662347571015760139062, 0.08566224618958517252015}},
    };
    std::vector<EdgeRule> out;
    for (const auto& table : gl) {
      EdgeRule r;
      r.exact_degree = 2 * static_cast<int>(table.size()) - 1;
      for (const auto& [t, w] : table) {
        r.points.push_back(t);
        r.weights.push_back(w);
      }
      out.push_back(std::move(r));
    }
    return out;
  }();
  return rules[static_cast<std::size_t>(degree / 2)];
}

/// Degree used for right-hand sides and error norms.
inline constexpr int default_quadrature_degree = 8;

/// Physical point of barycentric coordinates `b` in the triangle (a, b, c).
inline Point bary_to_point(const std::array<Point, 3>& v, const Bary& b) {
  return b[0] * v[0] + b[1] * v[1] + b[2] * v[2];
}

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

/// Affine-mapped quadrature over the triangle with vertices `v`.
template <class F>
double integrate_on_triangle(const TriangleRule& rule, const std::array<Point, 3>& v, F&& integrand) {
  const double jac = 2.0 * std::abs(signed_area(v[0], v[1], v[2]));
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weights[q] * integrand(bary_to_point(v, rule.points[q]));
  return jac * sum;
}

}  // namespace sdfem
