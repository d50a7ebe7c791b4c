#pragma once

#include "polyplate/common.hpp"

#include <array>
#include <map>
#include <mutex>

namespace polyplate {

/// Quadrature rule on the unit reference triangle in barycentric form.
/// Weights sum to one, so a rule maps to a physical triangle by scaling
/// the weights with the triangle area.
struct TriangleRule {
  int degree = 0;
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};

struct PolygonQuadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  double area() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("gauss_legendre: need at least one point");
  GaussLegendre r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  auto legendre = [n](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    r.nodes[static_cast<std::size_t>(i)] = x;
    r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

namespace detail {

inline void add_center(TriangleRule& r, double w) {
  r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(w);
}

inline void add_orbit3(TriangleRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  r.bary.push_back({a, a, b});
  r.bary.push_back({a, b, a});
  r.bary.push_back({b, a, a});
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

inline void add_orbit6(TriangleRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  r.bary.push_back({a, b, c});
  r.bary.push_back({a, c, b});
  r.bary.push_back({b, a, c});
  r.bary.push_back({b, c, a});
  r.bary.push_back({c, a, b});
  r.bary.push_back({c, b, a});
  for (int i = 0; i < 6; ++i) r.weights.push_back(w);
}

// Weights below are for the reference triangle of area 1/2; they are
// rescaled to unit sum on construction.
inline TriangleRule make_symmetric_rule(int degree) {
  TriangleRule r;
  switch (degree) {
    case 1:
      add_center(r, 0.5);
      r.degree = 1;
      break;
    case 2:
      add_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
      r.degree = 2;
      break;
    case 3:  // the 4-point degree-3 rule has a negative weight; use degree 4
    case 4:
      add_orbit3(r, 0.091576213509770743460, 0.054975871827660933819);
      add_orbit3(r, 0.44594849091596488632, 0.11169079483900573285);
      r.degree = 4;
      break;
    case 5:
      add_center(r, 0.1125);
      add_orbit3(r, 0.10128650732345633880, 0.062969590272413576298);
      add_orbit3(r, 0.47014206410511508977, 0.066197076394253090369);
      r.degree = 5;
      break;
    case 6:
      add_orbit3(r, 0.063089014491502228340, 0.025422453185103408460);
      add_orbit3(r, 0.24928674517091042129, 0.058393137863189683013);
      add_orbit6(r, 0.053145049844816947353, 0.31035245103378440542, 0.041425537809186787597);
      r.degree = 6;
      break;
    case 7:
    case 8:
      add_center(r, 0.0721578038388935841255455552445323);
      add_orbit3(r, 0.170569307751760206622293501491464, 0.0516086852673591251408957751460645);
      add_orbit3(r, 0.0505472283170309754584235505965989, 0.0162292488115990401554629641708902);
      add_orbit3(r, 0.459292588292723156028815514494169, 0.0475458171336423123969480521942921);
      add_orbit6(r, 0.008394777409957605337213834539296, 0.263112829634638113421785786284643,
                 0.0136151570872174971324223450369544);
      r.degree = 8;
      break;
    default:
      throw ArgumentError("no symmetric triangle rule of degree " + std::to_string(degree));
  }
  for (double& w : r.weights) w *= 2.0;
  return r;
}

// Collapsed-square (Duffy) product rule; positive weights, any degree.
inline TriangleRule make_conical_rule(int degree) {
  const int m = degree / 2 + 1;
  const GaussLegendre gl = gauss_legendre(m);
  TriangleRule r;
  r.degree = degree;
  for (int i = 0; i < m; ++i) {
    const double u = 0.5 * (gl.nodes[static_cast<std::size_t>(i)] + 1.0);
    const double wu = 0.5 * gl.weights[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j) {
      const double v = 0.5 * (gl.nodes[static_cast<std::size_t>(j)] + 1.0);
      const double wv = 0.5 * gl.weights[static_cast<std::size_t>(j)];
      const double l1 = u;
      const double l2 = v * (1.0 - u);
      r.bary.push_back({1.0 - l1 - l2, l1, l2});
      // reference area 1/2 -> unit sum
      r.weights.push_back(2.0 * wu * wv * (1.0 - u));
    }
  }
  return r;
}

}  // namespace detail

/// Triangle rule exact for polynomials of total degree `degree`.
/// Symmetric Gauss rules up to degree 8, conical product rules above.
inline const TriangleRule& triangle_rule(int degree) {
  if (degree < 1) throw ArgumentError("triangle_rule: degree must be >= 1");
  static std::mutex mtx;
  static std::map<int, TriangleRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end()) {
    TriangleRule r = degree <= 8 ? detail::make_symmetric_rule(degree) : detail::make_conical_rule(degree);
    it = cache.emplace(degree, std::move(r)).first;
  }
  return it->second;
}

/// Fan triangulation of a convex polygon about its centroid, with the
/// triangle rule of the requested degree on each sub-triangle.
inline PolygonQuadrature polygon_quadrature(std::span<const Vec2> poly, int degree) {
  if (degree < 1) throw ArgumentError("polygon_quadrature: degree must be >= 1");
  if (poly.size() < 3) throw ArgumentError("polygon_quadrature: need at least 3 vertices");
  const double area = signed_area(poly);
  const double s = bbox_scale(poly);
  if (!(area > 1e-14 * s * s)) throw ArgumentError("polygon_quadrature: degenerate polygon");
  const TriangleRule& rule = triangle_rule(degree);
  const Vec2 c = centroid(poly);
  const std::size_t n = poly.size();
  PolygonQuadrature q;
  q.points.reserve(n * rule.weights.size());
  q.weights.reserve(n * rule.weights.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double ta = triangle_area(c, a, b);
    if (ta <= 0.0) continue;
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      const auto& l = rule.bary[k];
      q.points.push_back(l[0] * c + l[1] * a + l[2] * b);
      q.weights.push_back(rule.weights[k] * ta);
    }
  }
  return q;
}

/// Gauss-Legendre points on the segment [a, b]; weights carry the length.
inline PolygonQuadrature segment_quadrature(const Vec2& a, const Vec2& b, int npoints) {
  const GaussLegendre gl = gauss_legendre(npoints);
  const double len = (b - a).norm();
  PolygonQuadrature q;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = 0.5 * (gl.nodes[i] + 1.0);
    q.points.push_back(a + t * (b - a));
    q.weights.push_back(0.5 * gl.weights[i] * len);
  }
  return q;
}

}  // namespace polyplate
