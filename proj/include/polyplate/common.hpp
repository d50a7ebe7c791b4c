#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyplate {

using Vec2 = Eigen::Vector2d;
using Polygon = std::vector<Vec2>;

// Error hierarchy. Everything thrown by the library derives from Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct GenerationError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct EvaluationError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(const std::string& what, int line_number)
      : Error("line " + std::to_string(line_number) + ": " + what), line(line_number) {}
  int line;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Signed area of triangle (a, b, c); positive when counter-clockwise.
inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

inline double signed_area(std::span<const Vec2> poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

/// Area centroid of a simple polygon.
inline Vec2 centroid(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  // shift to the first vertex to limit cancellation
  const Vec2 o = poly[0];
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i] - o;
    const Vec2 q = poly[(i + 1) % n] - o;
    const double cr = cross(p, q);
    a += cr;
    c += cr * (p + q);
  }
  if (a == 0.0) throw GeometryError("centroid of a zero-area polygon");
  return o + c / (3.0 * a);
}

inline double diameter(std::span<const Vec2> poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, (poly[i] - poly[j]).norm());
  return d;
}

/// Largest side of the axis-aligned bounding box.
inline double bbox_scale(std::span<const Vec2> pts) {
  if (pts.empty()) return 0.0;
  Vec2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).maxCoeff();
}

/// True when every corner turns left by more than `tol` (cross product of
/// consecutive edge vectors, scaled by the squared bounding-box size).
inline bool is_convex_ccw(std::span<const Vec2> poly, double rel_tol = 1e-12) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  const double s = bbox_scale(poly);
  if (s <= 0.0) return false;
  const double tol = rel_tol * s * s;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = poly[(i + 1) % n] - poly[i];
    const Vec2 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (cross(e0, e1) <= tol) return false;
  }
  return signed_area(poly) > 0.0;
}

inline void require_convex_ccw(std::span<const Vec2> poly) {
  if (poly.size() < 3) throw ArgumentError("polygon needs at least 3 vertices");
  if (!is_convex_ccw(poly)) throw ArgumentError("polygon is not convex and counter-clockwise");
}

/// Distance from p to the segment [a, b].
inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

/// Regular n-gon inscribed in a circle, CCW, first vertex at angle `phase`.
inline Polygon regular_polygon(int n, double radius = 1.0, Vec2 center = Vec2::Zero(),
                               double phase = 0.0) {
  Polygon p;
  p.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = phase + 2.0 * M_PI * i / n;
    p.emplace_back(center.x() + radius * std::cos(t), center.y() + radius * std::sin(t));
  }
  return p;
}

}  // namespace polyplate
