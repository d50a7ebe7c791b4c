#pragma once

#include "polyplate/element.hpp"
#include "polyplate/system.hpp"

#include <array>
#include <numeric>
#include <string>

namespace polyplate {

/// Second derivatives of one scalar field: (xx, xy, yy).
using Hessian = Eigen::Vector3d;

/// Closed-form plate fields in the gamma = beta + grad w convention.
struct AnalyticalSolution {
  std::string name;
  ScalarField w, beta_x, beta_y;
  std::function<Vec2(const Vec2&)> grad_w, grad_beta_x, grad_beta_y;
  std::function<Hessian(const Vec2&)> hess_w, hess_beta_x, hess_beta_y;
  ScalarField load;
  BcKind bc = BcKind::clamped;
  PlateMaterial material;

  Eigen::Vector3d values(const Vec2& p) const { return {w(p), beta_x(p), beta_y(p)}; }

  /// (w_x, w_y, bx_x, bx_y, by_x, by_y)
  Eigen::Matrix<double, 6, 1> derivatives(const Vec2& p) const {
    const Vec2 gw = grad_w(p), gx = grad_beta_x(p), gy = grad_beta_y(p);
    Eigen::Matrix<double, 6, 1> d;
    d << gw.x(), gw.y(), gx.x(), gx.y(), gy.x(), gy.y();
    return d;
  }

  BoundaryCondition boundary_condition() const {
    if (bc == BcKind::prescribed_field) return BoundaryCondition::prescribed(w, beta_x, beta_y);
    BoundaryCondition b;
    b.kind = bc;
    return b;
  }
};

/// w = 1 + x + y, beta = (-1, -1): zero curvature and zero shear.
inline AnalyticalSolution patch_solution(const PlateMaterial& mat) {
  AnalyticalSolution s;
  s.name = "patch";
  s.material = mat;
  s.bc = BcKind::prescribed_field;
  s.w = [](const Vec2& p) { return 1.0 + p.x() + p.y(); };
  s.beta_x = [](const Vec2&) { return -1.0; };
  s.beta_y = [](const Vec2&) { return -1.0; };
  s.grad_w = [](const Vec2&) { return Vec2(1.0, 1.0); };
  s.grad_beta_x = s.grad_beta_y = [](const Vec2&) { return Vec2(0.0, 0.0); };
  s.hess_w = s.hess_beta_x = s.hess_beta_y = [](const Vec2&) { return Hessian::Zero().eval(); };
  s.load = [](const Vec2&) { return 0.0; };
  return s;
}

namespace detail {
// c(t) = t^3 (t-1)^3 and the quartic l(t) = t(t-1)(5t^2-5t+1) = c''(t)/6
inline double c3(double t) { return std::pow(t * (t - 1.0), 3); }
inline double c3d(double t) { return 3.0 * t * t * (t - 1.0) * (t - 1.0) * (2.0 * t - 1.0); }
inline double l4(double t) { return t * (t - 1.0) * (5.0 * t * t - 5.0 * t + 1.0); }
inline double l4d(double t) { return 20.0 * t * t * t - 30.0 * t * t + 12.0 * t - 1.0; }
inline double l4dd(double t) { return 60.0 * t * t - 60.0 * t + 12.0; }
}  // namespace detail

/// Clamped unit square under a polynomial load with a closed-form solution.
inline AnalyticalSolution nonuniform_square_solution(const PlateMaterial& mat) {
  using namespace detail;
  AnalyticalSolution s;
  s.name = "square_nonuniform";
  s.material = mat;
  s.bc = BcKind::clamped;
  const double c = 2.0 * mat.h * mat.h / (5.0 * (1.0 - mat.nu));
  const double db = mat.bending_rigidity();
  s.w = [c](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return c3(x) * c3(y) / 3.0 - c * (c3(y) * l4(x) + c3(x) * l4(y));
  };
  s.beta_x = [](const Vec2& p) { return -c3(p.y()) * c3d(p.x()) / 3.0; };
  s.beta_y = [](const Vec2& p) { return -c3(p.x()) * c3d(p.y()) / 3.0; };
  s.grad_w = [c](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return Vec2(c3d(x) * c3(y) / 3.0 - c * (c3(y) * l4d(x) + c3d(x) * l4(y)),
                c3(x) * c3d(y) / 3.0 - c * (c3d(y) * l4(x) + c3(x) * l4d(y)));
  };
  s.grad_beta_x = [](const Vec2& p) {
    return Vec2(-2.0 * c3(p.y()) * l4(p.x()), -c3d(p.y()) * c3d(p.x()) / 3.0);
  };
  s.grad_beta_y = [](const Vec2& p) {
    return Vec2(-c3d(p.x()) * c3d(p.y()) / 3.0, -2.0 * c3(p.x()) * l4(p.y()));
  };
  s.hess_w = [c](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return Hessian(2.0 * l4(x) * c3(y) - c * (c3(y) * l4dd(x) + 6.0 * l4(x) * l4(y)),
                   c3d(x) * c3d(y) / 3.0 - c * (c3d(y) * l4d(x) + c3d(x) * l4d(y)),
                   2.0 * c3(x) * l4(y) - c * (6.0 * l4(y) * l4(x) + c3(x) * l4dd(y)));
  };
  s.hess_beta_x = [](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return Hessian(-2.0 * c3(y) * l4d(x), -2.0 * c3d(y) * l4(x), -2.0 * l4(y) * c3d(x));
  };
  s.hess_beta_y = [](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return Hessian(-2.0 * l4(x) * c3d(y), -2.0 * c3d(x) * l4(y), -2.0 * c3(x) * l4d(y));
  };
  s.load = [db](const Vec2& p) {
    const double x = p.x(), y = p.y();
    const double px = 5.0 * x * x - 5.0 * x + 1.0, py = 5.0 * y * y - 5.0 * y + 1.0;
    const double bx = x * (x - 1.0), by = y * (y - 1.0);
    return db * (12.0 * by * px * (2.0 * by * by + bx * py) + 12.0 * bx * py * (2.0 * bx * bx + by * px));
  };
  return s;
}

/// Clamped disk of radius 1 under unit pressure.
inline AnalyticalSolution clamped_disk_solution(const PlateMaterial& mat) {
  AnalyticalSolution s;
  s.name = "circular";
  s.material = mat;
  s.bc = BcKind::clamped;
  const double d = mat.bending_rigidity();
  const double shear = 1.0 / (4.0 * mat.shear_rigidity());
  s.w = [d, shear](const Vec2& p) {
    const double r2 = p.squaredNorm();
    return r2 * r2 / (64.0 * d) - r2 * (shear + 1.0 / (32.0 * d)) + shear + 1.0 / (64.0 * d);
  };
  s.beta_x = [d](const Vec2& p) { return -p.x() * (p.squaredNorm() - 1.0) / (16.0 * d); };
  s.beta_y = [d](const Vec2& p) { return -p.y() * (p.squaredNorm() - 1.0) / (16.0 * d); };
  s.grad_w = [d, shear](const Vec2& p) {
    const double g = p.squaredNorm() / (16.0 * d) - 2.0 * (shear + 1.0 / (32.0 * d));
    return Vec2(g * p.x(), g * p.y());
  };
  s.grad_beta_x = [d](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return Vec2(-(3.0 * x * x + y * y - 1.0) / (16.0 * d), -2.0 * x * y / (16.0 * d));
  };
  s.grad_beta_y = [d](const Vec2& p) {
    const double x = p.x(), y = p.y();
    return Vec2(-2.0 * x * y / (16.0 * d), -(x * x + 3.0 * y * y - 1.0) / (16.0 * d));
  };
  s.hess_w = [d, shear](const Vec2& p) {
    const double x = p.x(), y = p.y();
    const double g = p.squaredNorm() / (16.0 * d) - 2.0 * (shear + 1.0 / (32.0 * d));
    return Hessian(g + x * x / (8.0 * d), x * y / (8.0 * d), g + y * y / (8.0 * d));
  };
  s.hess_beta_x = [d](const Vec2& p) {
    return Hessian(-6.0 * p.x() / (16.0 * d), -2.0 * p.y() / (16.0 * d), -2.0 * p.x() / (16.0 * d));
  };
  s.hess_beta_y = [d](const Vec2& p) {
    return Hessian(-2.0 * p.y() / (16.0 * d), -2.0 * p.x() / (16.0 * d), -6.0 * p.y() / (16.0 * d));
  };
  s.load = [](const Vec2&) { return 1.0; };
  return s;
}

namespace detail {
// individual terms of div Q + q, div M - Q (x), div M - Q (y)
inline std::array<std::array<double, 6>, 3> strong_form_terms(const AnalyticalSolution& s, const Vec2& p) {
  const PlateMaterial& m = s.material;
  const double db = m.bending_rigidity(), ds = m.shear_rigidity(), nu = m.nu, g = 0.5 * (1.0 - nu);
  const Hessian hw = s.hess_w(p), hx = s.hess_beta_x(p), hy = s.hess_beta_y(p);
  const Vec2 gx = s.grad_beta_x(p), gy = s.grad_beta_y(p), gw = s.grad_w(p);
  // M_x = D(bx_x + nu by_y), M_y = D(nu bx_x + by_y), M_xy = D (1-nu)/2 (bx_y + by_x)
  return {{{ds * gx.x(), ds * gy.y(), ds * hw(0), ds * hw(2), s.load(p), 0.0},
           {db * hx(0), db * nu * hy(1), db * g * hx(2), db * g * hy(1), -ds * s.beta_x(p), -ds * gw.x()},
           {db * g * hx(1), db * g * hy(0), db * nu * hx(1), db * hy(2), -ds * s.beta_y(p), -ds * gw.y()}}};
}
}  // namespace detail

/// Residuals of the plate equations at p:
///   div Q + q = 0 and div M - Q = 0, with M = D_b kappa(beta), Q = D_s (beta + grad w).
/// Returned unscaled as (transverse, moment_x, moment_y).
inline Eigen::Vector3d strong_form_residual(const AnalyticalSolution& s, const Vec2& p) {
  const auto t = detail::strong_form_terms(s, p);
  Eigen::Vector3d r;
  for (int i = 0; i < 3; ++i) r(i) = std::accumulate(t[i].begin(), t[i].end(), 0.0);
  return r;
}

/// Each residual divided by the sum of magnitudes of its terms. Thin plates
/// balance terms of order 1/h^3 against each other, so only this scaled
/// form is meaningful across thicknesses.
inline Eigen::Vector3d relative_strong_form_residual(const AnalyticalSolution& s, const Vec2& p) {
  const auto t = detail::strong_form_terms(s, p);
  Eigen::Vector3d r;
  for (int i = 0; i < 3; ++i) {
    double sum = 0.0, mag = 0.0;
    for (double v : t[i]) sum += v, mag += std::abs(v);
    r(i) = mag > 0.0 ? sum / mag : 0.0;
  }
  return r;
}

/// Center deflection of a simply supported square plate (hard support,
/// w = 0 and tangential rotation 0) under uniform load, by double sine series.
/// Returns w_center * D_b / (q a^4); pass shear_rigidity = infinity for the
/// thin-plate value.
inline double navier_center_coefficient(double a, double bending_rigidity, double shear_rigidity, int terms = 401) {
  double sum = 0.0;
  for (int m = 1; m <= terms; m += 2)
    for (int n = 1; n <= terms; n += 2) {
      const double k2 = M_PI * M_PI * (m * m + n * n) / (a * a);
      const double qmn = 16.0 / (M_PI * M_PI * m * n);
      const double sign = ((m + n) / 2 - 1) % 2 == 0 ? 1.0 : -1.0;  // sin(m pi/2) sin(n pi/2)
      const double shear_factor = std::isinf(shear_rigidity) ? 1.0 : 1.0 + bending_rigidity * k2 / shear_rigidity;
      sum += sign * qmn / (bending_rigidity * k2 * k2) * shear_factor;
    }
  return sum * bending_rigidity / (a * a * a * a);
}

}  // namespace polyplate
