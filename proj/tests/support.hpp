#pragma once

#include <polyplate.hpp>

#include <gtest/gtest.h>

#include <random>

namespace polyplate::testing {

inline Polygon unit_square() { return {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}; }

// Exact integral of x^p y^q over a polygon: Green's theorem turns it into
// edge integrals of x^(p+1) y^q dy, each a polynomial in the edge parameter.
inline double monomial_integral(const Polygon& poly, int p, int q) {
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  double total = 0.0;
  for (std::size_t e = 0; e < poly.size(); ++e) {
    const Vec2 a = poly[e], d = poly[(e + 1) % poly.size()] - a;
    // coefficients in t of (a.x + t d.x)^(p+1) and (a.y + t d.y)^q
    std::vector<double> cx(static_cast<std::size_t>(p + 2)), cy(static_cast<std::size_t>(q + 1));
    for (int k = 0; k <= p + 1; ++k) cx[k] = binom(p + 1, k) * std::pow(a.x(), p + 1 - k) * std::pow(d.x(), k);
    for (int k = 0; k <= q; ++k) cy[k] = binom(q, k) * std::pow(a.y(), q - k) * std::pow(d.y(), k);
    double s = 0.0;
    for (std::size_t i = 0; i < cx.size(); ++i)
      for (std::size_t j = 0; j < cy.size(); ++j) s += cx[i] * cy[j] / static_cast<double>(i + j + 1);
    total += s * d.y();
  }
  return total / (p + 1);
}

// Rotate a point about the origin.
inline Vec2 rotate(const Vec2& p, double angle) { return Eigen::Rotation2Dd(angle) * p; }

inline Polygon rotate(const Polygon& poly, double angle) {
  Polygon out;
  for (const auto& v : poly) out.push_back(rotate(v, angle));
  return out;
}

// Block-diagonal dof rotation for (w, beta_x, beta_y) per node.
inline Eigen::MatrixXd dof_rotation(std::size_t nodes, double angle) {
  const Eigen::Matrix2d r = Eigen::Rotation2Dd(angle).toRotationMatrix();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(3 * nodes), static_cast<Eigen::Index>(3 * nodes));
  for (std::size_t i = 0; i < nodes; ++i) {
    const auto k = static_cast<Eigen::Index>(3 * i);
    t(k, k) = 1.0;
    t.block<2, 2>(k + 1, k + 1) = r;
  }
  return t;
}

// Nodal dofs sampled from fields w(x), beta(x).
template <class W, class B>
Eigen::VectorXd sample_dofs(const Polygon& poly, W&& w, B&& beta) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(3 * poly.size()));
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 b = beta(poly[i]);
    u.segment<3>(static_cast<Eigen::Index>(3 * i)) << w(poly[i]), b.x(), b.y();
  }
  return u;
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace polyplate::testing
