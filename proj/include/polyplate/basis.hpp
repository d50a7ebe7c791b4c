#pragma once

#include "polyplate/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace polyplate {

/// Basis values and gradients at one point of a polygon.
///
/// `lambda`/`grad_lambda` are the Wachspress coordinates. The serendipity
/// fields are filled only by PolygonBasis::serendipity(): `psi` holds the
/// mid-edge functions (psi[k] belongs to the midpoint of edge k, which joins
/// vertex k to vertex k+1) and `vertex` the quadratic vertex functions.
struct BasisEval {
  std::vector<double> lambda;
  std::vector<Vec2> grad_lambda;
  std::vector<double> psi;
  std::vector<Vec2> grad_psi;
  std::vector<double> vertex;
  std::vector<Vec2> grad_vertex;
};

/// Wachspress and quadratic serendipity functions on one convex polygon.
///
/// Construction does the per-polygon work once: corner areas for the
/// Wachspress weights, and the coefficient matrix that maps the pairwise
/// products lambda_a * lambda_b to the 2n serendipity functions.
///
/// The serendipity build goes in two steps. First every interior pair
/// (a, b) that is not an edge of the polygon is redistributed onto the 2n
/// boundary nodes with the minimum-norm coefficients that keep quadratic
/// precision (the polar form of each quadratic at (v_a, v_b) is reproduced
/// from its values at the boundary nodes). Interior pairs vanish on the
/// boundary, so on each edge the result reduces to the quadratic Bernstein
/// basis of that edge. Second, the boundary collocation matrix of those
/// intermediate functions is inverted, which gives the Lagrange property at
/// vertices and edge midpoints.
class PolygonBasis {
 public:
  explicit PolygonBasis(Polygon vertices) : verts_(std::move(vertices)) {
    require_convex_ccw(verts_);
    n_ = verts_.size();
    diam_ = diameter(verts_);
    center_ = Vec2::Zero();
    for (const auto& v : verts_) center_ += v;
    center_ /= static_cast<double>(n_);
    local_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) local_[i] = verts_[i] - center_;
    corner_area_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
      corner_area_[i] = triangle_area(local_[prev(i)], local_[i], local_[next(i)]);
    build_serendipity();
  }

  std::size_t size() const { return n_; }
  const Polygon& vertices() const { return verts_; }
  double diameter_value() const { return diam_; }
  Vec2 edge_midpoint(std::size_t k) const { return 0.5 * (verts_[k] + verts_[next(k)]); }

  /// Distance from p to the nearest edge (negative outside).
  double edge_clearance(const Vec2& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_; ++k) {
      const Vec2 e = local_[next(k)] - local_[k];
      const double a = triangle_area(p - center_, local_[k], local_[next(k)]);
      d = std::min(d, 2.0 * a / e.norm());
    }
    return d;
  }

  BasisEval wachspress(const Vec2& p) const {
    BasisEval out;
    compute_wachspress(p, out);
    return out;
  }

  BasisEval serendipity(const Vec2& p) const {
    BasisEval out;
    compute_wachspress(p, out);
    apply_serendipity(out);
    return out;
  }

  /// Values (no gradients) at a point on the boundary, where the
  /// coordinates reduce to linear interpolation along the edge.
  BasisEval boundary_values(const Vec2& p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity(), best_t = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const Vec2 e = verts_[next(k)] - verts_[k];
      const double t = std::clamp((p - verts_[k]).dot(e) / e.squaredNorm(), 0.0, 1.0);
      const double d = (verts_[k] + t * e - p).norm();
      if (d < best_d) best = k, best_d = d, best_t = t;
    }
    if (best_d > 1e-9 * diam_) throw EvaluationError("boundary_values: point is not on the boundary");
    BasisEval out;
    out.lambda.assign(n_, 0.0);
    out.grad_lambda.assign(n_, Vec2(NAN, NAN));
    out.lambda[best] = 1.0 - best_t;
    out.lambda[next(best)] = best_t;
    apply_serendipity(out);
    return out;
  }

 private:
  void apply_serendipity(BasisEval& out) const {
    const std::size_t np = pairs_.size();
    Eigen::VectorXd mu(np);
    Eigen::MatrixXd dmu(np, 2);
    for (std::size_t q = 0; q < np; ++q) {
      const auto [a, b] = pairs_[q];
      const double f = a == b ? 1.0 : 2.0;
      mu(q) = f * out.lambda[a] * out.lambda[b];
      const Vec2 g = f * (out.lambda[a] * out.grad_lambda[b] + out.lambda[b] * out.grad_lambda[a]);
      dmu(q, 0) = g.x();
      dmu(q, 1) = g.y();
    }
    const Eigen::VectorXd val = coeff_ * mu;
    const Eigen::MatrixXd grad = coeff_ * dmu;
    out.vertex.resize(n_);
    out.grad_vertex.resize(n_);
    out.psi.resize(n_);
    out.grad_psi.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      out.vertex[i] = val(static_cast<Eigen::Index>(i));
      out.grad_vertex[i] = grad.row(static_cast<Eigen::Index>(i)).transpose();
      out.psi[i] = val(static_cast<Eigen::Index>(n_ + i));
      out.grad_psi[i] = grad.row(static_cast<Eigen::Index>(n_ + i)).transpose();
    }
  }

  std::size_t next(std::size_t i) const { return (i + 1) % n_; }
  std::size_t prev(std::size_t i) const { return (i + n_ - 1) % n_; }

  void compute_wachspress(const Vec2& p, BasisEval& out) const {
    const Vec2 x = p - center_;
    std::vector<double> a(n_);
    std::vector<Vec2> grad_a(n_);
    const double tol = 1e-12 * diam_;
    for (std::size_t k = 0; k < n_; ++k) {
      const Vec2 e = local_[next(k)] - local_[k];
      a[k] = triangle_area(x, local_[k], local_[next(k)]);
      if (!(2.0 * a[k] / e.norm() > tol))
        throw EvaluationError("basis evaluated on or outside the polygon boundary");
      grad_a[k] = 0.5 * Vec2(-e.y(), e.x());
    }
    out.lambda.resize(n_);
    out.grad_lambda.resize(n_);
    std::vector<Vec2> r(n_);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t im = prev(i);
      const double w = corner_area_[i] / (a[im] * a[i]);
      out.lambda[i] = w;
      wsum += w;
      r[i] = -(grad_a[im] / a[im] + grad_a[i] / a[i]);
    }
    Vec2 rbar = Vec2::Zero();
    for (std::size_t i = 0; i < n_; ++i) {
      out.lambda[i] /= wsum;
      rbar += out.lambda[i] * r[i];
    }
    for (std::size_t i = 0; i < n_; ++i) out.grad_lambda[i] = out.lambda[i] * (r[i] - rbar);
  }

  // Polar form of the monomials {1, X, Y, X^2, XY, Y^2} at (p, q).
  static Eigen::Matrix<double, 6, 1> polar(const Vec2& p, const Vec2& q) {
    Eigen::Matrix<double, 6, 1> v;
    v << 1.0, 0.5 * (p.x() + q.x()), 0.5 * (p.y() + q.y()), p.x() * q.x(),
        0.5 * (p.x() * q.y() + p.y() * q.x()), p.y() * q.y();
    return v;
  }

  void build_serendipity() {
    const std::size_t nodes = 2 * n_;
    // pair index -> boundary node (or -1 for an interior pair)
    std::vector<long> node_of_pair;
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a; b < n_; ++b) {
        pairs_.emplace_back(a, b);
        long node = -1;
        if (a == b) {
          node = static_cast<long>(a);
        } else if (b == next(a)) {
          node = static_cast<long>(n_ + a);
        } else if (a == next(b)) {
          node = static_cast<long>(n_ + b);
        }
        node_of_pair.push_back(node);
      }
    }
    const std::size_t np = pairs_.size();

    // scaled coordinates keep the 6 x 2n constraint system well conditioned
    std::vector<Vec2> s(n_);
    for (std::size_t i = 0; i < n_; ++i) s[i] = local_[i] / diam_;
    Eigen::MatrixXd cons(6, static_cast<Eigen::Index>(nodes));
    for (std::size_t i = 0; i < n_; ++i) {
      cons.col(static_cast<Eigen::Index>(i)) = polar(s[i], s[i]);
      cons.col(static_cast<Eigen::Index>(n_ + i)) = polar(s[i], s[next(i)]);
    }
    const Eigen::MatrixXd gram = cons * cons.transpose();
    const Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram);

    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(np));
    for (std::size_t q = 0; q < np; ++q) {
      if (node_of_pair[q] >= 0) {
        xi(node_of_pair[q], static_cast<Eigen::Index>(q)) = 1.0;
        continue;
      }
      const auto [a, b] = pairs_[q];
      const Eigen::VectorXd c = cons.transpose() * gram_ldlt.solve(polar(s[a], s[b]));
      xi.col(static_cast<Eigen::Index>(q)) = c;
    }

    // collocation at the boundary nodes; interior pairs vanish there
    Eigen::MatrixXd colloc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(nodes));
    for (std::size_t e = 0; e < nodes; ++e) {
      // pairwise products at node e, in the scaled 1 / 2 convention of mu
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np));
      for (std::size_t q = 0; q < np; ++q) {
        const auto [a, b] = pairs_[q];
        double la = 0.0, lb = 0.0;
        if (e < n_) {
          la = a == e ? 1.0 : 0.0;
          lb = b == e ? 1.0 : 0.0;
        } else {
          const std::size_t k = e - n_;
          la = (a == k || a == next(k)) ? 0.5 : 0.0;
          lb = (b == k || b == next(k)) ? 0.5 : 0.0;
        }
        mu(static_cast<Eigen::Index>(q)) = (a == b ? 1.0 : 2.0) * la * lb;
      }
      colloc.row(static_cast<Eigen::Index>(e)) = (xi * mu).transpose();
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(colloc);
    if (!lu.isInvertible()) throw GeometryError("serendipity collocation matrix is singular");
    // psi_f = sum_g B(f, g) xi_g with psi_f(node_e) = delta  =>  B = colloc^{-T}
    const Eigen::MatrixXd bmat = lu.inverse().transpose();
    coeff_ = bmat * xi;
  }

  Polygon verts_;
  std::size_t n_ = 0;
  double diam_ = 0.0;
  Vec2 center_;
  std::vector<Vec2> local_;
  std::vector<double> corner_area_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  Eigen::MatrixXd coeff_;
};

inline BasisEval wachspress(const Polygon& polygon, const Vec2& p) { return PolygonBasis(polygon).wachspress(p); }

inline BasisEval serendipity(const Polygon& polygon, const Vec2& p) { return PolygonBasis(polygon).serendipity(p); }

enum class BasisKind { wachspress, serendipity };

/// Random interior point, kept away from the boundary by blending with the centroid.
template <class Rng>
Vec2 random_interior_point(const Polygon& poly, Rng& rng, double shrink = 0.9) {
  std::exponential_distribution<double> ex(1.0);
  Vec2 p = Vec2::Zero();
  double s = 0.0;
  for (const auto& v : poly) {
    const double w = ex(rng);
    p += w * v;
    s += w;
  }
  p /= s;
  const Vec2 c = centroid(poly);
  return c + shrink * (p - c);
}

/// Random convex CCW n-gon: sorted random angles on a circle, then a random
/// affine stretch and rotation. Shapes with very short edges or nearly flat
/// corners are rejected.
template <class Rng>
Polygon random_convex_polygon(int n, Rng& rng, double min_edge = 0.05, double min_sine = 0.05) {
  if (n < 3) throw ArgumentError("random_convex_polygon: need n >= 3");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (double& x : t) x = 2.0 * M_PI * u(rng);
    std::sort(t.begin(), t.end());
    const double sx = 0.5 + u(rng), sy = 0.5 + u(rng), rot = 2.0 * M_PI * u(rng);
    const Vec2 shift(4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0);
    const Eigen::Rotation2Dd r(rot);
    Polygon p;
    for (double a : t) p.push_back(shift + r * Vec2(sx * std::cos(a), sy * std::sin(a)));
    const double d = diameter(p);
    bool ok = is_convex_ccw(p);
    for (int i = 0; ok && i < n; ++i) {
      const Vec2 e0 = p[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>((i + n - 1) % n)];
      const Vec2 e1 = p[static_cast<std::size_t>((i + 1) % n)] - p[static_cast<std::size_t>(i)];
      if (e1.norm() < min_edge * d || cross(e0.normalized(), e1.normalized()) < min_sine) ok = false;
    }
    if (ok) return p;
  }
  throw GenerationError("random_convex_polygon: no acceptable polygon found");
}

/// Max relative deviation between analytic gradients and central finite
/// differences (step 1e-6 x diameter) at random interior points.
inline double gradient_check(BasisKind kind, const Polygon& polygon, int npoints, unsigned seed = 1) {
  if (npoints < 1) throw ArgumentError("gradient_check: npoints must be >= 1");
  const PolygonBasis basis(polygon);
  std::mt19937_64 rng(seed);
  const double step = 1e-6 * basis.diameter_value();
  auto values = [&](const Vec2& p) {
    if (kind == BasisKind::wachspress) return basis.wachspress(p).lambda;
    BasisEval e = basis.serendipity(p);
    std::vector<double> v = e.vertex;
    v.insert(v.end(), e.psi.begin(), e.psi.end());
    return v;
  };
  auto gradients = [&](const Vec2& p) {
    if (kind == BasisKind::wachspress) return basis.wachspress(p).grad_lambda;
    BasisEval e = basis.serendipity(p);
    std::vector<Vec2> g = e.grad_vertex;
    g.insert(g.end(), e.grad_psi.begin(), e.grad_psi.end());
    return g;
  };
  double worst = 0.0;
  for (int k = 0; k < npoints; ++k) {
    const Vec2 p = random_interior_point(polygon, rng, 0.8);
    const auto g = gradients(p);
    const auto fxp = values(p + Vec2(step, 0.0));
    const auto fxm = values(p - Vec2(step, 0.0));
    const auto fyp = values(p + Vec2(0.0, step));
    const auto fym = values(p - Vec2(0.0, step));
    double scale = 0.0, dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec2 fd((fxp[i] - fxm[i]) / (2.0 * step), (fyp[i] - fym[i]) / (2.0 * step));
      scale = std::max(scale, g[i].cwiseAbs().maxCoeff());
      dev = std::max(dev, (fd - g[i]).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, scale > 0.0 ? dev / scale : dev);
  }
  return worst;
}

}  // namespace polyplate
