#pragma once

#include "polyplate/basis.hpp"
#include "polyplate/quadrature.hpp"

#include <functional>

namespace polyplate {

/// Isotropic plate: Young's modulus, Poisson ratio, thickness, shear correction.
struct PlateMaterial {
  double E = 10.92e6;
  double nu = 0.3;
  double h = 0.1;
  double kappa = 5.0 / 6.0;

  void validate() const {
    if (!(E > 0.0)) throw ArgumentError("material: E must be positive");
    if (!(nu >= 0.0 && nu < 0.5)) throw ArgumentError("material: nu must lie in [0, 0.5)");
    if (!(h > 0.0)) throw ArgumentError("material: thickness must be positive");
    if (!(kappa > 0.0)) throw ArgumentError("material: kappa must be positive");
  }

  double shear_modulus() const { return E / (2.0 * (1.0 + nu)); }
  /// D_b = E h^3 / (12 (1 - nu^2))
  double bending_rigidity() const { return E * h * h * h / (12.0 * (1.0 - nu * nu)); }
  /// D_s = kappa G h
  double shear_rigidity() const { return kappa * shear_modulus() * h; }

  Eigen::Matrix3d bending_matrix() const {
    Eigen::Matrix3d d;
    d << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
    return bending_rigidity() * d;
  }
  Eigen::Matrix2d shear_matrix() const { return shear_rigidity() * Eigen::Matrix2d::Identity(); }
};

/// Which sign the rotations carry in the transverse shear strain.
enum class ShearConvention {
  rotation_plus_gradient,   // gamma = beta + grad w
  gradient_minus_rotation,  // gamma = grad w - beta
};

inline const char* to_string(ShearConvention c) {
  return c == ShearConvention::rotation_plus_gradient ? "beta+grad_w" : "grad_w-beta";
}

struct ElementOptions {
  int stiffness_degree = 4;
  int load_degree = 6;
  ShearConvention convention = ShearConvention::rotation_plus_gradient;
  bool flip_constraint_sign = false;  // mutation hook for the self-test: negates the rotation coupling
};

/// Corner i: its outgoing edge (i -> i+1), incoming edge (i-1 -> i) and
/// det = C_out S_in - S_out C_in of the 2x2 that maps nodal Cartesian shear
/// to the two edge tangential shears.
struct CornerPair {
  std::size_t out_edge = 0;
  std::size_t in_edge = 0;
  double det = 0.0;
};

struct ElementGeometry {
  Polygon vertices;
  std::vector<double> lengths;
  std::vector<double> cosines;  // C_k
  std::vector<double> sines;    // S_k
  std::vector<CornerPair> corners;

  std::size_t size() const { return vertices.size(); }
  std::size_t next(std::size_t i) const { return (i + 1) % vertices.size(); }
};

inline ElementGeometry edge_geometry(const Polygon& polygon) {
  require_convex_ccw(polygon);
  const std::size_t n = polygon.size();
  const double diam = diameter(polygon);
  ElementGeometry g;
  g.vertices = polygon;
  g.lengths.resize(n);
  g.cosines.resize(n);
  g.sines.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 d = polygon[(k + 1) % n] - polygon[k];
    const double l = d.norm();
    if (!(l >= 1e-12 * diam)) throw ArgumentError("edge " + std::to_string(k) + " is degenerate");
    g.lengths[k] = l;
    g.cosines[k] = d.x() / l;
    g.sines[k] = d.y() / l;
  }
  g.corners.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t out = i, in = (i + n - 1) % n;
    g.corners[i] = {out, in, g.cosines[out] * g.sines[in] - g.sines[out] * g.cosines[in]};
  }
  return g;
}

/// alpha_k = 12 D_b / (D_s l_k^2)
inline Eigen::VectorXd edge_alpha(const ElementGeometry& g, const PlateMaterial& mat) {
  const double ratio = mat.bending_rigidity() / mat.shear_rigidity();
  Eigen::VectorXd a(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) a(static_cast<Eigen::Index>(k)) = 12.0 * ratio / (g.lengths[k] * g.lengths[k]);
  return a;
}

using Matrix3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Matrix2X = Eigen::Matrix<double, 2, Eigen::Dynamic>;

struct BendingB {
  Matrix3X beta;   // 3 x 3n, acts on nodal (w, beta_x, beta_y)
  Matrix3X dbeta;  // 3 x n, acts on the edge variables
};

/// Curvatures (beta_x,x ; beta_y,y ; beta_x,y + beta_y,x) from nodal
/// rotations and from the edge tangential-rotation variables.
inline BendingB bending_B(const ElementGeometry& g, const BasisEval& b) {
  const auto n = static_cast<Eigen::Index>(g.size());
  BendingB out{Matrix3X::Zero(3, 3 * n), Matrix3X::Zero(3, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2& d = b.grad_lambda[static_cast<std::size_t>(i)];
    out.beta(0, 3 * i + 1) = d.x();
    out.beta(1, 3 * i + 2) = d.y();
    out.beta(2, 3 * i + 1) = d.y();
    out.beta(2, 3 * i + 2) = d.x();
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vec2& d = b.grad_psi[kk];
    const double c = g.cosines[kk], s = g.sines[kk];
    out.dbeta(0, k) = d.x() * c;
    out.dbeta(1, k) = d.y() * s;
    out.dbeta(2, k) = d.y() * c + d.x() * s;
  }
  return out;
}

/// Assumed transverse shear in terms of the edge variables.
///
/// Each edge carries the constant tangential shear -(2/3) alpha_k dbeta_k.
/// At every corner the two adjacent edge shears are turned into a Cartesian
/// pair, and the corner values are interpolated with the Wachspress functions.
inline Matrix2X shear_B_dbeta(const ElementGeometry& g, const PlateMaterial& mat, const BasisEval& b) {
  const std::size_t n = g.size();
  const Eigen::VectorXd alpha = edge_alpha(g, mat);
  Matrix2X out = Matrix2X::Zero(2, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const CornerPair& c = g.corners[i];
    if (!(std::abs(c.det) > 1e-10))
      throw GeometryError("corner " + std::to_string(i) + " has (nearly) parallel edges");
    const double lam = b.lambda[i];
    // gamma_i = M^{-1} (gbar_out, gbar_in), M = [[C_out, S_out], [C_in, S_in]]
    const double go = -2.0 / 3.0 * alpha(static_cast<Eigen::Index>(c.out_edge));
    const double gi = -2.0 / 3.0 * alpha(static_cast<Eigen::Index>(c.in_edge));
    const auto ko = static_cast<Eigen::Index>(c.out_edge), ki = static_cast<Eigen::Index>(c.in_edge);
    out(0, ko) += lam * go * g.sines[c.in_edge] / c.det;
    out(1, ko) += -lam * go * g.cosines[c.in_edge] / c.det;
    out(0, ki) += -lam * gi * g.sines[c.out_edge] / c.det;
    out(1, ki) += lam * gi * g.cosines[c.out_edge] / c.det;
  }
  return out;
}

/// Edge constraint operator: dbeta = elimination * u.
///
/// Per edge k from node i to node j the edge-integrated shear constraint reads
///   w_j - w_i + (l/2)(C bx_i + S by_i) + (l/2)(C bx_j + S by_j) + (2/3) l (1 + alpha_k) dbeta_k = 0.
/// `a2` holds the bracketed nodal coefficients, `a_db` the diagonal (2/3) l (1 + alpha).
struct ElementOperator {
  Eigen::VectorXd alpha;
  Eigen::VectorXd a_db;
  Eigen::MatrixXd a2;
  Eigen::MatrixXd elimination;
};

inline ElementOperator constraint_operator(const ElementGeometry& g, const PlateMaterial& mat,
                                          double coupling_sign = 1.0) {
  const auto n = static_cast<Eigen::Index>(g.size());
  ElementOperator op;
  op.alpha = edge_alpha(g, mat);
  op.a_db.resize(n);
  op.a2 = Eigen::MatrixXd::Zero(n, 3 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Eigen::Index i = k, j = static_cast<Eigen::Index>(g.next(kk));
    const double l = coupling_sign * g.lengths[kk], c = g.cosines[kk], s = g.sines[kk];
    op.a_db(k) = 2.0 / 3.0 * g.lengths[kk] * (1.0 + op.alpha(k));
    op.a2(k, 3 * i) = -1.0;
    op.a2(k, 3 * j) = 1.0;
    op.a2(k, 3 * i + 1) = 0.5 * l * c;
    op.a2(k, 3 * i + 2) = 0.5 * l * s;
    op.a2(k, 3 * j + 1) = 0.5 * l * c;
    op.a2(k, 3 * j + 2) = 0.5 * l * s;
  }
  op.elimination = -(op.a_db.cwiseInverse().asDiagonal() * op.a2);
  return op;
}

/// Interpolated fields at a point, in the caller's rotation convention.
struct FieldValues {
  double w = 0.0;
  Vec2 beta = Vec2::Zero();
  Vec2 grad_w = Vec2::Zero();
  Eigen::Matrix2d grad_beta = Eigen::Matrix2d::Zero();  // (i, j) = d beta_i / d x_j
};

struct Resultants {
  Eigen::Vector3d bending_strain = Eigen::Vector3d::Zero();
  Eigen::Vector2d shear_strain = Eigen::Vector2d::Zero();
  Eigen::Vector3d moments = Eigen::Vector3d::Zero();  // M_x, M_y, M_xy
  Eigen::Vector2d shears = Eigen::Vector2d::Zero();   // Q_x, Q_y
};

struct ElementMatrices {
  Eigen::MatrixXd bending;
  Eigen::MatrixXd shear;
  Eigen::MatrixXd total() const { return bending + shear; }
};

/// The n-node discrete Kirchhoff-Mindlin plate element.
///
/// Dof order per element: (w_1, beta_x1, beta_y1, ..., w_n, beta_xn, beta_yn).
/// Internally the element works with gamma = beta + grad w; the other
/// convention is handled by flipping the rotation dofs on entry and exit.
class DkmElement {
 public:
  DkmElement(const Polygon& polygon, const PlateMaterial& material, ElementOptions options = {})
      : geom_(edge_geometry(polygon)), basis_(polygon), mat_(material), opt_(options) {
    mat_.validate();
    op_ = constraint_operator(geom_, mat_, opt_.flip_constraint_sign ? -1.0 : 1.0);
  }

  std::size_t size() const { return geom_.size(); }
  std::size_t num_dofs() const { return 3 * geom_.size(); }
  const ElementGeometry& geometry() const { return geom_; }
  const PolygonBasis& basis() const { return basis_; }
  const ElementOperator& constraint() const { return op_; }
  const PlateMaterial& material() const { return mat_; }
  const ElementOptions& options() const { return opt_; }

  double rotation_sign() const { return opt_.convention == ShearConvention::rotation_plus_gradient ? 1.0 : -1.0; }

  /// B_b = B_bbeta + B_bdbeta * An at one point (internal convention).
  Matrix3X bending_operator(const BasisEval& b) const {
    const BendingB bb = bending_B(geom_, b);
    return bb.beta + bb.dbeta * op_.elimination;
  }
  /// B_s = B_sdbeta * An at one point (internal convention).
  Matrix2X shear_operator(const BasisEval& b) const { return shear_B_dbeta(geom_, mat_, b) * op_.elimination; }

  ElementMatrices stiffness_parts() const {
    const auto nd = static_cast<Eigen::Index>(num_dofs());
    ElementMatrices k{Eigen::MatrixXd::Zero(nd, nd), Eigen::MatrixXd::Zero(nd, nd)};
    const Eigen::Matrix3d db = mat_.bending_matrix();
    const double ds = mat_.shear_rigidity();
    const PolygonQuadrature quad = polygon_quadrature(geom_.vertices, opt_.stiffness_degree);
    for (std::size_t q = 0; q < quad.size(); ++q) {
      const BasisEval b = basis_.serendipity(quad.points[q]);
      const Matrix3X bb = bending_operator(b);
      const Matrix2X bs = shear_operator(b);
      k.bending.noalias() += quad.weights[q] * (bb.transpose() * db * bb);
      k.shear.noalias() += (quad.weights[q] * ds) * (bs.transpose() * bs);
    }
    symmetrize(k.bending);
    symmetrize(k.shear);
    if (rotation_sign() < 0.0) {
      flip_rotations(k.bending);
      flip_rotations(k.shear);
    }
    return k;
  }

  Eigen::MatrixXd stiffness() const { return stiffness_parts().total(); }

  /// Consistent load: w entries carry the integral of lambda_i q, rotations zero.
  Eigen::VectorXd load(const std::function<double(const Vec2&)>& q) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_dofs()));
    const PolygonQuadrature quad = polygon_quadrature(geom_.vertices, opt_.load_degree);
    for (std::size_t p = 0; p < quad.size(); ++p) {
      const BasisEval b = basis_.wachspress(quad.points[p]);
      const double wq = quad.weights[p] * q(quad.points[p]);
      for (std::size_t i = 0; i < size(); ++i) f(static_cast<Eigen::Index>(3 * i)) += wq * b.lambda[i];
    }
    return f;
  }

  /// Edge variables for the element dof vector (internal convention).
  Eigen::VectorXd edge_variables(const Eigen::VectorXd& u) const { return op_.elimination * internal(u); }

  /// Fields and their gradients at an interior point.
  FieldValues evaluate(const Eigen::VectorXd& u, const Vec2& p) const {
    return evaluate(u, basis_.serendipity(p));
  }

  FieldValues evaluate(const Eigen::VectorXd& u, const BasisEval& b) const {
    const Eigen::VectorXd ui = internal(u);
    const Eigen::VectorXd db = op_.elimination * ui;
    FieldValues f;
    for (std::size_t i = 0; i < size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(3 * i);
      const Vec2 bi(ui(ii + 1), ui(ii + 2));
      f.w += b.lambda[i] * ui(ii);
      f.grad_w += ui(ii) * b.grad_lambda[i];
      f.beta += b.lambda[i] * bi;
      f.grad_beta += bi * b.grad_lambda[i].transpose();
    }
    for (std::size_t k = 0; k < size(); ++k) {
      const Vec2 t(geom_.cosines[k], geom_.sines[k]);
      const double d = db(static_cast<Eigen::Index>(k));
      f.beta += b.psi[k] * d * t;
      f.grad_beta += d * t * b.grad_psi[k].transpose();
    }
    f.beta *= rotation_sign();
    f.grad_beta *= rotation_sign();
    return f;
  }

  /// w and beta anywhere in the closed polygon. On the boundary the
  /// Wachspress functions reduce to linear interpolation along the edge and
  /// the mid-edge function to the quadratic bubble 4t(1-t).
  FieldValues evaluate_values(const Eigen::VectorXd& u, const Vec2& p) const {
    const double tol = 1e-9 * basis_.diameter_value();
    const double clearance = basis_.edge_clearance(p);
    if (clearance > tol) return evaluate(u, p);
    if (clearance < -tol) throw EvaluationError("point lies outside the element");
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < size(); ++k) {
      const double d = segment_distance(p, geom_.vertices[k], geom_.vertices[geom_.next(k)]);
      if (d < dist) dist = d, best = k;
    }
    const Vec2 a = geom_.vertices[best], e = geom_.vertices[geom_.next(best)] - a;
    const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    const Eigen::VectorXd ui = internal(u);
    const double db = (op_.elimination * ui)(static_cast<Eigen::Index>(best));
    const auto i = static_cast<Eigen::Index>(3 * best), j = static_cast<Eigen::Index>(3 * geom_.next(best));
    FieldValues f;
    f.w = (1.0 - t) * ui(i) + t * ui(j);
    f.beta = (1.0 - t) * Vec2(ui(i + 1), ui(i + 2)) + t * Vec2(ui(j + 1), ui(j + 2)) +
             4.0 * t * (1.0 - t) * db * Vec2(geom_.cosines[best], geom_.sines[best]);
    f.beta *= rotation_sign();
    return f;
  }

  Resultants recover(const Eigen::VectorXd& u, const Vec2& p) const {
    const BasisEval b = basis_.serendipity(p);
    const Eigen::VectorXd ui = internal(u);
    Resultants r;
    // bending strain flips with the rotations; shear strain does not
    r.bending_strain = rotation_sign() * (bending_operator(b) * ui);
    r.shear_strain = shear_operator(b) * ui;
    r.moments = mat_.bending_matrix() * r.bending_strain;
    r.shears = mat_.shear_matrix() * r.shear_strain;
    return r;
  }

 private:
  static void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

  void flip_rotations(Eigen::MatrixXd& m) const {
    Eigen::VectorXd s = Eigen::VectorXd::Ones(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i % 3 != 0) s(i) = -1.0;
    m = s.asDiagonal() * m * s.asDiagonal();
  }

  Eigen::VectorXd internal(const Eigen::VectorXd& u) const {
    if (u.size() != static_cast<Eigen::Index>(num_dofs())) throw ArgumentError("element dof vector has wrong size");
    if (rotation_sign() > 0.0) return u;
    Eigen::VectorXd v = u;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (i % 3 != 0) v(i) = -v(i);
    return v;
  }

  ElementGeometry geom_;
  PolygonBasis basis_;
  PlateMaterial mat_;
  ElementOptions opt_;
  ElementOperator op_;
};

inline Eigen::MatrixXd element_stiffness(const Polygon& polygon, const PlateMaterial& material,
                                         ElementOptions options = {}) {
  return DkmElement(polygon, material, options).stiffness();
}

inline Eigen::VectorXd element_load(const Polygon& polygon, const std::function<double(const Vec2&)>& q,
                                    int degree = 6) {
  ElementOptions opt;
  opt.load_degree = degree;
  return DkmElement(polygon, PlateMaterial{}, opt).load(q);
}

inline Resultants recover_fields(const Polygon& polygon, const PlateMaterial& material, const Eigen::VectorXd& u,
                                 const Vec2& p, ElementOptions options = {}) {
  return DkmElement(polygon, material, options).recover(u, p);
}

}  // namespace polyplate
