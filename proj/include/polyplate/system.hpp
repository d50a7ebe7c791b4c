#pragma once

#include "polyplate/element.hpp"
#include "polyplate/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>

namespace polyplate {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Vec2&)>;

enum class BcKind { clamped, hard_simply_supported, prescribed_field };

inline const char* to_string(BcKind k) {
  switch (k) {
    case BcKind::clamped: return "clamped";
    case BcKind::hard_simply_supported: return "hard_simply_supported";
    case BcKind::prescribed_field: return "prescribed_field";
  }
  return "?";
}

/// Dirichlet data on all tagged boundary edges (or only those in `tags`).
struct BoundaryCondition {
  BcKind kind = BcKind::clamped;
  ScalarField w, beta_x, beta_y;  // prescribed_field only
  std::vector<int> tags;          // empty: every boundary edge
  double corner_angle_deg = 10.0; // hard SS: turning angle above which both rotations are fixed

  static BoundaryCondition clamped() { return {}; }
  static BoundaryCondition simply_supported() {
    BoundaryCondition bc;
    bc.kind = BcKind::hard_simply_supported;
    return bc;
  }
  static BoundaryCondition prescribed(ScalarField w, ScalarField bx, ScalarField by) {
    BoundaryCondition bc;
    bc.kind = BcKind::prescribed_field;
    bc.w = std::move(w);
    bc.beta_x = std::move(bx);
    bc.beta_y = std::move(by);
    return bc;
  }

  bool applies_to(int tag) const { return tags.empty() || std::find(tags.begin(), tags.end(), tag) != tags.end(); }
};

/// Global dofs are (w, beta_x, beta_y) per mesh vertex, index 3*v + c.
///
/// The unknowns actually solved for are described by u = T * x + u_p:
/// T has one column per free generalized dof, u_p carries prescribed values.
/// A plain free dof is a unit column; a simply supported edge node keeps
/// only its normal rotation, a column along the outward normal.
struct DofMap {
  std::size_t num_nodes = 0;
  std::vector<bool> constrained;  // per global dof: not an independent unknown
  Eigen::VectorXd prescribed;     // u_p
  SparseMatrix transform;         // T, (3 num_nodes) x num_free

  std::size_t num_dofs() const { return 3 * num_nodes; }
  std::size_t num_free() const { return static_cast<std::size_t>(transform.cols()); }
  static std::size_t index(std::size_t node, int comp) { return 3 * node + static_cast<std::size_t>(comp); }

  Eigen::VectorXd expand(const Eigen::VectorXd& x) const { return transform * x + prescribed; }
};

namespace detail {

struct NodeConstraint {
  bool w = false, bx = false, by = false;
  bool normal_only = false;  // rotations reduced to the normal direction
  Vec2 normal = Vec2::Zero();
};

}  // namespace detail

inline DofMap make_dofmap(const PolyMesh& mesh, const BoundaryCondition& bc) {
  const std::size_t nn = mesh.num_vertices();
  std::vector<detail::NodeConstraint> nodes(nn);
  std::vector<std::vector<Vec2>> tangents(nn);
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    if (!bc.applies_to(be.tag)) continue;
    const auto& loop = mesh.elements[be.element];
    const std::size_t a = loop[be.local_edge], b = loop[(be.local_edge + 1) % loop.size()];
    const Vec2 t = (mesh.vertices[b] - mesh.vertices[a]).normalized();
    tangents[a].push_back(t);
    tangents[b].push_back(t);
  }
  const double corner_cos = std::cos(bc.corner_angle_deg * M_PI / 180.0);
  for (std::size_t v = 0; v < nn; ++v) {
    if (tangents[v].empty()) continue;
    auto& c = nodes[v];
    c.w = true;
    if (bc.kind != BcKind::hard_simply_supported) {
      c.bx = c.by = true;
      continue;
    }
    Vec2 t = Vec2::Zero();
    for (const Vec2& ti : tangents[v]) t += ti;
    bool corner = tangents[v].size() != 2 || t.norm() < 1e-12;
    if (!corner) corner = tangents[v][0].dot(tangents[v][1]) < corner_cos;
    if (corner) {
      c.bx = c.by = true;
    } else {
      t.normalize();
      c.normal_only = true;
      c.normal = Vec2(t.y(), -t.x());
    }
  }

  DofMap map;
  map.num_nodes = nn;
  map.constrained.assign(3 * nn, false);
  map.prescribed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * nn));
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::Index col = 0;
  for (std::size_t v = 0; v < nn; ++v) {
    const auto& c = nodes[v];
    const auto base = static_cast<Eigen::Index>(3 * v);
    const bool fixed[3] = {c.w, c.bx, c.by};
    if (c.normal_only) {
      map.constrained[3 * v + 1] = map.constrained[3 * v + 2] = true;
      trip.emplace_back(base + 1, col, c.normal.x());
      trip.emplace_back(base + 2, col, c.normal.y());
      ++col;
    }
    for (int k = 0; k < 3; ++k) {
      if (fixed[k]) {
        map.constrained[3 * v + static_cast<std::size_t>(k)] = true;
      } else if (!(c.normal_only && k > 0)) {
        trip.emplace_back(base + k, col++, 1.0);
      }
    }
    if (bc.kind == BcKind::prescribed_field && c.w) {
      const Vec2& x = mesh.vertices[v];
      if (!bc.w || !bc.beta_x || !bc.beta_y) throw ArgumentError("prescribed_field boundary condition without field");
      map.prescribed(base) = bc.w(x);
      map.prescribed(base + 1) = bc.beta_x(x);
      map.prescribed(base + 2) = bc.beta_y(x);
    }
  }
  map.transform.resize(static_cast<Eigen::Index>(3 * nn), col);
  map.transform.setFromTriplets(trip.begin(), trip.end());
  return map;
}

struct AssembledSystem {
  SparseMatrix K;        // full, 3 num_nodes square
  Eigen::VectorXd f;     // full load
  DofMap dofs;
  SparseMatrix K_free;   // T^T K T
  Eigen::VectorXd f_free;  // T^T (f - K u_p)
};

/// Global element dof indices in element order.
inline std::vector<Eigen::Index> element_dofs(const PolyMesh& mesh, std::size_t e) {
  std::vector<Eigen::Index> idx;
  idx.reserve(3 * mesh.elements[e].size());
  for (std::size_t v : mesh.elements[e])
    for (int c = 0; c < 3; ++c) idx.push_back(static_cast<Eigen::Index>(DofMap::index(v, c)));
  return idx;
}

inline AssembledSystem assemble(const PolyMesh& mesh, const PlateMaterial& material, const ScalarField& q,
                                const BoundaryCondition& bc, const ElementOptions& options = {}) {
  material.validate();
  const auto nd = static_cast<Eigen::Index>(3 * mesh.num_vertices());
  AssembledSystem sys;
  sys.f = Eigen::VectorXd::Zero(nd);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const DkmElement el(mesh.element_polygon(e), material, options);
    const Eigen::MatrixXd ke = el.stiffness();
    const auto idx = element_dofs(mesh, e);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        trip.emplace_back(idx[i], idx[j], ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    if (q) {
      const Eigen::VectorXd fe = el.load(q);
      for (std::size_t i = 0; i < idx.size(); ++i) sys.f(idx[i]) += fe(static_cast<Eigen::Index>(i));
    }
  }
  sys.K.resize(nd, nd);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  sys.dofs = make_dofmap(mesh, bc);
  const SparseMatrix& T = sys.dofs.transform;
  sys.K_free = (SparseMatrix(T.transpose()) * sys.K * T).pruned();
  sys.f_free = T.transpose() * (sys.f - sys.K * sys.dofs.prescribed);
  if (mesh.boundary_edges.empty() || sys.dofs.num_free() == static_cast<std::size_t>(nd))
    std::cerr << "polyplate: warning: no Dirichlet constraints, the system is singular\n";
  return sys;
}

namespace detail {

/// f - K x with the products summed in long double.
inline Eigen::VectorXd extended_residual(const SparseMatrix& K, const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  std::vector<long double> acc(static_cast<std::size_t>(K.rows()));
  for (Eigen::Index i = 0; i < K.rows(); ++i) acc[static_cast<std::size_t>(i)] = f(i);
  for (Eigen::Index j = 0; j < K.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(K, j); it; ++it)
      acc[static_cast<std::size_t>(it.row())] -= static_cast<long double>(it.value()) * x(it.col());
  Eigen::VectorXd r(K.rows());
  for (Eigen::Index i = 0; i < K.rows(); ++i) r(i) = static_cast<double>(acc[static_cast<std::size_t>(i)]);
  return r;
}

/// max_i |r_i| / (|K| |x| + |f|)_i
inline double componentwise_backward_error(const SparseMatrix& K, const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                                           const Eigen::VectorXd& r) {
  Eigen::VectorXd den = f.cwiseAbs();
  for (Eigen::Index j = 0; j < K.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(K, j); it; ++it) den(it.row()) += std::abs(it.value() * x(it.col()));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (den(i) > 0.0) worst = std::max(worst, std::abs(r(i)) / den(i));
    else if (r(i) != 0.0) return std::numeric_limits<double>::infinity();
  return worst;
}

}  // namespace detail

struct SolveReport {
  double residual = 0.0;        // ||K x - f|| / ||f||
  double backward_error = 0.0;  // componentwise, in units of the rounding error
  double min_pivot = 0.0;
  double max_pivot = 0.0;
  bool at_rounding_floor = false;
};

/// Residual target, and the componentwise backward error (in multiples of
/// machine epsilon) accepted when rounding x to double alone exceeds it.
inline constexpr double solver_residual_target = 1e-10;
inline constexpr double solver_floor_ulps = 8.0;

/// Sparse LDL^T solve of a symmetric positive definite system.
inline Eigen::VectorXd solve(const SparseMatrix& K, const Eigen::VectorXd& f, SolveReport* report = nullptr) {
  if (K.rows() != K.cols() || K.rows() != f.size()) throw ArgumentError("solve: inconsistent sizes");
  SolveReport rep;
  if (K.rows() == 0) {
    if (report) *report = rep;
    return Eigen::VectorXd();
  }
  // symmetric diagonal scaling keeps w and rotation rows comparable
  Eigen::VectorXd scale(K.rows());
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    const double d = K.coeff(i, i);
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "solve: non-positive diagonal entry " << d << " at row " << i;
      throw SolverError(os.str());
    }
    scale(i) = 1.0 / std::sqrt(d);
  }
  const SparseMatrix Ks = scale.asDiagonal() * K * scale.asDiagonal();
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Ks);
  if (ldlt.info() != Eigen::Success) throw SolverError("solve: factorization failed");
  const Eigen::VectorXd d = ldlt.vectorD();
  Eigen::Index imin = 0;
  rep.min_pivot = d.minCoeff(&imin);
  rep.max_pivot = d.cwiseAbs().maxCoeff();
  if (!(rep.min_pivot > 1e-13 * rep.max_pivot)) {
    std::ostringstream os;
    os << "solve: matrix is singular or indefinite, smallest pivot " << rep.min_pivot << " (row " << imin
       << " of the permuted, scaled system; largest " << rep.max_pivot << ")";
    throw SolverError(os.str());
  }
  Eigen::VectorXd x = scale.asDiagonal() * ldlt.solve(scale.asDiagonal() * f);
  // iterative refinement with residuals accumulated in extended precision
  const double fn = f.norm();
  for (int it = 0; it < 4; ++it) {
    const Eigen::VectorXd r = detail::extended_residual(K, x, f);
    rep.residual = fn > 0.0 ? r.norm() / fn : r.norm();
    if (rep.residual < 1e-13) break;
    x += scale.asDiagonal() * ldlt.solve(scale.asDiagonal() * r);
  }
  {
    const Eigen::VectorXd r = detail::extended_residual(K, x, f);
    rep.residual = fn > 0.0 ? r.norm() / fn : r.norm();
    rep.backward_error =
        detail::componentwise_backward_error(K, x, f, r) / std::numeric_limits<double>::epsilon();
  }
  if (!(rep.residual < solver_residual_target)) {
    // fine, thin-plate systems: |K||x| >> |f| and the double-rounded x
    // cannot reach the target; accept when refinement has hit that floor
    rep.at_rounding_floor = rep.backward_error < solver_floor_ulps;
    if (!rep.at_rounding_floor) {
      std::ostringstream os;
      os << "solve: relative residual " << rep.residual << " exceeds " << solver_residual_target
         << " (componentwise backward error " << rep.backward_error << " ulp)";
      throw SolverError(os.str());
    }
  }
  if (report) *report = rep;
  return x;
}

/// Discrete solution with element-wise field evaluation.
class PlateSolution {
 public:
  PlateSolution(PolyMesh mesh, PlateMaterial material, Eigen::VectorXd u, ElementOptions options = {})
      : mesh_(std::move(mesh)), mat_(material), u_(std::move(u)), opt_(options) {
    if (u_.size() != static_cast<Eigen::Index>(3 * mesh_.num_vertices()))
      throw ArgumentError("PlateSolution: dof vector does not match mesh");
    elements_.resize(mesh_.num_elements());
    boxes_.reserve(mesh_.num_elements());
    for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
      Eigen::AlignedBox2d box;
      for (std::size_t v : mesh_.elements[e]) box.extend(mesh_.vertices[v]);
      boxes_.push_back(box);
    }
  }

  const PolyMesh& mesh() const { return mesh_; }
  const PlateMaterial& material() const { return mat_; }
  const Eigen::VectorXd& dofs() const { return u_; }
  const ElementOptions& options() const { return opt_; }

  Eigen::Vector3d node_values(std::size_t v) const { return u_.segment<3>(static_cast<Eigen::Index>(3 * v)); }

  Eigen::VectorXd element_vector(std::size_t e) const {
    const auto idx = element_dofs(mesh_, e);
    Eigen::VectorXd ue(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) ue(static_cast<Eigen::Index>(i)) = u_(idx[i]);
    return ue;
  }

  const DkmElement& element(std::size_t e) const {
    if (!elements_[e]) elements_[e] = std::make_unique<DkmElement>(mesh_.element_polygon(e), mat_, opt_);
    return *elements_[e];
  }

  /// Index of an element containing p (closed), or nullopt.
  std::optional<std::size_t> locate(const Vec2& p) const {
    std::optional<std::size_t> best;
    double best_clear = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh_.num_elements(); ++e) {
      const auto& box = boxes_[e];
      const double pad = 1e-9 * box.diagonal().norm();
      if (p.x() < box.min().x() - pad || p.x() > box.max().x() + pad || p.y() < box.min().y() - pad ||
          p.y() > box.max().y() + pad)
        continue;
      const double c = element(e).basis().edge_clearance(p) / element(e).basis().diameter_value();
      if (c > best_clear) best_clear = c, best = e;
      if (c > 1e-9) break;
    }
    if (best && best_clear >= -1e-9) return best;
    return std::nullopt;
  }

  /// w, beta_x, beta_y at p.
  FieldValues values(const Vec2& p) const {
    const auto e = locate(p);
    if (!e) throw EvaluationError("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ") is outside the mesh");
    return element(*e).evaluate_values(element_vector(*e), p);
  }

  Resultants resultants(const Vec2& p) const {
    const auto e = locate(p);
    if (!e) throw EvaluationError("point is outside the mesh");
    return element(*e).recover(element_vector(*e), p);
  }

 private:
  PolyMesh mesh_;
  PlateMaterial mat_;
  Eigen::VectorXd u_;
  ElementOptions opt_;
  mutable std::vector<std::unique_ptr<DkmElement>> elements_;
  std::vector<Eigen::AlignedBox2d> boxes_;
};

struct SolveResult {
  AssembledSystem system;
  Eigen::VectorXd u;  // full dof vector
  SolveReport report;
};

inline SolveResult solve_plate(const PolyMesh& mesh, const PlateMaterial& material, const ScalarField& q,
                               const BoundaryCondition& bc, const ElementOptions& options = {}) {
  SolveResult r{assemble(mesh, material, q, bc, options), {}, {}};
  const Eigen::VectorXd x = solve(r.system.K_free, r.system.f_free, &r.report);
  r.u = r.system.dofs.expand(x);
  return r;
}

/// Nodal reactions K u - f over the full dof vector.
inline Eigen::VectorXd reactions(const AssembledSystem& sys, const Eigen::VectorXd& u) { return sys.K * u - sys.f; }

/// |sum of w reactions at constrained dofs + total applied w load| / |total load|.
inline double equilibrium_error(const AssembledSystem& sys, const Eigen::VectorXd& u) {
  const Eigen::VectorXd r = reactions(sys, u);
  double reaction = 0.0, load = 0.0;
  for (std::size_t v = 0; v < sys.dofs.num_nodes; ++v) {
    const auto i = static_cast<Eigen::Index>(3 * v);
    load += sys.f(i);
    if (sys.dofs.constrained[3 * v]) reaction += r(i);
  }
  if (load == 0.0) throw ArgumentError("equilibrium_error: zero applied load");
  return std::abs(reaction + load) / std::abs(load);
}

/// node,x,y,w,beta_x,beta_y with 17 significant digits.
inline void write_solution_csv(const PolyMesh& mesh, const Eigen::VectorXd& u, std::ostream& os) {
  if (u.size() != static_cast<Eigen::Index>(3 * mesh.num_vertices()))
    throw ArgumentError("write_solution_csv: dof vector does not match mesh");
  os << "node,x,y,w,beta_x,beta_y\n";
  char buf[160];
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto i = static_cast<Eigen::Index>(3 * v);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", v, mesh.vertices[v].x(),
                  mesh.vertices[v].y(), u(i), u(i + 1), u(i + 2));
    os << buf;
  }
}

}  // namespace polyplate
