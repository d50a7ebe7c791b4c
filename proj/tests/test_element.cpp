#include "support.hpp"

using namespace polyplate;
using namespace polyplate::testing;

namespace {

PlateMaterial material(double h) {
  PlateMaterial m;
  m.h = h;
  return m;
}

int numerical_rank(const Eigen::MatrixXd& k) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rank += es.eigenvalues()(i) > 1e-10 * top;
  return rank;
}

Eigen::VectorXd rigid_mode(const Polygon& poly, int which) {
  // gamma = beta + grad w vanishes
  switch (which) {
    case 0: return sample_dofs(poly, [](const Vec2&) { return 1.0; }, [](const Vec2&) { return Vec2(0, 0); });
    case 1: return sample_dofs(poly, [](const Vec2& p) { return p.x(); }, [](const Vec2&) { return Vec2(-1, 0); });
    default: return sample_dofs(poly, [](const Vec2& p) { return p.y(); }, [](const Vec2&) { return Vec2(0, -1); });
  }
}

Eigen::VectorXd random_dofs(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd u(static_cast<Eigen::Index>(3 * n));
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = g(rng);
  return u;
}

}  // namespace

TEST(EdgeGeometry, RightTriangle) {
  const ElementGeometry g = edge_geometry({Vec2(0, 0), Vec2(4, 0), Vec2(0, 3)});
  EXPECT_DOUBLE_EQ(g.lengths[0], 4.0);
  EXPECT_DOUBLE_EQ(g.lengths[1], 5.0);
  EXPECT_DOUBLE_EQ(g.lengths[2], 3.0);
  EXPECT_DOUBLE_EQ(g.cosines[1], -0.8);
  EXPECT_DOUBLE_EQ(g.sines[1], 0.6);
  EXPECT_DOUBLE_EQ(g.cosines[2], 0.0);
  EXPECT_DOUBLE_EQ(g.sines[2], -1.0);
  // corner 1: out edge 1, in edge 0
  EXPECT_EQ(g.corners[1].out_edge, 1u);
  EXPECT_EQ(g.corners[1].in_edge, 0u);
  EXPECT_DOUBLE_EQ(g.corners[1].det, -0.8 * 0.0 - 0.6 * 1.0);
  EXPECT_DOUBLE_EQ(g.corners[0].det, -1.0);
}

TEST(EdgeGeometry, SquareDirections) {
  const ElementGeometry g = edge_geometry(unit_square());
  const double c[] = {1, 0, -1, 0}, s[] = {0, 1, 0, -1};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(g.cosines[k], c[k], 1e-15);
    EXPECT_NEAR(g.sines[k], s[k], 1e-15);
    EXPECT_NEAR(std::abs(g.corners[k].det), 1.0, 1e-15);
  }
  EXPECT_THROW(edge_geometry({Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)}), ArgumentError);
}

TEST(EdgeGeometry, AlphaFromMaterial) {
  const PlateMaterial m = material(0.05);
  const ElementGeometry g = edge_geometry(regular_polygon(5, 0.3));
  const Eigen::VectorXd a = edge_alpha(g, m);
  for (std::size_t k = 0; k < 5; ++k) {
    // D_b / D_s = h^2 / (6 kappa (1 - nu))
    const double expected = 2.0 * m.h * m.h / (m.kappa * (1.0 - m.nu) * g.lengths[k] * g.lengths[k]);
    EXPECT_NEAR(a(static_cast<Eigen::Index>(k)), expected, 1e-14 * expected);
  }
}

TEST(DkmElementTest, RankAndRigidModes) {
  std::mt19937_64 rng(1);
  for (int n = 3; n <= 8; ++n) {
    for (double h : {0.2, 0.01, 1e-5}) {
      const Polygon poly = random_convex_polygon(n, rng);
      const DkmElement el(poly, material(h * diameter(poly)));
      const ElementMatrices parts = el.stiffness_parts();
      const Eigen::MatrixXd k = parts.total();
      EXPECT_EQ(numerical_rank(k), 3 * n - 3) << "n=" << n << " h=" << h;
      EXPECT_LT((k - k.transpose()).norm(), 1e-14 * k.norm());
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(parts.bending).eigenvalues().minCoeff(),
                -1e-12 * parts.bending.norm());
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(parts.shear).eigenvalues().minCoeff(),
                -1e-12 * std::max(parts.shear.norm(), 1e-300));
      for (int m = 0; m < 3; ++m) {
        const Eigen::VectorXd u = rigid_mode(poly, m);
        EXPECT_LT((k * u).norm(), 1e-10 * k.norm() * u.norm()) << "mode " << m;
        EXPECT_LT(el.edge_variables(u).norm(), 1e-12 * u.norm());
      }
    }
  }
}

TEST(DkmElementTest, ReproducesKirchhoffQuadratic) {
  // w = x^2 + 3xy - 2y^2 with beta = -grad w: curvatures (-2, 4, -6), no shear
  auto w = [](const Vec2& p) { return p.x() * p.x() + 3 * p.x() * p.y() - 2 * p.y() * p.y(); };
  auto beta = [](const Vec2& p) { return Vec2(-(2 * p.x() + 3 * p.y()), -(3 * p.x() - 4 * p.y())); };
  std::mt19937_64 rng(2);
  for (int n = 3; n <= 8; ++n) {
    const Polygon poly = random_convex_polygon(n, rng);
    const DkmElement el(poly, material(0.1));
    const Eigen::VectorXd u = sample_dofs(poly, w, beta);
    EXPECT_LT(el.edge_variables(u).norm(), 1e-12 * u.norm());
    for (int k = 0; k < 5; ++k) {
      const Vec2 p = random_interior_point(poly, rng);
      const Resultants r = el.recover(u, p);
      EXPECT_LT((r.bending_strain - Eigen::Vector3d(-2, 4, -6)).norm(), 1e-10);
      EXPECT_LT(r.shear_strain.norm(), 1e-10);
      const FieldValues f = el.evaluate(u, p);
      EXPECT_NEAR(f.w, w(p), 0.05 * u.norm());  // w is only linearly interpolated
      EXPECT_LT((f.beta - beta(p)).norm(), 1e-10 * u.norm());
    }
  }
}

TEST(DkmElementTest, EdgeShearMatchesIntegratedConstraint) {
  // Along every edge the mean tangential shear of the interpolated fields
  // equals the constant assumed edge shear.
  std::mt19937_64 rng(3);
  for (int n = 3; n <= 7; ++n) {
    const Polygon poly = random_convex_polygon(n, rng);
    const DkmElement el(poly, material(0.3));
    const Eigen::VectorXd u = random_dofs(poly.size(), rng);
    const Eigen::VectorXd db = el.edge_variables(u);
    const ElementGeometry& g = el.geometry();
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec2 a = poly[k], b = poly[(k + 1) % poly.size()];
      const Vec2 t(g.cosines[k], g.sines[k]);
      const double ws = (u(static_cast<Eigen::Index>(3 * ((k + 1) % poly.size()))) - u(static_cast<Eigen::Index>(3 * k))) / g.lengths[k];
      const double gbar = -2.0 / 3.0 * el.constraint().alpha(static_cast<Eigen::Index>(k)) * db(static_cast<Eigen::Index>(k));
      const PolygonQuadrature line = segment_quadrature(a, b, 3);
      double integral = 0.0;
      for (std::size_t q = 0; q < line.size(); ++q) {
        const FieldValues f = el.evaluate_values(u, line.points[q]);
        integral += line.weights[q] * (f.beta.dot(t) + ws - gbar);
      }
      EXPECT_NEAR(integral, 0.0, 1e-12 * u.norm() * g.lengths[k]) << "edge " << k;

      // assumed shear field: tangential component is gbar along the whole edge
      for (double s : {0.2, 0.5, 0.9}) {
        const BasisEval be = el.basis().boundary_values(a + s * (b - a));
        const Vec2 gam = el.shear_operator(be) * u;
        EXPECT_NEAR(gam.dot(t), gbar, 1e-10 * std::max(1.0, std::abs(gbar)));
      }
    }
  }
}

TEST(DkmElementTest, ShearVanishesInThinLimit) {
  std::mt19937_64 rng(4);
  const Polygon poly = random_convex_polygon(6, rng);
  const Eigen::VectorXd u = random_dofs(6, rng);
  const Vec2 p = centroid(poly);
  const double thick = DkmElement(poly, material(0.1)).recover(u, p).shear_strain.norm();
  const double thin = DkmElement(poly, material(1e-5)).recover(u, p).shear_strain.norm();
  EXPECT_GT(thick, 0.0);
  EXPECT_LT(thin / thick, 1e-6);
}

TEST(DkmElementTest, RotationInvariance) {
  std::mt19937_64 rng(5);
  for (double angle : {M_PI / 2, 0.37, 2.1}) {
    const Polygon poly = random_convex_polygon(5, rng);
    const PlateMaterial m = material(0.05);
    const Eigen::MatrixXd k = element_stiffness(poly, m);
    const Eigen::MatrixXd kr = element_stiffness(rotate(poly, angle), m);
    const Eigen::MatrixXd t = dof_rotation(poly.size(), angle);
    EXPECT_LT(rel_diff(kr, t * k * t.transpose()), 1e-9) << angle;
  }
  const Eigen::MatrixXd k = element_stiffness(unit_square(), material(0.1));
  const Eigen::MatrixXd kr = element_stiffness(rotate(unit_square(), M_PI / 2), material(0.1));
  const Eigen::MatrixXd t = dof_rotation(4, M_PI / 2);
  EXPECT_LT(rel_diff(kr, t * k * t.transpose()), 1e-13);
}

TEST(DkmElementTest, CyclicRenumbering) {
  std::mt19937_64 rng(6);
  const Polygon poly = random_convex_polygon(7, rng);
  Polygon shifted(poly.begin() + 2, poly.end());
  shifted.insert(shifted.end(), poly.begin(), poly.begin() + 2);
  const Eigen::MatrixXd k = element_stiffness(poly, material(0.02));
  const Eigen::MatrixXd ks = element_stiffness(shifted, material(0.02));
  Eigen::MatrixXd expected(ks.rows(), ks.cols());
  for (Eigen::Index i = 0; i < ks.rows(); ++i)
    for (Eigen::Index j = 0; j < ks.cols(); ++j) expected(i, j) = k((i + 6) % 21, (j + 6) % 21);
  EXPECT_LT(rel_diff(ks, expected), 1e-9);
}

TEST(DkmElementTest, StiffnessQuadrature) {
  // triangles: all integrands are polynomials of degree 2
  std::mt19937_64 rng(7);
  const Polygon tri = random_convex_polygon(3, rng);
  ElementOptions d2, d8, d12;
  d2.stiffness_degree = 2;
  d8.stiffness_degree = 8;
  d12.stiffness_degree = 12;
  EXPECT_LT(rel_diff(element_stiffness(tri, material(0.1), d2), element_stiffness(tri, material(0.1), d8)), 1e-12);
  // rational integrands elsewhere: refinement shrinks the difference
  for (int n : {4, 6, 8}) {
    const Polygon poly = random_convex_polygon(n, rng);
    const PlateMaterial m = material(0.1 * diameter(poly));
    const Eigen::MatrixXd ref = element_stiffness(poly, m, d12);
    EXPECT_LT(rel_diff(element_stiffness(poly, m, d8), ref), rel_diff(element_stiffness(poly, m), ref)) << n;
  }
}

TEST(ElementLoad, UniformOnSquare) {
  const Eigen::VectorXd f = element_load(unit_square(), [](const Vec2&) { return 1.0; });
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(f(static_cast<Eigen::Index>(3 * i)), 0.25, 1e-15);
    EXPECT_EQ(f(static_cast<Eigen::Index>(3 * i + 1)), 0.0);
    EXPECT_EQ(f(static_cast<Eigen::Index>(3 * i + 2)), 0.0);
  }
}

TEST(ElementLoad, MomentsOfPolynomialLoads) {
  // sum_i f_i = int q and sum_i x_i f_i = int x q, from partition of unity and linear precision
  std::mt19937_64 rng(8);
  for (int n = 3; n <= 8; ++n) {
    const Polygon poly = random_convex_polygon(n, rng);
    const Eigen::VectorXd f = element_load(poly, [](const Vec2& p) { return p.x() * p.x() * p.y(); });
    double total = 0.0, first = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      total += f(static_cast<Eigen::Index>(3 * i));
      first += poly[i].x() * f(static_cast<Eigen::Index>(3 * i));
    }
    EXPECT_NEAR(total, monomial_integral(poly, 2, 1), 1e-12);
    EXPECT_NEAR(first, monomial_integral(poly, 3, 1), 1e-12);
    const Eigen::VectorXd one = element_load(poly, [](const Vec2&) { return 1.0; });
    EXPECT_NEAR(one.sum(), signed_area(poly), 1e-13);
  }
}

TEST(ElementLoad, NonPolynomialLoadAgreesWithFineRule) {
  std::mt19937_64 rng(9);
  const Polygon poly = regular_polygon(6, 0.1, Vec2(0.4, 0.3));
  auto q = [](const Vec2& p) { return std::sin(p.x()) * std::cos(2 * p.y()); };
  const Eigen::VectorXd coarse = element_load(poly, q, 6), fine = element_load(poly, q, 12);
  EXPECT_LT((coarse - fine).norm(), 1e-5 * fine.norm());
}

TEST(Recovery, CylindricalBendingWithoutPoisson) {
  PlateMaterial m = material(0.1);
  m.nu = 0.0;
  const Polygon poly = regular_polygon(6, 0.5, Vec2(0.3, 0.2));
  const Eigen::VectorXd u = sample_dofs(
      poly, [](const Vec2& p) { return -0.5 * p.x() * p.x(); }, [](const Vec2& p) { return Vec2(p.x(), 0.0); });
  const Resultants r = recover_fields(poly, m, u, Vec2(0.35, 0.1));
  EXPECT_NEAR(r.moments(0), m.bending_rigidity(), 1e-10 * m.bending_rigidity());
  EXPECT_NEAR(r.moments(1), 0.0, 1e-10 * m.bending_rigidity());
  EXPECT_NEAR(r.moments(2), 0.0, 1e-10 * m.bending_rigidity());
  EXPECT_LT(r.shears.norm(), 1e-8 * m.shear_rigidity());
}

TEST(Convention, GradientMinusRotationFlipsRotationDofs) {
  std::mt19937_64 rng(10);
  const Polygon poly = random_convex_polygon(5, rng);
  ElementOptions minus;
  minus.convention = ShearConvention::gradient_minus_rotation;
  const Eigen::MatrixXd kp = element_stiffness(poly, material(0.05));
  const Eigen::MatrixXd km = element_stiffness(poly, material(0.05), minus);
  Eigen::VectorXd s = Eigen::VectorXd::Ones(15);
  for (Eigen::Index i = 0; i < 15; ++i)
    if (i % 3) s(i) = -1;
  EXPECT_LT(rel_diff(km, s.asDiagonal() * kp * s.asDiagonal()), 1e-15);
  // Kirchhoff mode in that convention: beta = +grad w
  const Eigen::VectorXd u =
      sample_dofs(poly, [](const Vec2& p) { return p.x() + 2 * p.y(); }, [](const Vec2&) { return Vec2(1, 2); });
  EXPECT_LT((km * u).norm(), 1e-10 * km.norm());
}

TEST(Mutation, FlippedCouplingFailsPatchTest) {
  const PolyMesh mesh = generate_structured_quad(1.0, 4);
  ElementOptions bad;
  bad.flip_constraint_sign = true;
  EXPECT_LT(patch_test(mesh, 0.01).l2, 1e-10);
  EXPECT_GT(patch_test(mesh, 0.01, bad).l2, 1e-3);
}

TEST(DkmElementTest, RejectsBadInput) {
  PlateMaterial m;
  m.nu = 0.5;
  EXPECT_THROW(DkmElement(unit_square(), m), ArgumentError);
  const DkmElement el(unit_square(), material(0.1));
  EXPECT_THROW(el.edge_variables(Eigen::VectorXd::Zero(5)), ArgumentError);
  EXPECT_THROW(el.evaluate_values(Eigen::VectorXd::Zero(12), Vec2(2, 2)), EvaluationError);
}

TEST(EdgeGeometry, ThreeFourFiveEdgeAndPentagonSymmetry) {
  const ElementGeometry g = edge_geometry({Vec2(0, 0), Vec2(3, 4), Vec2(-1, 4)});
  EXPECT_DOUBLE_EQ(g.lengths[0], 5.0);
  EXPECT_DOUBLE_EQ(g.cosines[0], 0.6);
  EXPECT_DOUBLE_EQ(g.sines[0], 0.8);
  const ElementGeometry p = edge_geometry(regular_polygon(5, 0.7, Vec2(0.2, -0.1), 0.3));
  for (const auto& c : p.corners) EXPECT_NEAR(c.det, p.corners[0].det, 1e-12);
}

TEST(BendingB, RotationPartOnLinearField) {
  // beta_x = x, beta_y = 0 through the nodal part alone
  const Polygon sq = unit_square();
  const ElementGeometry g = edge_geometry(sq);
  const PolygonBasis basis(sq);
  const Eigen::VectorXd u =
      sample_dofs(sq, [](const Vec2&) { return 0.0; }, [](const Vec2& p) { return Vec2(p.x(), 0.0); });
  for (const Vec2& p : polygon_quadrature(sq, 4).points) {
    const Eigen::Vector3d e = bending_B(g, basis.serendipity(p)).beta * u;
    EXPECT_LT((e - Eigen::Vector3d(1, 0, 0)).norm(), 1e-14);
  }
}

TEST(ElementLoad, NonuniformBenchmarkLoadAgainstFineRules) {
  // Wachspress functions are rational and their quadrature error is set by
  // the cell shape alone, so refining the mesh does not shrink it.
  const PlateMaterial m = benchmark_material(0.01);
  const AnalyticalSolution s = nonuniform_square_solution(m);
  const Polygon cell = regular_polygon(6, 0.08, Vec2(0.4, 0.55), 0.2);
  auto load = [&](int degree) {
    ElementOptions o;
    o.load_degree = degree;
    return DkmElement(cell, m, o).load(s.load);
  };
  const Eigen::VectorXd ref = load(16);
  const double e6 = (load(6) - ref).norm() / ref.norm(), e10 = (load(10) - ref).norm() / ref.norm();
  EXPECT_LT(e6, 1e-5);
  EXPECT_LT(e10, e6);
}

TEST(Recovery, ZeroDeformationFieldGivesZeroResultants) {
  std::mt19937_64 rng(11);
  const Polygon poly = random_convex_polygon(7, rng);
  const PlateMaterial m = material(0.1);
  const Eigen::VectorXd u = sample_dofs(
      poly, [](const Vec2& p) { return 1.0 + p.x() + p.y(); }, [](const Vec2&) { return Vec2(-1.0, -1.0); });
  const DkmElement el(poly, m);
  for (int k = 0; k < 10; ++k) {
    const Resultants r = el.recover(u, random_interior_point(poly, rng));
    EXPECT_LT(r.moments.norm(), 1e-12 * m.bending_rigidity());
    EXPECT_LT(r.shears.norm(), 1e-12 * m.shear_rigidity());
  }
  EXPECT_EQ(el.recover(Eigen::VectorXd::Zero(21), centroid(poly)).shears.norm(), 0.0);
}
