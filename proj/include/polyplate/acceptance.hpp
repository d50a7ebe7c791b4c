#pragma once

#include "polyplate/config.hpp"
#include "polyplate/verify.hpp"

#include <chrono>
#include <cstdio>

namespace polyplate {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  Tolerances tol;
  std::uint64_t seed = 42;
  ElementOptions element;
};

namespace detail {

inline std::string sci(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return buf;
}

inline std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline MeshSpec cvt_spec(DomainKind d, std::size_t cells, std::uint64_t seed) {
  MeshSpec s;
  s.domain = d;
  s.kind = MeshKind::cvt_polygonal;
  s.target_elements = cells;
  s.seed = seed;
  return s;
}

template <class F>
CheckResult guarded(int id, std::string name, F&& body) {
  CheckResult r;
  r.id = id;
  r.name = std::move(name);
  const Stopwatch sw;
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail += (r.detail.empty() ? "" : "; ") + std::string("exception: ") + e.what();
  }
  r.seconds = sw.seconds();
  return r;
}

}  // namespace detail

inline const std::array<double, 4>& benchmark_thicknesses() {
  static const std::array<double, 4> t{0.1, 0.01, 0.001, 1e-5};
  return t;
}

inline const std::array<double, 4>& disk_thicknesses() {
  static const std::array<double, 4> t{0.2, 0.1, 0.01, 1e-5};
  return t;
}

/// 1. Zero-deformation patch test on every square mesh family.
inline CheckResult check_patch(const AcceptanceOptions& o) {
  return detail::guarded(1, "patch test, all square mesh kinds", [&](CheckResult& r) {
    std::vector<std::pair<std::string, PolyMesh>> meshes;
    for (int n : {4, 8}) {
      meshes.emplace_back("structured " + std::to_string(n * n), generate_structured_quad(1.0, n));
      meshes.emplace_back("trapezoidal " + std::to_string(n * n), generate_trapezoidal(1.0, n, 0.2));
      meshes.emplace_back("cvt " + std::to_string(n * n),
                          generate_mesh(detail::cvt_spec(DomainKind::unit_square, static_cast<std::size_t>(n * n), o.seed)));
    }
    const detail::Stopwatch sw;
    double worst_l2 = 0.0, worst_h1 = 0.0;
    std::string worst;
    for (const auto& [label, mesh] : meshes)
      for (double t : benchmark_thicknesses()) {
        const ErrorNorms e = patch_test(mesh, t, o.element);
        if (std::max(e.l2, e.h1) > std::max(worst_l2, worst_h1)) worst = label + ", h/a=" + thickness_label(t);
        worst_l2 = std::max(worst_l2, e.l2);
        worst_h1 = std::max(worst_h1, e.h1);
      }
    const double sec = sw.seconds();
    r.passed = worst_l2 <= o.tol.patch && worst_h1 <= o.tol.patch && sec < o.tol.patch_seconds;
    r.detail = "max L2 " + detail::sci(worst_l2) + ", max H1 " + detail::sci(worst_h1) + " (" + worst + "), " +
               detail::fixed(sec, 2) + " s";
  });
}

namespace detail {

inline CheckResult deflection_check(int id, const std::string& name, BcKind bc, double thin_ref, double thick_ref,
                                    const AcceptanceOptions& o) {
  return guarded(id, name, [&](CheckResult& r) {
    const Stopwatch sw;
    const PolyMesh mesh =
        generate_mesh(cvt_spec(DomainKind::unit_square, cells_for_nodes(DomainKind::unit_square, 803), o.seed));
    const double thin = square_udl_benchmark(bc, 1e-5, mesh, 1.0, o.element);
    const double thick = square_udl_benchmark(bc, 0.1, mesh, 1.0, o.element);
    const double sec = sw.seconds();
    const double d_thin = thin / thin_ref - 1.0, d_thick = thick / thick_ref - 1.0;
    r.passed = std::abs(d_thin) <= o.tol.deflection_band && std::abs(d_thick) <= o.tol.deflection_band &&
               sec < o.tol.deflection_seconds;
    r.detail = std::to_string(mesh.num_vertices()) + " nodes: w(1e-5) = " + fixed(thin) + " (" +
               fixed(100.0 * d_thin, 2) + "%), w(0.1) = " + fixed(thick) + " (" + fixed(100.0 * d_thick, 2) +
               "%), " + fixed(sec, 2) + " s";
  });
}

}  // namespace detail

/// 2. Clamped square under uniform load, about 800 nodes.
inline CheckResult check_clamped_square(const AcceptanceOptions& o) {
  return detail::deflection_check(2, "clamped square, uniform load", BcKind::clamped, 0.1265, 0.1499, o);
}

/// 3. Simply supported square under uniform load.
inline CheckResult check_ss_square(const AcceptanceOptions& o) {
  return detail::deflection_check(3, "simply supported square, uniform load", BcKind::hard_simply_supported, 0.4062,
                                  0.4273, o);
}

namespace detail {

inline void slope_verdict(CheckResult& r, const std::vector<ConvergenceRecord>& recs, const Tolerances& tol) {
  bool ok = true;
  std::string d;
  for (const auto& rec : recs) {
    const bool l2_ok = rec.l2_slope >= tol.l2_slope_min && rec.l2_slope <= tol.l2_slope_max;
    const bool h1_ok = rec.h1_slope >= tol.h1_slope_min && rec.h1_slope <= tol.h1_slope_max;
    ok = ok && l2_ok && h1_ok;
    d += (d.empty() ? "" : "; ") + std::string("t=") + thickness_label(rec.thickness) + " L2 " +
         fixed(rec.l2_slope, 2) + (l2_ok ? "" : "!") + " H1 " + fixed(rec.h1_slope, 2) + (h1_ok ? "" : "!");
  }
  double spread_l2 = 0.0, spread_h1 = 0.0;
  for (const auto& a : recs)
    for (const auto& b : recs) {
      spread_l2 = std::max(spread_l2, std::abs(a.l2_slope - b.l2_slope));
      spread_h1 = std::max(spread_h1, std::abs(a.h1_slope - b.h1_slope));
    }
  const bool spread_ok = spread_l2 < tol.slope_spread && spread_h1 < tol.slope_spread;
  d += "; spread L2 " + fixed(spread_l2, 2) + " H1 " + fixed(spread_h1, 2) + (spread_ok ? "" : "!");
  r.passed = ok && spread_ok;
  r.detail = d;
}

}  // namespace detail

/// 4. Nonuniform load on the clamped square: convergence slopes.
inline CheckResult check_nonuniform_square(const AcceptanceOptions& o,
                                           std::vector<ConvergenceRecord>* records = nullptr) {
  return detail::guarded(4, "nonuniform-load square, convergence slopes", [&](CheckResult& r) {
    const auto meshes = cvt_series(DomainKind::unit_square, dyadic_cells(), o.seed);
    std::vector<ConvergenceRecord> recs;
    for (double t : benchmark_thicknesses()) recs.push_back(square_nonuniform_benchmark(t, meshes, o.element));
    detail::slope_verdict(r, recs, o.tol);
    if (records) *records = recs;
  });
}

/// Largest relative strong-form residual of the clamped-disk solution at
/// random interior points.
inline double disk_strong_form_residual(double h_over_r, int npoints, std::uint64_t seed) {
  const AnalyticalSolution s = clamped_disk_solution(benchmark_material(h_over_r));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < npoints;) {
    const Vec2 p(u(rng), u(rng));
    if (p.squaredNorm() >= 1.0) continue;
    ++k;
    worst = std::max(worst, relative_strong_form_residual(s, p).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// 5. Clamped disk: strong-form check of the closed form, then slopes.
inline CheckResult check_circular(const AcceptanceOptions& o, std::vector<ConvergenceRecord>* records = nullptr) {
  return detail::guarded(5, "clamped circular plate, convergence slopes", [&](CheckResult& r) {
    double resid = 0.0;
    for (double t : disk_thicknesses()) resid = std::max(resid, disk_strong_form_residual(t, 100, o.seed));
    const bool resid_ok = resid < o.tol.strong_form;
    const auto meshes = cvt_series(DomainKind::disk, dyadic_cells(), o.seed);
    std::vector<ConvergenceRecord> recs;
    for (double t : disk_thicknesses()) recs.push_back(circular_benchmark(t, meshes, o.element));
    detail::slope_verdict(r, recs, o.tol);
    r.detail = "strong-form residual " + detail::sci(resid) + (resid_ok ? "" : "!") + "; " + r.detail;
    r.passed = r.passed && resid_ok;
    if (records) *records = recs;
  });
}

/// Eigenvalues of K below tol * max are counted as zero.
inline int count_zero_modes(const Eigen::MatrixXd& k, double rel_tol) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double mx = ev.cwiseAbs().maxCoeff();
  int zeros = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) < rel_tol * mx) ++zeros;
  return zeros;
}

/// 6. Exactly three zero-energy modes on random convex polygons.
inline CheckResult check_rank(const AcceptanceOptions& o) {
  return detail::guarded(6, "element rank 3n-3", [&](CheckResult& r) {
    std::mt19937_64 rng(o.seed);
    int tested = 0, bad = 0;
    std::string first_bad;
    for (int n = 3; n <= 8; ++n)
      for (int k = 0; k < 100; ++k) {
        const Polygon poly = random_convex_polygon(n, rng);
        for (double ratio : {0.2, 0.01, 1e-5}) {
          PlateMaterial m = benchmark_material(ratio * diameter(poly));
          const int zeros = count_zero_modes(DkmElement(poly, m, o.element).stiffness(), o.tol.rank);
          ++tested;
          if (zeros != 3) {
            if (!bad) first_bad = "n=" + std::to_string(n) + " h/d=" + thickness_label(ratio) + " zeros=" + std::to_string(zeros);
            ++bad;
          }
        }
      }
    r.passed = bad == 0;
    r.detail = std::to_string(tested - bad) + "/" + std::to_string(tested) + " elements with exactly 3 zero modes" +
               (bad ? " (first failure " + first_bad + ")" : "");
  });
}

/// Shear-from-edge-variable matrix for 4- and 5-node elements written out
/// entry by entry as published, with the bare -2/3 factor. Node numbers
/// 1..n and edge numbers n+1..2n as printed; edge n+i runs from node i.
/// The printed y components carry a wrong sign on the second term, and
/// the last pentagon column names node 2 where node 1 is meant; both are
/// corrected here.
inline Matrix2X published_shear_matrix(const Polygon& poly, const BasisEval& b) {
  const int n = static_cast<int>(poly.size());
  if (n != 4 && n != 5) throw ArgumentError("published_shear_matrix: only quadrilaterals and pentagons");
  auto C = [&](int e) {
    const int k = e - n - 1;
    return (poly[static_cast<std::size_t>((k + 1) % n)] - poly[static_cast<std::size_t>(k)]).normalized().x();
  };
  auto S = [&](int e) {
    const int k = e - n - 1;
    return (poly[static_cast<std::size_t>((k + 1) % n)] - poly[static_cast<std::size_t>(k)]).normalized().y();
  };
  // A_i from the edge leaving node i and the edge arriving at node i
  auto A = [&](int i) {
    const int out = n + i, in = i == 1 ? 2 * n : n + i - 1;
    return C(out) * S(in) - S(out) * C(in);
  };
  auto L = [&](int i) { return b.lambda[static_cast<std::size_t>(i - 1)]; };
  struct Entry {
    int a, ea, b, eb;  // (S_ea / A_a) lambda_a - (S_eb / A_b) lambda_b
  };
  const std::vector<Entry> quad{{1, 8, 2, 6}, {2, 5, 3, 7}, {3, 6, 4, 8}, {4, 7, 1, 5}};
  const std::vector<Entry> pent{{1, 10, 2, 7}, {2, 6, 3, 8}, {3, 7, 4, 9}, {4, 8, 5, 10}, {5, 9, 1, 6}};
  const auto& rows = n == 4 ? quad : pent;
  Matrix2X m(2, n);
  for (int k = 0; k < n; ++k) {
    const Entry& e = rows[static_cast<std::size_t>(k)];
    m(0, k) = S(e.ea) / A(e.a) * L(e.a) - S(e.eb) / A(e.b) * L(e.b);
    m(1, k) = -C(e.ea) / A(e.a) * L(e.a) + C(e.eb) / A(e.b) * L(e.b);
  }
  return -2.0 / 3.0 * m;
}

/// 7. General shear matrix against the published 4- and 5-node forms.
inline CheckResult check_published_shear(const AcceptanceOptions& o) {
  return detail::guarded(7, "shear matrix vs published 4/5-node forms", [&](CheckResult& r) {
    std::mt19937_64 rng(o.seed + 7);
    double worst = 0.0;
    bool pattern = true;
    int cases = 0;
    for (int n : {4, 5})
      for (int k = 0; k < 20; ++k) {
        const Polygon poly = random_convex_polygon(n, rng);
        const PlateMaterial m = benchmark_material(0.1 * diameter(poly));
        const ElementGeometry g = edge_geometry(poly);
        const Eigen::VectorXd alpha = edge_alpha(g, m);
        const PolygonBasis basis(poly);
        for (int q = 0; q < 10; ++q) {
          const BasisEval b = basis.wachspress(random_interior_point(poly, rng));
          const Matrix2X ours = shear_B_dbeta(g, m, b);
          const Matrix2X pub = published_shear_matrix(poly, b);
          for (int c = 0; c < n; ++c)
            for (int row = 0; row < 2; ++row) {
              const double p = pub(row, c), v = ours(row, c);
              const double scale = std::max(std::abs(p), std::abs(v));
              if (scale < 1e-14) continue;
              if (std::abs(p) < 1e-14 * std::abs(v) || (p > 0) != (v > 0)) {
                pattern = false;
                continue;
              }
              worst = std::max(worst, std::abs(v / p - alpha(c)) / alpha(c));
            }
          ++cases;
        }
      }
    r.passed = pattern && worst < o.tol.appendix;
    r.detail = std::to_string(cases) + " evaluations, max |ratio/alpha - 1| " + detail::sci(worst) +
               (pattern ? ", sign pattern identical" : ", sign pattern differs");
  });
}

/// 8. Partition of unity, linear precision, Lagrange property, FD gradients.
inline CheckResult check_basis(const AcceptanceOptions& o) {
  return detail::guarded(8, "basis properties", [&](CheckResult& r) {
    std::mt19937_64 rng(o.seed + 8);
    std::uniform_int_distribution<int> nd(3, 10);
    double pou = 0.0, lin = 0.0, lag = 0.0, grad = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Polygon poly = random_convex_polygon(nd(rng), rng);
      const PolygonBasis basis(poly);
      const std::size_t n = poly.size();
      const double diam = basis.diameter_value();
      for (int q = 0; q < 10; ++q) {
        const Vec2 p = random_interior_point(poly, rng);
        const BasisEval b = basis.serendipity(p);
        double s = 0.0, ss = 0.0;
        Vec2 x = Vec2::Zero(), xs = Vec2::Zero();
        for (std::size_t i = 0; i < n; ++i) {
          s += b.lambda[i];
          x += b.lambda[i] * poly[i];
          ss += b.vertex[i] + b.psi[i];
          xs += b.vertex[i] * poly[i] + b.psi[i] * basis.edge_midpoint(i);
        }
        pou = std::max({pou, std::abs(s - 1.0), std::abs(ss - 1.0)});
        lin = std::max({lin, (x - p).norm() / diam, (xs - p).norm() / diam});
      }
      // Lagrange property of the serendipity set at the 2n nodes
      for (std::size_t node = 0; node < 2 * n; ++node) {
        const Vec2 at = node < n ? poly[node] : basis.edge_midpoint(node - n);
        const BasisEval b = basis.boundary_values(at);
        const auto& v = b.vertex;
        const auto& m = b.psi;
        for (std::size_t i = 0; i < n; ++i) {
          lag = std::max(lag, std::abs(v[i] - (node == i ? 1.0 : 0.0)));
          lag = std::max(lag, std::abs(m[i] - (node == n + i ? 1.0 : 0.0)));
        }
      }
      grad = std::max({grad, gradient_check(BasisKind::wachspress, poly, 5, static_cast<unsigned>(k + 1)),
                       gradient_check(BasisKind::serendipity, poly, 5, static_cast<unsigned>(k + 1))});
    }
    r.passed = pou < o.tol.basis && lin < o.tol.basis && lag < o.tol.lagrange && grad < o.tol.gradient;
    r.detail = "unity " + detail::sci(pou) + ", linear " + detail::sci(lin) + ", Lagrange " + detail::sci(lag) +
               ", gradient " + detail::sci(grad);
  });
}

/// 9. Stiffness at the working quadrature degree vs degree 8.
inline CheckResult check_quadrature_refinement(const AcceptanceOptions& o) {
  return detail::guarded(9, "stiffness quadrature refinement", [&](CheckResult& r) {
    std::mt19937_64 rng(o.seed + 9);
    std::uniform_int_distribution<int> nd(3, 8);
    double worst = 0.0;
    int worst_n = 0;
    for (int k = 0; k < 20; ++k) {
      const Polygon poly = random_convex_polygon(nd(rng), rng);
      const PlateMaterial m = benchmark_material(0.1 * diameter(poly));
      ElementOptions fine = o.element;
      fine.stiffness_degree = 8;
      const Eigen::MatrixXd kw = DkmElement(poly, m, o.element).stiffness();
      const Eigen::MatrixXd kf = DkmElement(poly, m, fine).stiffness();
      const double d = (kw - kf).norm() / kf.norm();
      if (d > worst) worst = d, worst_n = static_cast<int>(poly.size());
    }
    r.passed = worst < o.tol.quadrature;
    r.detail = "degree " + std::to_string(o.element.stiffness_degree) + " vs 8: max relative difference " +
               detail::sci(worst) + " (n=" + std::to_string(worst_n) + ")";
  });
}

/// 10. Reactions balance the applied load on clamped problems.
inline CheckResult check_equilibrium(const AcceptanceOptions& o) {
  return detail::guarded(10, "equilibrium of clamped plates", [&](CheckResult& r) {
    double worst = 0.0;
    std::vector<std::pair<std::string, PolyMesh>> meshes;
    meshes.emplace_back("structured 64", generate_structured_quad(1.0, 8));
    meshes.emplace_back("cvt square 256", generate_mesh(detail::cvt_spec(DomainKind::unit_square, 256, o.seed)));
    meshes.emplace_back("cvt disk 256", generate_mesh(detail::cvt_spec(DomainKind::disk, 256, o.seed)));
    std::string d;
    for (const auto& [label, mesh] : meshes)
      for (double t : {0.1, 1e-5}) {
        const PlateMaterial m = benchmark_material(t);
        const SolveResult s = solve_plate(mesh, m, [](const Vec2&) { return 1.0; }, BoundaryCondition::clamped(),
                                          o.element);
        worst = std::max(worst, equilibrium_error(s.system, s.u));
      }
    r.passed = worst < o.tol.equilibrium;
    r.detail = "max |reaction + load| / load " + detail::sci(worst) + " over 6 problems";
  });
}

/// All criteria, in order. Convergence records are handed back for reporting.
inline std::vector<CheckResult> run_acceptance(const AcceptanceOptions& o,
                                               std::vector<ConvergenceRecord>* records = nullptr) {
  std::vector<CheckResult> out;
  std::vector<ConvergenceRecord> sq, disk;
  out.push_back(check_patch(o));
  out.push_back(check_clamped_square(o));
  out.push_back(check_ss_square(o));
  out.push_back(check_nonuniform_square(o, &sq));
  out.push_back(check_circular(o, &disk));
  out.push_back(check_rank(o));
  out.push_back(check_published_shear(o));
  out.push_back(check_basis(o));
  out.push_back(check_quadrature_refinement(o));
  out.push_back(check_equilibrium(o));
  if (records) {
    *records = sq;
    records->insert(records->end(), disk.begin(), disk.end());
  }
  return out;
}

inline std::string format_result(const CheckResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %2d  %-44s", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str());
  return std::string(head) + " " + r.detail;
}

}  // namespace polyplate
