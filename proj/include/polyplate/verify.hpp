#pragma once

#include "polyplate/analytic.hpp"
#include "polyplate/cvt.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>

namespace polyplate {

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// Relative L2 error of (w, beta_x, beta_y) and relative H1 seminorm error
/// of their six first derivatives, integrated element by element.
inline ErrorNorms error_norms(const PlateSolution& sol, const AnalyticalSolution& exact, int degree = 6) {
  if (degree < 1) throw ArgumentError("error_norms: degree must be >= 1");
  const PolyMesh& mesh = sol.mesh();
  double e0 = 0.0, n0 = 0.0, e1 = 0.0, n1 = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const DkmElement& el = sol.element(e);
    const Eigen::VectorXd ue = sol.element_vector(e);
    const PolygonQuadrature quad = polygon_quadrature(el.geometry().vertices, degree);
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const Vec2& p = quad.points[k];
      const FieldValues fh = el.evaluate(ue, p);
      const Eigen::Vector3d u = exact.values(p);
      const Eigen::Matrix<double, 6, 1> du = exact.derivatives(p);
      Eigen::Matrix<double, 6, 1> duh;
      duh << fh.grad_w.x(), fh.grad_w.y(), fh.grad_beta(0, 0), fh.grad_beta(0, 1), fh.grad_beta(1, 0),
          fh.grad_beta(1, 1);
      const Eigen::Vector3d uh(fh.w, fh.beta.x(), fh.beta.y());
      const double wq = quad.weights[k];
      e0 += wq * (u - uh).squaredNorm();
      n0 += wq * u.squaredNorm();
      e1 += wq * (du - duh).squaredNorm();
      n1 += wq * du.squaredNorm();
    }
  }
  if (!(n0 > 0.0) || !(n1 > 0.0)) throw ArgumentError("error_norms: exact solution has zero norm");
  return {std::sqrt(e0 / n0), std::sqrt(e1 / n1)};
}

inline PlateMaterial benchmark_material(double thickness) {
  PlateMaterial m;
  m.E = 10.92e6;
  m.nu = 0.3;
  m.h = thickness;
  return m;
}

/// Solve a problem with a known solution on `mesh` and measure the error.
inline ErrorNorms solve_and_measure(const PolyMesh& mesh, const AnalyticalSolution& exact,
                                    const ElementOptions& options = {}, int norm_degree = 6,
                                    SolveReport* report = nullptr) {
  const SolveResult r = solve_plate(mesh, exact.material, exact.load, exact.boundary_condition(), options);
  if (report) *report = r.report;
  return error_norms(PlateSolution(mesh, exact.material, r.u, options), exact, norm_degree);
}

/// Zero-deformation patch test on a unit square mesh.
inline ErrorNorms patch_test(const PolyMesh& mesh, double h_over_a, const ElementOptions& options = {}) {
  return solve_and_measure(mesh, patch_solution(benchmark_material(h_over_a)), options);
}

/// 100 w_c D_b / (q a^4) for the uniformly loaded unit-pressure square.
inline double square_udl_benchmark(BcKind bc, double h_over_a, const PolyMesh& mesh, double a = 1.0,
                                   const ElementOptions& options = {}) {
  if (bc == BcKind::prescribed_field) throw ArgumentError("square_udl_benchmark: bc must be clamped or simply supported");
  const PlateMaterial mat = benchmark_material(h_over_a * a);
  BoundaryCondition b;
  b.kind = bc;
  const SolveResult r = solve_plate(mesh, mat, [](const Vec2&) { return 1.0; }, b, options);
  const PlateSolution sol(mesh, mat, r.u, options);
  const double wc = sol.values(Vec2(0.5 * a, 0.5 * a)).w;
  return 100.0 * wc * mat.bending_rigidity() / (a * a * a * a);
}

/// Published normalized center deflections of other elements, kept for the
/// benchmark report only. Columns follow h/a = 1e-5, 0.001, 0.01, 0.1, 0.15, 0.2;
/// NaN marks values that were not published.
struct ReferenceRow {
  const char* method;
  std::array<double, 6> values;
};
inline constexpr std::array<double, 6> reference_thicknesses{1e-5, 0.001, 0.01, 0.1, 0.15, 0.2};
inline const std::vector<ReferenceRow>& clamped_reference_rows() {
  static const std::vector<ReferenceRow> rows{
      {"TTK9s6", {0.1269, 0.1269, 0.1272, 0.1487, 0.1746, 0.2098}},
      {"DST-BL", {0.1265, 0.1265, 0.1268, 0.1476, 0.1726, 0.2073}},
      {"exact", {0.1265, 0.1265, 0.1265, 0.1499, 0.1798, 0.2167}},
  };
  return rows;
}
inline const std::vector<ReferenceRow>& simply_supported_reference_rows() {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  static const std::vector<ReferenceRow> rows{
      {"PRMn-W", {nan, 0.4070, nan, 0.42750, nan, nan}},
      {"TTK9s6", {0.4064, 0.4064, 0.4067, 0.4261, 0.4507, 0.4850}},
      {"DST-BL", {0.4061, 0.4061, 0.4063, 0.4256, 0.4501, 0.4844}},
      {"exact", {0.4062, 0.4062, 0.4064, 0.4273, 0.4536, 0.4906}},
  };
  return rows;
}

struct ConvergencePoint {
  double mesh_size = 0.0;
  std::size_t dofs = 0;
  double l2 = 0.0;
  double h1 = 0.0;
  double seconds = 0.0;
};

struct ConvergenceRecord {
  std::string problem;
  double thickness = 0.0;
  std::vector<ConvergencePoint> points;
  double l2_slope = 0.0;
  double h1_slope = 0.0;
};

/// Least-squares slope of log(error) against log(size).
inline double fit_slope(std::span<const double> sizes, std::span<const double> errors) {
  if (sizes.size() != errors.size()) throw ArgumentError("fit_slope: size mismatch");
  if (sizes.size() < 2) throw ArgumentError("fit_slope: need at least two points");
  const auto n = static_cast<double>(sizes.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(sizes[i] > 0.0) || !(errors[i] > 0.0)) throw ArgumentError("fit_slope: values must be positive");
    const double x = std::log(sizes[i]), y = std::log(errors[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw ArgumentError("fit_slope: sizes are all equal");
  return (n * sxy - sx * sy) / den;
}

inline void fit_slopes(ConvergenceRecord& rec, std::size_t skip_coarse = 0) {
  std::vector<double> s, l2, h1;
  for (std::size_t i = skip_coarse; i < rec.points.size(); ++i) {
    s.push_back(rec.points[i].mesh_size);
    l2.push_back(rec.points[i].l2);
    h1.push_back(rec.points[i].h1);
  }
  rec.l2_slope = fit_slope(s, l2);
  rec.h1_slope = fit_slope(s, h1);
}

inline void check_series(const ConvergenceRecord& rec) {
  if (rec.points.size() < 2) throw ArgumentError("convergence series needs at least two refinements");
  for (std::size_t i = 1; i < rec.points.size(); ++i)
    if (!(rec.points[i].mesh_size < rec.points[i - 1].mesh_size))
      throw ArgumentError("convergence series: mesh sizes must strictly decrease");
}

/// Run one problem over a sequence of meshes.
inline ConvergenceRecord convergence_series(const std::string& problem, double thickness,
                                            const std::vector<PolyMesh>& meshes, const AnalyticalSolution& exact,
                                            const ElementOptions& options = {}) {
  ConvergenceRecord rec;
  rec.problem = problem;
  rec.thickness = thickness;
  for (const PolyMesh& mesh : meshes) {
    const auto t0 = std::chrono::steady_clock::now();
    const ErrorNorms e = solve_and_measure(mesh, exact, options);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.points.push_back({mesh_size(mesh), 3 * mesh.num_vertices(), e.l2, e.h1, sec});
  }
  check_series(rec);
  fit_slopes(rec);
  return rec;
}

inline std::vector<PolyMesh> cvt_series(DomainKind domain, const std::vector<std::size_t>& cells, std::uint64_t seed,
                                        int lloyd_iters = 100) {
  std::vector<PolyMesh> out;
  for (std::size_t n : cells) {
    MeshSpec spec;
    spec.domain = domain;
    spec.kind = MeshKind::cvt_polygonal;
    spec.target_elements = n;
    spec.seed = seed;
    spec.lloyd_iters = lloyd_iters;
    out.push_back(generate_mesh(spec));
  }
  return out;
}

inline const std::vector<std::size_t>& dyadic_cells() {
  static const std::vector<std::size_t> c{64, 256, 1024, 4096};
  return c;
}

inline ConvergenceRecord square_nonuniform_benchmark(double h_over_a, const std::vector<PolyMesh>& meshes,
                                                     const ElementOptions& options = {}) {
  return convergence_series("square_nonuniform", h_over_a, meshes,
                            nonuniform_square_solution(benchmark_material(h_over_a)), options);
}

inline ConvergenceRecord circular_benchmark(double h_over_r, const std::vector<PolyMesh>& meshes,
                                            const ElementOptions& options = {}) {
  return convergence_series("circular", h_over_r, meshes, clamped_disk_solution(benchmark_material(h_over_r)),
                            options);
}

/// Thickness label used in file names, e.g. 0.1 -> "0.1", 1e-05 -> "1e-05".
inline std::string thickness_label(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

/// Convergence table: mesh_size,dofs,l2_rel,h1_rel,seconds.
inline void write_convergence_csv(const ConvergenceRecord& rec, std::ostream& os, bool with_timing) {
  os << "mesh_size,dofs,l2_rel,h1_rel,seconds\n";
  for (const auto& p : rec.points)
    os << format_double(p.mesh_size) << ',' << p.dofs << ',' << format_double(p.l2) << ',' << format_double(p.h1)
       << ',' << (with_timing ? format_double(p.seconds) : std::string("0")) << '\n';
}

/// Log-log plot of both error norms with the fitted slopes in the legend.
inline void write_convergence_svg(const ConvergenceRecord& rec, std::ostream& os) {
  const double w = 480, h = 360, m = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : rec.points) {
    xmin = std::min(xmin, std::log10(p.mesh_size));
    xmax = std::max(xmax, std::log10(p.mesh_size));
    for (double e : {p.l2, p.h1}) {
      if (!(e > 0.0)) continue;
      ymin = std::min(ymin, std::log10(e));
      ymax = std::max(ymax, std::log10(e));
    }
  }
  xmin = std::floor(xmin * 2.0) / 2.0, xmax = std::ceil(xmax * 2.0) / 2.0;
  ymin = std::floor(ymin), ymax = std::ceil(ymax);
  if (xmax <= xmin) xmax = xmin + 0.5;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double lx) { return m + (lx - xmin) / (xmax - xmin) * (w - 2 * m); };
  auto py = [&](double ly) { return h - m - (ly - ymin) / (ymax - ymin) * (h - 2 * m); };
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << rec.problem
     << ", t = " << thickness_label(rec.thickness) << "</text>\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double ly = ymin; ly <= ymax + 1e-9; ly += 1.0)
    os << "<text x=\"" << m - 6 << "\" y=\"" << py(ly) + 4 << "\" text-anchor=\"end\" font-size=\"10\">1e"
       << static_cast<int>(ly) << "</text>\n";
  for (double lx = xmin; lx <= xmax + 1e-9; lx += 0.5)
    os << "<text x=\"" << px(lx) << "\" y=\"" << h - m + 14 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << std::setprecision(3) << std::pow(10.0, lx) << std::setprecision(2) << "</text>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\" font-size=\"11\">mesh size</text>\n";
  const char* colors[2] = {"#1f77b4", "#d62728"};
  for (int k = 0; k < 2; ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[k] << "\" points=\"";
    for (const auto& p : rec.points) os << px(std::log10(p.mesh_size)) << ',' << py(std::log10(k ? p.h1 : p.l2)) << ' ';
    os << "\"/>\n";
    for (const auto& p : rec.points)
      os << "<circle cx=\"" << px(std::log10(p.mesh_size)) << "\" cy=\"" << py(std::log10(k ? p.h1 : p.l2))
         << "\" r=\"3\" fill=\"" << colors[k] << "\"/>\n";
    os << "<text x=\"" << m + 10 << "\" y=\"" << m + 16 + 14 * k << "\" font-size=\"11\" fill=\"" << colors[k] << "\">"
       << (k ? "H1 seminorm" : "L2") << " slope " << std::setprecision(3) << (k ? rec.h1_slope : rec.l2_slope)
       << std::setprecision(2) << "</text>\n";
  }
  os << "</svg>\n";
}

/// One CSV and one SVG per record, named <problem>_t<thickness>.
inline std::vector<std::filesystem::path> convergence_report(const std::vector<ConvergenceRecord>& records,
                                                             const std::filesystem::path& dir,
                                                             bool with_timing = false) {
  if (records.empty()) throw ArgumentError("convergence_report: no records");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& rec : records) {
    check_series(rec);
    const std::string stem = rec.problem + "_t" + thickness_label(rec.thickness);
    const auto csv = dir / (stem + ".csv");
    const auto svg = dir / (stem + ".svg");
    std::ofstream c(csv), s(svg);
    if (!c || !s) throw ArgumentError("convergence_report: cannot write into " + dir.string());
    write_convergence_csv(rec, c, with_timing);
    write_convergence_svg(rec, s);
    written.push_back(csv);
    written.push_back(svg);
  }
  return written;
}

struct DeflectionRow {
  std::size_t nodes = 0;
  double h_over_a = 0.0;
  double w_bar = 0.0;
};

inline void write_deflection_csv(const std::vector<DeflectionRow>& rows, std::ostream& os) {
  os << "nodes,h_over_a,w_bar\n";
  for (const auto& r : rows) os << r.nodes << ',' << thickness_label(r.h_over_a) << ',' << format_double(r.w_bar) << '\n';
}

inline void write_reference_csv(const std::vector<ReferenceRow>& rows, std::ostream& os) {
  os << "method";
  for (double t : reference_thicknesses) os << ",h_over_a=" << thickness_label(t);
  os << '\n';
  for (const auto& r : rows) {
    os << r.method;
    for (double v : r.values) {
      os << ',';
      if (!std::isnan(v)) os << v;
    }
    os << '\n';
  }
}

}  // namespace polyplate
