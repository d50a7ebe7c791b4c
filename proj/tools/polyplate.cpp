#include <polyplate.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace polyplate;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;

struct UsageError : Error {
  using Error::Error;
};

// Relative paths land under $POLYPLATE_OUT when it is set.
fs::path output_path(const std::string& requested) {
  const fs::path p(requested);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("POLYPLATE_OUT"); root && *root) return fs::path(root) / p;
  return p;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

Polygon read_polygon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open polygon file '" + path + "'");
  Polygon poly;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x)) continue;
    if (!(ls >> y)) throw UsageError(path + ":" + std::to_string(n) + ": expected 'x y'");
    poly.emplace_back(x, y);
  }
  if (poly.size() < 3) throw UsageError("polygon file needs at least three vertices");
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  require_convex_ccw(poly);
  return poly;
}

json mesh_stats(const PolyMesh& m) {
  std::size_t nmin = SIZE_MAX, nmax = 0;
  for (const auto& e : m.elements) nmin = std::min(nmin, e.size()), nmax = std::max(nmax, e.size());
  return {{"vertices", m.num_vertices()},
          {"elements", m.num_elements()},
          {"boundary_edges", m.boundary_edges.size()},
          {"min_sides", nmin},
          {"max_sides", nmax},
          {"mesh_size", mesh_size(m)}};
}

json material_json(const PlateMaterial& m) {
  return {{"E", m.E}, {"nu", m.nu}, {"h", m.h}, {"kappa", m.kappa}};
}

json tolerances_json(const Tolerances& t) {
  json j;
  for (const auto& [name, member] : detail::tolerance_keys()) j[std::string(name).substr(4)] = t.*member;
  return j;
}

json toggles_json(const RunConfig& c) {
  return {{"bc", c.bc == BcKind::hard_simply_supported ? "simply_supported" : to_string(c.bc)},
          {"kappa", c.kappa},
          {"stiffness_degree", c.stiffness_degree},
          {"load_degree", c.load_degree},
          {"norm_degree", c.norm_degree},
          {"shear_convention", to_string(c.convention)},
          {"corner_angle_deg", c.corner_angle_deg},
          {"lloyd_iters", c.lloyd_iters},
          {"collapse_ratio", c.collapse_ratio},
          {"disk_clip_segments", disk_clip_segments},
          {"solver_residual", solver_residual_target},
          {"solver_floor_ulps", solver_floor_ulps}};
}

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

void write_manifest(const fs::path& dir, const RunConfig& c, const std::string& command,
                    const std::vector<Check>& checks, const std::vector<fs::path>& artifacts) {
  json j;
  j["tool"] = "polyplate";
  j["version"] = POLYPLATE_VERSION;
  j["command"] = command;
  j["config_hash"] = config_hash(c);
  j["config"] = to_text(c);
  j["toggles"] = toggles_json(c);
  j["tolerances"] = tolerances_json(c.tol);
  json cj = json::array();
  for (const auto& ch : checks) cj.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  j["checks"] = cj;
  json aj = json::array();
  for (const auto& a : artifacts) aj.push_back(fs::relative(a, dir).generic_string());
  j["artifacts"] = aj;
  open_out(dir / "manifest.json") << j.dump(2) << '\n';
}

int report_checks(const std::vector<Check>& checks) {
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    failed += c.passed ? 0 : 1;
  }
  if (failed) {
    std::cerr << failed << " check(s) failed:";
    for (const auto& c : checks)
      if (!c.passed) std::cerr << ' ' << c.name;
    std::cerr << '\n';
  }
  return failed ? exit_check_failed : exit_pass;
}

MeshSpec mesh_spec(const RunConfig& c, std::size_t size) {
  MeshSpec s;
  s.domain = c.domain();
  s.kind = c.mesh.kind;
  s.seed = c.seed;
  s.lloyd_iters = c.lloyd_iters;
  s.skew = c.skew;
  s.collapse_ratio = c.collapse_ratio;
  if (c.mesh.kind == MeshKind::cvt_polygonal) s.target_elements = size;
  else s.target_elements = size * size;
  return s;
}

std::vector<std::size_t> mesh_sizes(const RunConfig& c) {
  if (c.mesh.nodes == 0) return c.mesh.sizes;
  if (c.mesh.kind != MeshKind::cvt_polygonal) throw UsageError("nodes = N needs a cvt mesh");
  return {cells_for_nodes(c.domain(), c.mesh.nodes)};
}

std::string mesh_label(const RunConfig& c, std::size_t size) {
  return std::string(detail::kind_name(c.mesh.kind)) + "_" + std::to_string(size);
}

BoundaryCondition boundary_condition(const RunConfig& c, const AnalyticalSolution* exact) {
  BoundaryCondition b = exact ? exact->boundary_condition() : BoundaryCondition{};
  if (!exact) b.kind = c.bc;
  b.corner_angle_deg = c.corner_angle_deg;
  return b;
}

AnalyticalSolution exact_solution(const RunConfig& c, double h) {
  switch (c.problem) {
    case Problem::patch: return patch_solution(c.material(h));
    case Problem::square_nonuniform: return nonuniform_square_solution(c.material(h));
    case Problem::circular: return clamped_disk_solution(c.material(h));
    case Problem::square_udl: break;
  }
  throw ArgumentError("no closed-form solution for this problem");
}

// Writes solution.csv and its metadata JSON; returns both paths.
std::vector<fs::path> dump_solution(const fs::path& dir, const std::string& stem, const PolyMesh& mesh,
                                    const PlateMaterial& mat, const BoundaryCondition& bc, const SolveResult& r) {
  const fs::path csv = dir / (stem + ".csv"), meta = dir / (stem + ".json");
  {
    auto os = open_out(csv);
    write_solution_csv(mesh, r.u, os);
  }
  json j;
  j["material"] = material_json(mat);
  j["bc"] = to_string(bc.kind);
  j["mesh"] = mesh_stats(mesh);
  j["free_dofs"] = r.system.dofs.num_free();
  j["residual"] = r.report.residual;
  j["backward_error_ulp"] = r.report.backward_error;
  open_out(meta) << j.dump(2) << '\n';
  return {csv, meta};
}

// Closed-form center deflection of the uniformly loaded unit square, when known.
std::optional<double> reference_deflection(const RunConfig& c, double h) {
  const PlateMaterial m = c.material(h);
  if (c.bc == BcKind::hard_simply_supported)
    return 100.0 * navier_center_coefficient(1.0, m.bending_rigidity(), m.shear_rigidity());
  if (c.E != 10.92e6 || c.nu != 0.3 || c.kappa != 5.0 / 6.0) return std::nullopt;
  const auto& exact = clamped_reference_rows().back();
  for (std::size_t i = 0; i < reference_thicknesses.size(); ++i)
    if (std::abs(reference_thicknesses[i] - h) <= 1e-12 * h) return exact.values[i];
  return std::nullopt;
}

int run_config(const RunConfig& c, const std::string& command) {
  c.validate();
  const fs::path dir = output_path(c.output);
  fs::create_directories(dir);
  const ElementOptions opt = c.element_options();
  const auto sizes = mesh_sizes(c);
  std::vector<PolyMesh> meshes;
  std::vector<fs::path> artifacts;
  for (std::size_t s : sizes) {
    meshes.push_back(generate_mesh(mesh_spec(c, s)));
    const fs::path p = dir / ("mesh_" + mesh_label(c, s) + ".txt");
    write_mesh(meshes.back(), p.string());
    artifacts.push_back(p);
  }
  std::vector<Check> checks;
  const auto fail_or = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const SolverError& e) {
      checks.push_back({name, false, e.what()});
    }
  };

  if (c.problem == Problem::square_udl) {
    std::vector<DeflectionRow> rows;
    for (std::size_t i = 0; i < meshes.size(); ++i)
      for (double h : c.thickness) {
        const std::string name = "w_bar " + mesh_label(c, sizes[i]) + " h=" + thickness_label(h);
        fail_or(name, [&] {
          const PlateMaterial mat = c.material(h);
          const BoundaryCondition bc = boundary_condition(c, nullptr);
          const SolveResult r = solve_plate(meshes[i], mat, [](const Vec2&) { return 1.0; }, bc, opt);
          const double wc = PlateSolution(meshes[i], mat, r.u, opt).values(Vec2(0.5, 0.5)).w;
          const double wbar = 100.0 * wc * mat.bending_rigidity();
          rows.push_back({meshes[i].num_vertices(), h, wbar});
          auto files = dump_solution(dir, "solution_" + mesh_label(c, sizes[i]) + "_t" + thickness_label(h),
                                     meshes[i], mat, bc, r);
          artifacts.insert(artifacts.end(), files.begin(), files.end());
          if (const auto ref = reference_deflection(c, h)) {
            const double dev = wbar / *ref - 1.0;
            checks.push_back({name, std::abs(dev) <= c.tol.deflection_band,
                              format_double(wbar) + " vs " + format_double(*ref) + " (" +
                                  detail::fixed(100.0 * dev, 2) + "%)"});
          } else {
            std::cout << name << " = " << format_double(wbar) << " (no reference)\n";
          }
        });
      }
    const fs::path p = dir / "deflection.csv";
    auto os = open_out(p);
    write_deflection_csv(rows, os);
    artifacts.push_back(p);
  } else {
    std::vector<ConvergenceRecord> records;
    for (double h : c.thickness) {
      const AnalyticalSolution exact = exact_solution(c, h);
      const BoundaryCondition bc = boundary_condition(c, &exact);
      ConvergenceRecord rec;
      rec.problem = to_string(c.problem);
      rec.thickness = h;
      bool solved = true;
      for (std::size_t i = 0; i < meshes.size(); ++i) {
        const std::string name = exact.name + " " + mesh_label(c, sizes[i]) + " h=" + thickness_label(h);
        try {
          const auto t0 = std::chrono::steady_clock::now();
          const SolveResult r = solve_plate(meshes[i], exact.material, exact.load, bc, opt);
          const ErrorNorms e =
              error_norms(PlateSolution(meshes[i], exact.material, r.u, opt), exact, c.norm_degree);
          const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          rec.points.push_back({mesh_size(meshes[i]), 3 * meshes[i].num_vertices(), e.l2, e.h1, sec});
          auto files = dump_solution(dir, "solution_" + mesh_label(c, sizes[i]) + "_t" + thickness_label(h),
                                     meshes[i], exact.material, bc, r);
          artifacts.insert(artifacts.end(), files.begin(), files.end());
          const std::string detail = "L2 " + format_double(e.l2) + ", H1 " + format_double(e.h1);
          if (c.problem == Problem::patch)
            checks.push_back({name, e.l2 <= c.tol.patch && e.h1 <= c.tol.patch, detail});
          else
            std::cout << name << ": " << detail << '\n';
        } catch (const SolverError& e) {
          checks.push_back({name, false, e.what()});
          solved = false;
        }
      }
      if (c.problem != Problem::patch && solved && rec.points.size() >= 2) {
        check_series(rec);
        fit_slopes(rec);
        const bool ok = rec.l2_slope >= c.tol.l2_slope_min && rec.l2_slope <= c.tol.l2_slope_max &&
                        rec.h1_slope >= c.tol.h1_slope_min && rec.h1_slope <= c.tol.h1_slope_max;
        checks.push_back({rec.problem + " slopes h=" + thickness_label(h), ok,
                          "L2 " + detail::fixed(rec.l2_slope, 3) + ", H1 " + detail::fixed(rec.h1_slope, 3)});
        records.push_back(rec);
      }
    }
    if (!records.empty()) {
      auto files = convergence_report(records, dir, c.record_timing);
      artifacts.insert(artifacts.end(), files.begin(), files.end());
    }
  }
  write_manifest(dir, c, command, checks, artifacts);
  std::cout << "wrote " << artifacts.size() + 1 << " files to " << dir.string() << '\n';
  return report_checks(checks);
}

int cmd_mesh_gen(const std::string& domain, const std::string& kind, std::size_t n, std::uint64_t seed, int lloyd,
                 const std::string& out) {
  MeshSpec s;
  s.domain = domain == "disk" ? DomainKind::disk : DomainKind::unit_square;
  s.kind = kind == "structured" ? MeshKind::structured_quad
           : kind == "trapezoidal" ? MeshKind::trapezoidal
                                   : MeshKind::cvt_polygonal;
  s.target_elements = n;
  s.seed = seed;
  s.lloyd_iters = lloyd;
  const PolyMesh m = generate_mesh(s);
  const fs::path p = output_path(out);
  auto os = open_out(p);
  write_mesh(m, os);
  std::cout << mesh_stats(m).dump() << '\n';
  return exit_pass;
}

int cmd_basis_sample(const std::string& polygon, int grid, const std::string& out) {
  if (grid < 2) throw UsageError("--grid must be >= 2");
  const Polygon poly = read_polygon(polygon);
  const PolygonBasis basis(poly);
  Eigen::AlignedBox2d box;
  for (const auto& v : poly) box.extend(v);
  const std::size_t n = poly.size();
  const fs::path p = output_path(out);
  auto os = open_out(p);
  os << "x,y";
  for (const char* f : {"lambda", "vertex", "psi"})
    for (std::size_t i = 0; i < n; ++i) os << ',' << f << '_' << i;
  os << '\n';
  std::size_t rows = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const Vec2 t((i + 0.5) / grid, (j + 0.5) / grid);
      const Vec2 x = box.min() + t.cwiseProduct(box.sizes());
      if (!(basis.edge_clearance(x) > 1e-9 * basis.diameter_value())) continue;
      const BasisEval b = basis.serendipity(x);
      os << format_double(x.x()) << ',' << format_double(x.y());
      for (const auto* v : {&b.lambda, &b.vertex, &b.psi})
        for (double s : *v) os << ',' << format_double(s);
      os << '\n';
      ++rows;
    }
  std::cout << rows << " interior points written to " << p.string() << '\n';
  return exit_pass;
}

int cmd_element_dump(const std::string& polygon, double h, const std::string& out) {
  const Polygon poly = read_polygon(polygon);
  const DkmElement el(poly, benchmark_material(h));
  const Eigen::MatrixXd k = el.stiffness();
  const fs::path dir = output_path(out);
  {
    auto os = open_out(dir / "stiffness.csv");
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index j = 0; j < k.cols(); ++j) os << (j ? "," : "") << format_double(k(i, j));
      os << '\n';
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  {
    auto os = open_out(dir / "spectrum.csv");
    os << "index,eigenvalue\n";
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) os << i << ',' << format_double(es.eigenvalues()(i)) << '\n';
  }
  std::cout << "zero modes: " << count_zero_modes(k, Tolerances{}.rank) << " of " << k.rows() << '\n';
  return exit_pass;
}

int cmd_solve(const std::string& mesh_file, const std::string& bc_name, double h, double q, double corner,
              const std::string& out) {
  const PolyMesh mesh = read_mesh(mesh_file);
  const PlateMaterial mat = benchmark_material(h);
  BoundaryCondition bc;
  bc.kind = parse_bc(bc_name);
  if (bc.kind == BcKind::prescribed_field) throw UsageError("solve: --bc must be clamped or simply_supported");
  bc.corner_angle_deg = corner;
  const SolveResult r = solve_plate(mesh, mat, [q](const Vec2&) { return q; }, bc);
  dump_solution(output_path(out), "solution", mesh, mat, bc, r);
  std::cout << "residual " << r.report.residual << ", max |w| " << r.u(Eigen::seqN(0, r.u.size() / 3, 3)).cwiseAbs().maxCoeff()
            << '\n';
  return exit_pass;
}

int cmd_bench(const RunConfig& base, bool quick) {
  const fs::path dir = output_path(base.output);
  fs::create_directories(dir);
  std::vector<fs::path> artifacts;
  const std::vector<std::size_t> nodes = quick ? std::vector<std::size_t>{104, 204}
                                               : std::vector<std::size_t>{104, 204, 404, 602, 803};
  for (BcKind bc : {BcKind::clamped, BcKind::hard_simply_supported}) {
    std::vector<DeflectionRow> rows;
    for (std::size_t n : nodes) {
      MeshSpec s;
      s.target_elements = cells_for_nodes(DomainKind::unit_square, n);
      s.seed = base.seed;
      const PolyMesh m = generate_mesh(s);
      for (double h : reference_thicknesses) rows.push_back({m.num_vertices(), h, square_udl_benchmark(bc, h, m)});
    }
    const std::string stem = bc == BcKind::clamped ? "deflection_clamped" : "deflection_simply_supported";
    {
      auto os = open_out(dir / (stem + ".csv"));
      write_deflection_csv(rows, os);
    }
    {
      auto os = open_out(dir / (stem + "_reference.csv"));
      write_reference_csv(bc == BcKind::clamped ? clamped_reference_rows() : simply_supported_reference_rows(), os);
    }
    artifacts.push_back(dir / (stem + ".csv"));
    artifacts.push_back(dir / (stem + "_reference.csv"));
  }
  const std::vector<std::size_t> cells =
      quick ? std::vector<std::size_t>{64, 256} : std::vector<std::size_t>(dyadic_cells().begin(), dyadic_cells().end());
  std::vector<ConvergenceRecord> records;
  const auto square = cvt_series(DomainKind::unit_square, cells, base.seed);
  for (double h : benchmark_thicknesses()) records.push_back(square_nonuniform_benchmark(h, square));
  const auto disk = cvt_series(DomainKind::disk, cells, base.seed);
  for (double h : disk_thicknesses()) records.push_back(circular_benchmark(h, disk));
  auto files = convergence_report(records, dir, base.record_timing);
  artifacts.insert(artifacts.end(), files.begin(), files.end());
  for (const auto& r : records)
    std::cout << r.problem << " h=" << thickness_label(r.thickness) << ": L2 slope " << detail::fixed(r.l2_slope, 3)
              << ", H1 slope " << detail::fixed(r.h1_slope, 3) << '\n';
  write_manifest(dir, base, "bench", {}, artifacts);
  std::cout << "wrote " << artifacts.size() + 1 << " files to " << dir.string() << '\n';
  return exit_pass;
}

int cmd_verify_all(const RunConfig& base, bool flip_sign) {
  AcceptanceOptions o;
  o.tol = base.tol;
  o.seed = base.seed;
  o.element = base.element_options();
  o.element.flip_constraint_sign = flip_sign;
  std::vector<ConvergenceRecord> records;
  const auto results = run_acceptance(o, &records);
  std::vector<Check> checks;
  for (const auto& r : results) {
    std::cout << format_result(r) << '\n';
    checks.push_back({std::to_string(r.id) + " " + r.name, r.passed, r.detail});
  }
  const int passed = static_cast<int>(std::count_if(results.begin(), results.end(), [](auto& r) { return r.passed; }));
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  const fs::path dir = output_path(base.output);
  fs::create_directories(dir);
  std::vector<fs::path> artifacts;
  {
    auto os = open_out(dir / "acceptance.csv");
    os << "id,passed,name,detail\n";
    for (const auto& r : results) os << r.id << ',' << (r.passed ? 1 : 0) << ",\"" << r.name << "\",\"" << r.detail << "\"\n";
    artifacts.push_back(dir / "acceptance.csv");
  }
  if (!records.empty()) {
    auto files = convergence_report(records, dir, base.record_timing);
    artifacts.insert(artifacts.end(), files.begin(), files.end());
  }
  RunConfig recorded = base;
  recorded.stiffness_degree = o.element.stiffness_degree;
  write_manifest(dir, recorded, flip_sign ? "verify-all --flip-constraint-sign" : "verify-all", checks, artifacts);
  return passed == static_cast<int>(results.size()) ? exit_pass : exit_check_failed;
}

// Config file first, then --set key=value overrides in order.
RunConfig build_config(const std::string& file, const std::vector<std::string>& sets) {
  RunConfig c = file.empty() ? RunConfig{} : load_config(file);
  std::string text;
  for (const auto& s : sets) {
    if (s.find('=') == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    text += s + '\n';
  }
  std::istringstream is(text);
  return parse_config(is, ".", c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polygonal Reissner-Mindlin plate elements: meshing, solving and verification"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(POLYPLATE_VERSION));

  auto* mesh = app.add_subcommand("mesh", "mesh utilities");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "generate a mesh file");
  std::string domain = "square", kind = "cvt", mesh_out;
  std::size_t n = 64;
  std::uint64_t seed = 42;
  int lloyd = 100;
  gen->add_option("--domain", domain)->check(CLI::IsMember({"square", "disk"}));
  gen->add_option("--kind", kind)->check(CLI::IsMember({"structured", "trapezoidal", "cvt"}));
  gen->add_option("--n", n, "number of elements")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed);
  gen->add_option("--lloyd", lloyd)->check(CLI::NonNegativeNumber);
  gen->add_option("--out", mesh_out)->required();

  auto* basis = app.add_subcommand("basis", "basis utilities");
  basis->require_subcommand(1);
  auto* sample = basis->add_subcommand("sample", "tabulate basis functions on a grid");
  std::string polygon, sample_out = "basis.csv";
  int grid = 20;
  sample->add_option("--polygon", polygon, "file with one 'x y' vertex per line")->required();
  sample->add_option("--grid", grid);
  sample->add_option("--out", sample_out);

  auto* element = app.add_subcommand("element", "element utilities");
  element->require_subcommand(1);
  auto* dump = element->add_subcommand("dump", "write K_e and its spectrum");
  std::string dump_polygon, dump_out = "element";
  double dump_h = 0.1;
  dump->add_option("--polygon", dump_polygon)->required();
  dump->add_option("--h", dump_h, "thickness")->check(CLI::PositiveNumber);
  dump->add_option("--out", dump_out);

  auto* solve_cmd = app.add_subcommand("solve", "solve a uniformly loaded plate on a mesh file");
  std::string solve_mesh, solve_bc = "clamped", solve_out = "solution";
  double solve_h = 0.1, solve_q = 1.0, solve_corner = 10.0;
  solve_cmd->add_option("--mesh", solve_mesh)->required();
  solve_cmd->add_option("--bc", solve_bc);
  solve_cmd->add_option("--h", solve_h)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--q", solve_q);
  solve_cmd->add_option("--corner-angle", solve_corner);
  solve_cmd->add_option("--out", solve_out);

  std::string config_file, problem, bc, thickness, mesh_req, out;
  std::size_t nodes = 0;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "run a configured problem");
  run->add_option("--config", config_file)->check(CLI::ExistingFile);
  run->add_option("--problem", problem);
  run->add_option("--bc", bc);
  run->add_option("--h", thickness, "thickness list, comma separated");
  run->add_option("--mesh", mesh_req, "kind:size[,size...]");
  run->add_option("--nodes", nodes);
  run->add_option("--seed", run_seed);
  run->add_option("--out", out);
  run->add_option("--set", sets, "key=value override");

  bool quick = false;
  auto* bench = app.add_subcommand("bench", "deflection tables and convergence studies");
  bench->add_option("--config", config_file)->check(CLI::ExistingFile);
  bench->add_option("--out", out);
  bench->add_option("--seed", run_seed);
  bench->add_flag("--quick", quick, "two refinements only");

  bool flip = false;
  int degree = 0;
  auto* verify = app.add_subcommand("verify-all", "run every acceptance criterion");
  verify->add_option("--config", config_file)->check(CLI::ExistingFile);
  verify->add_option("--out", out);
  verify->add_option("--seed", run_seed);
  verify->add_flag("--flip-constraint-sign", flip, "negate the rotation coupling of the edge constraint");
  verify->add_option("--stiffness-degree", degree, "override the stiffness quadrature degree")
      ->check(CLI::PositiveNumber);
  verify->add_option("--set", sets, "key=value override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_pass : exit_usage;
  }

  try {
    if (gen->parsed()) return cmd_mesh_gen(domain, kind, n, seed, lloyd, mesh_out);
    if (sample->parsed()) return cmd_basis_sample(polygon, grid, sample_out);
    if (dump->parsed()) return cmd_element_dump(dump_polygon, dump_h, dump_out);
    if (solve_cmd->parsed()) return cmd_solve(solve_mesh, solve_bc, solve_h, solve_q, solve_corner, solve_out);

    std::vector<std::string> all = sets;
    if (!problem.empty()) all.insert(all.begin(), "problem=" + problem);
    if (!bc.empty()) all.insert(all.begin(), "bc=" + bc);
    if (!thickness.empty()) all.insert(all.begin(), "thickness=" + thickness);
    if (!mesh_req.empty()) all.insert(all.begin(), "mesh=" + mesh_req);
    if (nodes) all.insert(all.begin(), "nodes=" + std::to_string(nodes));
    if (run_seed) all.insert(all.begin(), "seed=" + std::to_string(*run_seed));
    if (!out.empty()) all.insert(all.begin(), "output=" + out);
    if (degree) all.insert(all.begin(), "stiffness_degree=" + std::to_string(degree));
    RunConfig c = build_config(config_file, all);
    if (nodes && mesh_req.empty() && c.mesh.kind != MeshKind::cvt_polygonal) c.mesh.kind = MeshKind::cvt_polygonal;
    c.validate();

    if (run->parsed()) return run_config(c, "run");
    if (bench->parsed()) return cmd_bench(c, quick);
    if (verify->parsed()) return cmd_verify_all(c, flip);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ArgumentError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_check_failed;
  }
  return exit_usage;
}
