#pragma once

#include "polyplate/common.hpp"
#include "polyplate/cvt.hpp"
#include "polyplate/element.hpp"
#include "polyplate/system.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace polyplate {

/// Every pass/fail threshold in one place.
struct Tolerances {
  double patch = 1e-9;
  double deflection_band = 0.01;
  double l2_slope_min = 1.8, l2_slope_max = 2.3;
  double h1_slope_min = 0.8, h1_slope_max = 1.3;
  double slope_spread = 0.3;
  double strong_form = 1e-8;
  double rank = 1e-9;
  double appendix = 1e-10;
  double basis = 1e-9;
  double lagrange = 1e-10;
  double gradient = 1e-6;
  double quadrature = 1e-8;
  double equilibrium = 1e-8;
  double patch_seconds = 10.0;
  double deflection_seconds = 30.0;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

enum class Problem { patch, square_udl, square_nonuniform, circular };

inline const char* to_string(Problem p) {
  switch (p) {
    case Problem::patch: return "patch";
    case Problem::square_udl: return "square_udl";
    case Problem::square_nonuniform: return "square_nonuniform";
    case Problem::circular: return "circular";
  }
  return "?";
}

/// Mesh request: a kind plus one or more sizes. For structured and
/// trapezoidal meshes the sizes are divisions per side, for CVT meshes cell
/// counts. `nodes`, when nonzero, overrides the sizes with the cell count
/// giving about that many vertices.
struct MeshRequest {
  MeshKind kind = MeshKind::cvt_polygonal;
  std::vector<std::size_t> sizes{64};
  std::size_t nodes = 0;

  friend bool operator==(const MeshRequest&, const MeshRequest&) = default;
};

struct RunConfig {
  Problem problem = Problem::patch;
  BcKind bc = BcKind::clamped;
  std::vector<double> thickness{0.1};
  MeshRequest mesh;
  double E = 10.92e6;
  double nu = 0.3;
  double kappa = 5.0 / 6.0;
  std::string output = "polyplate-out";
  std::uint64_t seed = 42;
  int lloyd_iters = 100;
  double collapse_ratio = 0.1;
  double skew = 0.2;
  int stiffness_degree = 4;
  int load_degree = 6;
  int norm_degree = 6;
  ShearConvention convention = ShearConvention::rotation_plus_gradient;
  double corner_angle_deg = 10.0;
  bool record_timing = false;
  Tolerances tol;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  DomainKind domain() const { return problem == Problem::circular ? DomainKind::disk : DomainKind::unit_square; }

  PlateMaterial material(double h) const {
    PlateMaterial m{E, nu, h, kappa};
    m.validate();
    return m;
  }

  ElementOptions element_options() const {
    ElementOptions o;
    o.stiffness_degree = stiffness_degree;
    o.load_degree = load_degree;
    o.convention = convention;
    return o;
  }

  void validate() const {
    if (thickness.empty()) throw ArgumentError("config: thickness list is empty");
    for (double t : thickness)
      if (!(t > 0.0)) throw ArgumentError("config: thickness values must be positive");
    if (mesh.sizes.empty() && mesh.nodes == 0) throw ArgumentError("config: mesh needs at least one size");
    for (std::size_t s : mesh.sizes)
      if (s < 1) throw ArgumentError("config: mesh sizes must be >= 1");
    if (problem == Problem::circular && mesh.kind != MeshKind::cvt_polygonal)
      throw ArgumentError("config: the circular problem needs cvt meshes");
    if (problem == Problem::square_udl && bc == BcKind::prescribed_field)
      throw ArgumentError("config: square_udl needs bc = clamped or simply_supported");
    if (stiffness_degree < 1 || load_degree < 1 || norm_degree < 1)
      throw ArgumentError("config: quadrature degrees must be >= 1");
    if (lloyd_iters < 0) throw ArgumentError("config: lloyd_iters must be >= 0");
    material(thickness.front());
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("expected a number, got '" + s + "'", line);
}

inline long long parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("expected an integer, got '" + s + "'", line);
}

inline bool parse_bool(const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParseError("expected true or false, got '" + s + "'", line);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline const char* kind_name(MeshKind k) {
  switch (k) {
    case MeshKind::structured_quad: return "structured";
    case MeshKind::trapezoidal: return "trapezoidal";
    case MeshKind::cvt_polygonal: return "cvt";
  }
  return "?";
}

}  // namespace detail

inline Problem parse_problem(const std::string& s, int line = 0) {
  for (Problem p : {Problem::patch, Problem::square_udl, Problem::square_nonuniform, Problem::circular})
    if (s == to_string(p)) return p;
  throw ParseError("unknown problem '" + s + "'", line);
}

inline BcKind parse_bc(const std::string& s, int line = 0) {
  if (s == "clamped") return BcKind::clamped;
  if (s == "simply_supported" || s == "ss" || s == "hard_simply_supported") return BcKind::hard_simply_supported;
  if (s == "prescribed" || s == "prescribed_field") return BcKind::prescribed_field;
  throw ParseError("unknown boundary condition '" + s + "'", line);
}

inline ShearConvention parse_convention(const std::string& s, int line = 0) {
  if (s == to_string(ShearConvention::rotation_plus_gradient)) return ShearConvention::rotation_plus_gradient;
  if (s == to_string(ShearConvention::gradient_minus_rotation)) return ShearConvention::gradient_minus_rotation;
  throw ParseError("unknown shear convention '" + s + "'", line);
}

/// "cvt:64,256" / "structured:8" / "trapezoidal:4".
inline MeshRequest parse_mesh_request(const std::string& s, int line = 0) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ParseError("mesh must look like kind:size[,size...]", line);
  const std::string kind = detail::trim(s.substr(0, colon));
  MeshRequest r;
  if (kind == "structured") r.kind = MeshKind::structured_quad;
  else if (kind == "trapezoidal") r.kind = MeshKind::trapezoidal;
  else if (kind == "cvt") r.kind = MeshKind::cvt_polygonal;
  else throw ParseError("unknown mesh kind '" + kind + "'", line);
  r.sizes.clear();
  for (const auto& item : detail::split_list(s.substr(colon + 1))) {
    const long long v = detail::parse_int(item, line);
    if (v < 1) throw ParseError("mesh sizes must be >= 1", line);
    r.sizes.push_back(static_cast<std::size_t>(v));
  }
  if (r.sizes.empty()) throw ParseError("mesh needs at least one size", line);
  return r;
}

inline std::string to_string(const MeshRequest& r) {
  std::string s = std::string(detail::kind_name(r.kind)) + ":";
  for (std::size_t i = 0; i < r.sizes.size(); ++i) s += (i ? "," : "") + std::to_string(r.sizes[i]);
  return s;
}

namespace detail {

// Table of (key, pointer-to-double) for the tolerance section.
inline std::vector<std::pair<const char*, double Tolerances::*>> tolerance_keys() {
  return {{"tol.patch", &Tolerances::patch},
          {"tol.deflection_band", &Tolerances::deflection_band},
          {"tol.l2_slope_min", &Tolerances::l2_slope_min},
          {"tol.l2_slope_max", &Tolerances::l2_slope_max},
          {"tol.h1_slope_min", &Tolerances::h1_slope_min},
          {"tol.h1_slope_max", &Tolerances::h1_slope_max},
          {"tol.slope_spread", &Tolerances::slope_spread},
          {"tol.strong_form", &Tolerances::strong_form},
          {"tol.rank", &Tolerances::rank},
          {"tol.appendix", &Tolerances::appendix},
          {"tol.basis", &Tolerances::basis},
          {"tol.lagrange", &Tolerances::lagrange},
          {"tol.gradient", &Tolerances::gradient},
          {"tol.quadrature", &Tolerances::quadrature},
          {"tol.equilibrium", &Tolerances::equilibrium},
          {"tol.patch_seconds", &Tolerances::patch_seconds},
          {"tol.deflection_seconds", &Tolerances::deflection_seconds}};
}

inline void apply_key(RunConfig& c, const std::string& key, const std::string& value, int line) {
  using namespace detail;
  if (key == "problem") c.problem = parse_problem(value, line);
  else if (key == "bc") c.bc = parse_bc(value, line);
  else if (key == "thickness") {
    c.thickness.clear();
    for (const auto& item : split_list(value)) c.thickness.push_back(parse_double(item, line));
    if (c.thickness.empty()) throw ParseError("thickness list is empty", line);
  } else if (key == "mesh") {
    const std::size_t nodes = c.mesh.nodes;
    c.mesh = parse_mesh_request(value, line);
    c.mesh.nodes = nodes;
  } else if (key == "nodes") {
    const long long v = parse_int(value, line);
    if (v < 0) throw ParseError("nodes must be >= 0", line);
    c.mesh.nodes = static_cast<std::size_t>(v);
  } else if (key == "E") c.E = parse_double(value, line);
  else if (key == "nu") c.nu = parse_double(value, line);
  else if (key == "kappa") c.kappa = parse_double(value, line);
  else if (key == "output") c.output = value;
  else if (key == "seed") {
    const long long v = parse_int(value, line);
    if (v < 0) throw ParseError("seed must be >= 0", line);
    c.seed = static_cast<std::uint64_t>(v);
  } else if (key == "lloyd_iters") c.lloyd_iters = static_cast<int>(parse_int(value, line));
  else if (key == "collapse_ratio") c.collapse_ratio = parse_double(value, line);
  else if (key == "skew") c.skew = parse_double(value, line);
  else if (key == "stiffness_degree") c.stiffness_degree = static_cast<int>(parse_int(value, line));
  else if (key == "load_degree") c.load_degree = static_cast<int>(parse_int(value, line));
  else if (key == "norm_degree") c.norm_degree = static_cast<int>(parse_int(value, line));
  else if (key == "convention") c.convention = parse_convention(value, line);
  else if (key == "corner_angle_deg") c.corner_angle_deg = parse_double(value, line);
  else if (key == "record_timing") c.record_timing = parse_bool(value, line);
  else {
    for (const auto& [name, member] : tolerance_keys())
      if (key == name) {
        c.tol.*member = parse_double(value, line);
        return;
      }
    throw ParseError("unknown key '" + key + "'", line);
  }
}

inline void parse_into(RunConfig& c, std::istream& is, const std::filesystem::path& base, int depth) {
  if (depth > 16) throw ParseError("include nesting too deep", 0);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = trim(text.substr(0, eq)), value = trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line);
    if (key == "include") {
      const std::filesystem::path p = base / value;
      std::ifstream in(p);
      if (!in) throw ParseError("cannot open include file '" + p.string() + "'", line);
      try {
        parse_into(c, in, p.parent_path(), depth + 1);
      } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what(), line);
      }
      continue;
    }
    apply_key(c, key, value, line);
  }
}

}  // namespace detail

/// Parse flat `key = value` text; `#` starts a comment and
/// `include = file` splices another file (relative to `base`).
inline RunConfig parse_config(std::istream& is, const std::filesystem::path& base = ".", RunConfig start = {}) {
  detail::parse_into(start, is, base, 0);
  return start;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'", 0);
  return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

/// Complete text form; parse_config(to_text(c)) == c.
inline std::string to_text(const RunConfig& c) {
  using detail::fmt;
  std::ostringstream os;
  os << "problem = " << to_string(c.problem) << '\n';
  os << "bc = " << (c.bc == BcKind::hard_simply_supported ? "simply_supported" : to_string(c.bc)) << '\n';
  os << "thickness = ";
  for (std::size_t i = 0; i < c.thickness.size(); ++i) os << (i ? ", " : "") << fmt(c.thickness[i]);
  os << '\n';
  os << "mesh = " << to_string(c.mesh) << '\n';
  os << "nodes = " << c.mesh.nodes << '\n';
  os << "E = " << fmt(c.E) << '\n';
  os << "nu = " << fmt(c.nu) << '\n';
  os << "kappa = " << fmt(c.kappa) << '\n';
  os << "output = " << c.output << '\n';
  os << "seed = " << c.seed << '\n';
  os << "lloyd_iters = " << c.lloyd_iters << '\n';
  os << "collapse_ratio = " << fmt(c.collapse_ratio) << '\n';
  os << "skew = " << fmt(c.skew) << '\n';
  os << "stiffness_degree = " << c.stiffness_degree << '\n';
  os << "load_degree = " << c.load_degree << '\n';
  os << "norm_degree = " << c.norm_degree << '\n';
  os << "convention = " << to_string(c.convention) << '\n';
  os << "corner_angle_deg = " << fmt(c.corner_angle_deg) << '\n';
  os << "record_timing = " << (c.record_timing ? "true" : "false") << '\n';
  for (const auto& [name, member] : detail::tolerance_keys()) os << name << " = " << fmt(c.tol.*member) << '\n';
  return os.str();
}

/// FNV-1a of the text form, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_text(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace polyplate
