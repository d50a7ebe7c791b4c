#pragma once

#include "polyplate/common.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace polyplate {

/// Boundary side of an element: local edge k joins local vertices k and k+1.
struct BoundaryEdge {
  std::size_t element = 0;
  std::size_t local_edge = 0;
  int tag = 0;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

// Tags used by the built-in generators.
namespace tags {
inline constexpr int bottom = 1;  // y = 0
inline constexpr int right = 2;   // x = a
inline constexpr int top = 3;     // y = a
inline constexpr int left = 4;    // x = 0
inline constexpr int circle = 5;
}  // namespace tags

/// Polygonal mesh: vertex coordinates, CCW convex element loops, and the
/// tagged boundary sides. Treated as immutable once validated.
struct PolyMesh {
  std::vector<Vec2> vertices;
  std::vector<std::vector<std::size_t>> elements;
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_elements() const { return elements.size(); }

  Polygon element_polygon(std::size_t e) const {
    Polygon p;
    p.reserve(elements[e].size());
    for (std::size_t v : elements[e]) p.push_back(vertices[v]);
    return p;
  }

  friend bool operator==(const PolyMesh&, const PolyMesh&) = default;
};

inline double total_area(const PolyMesh& mesh) {
  double a = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) a += signed_area(mesh.element_polygon(e));
  return a;
}

/// Square root of the mean element area.
inline double mesh_size(const PolyMesh& mesh) {
  return std::sqrt(total_area(mesh) / static_cast<double>(mesh.num_elements()));
}

namespace detail {

using EdgeKey = std::pair<std::size_t, std::size_t>;

inline EdgeKey edge_key(std::size_t a, std::size_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

inline std::map<EdgeKey, int> edge_use_count(const PolyMesh& mesh) {
  std::map<EdgeKey, int> count;
  for (const auto& loop : mesh.elements)
    for (std::size_t k = 0; k < loop.size(); ++k) ++count[edge_key(loop[k], loop[(k + 1) % loop.size()])];
  return count;
}

}  // namespace detail

/// Boundary sides of `mesh` (edges used by exactly one element), tagged by `tagger`
/// evaluated at the edge midpoint.
inline std::vector<BoundaryEdge> find_boundary_edges(const PolyMesh& mesh,
                                                     const std::function<int(const Vec2&)>& tagger = {}) {
  const auto count = detail::edge_use_count(mesh);
  std::vector<BoundaryEdge> out;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& loop = mesh.elements[e];
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const std::size_t a = loop[k], b = loop[(k + 1) % loop.size()];
      if (count.at(detail::edge_key(a, b)) != 1) continue;
      const Vec2 mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
      out.push_back({e, k, tagger ? tagger(mid) : 0});
    }
  }
  return out;
}

/// Vertex indices touched by boundary sides.
inline std::vector<bool> boundary_vertex_mask(const PolyMesh& mesh) {
  std::vector<bool> mask(mesh.num_vertices(), false);
  for (const auto& be : mesh.boundary_edges) {
    const auto& loop = mesh.elements[be.element];
    mask[loop[be.local_edge]] = true;
    mask[loop[(be.local_edge + 1) % loop.size()]] = true;
  }
  return mask;
}

/// Checks every PolyMesh invariant; throws ValidationError naming the first breach.
inline void validate(const PolyMesh& mesh) {
  const std::size_t nv = mesh.num_vertices();
  if (nv < 3) throw ValidationError("mesh has fewer than 3 vertices");
  if (mesh.elements.empty()) throw ValidationError("mesh has no elements");
  std::vector<bool> used(nv, false);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& loop = mesh.elements[e];
    if (loop.size() < 3) throw ValidationError("element " + std::to_string(e) + " has fewer than 3 vertices");
    for (std::size_t v : loop) {
      if (v >= nv) throw ValidationError("element " + std::to_string(e) + " references missing vertex");
      used[v] = true;
    }
    std::vector<std::size_t> sorted = loop;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError("element " + std::to_string(e) + " repeats a vertex");
    if (!is_convex_ccw(mesh.element_polygon(e)))
      throw ValidationError("element " + std::to_string(e) + " is not convex counter-clockwise");
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (!used[v]) throw ValidationError("vertex " + std::to_string(v) + " is not used by any element");

  // duplicate vertices: sweep over x-sorted order
  const double tol = 1e-10 * bbox_scale(mesh.vertices);
  std::vector<std::size_t> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return mesh.vertices[a].x() < mesh.vertices[b].x(); });
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = i + 1; j < nv; ++j) {
      const Vec2& p = mesh.vertices[order[i]];
      const Vec2& q = mesh.vertices[order[j]];
      if (q.x() - p.x() > tol) break;
      if ((p - q).norm() <= tol)
        throw ValidationError("vertices " + std::to_string(order[i]) + " and " + std::to_string(order[j]) +
                              " coincide");
    }
  }

  const auto count = detail::edge_use_count(mesh);
  std::map<detail::EdgeKey, int> listed;
  for (const auto& be : mesh.boundary_edges) {
    if (be.element >= mesh.num_elements() || be.local_edge >= mesh.elements[be.element].size())
      throw ValidationError("boundary edge references a missing element side");
    const auto& loop = mesh.elements[be.element];
    ++listed[detail::edge_key(loop[be.local_edge], loop[(be.local_edge + 1) % loop.size()])];
  }
  for (const auto& [key, c] : count) {
    if (c > 2) throw ValidationError("edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                                     ") is shared by more than two elements");
    const auto it = listed.find(key);
    const int l = it == listed.end() ? 0 : it->second;
    if (c == 1 && l != 1)
      throw ValidationError("edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                            ") is on the boundary but not listed exactly once");
    if (c == 2 && l != 0)
      throw ValidationError("interior edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                            ") is listed as boundary");
  }
}

/// Tagger for the sides of [0,a]^2.
inline std::function<int(const Vec2&)> square_tagger(double a) {
  return [a](const Vec2& m) {
    const double tol = 1e-9 * a;
    if (std::abs(m.y()) < tol) return tags::bottom;
    if (std::abs(m.x() - a) < tol) return tags::right;
    if (std::abs(m.y() - a) < tol) return tags::top;
    if (std::abs(m.x()) < tol) return tags::left;
    return 0;
  };
}

namespace detail {

inline PolyMesh grid_mesh(double a, int n, const std::function<double(int, int)>& y_offset) {
  PolyMesh m;
  const double h = a / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(i * h, j * h + y_offset(i, j));
  auto id = [n](int i, int j) { return static_cast<std::size_t>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  m.boundary_edges = find_boundary_edges(m, square_tagger(a));
  return m;
}

}  // namespace detail

/// n x n axis-aligned squares tiling [0,a]^2.
inline PolyMesh generate_structured_quad(double a, int n) {
  if (!(a > 0.0)) throw ArgumentError("generate_structured_quad: side length must be positive");
  if (n < 1) throw ArgumentError("generate_structured_quad: need n >= 1");
  PolyMesh m = detail::grid_mesh(a, n, [](int, int) { return 0.0; });
  validate(m);
  return m;
}

/// n x n trapezoids: interior vertex columns alternately shifted by +-skew*(a/n) in y.
inline PolyMesh generate_trapezoidal(double a, int n, double skew) {
  if (!(a > 0.0)) throw ArgumentError("generate_trapezoidal: side length must be positive");
  if (n < 1) throw ArgumentError("generate_trapezoidal: need n >= 1");
  if (!(skew >= 0.0 && skew < 0.5)) throw ArgumentError("generate_trapezoidal: skew must lie in [0, 0.5)");
  const double h = a / n;
  PolyMesh m = detail::grid_mesh(a, n, [&](int i, int j) {
    if (i == 0 || i == n || j == 0 || j == n) return 0.0;
    return (i % 2 == 1 ? 1.0 : -1.0) * skew * h;
  });
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    if (!is_convex_ccw(m.element_polygon(e)))
      throw ArgumentError("generate_trapezoidal: skew produces a non-convex cell");
  validate(m);
  return m;
}

// ---------------------------------------------------------------------------
// polyplate-mesh v1 text format
//
//   polyplate-mesh v1
//   vertices <N>
//   <x> <y>                       (N lines, 17 significant digits)
//   elements <M>
//   <k> <v_1> ... <v_k>           (M lines, CCW loops)
//   boundary <B>
//   <element> <local_edge> <tag>  (B lines)

inline void write_mesh(const PolyMesh& mesh, std::ostream& os) {
  char buf[96];
  os << "polyplate-mesh v1\n";
  os << "vertices " << mesh.num_vertices() << "\n";
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    os << buf;
  }
  os << "elements " << mesh.num_elements() << "\n";
  for (const auto& loop : mesh.elements) {
    os << loop.size();
    for (std::size_t v : loop) os << ' ' << v;
    os << '\n';
  }
  os << "boundary " << mesh.boundary_edges.size() << "\n";
  for (const auto& be : mesh.boundary_edges) os << be.element << ' ' << be.local_edge << ' ' << be.tag << '\n';
}

inline void write_mesh(const PolyMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_mesh(mesh, os);
  if (!os) throw Error("failed writing '" + path + "'");
}

inline PolyMesh read_mesh(std::istream& is) {
  int lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(is, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    throw ParseError("unexpected end of file", lineno + 1);
  };
  auto expect_end = [&](std::istringstream& ss) {
    std::string extra;
    if (ss >> extra) throw ParseError("trailing data '" + extra + "'", lineno);
  };
  auto read_count = [&](const std::string& keyword) {
    auto ss = next_line();
    std::string word;
    long long n = -1;
    if (!(ss >> word) || word != keyword || !(ss >> n) || n < 0)
      throw ParseError("expected '" + keyword + " <count>'", lineno);
    expect_end(ss);
    return static_cast<std::size_t>(n);
  };

  {
    auto ss = next_line();
    std::string a, b;
    ss >> a >> b;
    if (a != "polyplate-mesh" || b != "v1") throw ParseError("missing 'polyplate-mesh v1' header", lineno);
  }
  PolyMesh m;
  const std::size_t nv = read_count("vertices");
  m.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    auto ss = next_line();
    double x = 0.0, y = 0.0;
    if (!(ss >> x >> y)) throw ParseError("expected two coordinates", lineno);
    expect_end(ss);
    m.vertices.emplace_back(x, y);
  }
  const std::size_t ne = read_count("elements");
  m.elements.reserve(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    auto ss = next_line();
    long long k = 0;
    if (!(ss >> k)) throw ParseError("expected a vertex count", lineno);
    if (k < 3) throw ParseError("element with " + std::to_string(k) + " vertices", lineno);
    std::vector<std::size_t> loop;
    for (long long i = 0; i < k; ++i) {
      long long v = -1;
      if (!(ss >> v)) throw ParseError("expected " + std::to_string(k) + " vertex indices", lineno);
      if (v < 0 || static_cast<std::size_t>(v) >= nv) throw ParseError("vertex index out of range", lineno);
      loop.push_back(static_cast<std::size_t>(v));
    }
    expect_end(ss);
    m.elements.push_back(std::move(loop));
  }
  const std::size_t nb = read_count("boundary");
  for (std::size_t b = 0; b < nb; ++b) {
    auto ss = next_line();
    long long e = -1, k = -1;
    int tag = 0;
    if (!(ss >> e >> k >> tag)) throw ParseError("expected '<element> <local_edge> <tag>'", lineno);
    expect_end(ss);
    if (e < 0 || static_cast<std::size_t>(e) >= ne) throw ParseError("element index out of range", lineno);
    if (k < 0 || static_cast<std::size_t>(k) >= m.elements[static_cast<std::size_t>(e)].size())
      throw ParseError("local edge out of range", lineno);
    m.boundary_edges.push_back({static_cast<std::size_t>(e), static_cast<std::size_t>(k), tag});
  }
  validate(m);
  return m;
}

inline PolyMesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_mesh(is);
}

}  // namespace polyplate
