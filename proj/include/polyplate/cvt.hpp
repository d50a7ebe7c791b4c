#pragma once

#include "polyplate/mesh.hpp"

#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <tuple>
#include <unordered_map>

namespace polyplate {

enum class DomainKind { unit_square, disk };
enum class MeshKind { structured_quad, trapezoidal, cvt_polygonal };

/// What to generate. `size` is the side a of the square or the radius R of the disk.
struct MeshSpec {
  DomainKind domain = DomainKind::unit_square;
  double size = 1.0;
  MeshKind kind = MeshKind::cvt_polygonal;
  std::size_t target_elements = 64;
  std::uint64_t seed = 42;
  int lloyd_iters = 100;
  double skew = 0.2;
  double collapse_ratio = 0.1;  // CVT: merge edges shorter than this times the local cell size
};

/// Number of straight segments used for the disk during cell clipping.
inline constexpr int disk_clip_segments = 512;

namespace detail {

// Keep the part of `poly` with (x - m) . d <= 0.
inline Polygon clip_half_plane(const Polygon& poly, const Vec2& m, const Vec2& d) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    const double sp = (p - m).dot(d);
    const double sq = (q - m).dot(d);
    if (sp <= 0.0) out.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  return out;
}

/// Uniform bucket grid over the seeds for ring-by-ring neighbour search.
class SeedGrid {
 public:
  SeedGrid(const std::vector<Vec2>& pts, const Vec2& lo, const Vec2& hi) : lo_(lo) {
    const double area = std::max((hi - lo).prod(), 1e-300);
    cell_ = std::sqrt(area / static_cast<double>(std::max<std::size_t>(pts.size(), 1)));
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell_)));
    buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto [bx, by] = bucket_of(pts[i]);
      buckets_[static_cast<std::size_t>(by * nx_ + bx)].push_back(i);
    }
  }

  std::pair<int, int> bucket_of(const Vec2& p) const {
    const int bx = std::clamp(static_cast<int>(std::floor((p.x() - lo_.x()) / cell_)), 0, nx_ - 1);
    const int by = std::clamp(static_cast<int>(std::floor((p.y() - lo_.y()) / cell_)), 0, ny_ - 1);
    return {bx, by};
  }

  double cell_size() const { return cell_; }
  int max_ring() const { return std::max(nx_, ny_); }

  template <class F>
  void for_each_in_ring(int bx, int by, int r, F&& f) const {
    for (int j = by - r; j <= by + r; ++j) {
      if (j < 0 || j >= ny_) continue;
      const bool edge_row = (j == by - r || j == by + r);
      for (int i = bx - r; i <= bx + r; ++i) {
        if (i < 0 || i >= nx_) continue;
        if (!edge_row && i != bx - r && i != bx + r) continue;
        for (std::size_t s : buckets_[static_cast<std::size_t>(j * nx_ + i)]) f(s);
      }
    }
  }

 private:
  Vec2 lo_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace detail

/// Voronoi cells of `seeds` clipped to the convex polygon `domain`.
/// Each cell is built by successive half-plane clipping against neighbours
/// in order of bucket rings until no farther seed can cut it.
inline std::vector<Polygon> clipped_voronoi(const std::vector<Vec2>& seeds, const Polygon& domain) {
  if (seeds.empty()) throw GenerationError("no seed points");
  Vec2 lo = domain[0], hi = domain[0];
  for (const auto& v : domain) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (const auto& s : seeds) {
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
  }
  const double scale = (hi - lo).maxCoeff();
  const detail::SeedGrid grid(seeds, lo, hi);
  std::vector<Polygon> cells(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Vec2& p = seeds[i];
    Polygon cell = domain;
    const auto [bx, by] = grid.bucket_of(p);
    for (int r = 0; r <= grid.max_ring(); ++r) {
      grid.for_each_in_ring(bx, by, r, [&](std::size_t j) {
        if (j == i) return;
        const Vec2 d = seeds[j] - p;
        if (d.norm() <= 1e-12 * scale)
          throw GenerationError("seed points " + std::to_string(std::min(i, j)) + " and " +
                                std::to_string(std::max(i, j)) + " coincide");
        cell = detail::clip_half_plane(cell, 0.5 * (p + seeds[j]), d);
      });
      double radius = 0.0;
      for (const auto& v : cell) radius = std::max(radius, (v - p).norm());
      if (r * grid.cell_size() > 2.0 * radius) break;
    }
    cells[i] = std::move(cell);
  }
  return cells;
}

namespace detail {

inline Polygon domain_polygon(const MeshSpec& spec) {
  if (spec.domain == DomainKind::unit_square) {
    const double a = spec.size;
    return {Vec2(0, 0), Vec2(a, 0), Vec2(a, a), Vec2(0, a)};
  }
  return regular_polygon(disk_clip_segments, spec.size);
}

inline std::vector<Vec2> random_seeds(const MeshSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> pts;
  pts.reserve(spec.target_elements);
  const double s = spec.size;
  while (pts.size() < spec.target_elements) {
    if (spec.domain == DomainKind::unit_square) {
      pts.emplace_back(s * u(rng), s * u(rng));
    } else {
      const Vec2 p(s * (2.0 * u(rng) - 1.0), s * (2.0 * u(rng) - 1.0));
      // stay inside the clipping polygon so every seed owns a non-empty cell
      if (p.norm() < 0.999 * s) pts.push_back(p);
    }
  }
  return pts;
}

// Remove consecutive repeats in a cyclic index loop.
inline void dedupe_cyclic(std::vector<std::size_t>& loop) {
  std::vector<std::size_t> out;
  for (std::size_t v : loop)
    if (out.empty() || out.back() != v) out.push_back(v);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  loop = std::move(out);
}

/// Merge cell vertices closer than `tol` (union-find over an x-sorted sweep)
/// and turn the cells into a conforming PolyMesh.
inline PolyMesh weld_cells(const std::vector<Polygon>& cells, double tol) {
  std::vector<Vec2> raw;
  std::vector<std::vector<std::size_t>> raw_loops;
  for (const auto& c : cells) {
    std::vector<std::size_t> loop;
    for (const auto& v : c) {
      loop.push_back(raw.size());
      raw.push_back(v);
    }
    raw_loops.push_back(std::move(loop));
  }
  const std::size_t nr = raw.size();
  std::vector<std::size_t> parent(nr);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::size_t> order(nr);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[a].x() < raw[b].x() || (raw[a].x() == raw[b].x() && a < b);
  });
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = i + 1; j < nr; ++j) {
      if (raw[order[j]].x() - raw[order[i]].x() > tol) break;
      if ((raw[order[j]] - raw[order[i]]).norm() <= tol) {
        const std::size_t a = find(order[i]), b = find(order[j]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // cluster representative = mean position; numbering by first appearance
  std::vector<long> cluster_id(nr, -1);
  std::vector<Vec2> sum;
  std::vector<int> cnt;
  for (std::size_t r = 0; r < nr; ++r) {
    const std::size_t root = find(r);
    if (cluster_id[root] < 0) {
      cluster_id[root] = static_cast<long>(sum.size());
      sum.push_back(Vec2::Zero());
      cnt.push_back(0);
    }
    const auto c = static_cast<std::size_t>(cluster_id[root]);
    sum[c] += raw[r];
    ++cnt[c];
  }
  PolyMesh m;
  m.vertices.resize(sum.size());
  for (std::size_t c = 0; c < sum.size(); ++c) m.vertices[c] = sum[c] / cnt[c];
  for (const auto& rl : raw_loops) {
    std::vector<std::size_t> loop;
    for (std::size_t r : rl) loop.push_back(static_cast<std::size_t>(cluster_id[find(r)]));
    dedupe_cyclic(loop);
    m.elements.push_back(std::move(loop));
  }
  return m;
}

// Drop unused vertices and renumber.
inline void compact_vertices(PolyMesh& m) {
  std::vector<long> id(m.num_vertices(), -1);
  std::vector<Vec2> verts;
  for (auto& loop : m.elements) {
    for (auto& v : loop) {
      if (id[v] < 0) {
        id[v] = static_cast<long>(verts.size());
        verts.push_back(m.vertices[v]);
      }
      v = static_cast<std::size_t>(id[v]);
    }
  }
  m.vertices = std::move(verts);
}


// Smallest |sin| of the turning angle over the corners of a polygon.
inline double min_corner_sine(const Polygon& p) {
  double s = 1.0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = (p[i] - p[(i + n - 1) % n]).normalized(), b = (p[(i + 1) % n] - p[i]).normalized();
    s = std::min(s, cross(a, b));
  }
  return s;
}

// Merge the end points of very short edges, a few passes at a time.
// Boundary vertices keep their position (square corners always win), so
// the domain outline is preserved; a merge is skipped if any touched cell
// would degenerate or get a corner flatter than the CVT cells usually have.
inline void collapse_short_edges(PolyMesh& m, const MeshSpec& spec) {
  if (!(spec.collapse_ratio > 0.0) || m.num_elements() < 2) return;
  const double a = spec.size;
  const double tol = 1e-9 * a;
  auto is_corner = [&](const Vec2& v) {
    if (spec.domain != DomainKind::unit_square) return false;
    return (std::abs(v.x()) < tol || std::abs(v.x() - a) < tol) && (std::abs(v.y()) < tol || std::abs(v.y() - a) < tol);
  };
  for (int pass = 0; pass < 20; ++pass) {
    m.boundary_edges = find_boundary_edges(m);
    const auto boundary = boundary_vertex_mask(m);
    std::vector<std::vector<std::size_t>> cells_of(m.num_vertices());
    std::vector<double> cell_size(m.num_elements());
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
      for (std::size_t v : m.elements[e]) cells_of[v].push_back(e);
      cell_size[e] = std::sqrt(signed_area(m.element_polygon(e)));
    }
    struct Candidate {
      double rel;
      std::size_t u, v;
    };
    std::vector<Candidate> cand;
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
      const auto& loop = m.elements[e];
      for (std::size_t k = 0; k < loop.size(); ++k) {
        const std::size_t u = loop[k], v = loop[(k + 1) % loop.size()];
        if (u > v && !boundary[u]) continue;  // interior edges are seen twice
        const double rel = (m.vertices[u] - m.vertices[v]).norm() / cell_size[e];
        if (rel < spec.collapse_ratio) cand.push_back({rel, std::min(u, v), std::max(u, v)});
      }
    }
    std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
      return std::tie(x.rel, x.u, x.v) < std::tie(y.rel, y.u, y.v);
    });
    std::vector<bool> touched(m.num_vertices(), false);
    bool changed = false;
    for (const Candidate& c : cand) {
      std::size_t keep = c.u, drop = c.v;
      if (touched[keep] || touched[drop]) continue;
      const Vec2 pu = m.vertices[c.u], pv = m.vertices[c.v];
      Vec2 target;
      if (is_corner(pu) && is_corner(pv)) continue;
      if (is_corner(pu) || (boundary[c.u] && !boundary[c.v])) {
        target = pu;
      } else if (is_corner(pv) || (boundary[c.v] && !boundary[c.u])) {
        std::swap(keep, drop);
        target = pv;
      } else {
        target = 0.5 * (pu + pv);
        if (boundary[c.u] && spec.domain == DomainKind::disk) target *= a / target.norm();
      }
      std::vector<std::size_t> affected = cells_of[keep];
      affected.insert(affected.end(), cells_of[drop].begin(), cells_of[drop].end());
      std::sort(affected.begin(), affected.end());
      affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
      const Vec2 old_keep = m.vertices[keep];
      m.vertices[keep] = target;
      std::vector<std::vector<std::size_t>> loops;
      bool ok = true;
      for (std::size_t e : affected) {
        auto loop = m.elements[e];
        for (auto& v : loop)
          if (v == drop) v = keep;
        dedupe_cyclic(loop);
        Polygon poly;
        for (std::size_t v : loop) poly.push_back(m.vertices[v]);
        if (loop.size() < 3 || !is_convex_ccw(poly) || min_corner_sine(poly) < 0.2) {
          ok = false;
          break;
        }
        loops.push_back(std::move(loop));
      }
      if (!ok) {
        m.vertices[keep] = old_keep;
        continue;
      }
      for (std::size_t i = 0; i < affected.size(); ++i) m.elements[affected[i]] = std::move(loops[i]);
      for (std::size_t e : affected)
        for (std::size_t v : m.elements[e]) touched[v] = true;
      touched[drop] = true;
      changed = true;
    }
    compact_vertices(m);
    if (!changed) break;
  }
}

}  // namespace detail

/// Seeded Lloyd-relaxed Voronoi mesh of the square or the disk.
///
/// The disk is clipped against an inscribed 512-gon. Afterwards the clip
/// polygon's own corners (vertices owned by a single cell) are dropped so
/// each boundary cell ends in one chord, and boundary nodes are projected
/// onto the exact circle.
inline PolyMesh generate_cvt_polygonal(const MeshSpec& spec) {
  if (spec.target_elements < 1) throw ArgumentError("generate_cvt_polygonal: target_elements must be >= 1");
  if (!(spec.size > 0.0)) throw ArgumentError("generate_cvt_polygonal: domain size must be positive");
  if (spec.lloyd_iters < 0) throw ArgumentError("generate_cvt_polygonal: lloyd_iters must be >= 0");
  const Polygon domain = detail::domain_polygon(spec);
  std::vector<Vec2> seeds = detail::random_seeds(spec);
  std::vector<Polygon> cells = clipped_voronoi(seeds, domain);
  for (int it = 0; it < spec.lloyd_iters; ++it) {
    for (std::size_t i = 0; i < seeds.size(); ++i)
      if (cells[i].size() >= 3) seeds[i] = centroid(cells[i]);
    cells = clipped_voronoi(seeds, domain);
  }
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].size() < 3 || signed_area(cells[i]) <= 0.0)
      throw GenerationError("seed " + std::to_string(i) + " owns an empty cell");

  const double scale = bbox_scale(domain);
  PolyMesh m = detail::weld_cells(cells, 1e-9 * scale);

  if (spec.domain == DomainKind::disk && m.num_elements() > 1) {
    std::vector<int> incidence(m.num_vertices(), 0);
    for (const auto& loop : m.elements)
      for (std::size_t v : loop) ++incidence[v];
    for (auto& loop : m.elements) {
      std::vector<std::size_t> kept;
      for (std::size_t v : loop)
        if (incidence[v] > 1) kept.push_back(v);
      if (kept.size() >= 3) loop = std::move(kept);
    }
    detail::compact_vertices(m);
    m.boundary_edges = find_boundary_edges(m);
    const auto mask = boundary_vertex_mask(m);
    for (std::size_t v = 0; v < m.num_vertices(); ++v)
      if (mask[v]) m.vertices[v] *= spec.size / m.vertices[v].norm();
  }
  detail::collapse_short_edges(m, spec);
  if (spec.domain == DomainKind::unit_square) {
    m.boundary_edges = find_boundary_edges(m, square_tagger(spec.size));
  } else {
    m.boundary_edges = find_boundary_edges(m, [](const Vec2&) { return tags::circle; });
  }
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    if (!is_convex_ccw(m.element_polygon(e)))
      throw GenerationError("cell " + std::to_string(e) + " is not convex after welding");
  validate(m);
  return m;
}

inline PolyMesh generate_mesh(const MeshSpec& spec) {
  switch (spec.kind) {
    case MeshKind::structured_quad:
    case MeshKind::trapezoidal: {
      if (spec.domain != DomainKind::unit_square)
        throw ArgumentError("structured and trapezoidal meshes need the square domain");
      const int n = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.target_elements)))));
      return spec.kind == MeshKind::structured_quad ? generate_structured_quad(spec.size, n)
                                                    : generate_trapezoidal(spec.size, n, spec.skew);
    }
    case MeshKind::cvt_polygonal:
      return generate_cvt_polygonal(spec);
  }
  throw ArgumentError("unknown mesh kind");
}

/// Cell count whose Voronoi mesh has about `nodes` vertices
/// (V = 2N + 2 on the square, V = 2N - 2 on the disk for degree-3 vertices).
inline std::size_t cells_for_nodes(DomainKind domain, std::size_t nodes) {
  const long n = domain == DomainKind::unit_square ? (static_cast<long>(nodes) - 2) / 2
                                                   : (static_cast<long>(nodes) + 2) / 2;
  return static_cast<std::size_t>(std::max(1L, n));
}

}  // namespace polyplate
