#include "support.hpp"

#include <set>
#include <sstream>

using namespace polyplate;
using namespace polyplate::testing;

namespace {

PolyMesh cvt(DomainKind domain, std::size_t cells, std::uint64_t seed = 42) {
  MeshSpec spec;
  spec.domain = domain;
  spec.target_elements = cells;
  spec.seed = seed;
  return generate_mesh(spec);
}

std::string serialize(const PolyMesh& m) {
  std::ostringstream os;
  write_mesh(m, os);
  return os.str();
}

PolyMesh parse(const std::string& text) {
  std::istringstream is(text);
  return read_mesh(is);
}

void expect_all_convex(const PolyMesh& m) {
  for (std::size_t e = 0; e < m.num_elements(); ++e) EXPECT_TRUE(is_convex_ccw(m.element_polygon(e))) << e;
}

}  // namespace

TEST(StructuredMesh, Counts) {
  for (int n : {1, 4, 8}) {
    const PolyMesh m = generate_structured_quad(1.0, n);
    EXPECT_EQ(m.num_vertices(), static_cast<std::size_t>((n + 1) * (n + 1)));
    EXPECT_EQ(m.num_elements(), static_cast<std::size_t>(n * n));
    EXPECT_EQ(m.boundary_edges.size(), static_cast<std::size_t>(4 * n));
    EXPECT_NEAR(total_area(m), 1.0, 1e-14);
    EXPECT_NEAR(mesh_size(m), 1.0 / n, 1e-14);
  }
}

TEST(StructuredMesh, BoundaryTagsMatchSides) {
  const PolyMesh m = generate_structured_quad(2.0, 4);
  std::map<int, int> per_tag;
  for (const auto& be : m.boundary_edges) {
    const auto& loop = m.elements[be.element];
    const Vec2 mid = 0.5 * (m.vertices[loop[be.local_edge]] + m.vertices[loop[(be.local_edge + 1) % loop.size()]]);
    ++per_tag[be.tag];
    switch (be.tag) {
      case tags::bottom: EXPECT_NEAR(mid.y(), 0.0, 1e-14); break;
      case tags::right: EXPECT_NEAR(mid.x(), 2.0, 1e-14); break;
      case tags::top: EXPECT_NEAR(mid.y(), 2.0, 1e-14); break;
      case tags::left: EXPECT_NEAR(mid.x(), 0.0, 1e-14); break;
      default: ADD_FAILURE() << "unexpected tag " << be.tag;
    }
  }
  for (int t = 1; t <= 4; ++t) EXPECT_EQ(per_tag[t], 4);
}

TEST(TrapezoidalMesh, ZeroSkewIsStructured) {
  EXPECT_EQ(generate_trapezoidal(1.0, 6, 0.0), generate_structured_quad(1.0, 6));
}

TEST(TrapezoidalMesh, SkewedCellsStayConvexAndTileSquare) {
  const PolyMesh m = generate_trapezoidal(1.0, 8, 0.2);
  expect_all_convex(m);
  EXPECT_NEAR(total_area(m), 1.0, 1e-14);
  // interior column 1, row 1 moved up by 0.2 h
  EXPECT_NEAR(m.vertices[9 + 1].y(), 0.125 + 0.2 * 0.125, 1e-15);
  std::set<double> widths;
  for (std::size_t e = 0; e < m.num_elements(); ++e) widths.insert(std::round(1e12 * signed_area(m.element_polygon(e))));
  EXPECT_GT(widths.size(), 1u);
  EXPECT_THROW(generate_trapezoidal(1.0, 4, 0.5), ArgumentError);
  EXPECT_THROW(generate_structured_quad(1.0, 0), ArgumentError);
}

TEST(CvtMesh, SquareTilingIsValidAndDeterministic) {
  const PolyMesh a = cvt(DomainKind::unit_square, 64), b = cvt(DomainKind::unit_square, 64);
  EXPECT_EQ(serialize(a), serialize(b));
  EXPECT_EQ(a.num_elements(), 64u);
  EXPECT_NEAR(total_area(a), 1.0, 1e-12);
  expect_all_convex(a);
  EXPECT_NO_THROW(validate(a));
  const PolyMesh c = cvt(DomainKind::unit_square, 64, 7);
  EXPECT_NE(serialize(a), serialize(c));
  // every square corner is a mesh vertex
  for (const Vec2 corner : {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}) {
    double best = 1.0;
    for (const auto& v : a.vertices) best = std::min(best, (v - corner).norm());
    EXPECT_LT(best, 1e-12);
  }
}

TEST(CvtMesh, MostlyPolygonalCells) {
  const PolyMesh m = cvt(DomainKind::unit_square, 256);
  std::size_t many = 0;
  for (const auto& loop : m.elements) many += loop.size() >= 5;
  EXPECT_GT(many, m.num_elements() / 2);
}

TEST(CvtMesh, SingleSeedIsWholeSquare) {
  const PolyMesh m = cvt(DomainKind::unit_square, 1);
  ASSERT_EQ(m.num_elements(), 1u);
  EXPECT_EQ(m.num_vertices(), 4u);
  EXPECT_NEAR(total_area(m), 1.0, 1e-14);
}

TEST(CvtMesh, DiskBoundaryOnCircle) {
  const PolyMesh m = cvt(DomainKind::disk, 128);
  expect_all_convex(m);
  const auto mask = boundary_vertex_mask(m);
  std::size_t nb = 0;
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    if (mask[v]) {
      EXPECT_NEAR(m.vertices[v].norm(), 1.0, 1e-14);
      ++nb;
    } else {
      EXPECT_LT(m.vertices[v].norm(), 1.0);
    }
  }
  EXPECT_GT(nb, 20u);
  for (const auto& be : m.boundary_edges) EXPECT_EQ(be.tag, tags::circle);
  // inscribed polygon area: within the chord deficit of pi
  EXPECT_LT(total_area(m), M_PI);
  EXPECT_GT(total_area(m), M_PI - 0.05);
}

TEST(CvtMesh, NodeCountTargeting) {
  const PolyMesh m = cvt(DomainKind::unit_square, cells_for_nodes(DomainKind::unit_square, 803));
  EXPECT_NEAR(static_cast<double>(m.num_vertices()), 803.0, 0.03 * 803);
  EXPECT_EQ(cells_for_nodes(DomainKind::disk, 803), 402u);
}

TEST(MeshIo, RoundTripIsExact) {
  for (const PolyMesh& m : {generate_trapezoidal(1.0, 4, 0.2), cvt(DomainKind::unit_square, cells_for_nodes(DomainKind::unit_square, 803))}) {
    const std::string text = serialize(m);
    const PolyMesh back = parse(text);
    EXPECT_EQ(back, m);
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(MeshIo, ParseErrorsCarryLineNumbers) {
  const std::string good =
      "polyplate-mesh v1\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n3 0 1 2\nboundary 3\n0 0 1\n0 1 2\n0 2 4\n";
  EXPECT_EQ(parse(good).num_elements(), 1u);

  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };
  EXPECT_EQ(line_of("mesh v2\n"), 1);
  EXPECT_EQ(line_of("polyplate-mesh v1\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n2 0 1\n"), 7);
  EXPECT_EQ(line_of("polyplate-mesh v1\nvertices 3\n0 0\n1 x\n"), 4);
  EXPECT_EQ(line_of("polyplate-mesh v1\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n3 0 1 7\n"), 7);
  EXPECT_EQ(line_of("polyplate-mesh v1\nvertices 3\n0 0 5\n"), 3);
  EXPECT_EQ(line_of("polyplate-mesh v1\nvertices 3\n0 0\n1 0\n"), 5);
}

TEST(MeshIo, ValidationRejectsBrokenMeshes) {
  const std::string head = "polyplate-mesh v1\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n";
  // clockwise loop
  EXPECT_THROW(parse(head + "3 0 2 1\nboundary 3\n0 0 1\n0 1 1\n0 2 1\n"), ValidationError);
  // missing boundary side
  EXPECT_THROW(parse(head + "3 0 1 2\nboundary 2\n0 0 1\n0 1 1\n"), ValidationError);

  PolyMesh m = generate_structured_quad(1.0, 2);
  m.vertices.push_back(Vec2(5, 5));
  EXPECT_THROW(validate(m), ValidationError);  // unused vertex

  PolyMesh dup = generate_structured_quad(1.0, 2);
  dup.vertices[4] = dup.vertices[3];
  EXPECT_THROW(validate(dup), ValidationError);

  PolyMesh extra = generate_structured_quad(1.0, 2);
  extra.boundary_edges.push_back({0, 1, 9});  // interior side listed as boundary
  EXPECT_THROW(validate(extra), ValidationError);
}
