#include "support.hpp"

#include <filesystem>
#include <fstream>

using namespace polyplate;

namespace {

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const RunConfig c = parse_config(
      "# comment line\n"
      "problem = square_udl   # trailing comment\n"
      "bc = simply_supported\n"
      "thickness = 0.1, 0.001\n"
      "mesh = structured:4,8\n"
      "tol.patch = 1e-7\n"
      "record_timing = true\n");
  EXPECT_EQ(c.problem, Problem::square_udl);
  EXPECT_EQ(c.bc, BcKind::hard_simply_supported);
  EXPECT_EQ(c.thickness, (std::vector<double>{0.1, 0.001}));
  EXPECT_EQ(c.mesh.kind, MeshKind::structured_quad);
  EXPECT_EQ(c.mesh.sizes, (std::vector<std::size_t>{4, 8}));
  EXPECT_EQ(c.tol.patch, 1e-7);
  EXPECT_TRUE(c.record_timing);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, TextRoundTrip) {
  RunConfig c = parse_config("problem = circular\nmesh = cvt:64,256\nthickness = 0.2, 1e-05\nnu = 0.25\n"
                             "convention = grad_w-beta\ntol.l2_slope_min = 1.75\nnodes = 500\n");
  c.E = 1.0 / 3.0;
  EXPECT_EQ(parse_config(to_text(c)), c);
  EXPECT_EQ(parse_config(to_text(RunConfig{})), RunConfig{});
}

TEST(Config, HashIsStableAndSensitive) {
  const RunConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  RunConfig c;
  c.seed = 43;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, ParseErrorsNameTheLine) {
  EXPECT_EQ(error_line("problem = patch\nbogus = 1\n"), 2);
  EXPECT_EQ(error_line("\n\nthickness = abc\n"), 3);
  EXPECT_EQ(error_line("mesh = hex:4\n"), 1);
  EXPECT_EQ(error_line("mesh = cvt:0\n"), 1);
  EXPECT_EQ(error_line("seed = -3\n"), 1);
  EXPECT_EQ(error_line("problem patch\n"), 1);
  EXPECT_EQ(error_line("record_timing = maybe\n"), 1);
  EXPECT_EQ(error_line("thickness = 0.1x\n"), 1);
}

TEST(Config, Includes) {
  const auto dir = std::filesystem::temp_directory_path() / "polyplate_test_config";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir / "sub");
  std::ofstream(dir / "sub" / "base.cfg") << "problem = square_nonuniform\nseed = 7\n";
  std::ofstream(dir / "main.cfg") << "include = sub/base.cfg\nseed = 9\n";
  std::ofstream(dir / "broken.cfg") << "\ninclude = sub/missing.cfg\n";
  const RunConfig c = load_config(dir / "main.cfg");
  EXPECT_EQ(c.problem, Problem::square_nonuniform);
  EXPECT_EQ(c.seed, 9u);
  try {
    load_config(dir / "broken.cfg");
    ADD_FAILURE() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
  std::ofstream(dir / "loop.cfg") << "include = loop.cfg\n";
  EXPECT_THROW(load_config(dir / "loop.cfg"), ParseError);
  EXPECT_THROW(load_config(dir / "nope.cfg"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST(Config, ValidateRejectsInconsistentRuns) {
  RunConfig c;
  c.problem = Problem::circular;
  c.mesh.kind = MeshKind::structured_quad;
  EXPECT_THROW(c.validate(), ArgumentError);
  RunConfig d;
  d.nu = 0.5;
  EXPECT_THROW(d.validate(), ArgumentError);
  RunConfig e;
  e.thickness = {0.1, -1.0};
  EXPECT_THROW(e.validate(), ArgumentError);
  RunConfig f;
  f.stiffness_degree = 0;
  EXPECT_THROW(f.validate(), ArgumentError);
}
