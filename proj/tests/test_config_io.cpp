#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spikeloc/config.hpp"
#include "spikeloc/errors.hpp"
#include "spikeloc/io.hpp"

using namespace spikeloc;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(
[problem]
n = 1
p = 3
q = 3

[potentials]
K = 1 + 0.5*exp(-x1^2)
box = -2 2

[sweep]
epsilons = 0.4 0.3 0.2
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("config parses sections and lists") {
  RunConfig cfg = RunConfig::parse_text(kBase, "base");
  CHECK(cfg.n == 1);
  CHECK(cfg.p == 3.0);
  CHECK(cfg.K == "1 + 0.5*exp(-x1^2)");
  CHECK(cfg.box.lo[0] == -2.0);
  CHECK(cfg.box.hi[0] == 2.0);
  CHECK(cfg.epsilons.size() == 3);
  CHECK(cfg.epsilons[2] == 0.2);
  CHECK(cfg.R == 20.0);   // n = 1 default
  CHECK(cfg.m == 4001);
}

TEST_CASE("grid defaults follow the dimension") {
  RunConfig cfg = RunConfig::parse_text("[problem]\nn = 3\np = 3\nq = 3\n", "t");
  CHECK(cfg.R == 15.0);
  CHECK(cfg.m == 3001);
}

TEST_CASE("comments and blank lines are ignored") {
  RunConfig cfg = RunConfig::parse_text(
      "# leading comment\n[problem]\n; alt comment\nn = 1\n\np = 3\nq = 3\n", "t");
  CHECK(cfg.n == 1);
}

TEST_CASE("unknown keys and sections fail loudly") {
  CHECK_THROWS_AS(RunConfig::parse_text("[problem]\nzz = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("[nosuch]\nn = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("n = 1\n", "t"), ConfigError);  // outside any section
  CHECK_THROWS_AS(RunConfig::parse_text("[problem]\nn = 1\nn = 2\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("[problem]\nn one\n", "t"), ConfigError);
}

TEST_CASE("values are validated") {
  CHECK_THROWS_AS(RunConfig::parse_text("[problem]\nn = 9\n", "t"), ValidationError);
  CHECK_THROWS_AS(RunConfig::parse_text("[problem]\np = 0.5\n", "t"), ValidationError);
  CHECK_THROWS_AS(RunConfig::parse_text("[potentials]\nK = 1 +\n", "t"), ValidationError);
  CHECK_THROWS_AS(RunConfig::parse_text("[potentials]\nbox = 2 -2\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("[potentials]\nbox = 1 2 3\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("[grids]\nm = 5\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("[grids]\nmesh_factor = 2\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("[sweep]\ninit_center = 50\n", "t"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse_text("[sweep]\nepsilons = 0.4 0.5\n", "t"), ConfigError);
}

TEST_CASE("hash ignores formatting but tracks values") {
  RunConfig a = RunConfig::parse_text(kBase, "a");
  RunConfig b = RunConfig::parse_text(
      "[sweep]\nepsilons = 0.4 0.3 0.2\n[potentials]\n# moved around\nbox = -2 2\n"
      "K = 1 + 0.5*exp(-x1^2)\n[problem]\nq = 3\np = 3\nn = 1\n",
      "b");
  CHECK(a.hash() == b.hash());
  RunConfig c = RunConfig::parse_text(kBase, "c");
  c.p = 2.0;
  CHECK(a.hash() != c.hash());
  CHECK(a.canonical() == b.canonical());
}

TEST_CASE("fnv hash has the reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("problem and potentials accessors validate") {
  RunConfig cfg = RunConfig::parse_text(kBase, "t");
  ProblemParams params = cfg.problem();
  CHECK(params.margin == doctest::Approx(1.5));
  PotentialTriple pot = cfg.potentials();
  CHECK(pot.dim == 1);
}

TEST_CASE("csv writes are atomic and deterministic") {
  fs::path dir = fs::temp_directory_path() / "spikeloc_io_test";
  fs::remove_all(dir);
  CsvDoc doc;
  doc.meta = {{"spikeloc", "0.1.0"}, {"command", "test"}};
  doc.columns = {"x", "y"};
  doc.rows = {{"1", "2"}, {"3.5", "4.25"}};
  fs::path file = dir / "doc.csv";
  write_csv_atomic(file, doc);
  std::string first = slurp(file);
  CHECK(first == "# spikeloc 0.1.0\n# command test\nx,y\n1,2\n3.5,4.25\n");
  write_csv_atomic(file, doc);
  CHECK(slurp(file) == first);
  int leftovers = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++leftovers;
  }
  CHECK(leftovers == 1);  // no temporary files left behind
  fs::remove_all(dir);
}

TEST_CASE("csv rejects ragged rows") {
  CsvDoc doc;
  doc.columns = {"x", "y"};
  doc.rows = {{"1"}};
  fs::path file = fs::temp_directory_path() / "spikeloc_io_test_ragged.csv";
  CHECK_THROWS_AS(write_csv_atomic(file, doc), IoError);
  CHECK_FALSE(fs::exists(file));
}

TEST_CASE("g formatting is shortest faithful") {
  CHECK(format_g(2.0 / 3.0, 9) == "0.666666667");
  CHECK(format_g(2.0 / 3.0, 17) == "0.66666666666666663");
  CHECK(format_g(1e-12, 3) == "1e-12");
  CHECK(format_g(0.0, 9) == "0");
}

}  // TEST_SUITE
