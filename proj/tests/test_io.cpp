#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "npch/app.hpp"
#include "npch/errors.hpp"
#include "npch/io.hpp"

using namespace npch;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("npch-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(ParseConfig, Defaults) {
  const RunConfig c = parse_config({"solve", "cylinder", "--twist-file", "m.json", "--T0", "10"});
  EXPECT_EQ(c.command, Command::solve_cylinder);
  EXPECT_EQ(c.twist_file, "m.json");
  EXPECT_EQ(c.doublings, 2);
  EXPECT_EQ(c.ntheta, 64);
  EXPECT_DOUBLE_EQ(c.T0, 10.0);
}

TEST(ParseConfig, FileMatchesFlags) {
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "c.json") << R"({"ntheta": 64, "target": "spd"})";
  const RunConfig a = parse_config({"solve-cylinder", "--config", (dir / "c.json").string()});
  const RunConfig b = parse_config({"solve", "cylinder", "--ntheta", "64", "--target", "spd"});
  EXPECT_EQ(config_to_json(a), config_to_json(b));
  // Flags override the file.
  const RunConfig c = parse_config({"solve-cylinder", "--config", (dir / "c.json").string(), "--ntheta", "32"});
  EXPECT_EQ(c.ntheta, 32);
}

TEST(ParseConfig, UnknownKeyNamed) {
  try {
    parse_config_json(R"({"nthета": 64})", Command::solve_cylinder);
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_EQ(e.token(), "nthета");
  }
  try {
    parse_config({"space-check", "--bogus", "1"});
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_EQ(e.token(), "--bogus");
  }
  EXPECT_THROW(parse_config({"frobnicate"}), UsageError);
  EXPECT_THROW(parse_config({"solve", "cylinder", "--ntheta", "many"}), UsageError);
}

TEST(ParseConfig, SpecAliases) {
  const RunConfig c = parse_config({"isometry", "analyze", "--space", "spd", "--matrix", "[[1,1],[0,1]]"});
  EXPECT_EQ(c.command, Command::isometry_analyze);
  EXPECT_EQ(c.target, "spd");
  EXPECT_EQ(c.twist, "[[1,1],[0,1]]");
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Csv, Layout) {
  const CsvTable t{"x.csv", {"a", "b"}, {{1.0, 0.5}, {2.0, -3.25}}};
  EXPECT_EQ(csv_text(t), "a,b\n1,0.5\n2,-3.25\n");
  const CsvTable bad{"y.csv", {"a"}, {{1.0, 2.0}}};
  EXPECT_THROW(csv_text(bad), DomainError);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(PointJson, RoundTrip) {
  Matrix m(2, 2);
  m << 2.0, 0.5, 0.5, 1.0;
  for (const Point& p : {Point(Vector((Vector(2) << 1.5, -2.0).finished())), Point(std::complex<double>(0.1, 0.2)),
                         Point(m), Point(TreePoint{2, 0.25})}) {
    const Point q = point_from_json(point_to_json(p));
    EXPECT_EQ(p.index(), q.index());
    EXPECT_EQ(point_to_json(p), point_to_json(q));
  }
}

TEST(Section, EncodeDecode) {
  SectionBlob b;
  b.space_code = 1;
  b.rows = 2;
  b.cols = 3;
  b.point_dim = 2;
  b.T = 4.5;
  for (int i = 0; i < 12; ++i) b.data.push_back(0.1 * i);
  const std::string bytes = encode_section(b);
  EXPECT_EQ(bytes.substr(0, 5), "NPCH1");
  EXPECT_EQ(bytes.size(), 5u + 1 + 12 + 8 + 12 * 8);
  const SectionBlob c = decode_section(bytes);
  EXPECT_EQ(c.rows, 2u);
  EXPECT_EQ(c.cols, 3u);
  EXPECT_EQ(c.T, 4.5);
  EXPECT_EQ(c.data, b.data);
  EXPECT_THROW(decode_section(bytes.substr(0, 20)), IoError);
  EXPECT_THROW(decode_section("XXXX1" + bytes.substr(5)), IoError);
}

TEST(Emit, EmptyBundleAndDeterminism) {
  const fs::path dir = scratch("emit");
  const RunManifest empty = emit_reports(ReportBundle{}, dir / "e", ojson::object(), 0.0);
  EXPECT_TRUE(empty.hashes.empty());
  RunConfig cfg;
  cfg.command = Command::calculus_check;
  const ReportBundle b = run_command(cfg);
  const RunManifest m1 = emit_reports(b, dir / "a", config_to_json(cfg), 1.0);
  const RunManifest m2 = emit_reports(run_command(cfg), dir / "b", config_to_json(cfg), 2.0);
  EXPECT_EQ(m1.hashes, m2.hashes);
  EXPECT_TRUE(fs::exists(dir / "a" / "manifest.json"));
  EXPECT_THROW(emit_reports(b, "/proc/npch-forbidden/x", ojson::object(), 0.0), IoError);
}

TEST(Emit, SolveProfileRowsMatchAnnuli) {
  RunConfig cfg;
  cfg.command = Command::solve_cylinder;
  cfg.T0 = 4.0;
  cfg.doublings = 1;
  cfg.ntheta = 16;
  cfg.rows_per_unit = 4;
  cfg.cauchy_tol = 1e-2;
  const ReportBundle b = run_command(cfg);
  const CsvTable* profile = nullptr;
  for (const auto& t : b.tables)
    if (t.name == "profile.csv") profile = &t;
  ASSERT_NE(profile, nullptr);
  EXPECT_EQ(profile->rows.size(), b.report["profile"]["annuli"].get<std::size_t>());
  ASSERT_TRUE(b.section.has_value());
  EXPECT_EQ(b.section->space_code, 1);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(UsageError("x", "y")), kExitUsage);
  EXPECT_EQ(exit_code_for(IoError("x", "y")), kExitUsage);
  EXPECT_EQ(exit_code_for(DomainError("x")), kExitNumerical);
}
