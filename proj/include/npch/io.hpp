#pragma once

// Run configuration, report emission and the on-disk formats: tagged JSON
// points, CSV series, report.json, section.bin and manifest.json.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "npch/cylinder.hpp"
#include "npch/spaces.hpp"

namespace npch {

inline constexpr const char* kToolkitVersion = "0.3.0";

using ojson = nlohmann::ordered_json;

enum class Command { space_check, isometry_analyze, solve_cylinder, uniqueness, bochner_verify, calculus_check };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct RunConfig {
  Command command = Command::space_check;
  std::string target = "h2";  // euclidean | h2 | spd | tree
  int dim = 2;
  std::string tree_file;
  std::string twist = "[[1.6487212707001282,0],[0,0.6065306597126334]]";
  std::string twist_file;
  std::string boundary = "perturbed";  // helix | perturbed (h2 only)
  double eps = 0.1;
  double T0 = 10.0;
  int doublings = 2;
  int ntheta = 64;
  int rows_per_unit = 5;
  double tol = 1e-9;
  double cauchy_tol = 1e-6;
  std::uint64_t seed = 1;
  int samples = 1000;
  double kappa = 1.0;
  double radius = 2.0;
  double tmin = 5.0;
  double tmax = 40.0;
  int steps = 400;
  int mesh = 32;
  std::string generator_file;
  std::string psi = "constant";  // constant | linear | oscillating
  std::string psi_table;
  double c = 1.0;
  std::string out = "run";
};

// Every recognised key, in snapshot order.
std::vector<std::string> config_keys();
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
ojson config_to_json(const RunConfig& cfg);

// args: subcommand words followed by --key value pairs; --config FILE merges
// a JSON object first, then the flags override it.
// Thrown by parse_config when --help was given; what() is the help text.
struct HelpRequested : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig parse_config(const std::vector<std::string>& args);
RunConfig parse_config_json(const std::string& text, Command command);
void apply_config_json(RunConfig& cfg, const std::string& text);

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& bytes);

// Shortest round-trip decimal form.
std::string format_double(double x);

ojson point_to_json(const Point& p);
Point point_from_json(const ojson& j);
ojson matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const ojson& j);

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string csv_text(const CsvTable& t);

struct SectionBlob {
  std::uint8_t space_code = 0;  // 0 euclidean, 1 h2, 2 spd, 3 tree
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t point_dim = 0;
  double T = 0.0;
  std::vector<double> data;
};

template <Geometry G>
SectionBlob section_blob(const CylinderSection<G>& s) {
  SectionBlob b;
  const CylinderGrid& g = s.grid();
  b.rows = static_cast<std::uint32_t>(g.n_t + 1);
  b.cols = static_cast<std::uint32_t>(g.n_theta);
  b.T = g.T;
  for (const auto& p : s.values()) {
    if constexpr (std::is_same_v<G, EuclideanSpace>) {
      b.space_code = 0;
      b.point_dim = static_cast<std::uint32_t>(p.size());
      for (Eigen::Index i = 0; i < p.size(); ++i) b.data.push_back(p(i));
    } else if constexpr (std::is_same_v<G, HyperbolicPlane>) {
      b.space_code = 1;
      b.point_dim = 2;
      b.data.push_back(p.real());
      b.data.push_back(p.imag());
    } else if constexpr (std::is_same_v<G, SpdManifold>) {
      b.space_code = 2;
      b.point_dim = static_cast<std::uint32_t>(p.size());
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        for (Eigen::Index i = 0; i < p.rows(); ++i) b.data.push_back(p(i, j));
    } else {
      b.space_code = 3;
      b.point_dim = 2;
      b.data.push_back(static_cast<double>(p.edge));
      b.data.push_back(p.offset);
    }
  }
  return b;
}

// "NPCH1", u8 space code, u32 rows, u32 cols, u32 point_dim, f64 T, f64 data;
// all little-endian.
std::string encode_section(const SectionBlob& b);
SectionBlob decode_section(const std::string& bytes);

struct ReportBundle {
  ojson report = ojson::object();
  std::vector<CsvTable> tables;
  std::optional<SectionBlob> section;
  std::string report_name = "report.json";
  bool pass = true;
};

struct RunManifest {
  ojson config;
  std::string version = kToolkitVersion;
  double wall_seconds = 0.0;
  ojson checks = ojson::object();
  std::vector<std::pair<std::string, std::string>> hashes;  // file, sha256
};

std::string sha256_hex(const std::string& bytes);

// Writes the bundle's files (fixed order) and manifest.json into out_dir.
RunManifest emit_reports(const ReportBundle& bundle, const std::filesystem::path& out_dir, const ojson& config,
                         double wall_seconds);
ojson manifest_to_json(const RunManifest& m);

}  // namespace npch
