#include "npch/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "npch/errors.hpp"

namespace npch {

namespace fs = std::filesystem;

std::string to_string(Command c) {
  switch (c) {
    case Command::space_check: return "space-check";
    case Command::isometry_analyze: return "isometry-analyze";
    case Command::solve_cylinder: return "solve-cylinder";
    case Command::uniqueness: return "uniqueness";
    case Command::bochner_verify: return "bochner-verify";
    case Command::calculus_check: return "calculus-check";
  }
  return "unknown";
}

Command command_from_string(const std::string& s) {
  for (Command c : {Command::space_check, Command::isometry_analyze, Command::solve_cylinder, Command::uniqueness,
                    Command::bochner_verify, Command::calculus_check})
    if (to_string(c) == s) return c;
  throw UsageError("unknown command", s);
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* b = v.data();
  const char* e = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) throw UsageError("invalid value for " + key, v);
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw UsageError("non-finite value for " + key, v);
  return out;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<ojson(const RunConfig&)> get;
};

#define NPCH_STR(field, key) \
  Key{key, [](RunConfig& c, const std::string& v) { c.field = v; }, [](const RunConfig& c) { return ojson(c.field); }}
#define NPCH_NUM(field, key, T)                                                                 \
  Key{key, [](RunConfig& c, const std::string& v) { c.field = parse_number<T>(key, v); }, \
      [](const RunConfig& c) { return ojson(c.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> k{
      NPCH_STR(target, "target"),
      NPCH_NUM(dim, "dim", int),
      NPCH_STR(tree_file, "tree"),
      NPCH_STR(twist, "twist"),
      NPCH_STR(twist_file, "twist_file"),
      NPCH_STR(boundary, "boundary"),
      NPCH_NUM(eps, "eps", double),
      NPCH_NUM(T0, "T0", double),
      NPCH_NUM(doublings, "doublings", int),
      NPCH_NUM(ntheta, "ntheta", int),
      NPCH_NUM(rows_per_unit, "rows_per_unit", int),
      NPCH_NUM(tol, "tol", double),
      NPCH_NUM(cauchy_tol, "cauchy_tol", double),
      NPCH_NUM(seed, "seed", std::uint64_t),
      NPCH_NUM(samples, "samples", int),
      NPCH_NUM(kappa, "kappa", double),
      NPCH_NUM(radius, "radius", double),
      NPCH_NUM(tmin, "tmin", double),
      NPCH_NUM(tmax, "tmax", double),
      NPCH_NUM(steps, "steps", int),
      NPCH_NUM(mesh, "mesh", int),
      NPCH_STR(generator_file, "generator"),
      NPCH_STR(psi, "psi"),
      NPCH_STR(psi_table, "psi_table"),
      NPCH_NUM(c, "c", double),
      NPCH_STR(out, "out"),
  };
  return k;
}

#undef NPCH_STR
#undef NPCH_NUM

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a{{"target", "--space"}, {"twist", "--matrix"}, {"tree", "--tree-file"}};
  return a;
}

std::string help_of(const std::string& key) {
  static const std::map<std::string, std::string> h{
      {"target", "euclidean, h2, spd or tree"},
      {"dim", "dimension for euclidean and spd targets"},
      {"tree", "tree JSON file"},
      {"twist", "isometry as inline JSON"},
      {"twist_file", "isometry JSON file"},
      {"boundary", "boundary loop: perturbed or helix"},
      {"eps", "boundary perturbation amplitude"},
      {"T0", "first cylinder length"},
      {"doublings", "number of exhaustion doublings"},
      {"ntheta", "angular grid size"},
      {"rows_per_unit", "t rows per unit length"},
      {"tol", "relaxation tolerance"},
      {"cauchy_tol", "restriction distance gate between levels"},
      {"seed", "global seed"},
      {"samples", "sample count"},
      {"kappa", "comparison curvature"},
      {"radius", "sampling radius"},
      {"tmin", "ray start"},
      {"tmax", "ray end"},
      {"steps", "ray samples"},
      {"mesh", "probe mesh per unit"},
      {"generator", "polynomial generator JSON file"},
      {"psi", "reference weight: constant, linear or oscillating"},
      {"psi_table", "weight table CSV (r,psi)"},
      {"c", "weight floor"},
      {"out", "output directory, or a .json report path"},
  };
  const auto it = h.find(key);
  return it == h.end() ? std::string() : it->second;
}

const Key* find_key(const std::string& name) {
  for (const Key& k : keys())
    if (name == k.name) return &k;
  return nullptr;
}

std::string flag_of(const std::string& key) {
  std::string f = key;
  for (char& ch : f)
    if (ch == '_') ch = '-';
  return "--" + f;
}

void validate_config(const RunConfig& c) {
  static const std::array<const char*, 4> targets{"euclidean", "h2", "spd", "tree"};
  if (std::find(targets.begin(), targets.end(), c.target) == targets.end()) throw UsageError("unknown target", c.target);
  if (c.boundary != "helix" && c.boundary != "perturbed") throw UsageError("unknown boundary", c.boundary);
  if (c.psi != "constant" && c.psi != "linear" && c.psi != "oscillating") throw UsageError("unknown psi", c.psi);
  if (c.dim < 1) throw UsageError("dim must be positive", std::to_string(c.dim));
  if (c.samples < 1) throw UsageError("samples must be positive", std::to_string(c.samples));
  if (c.doublings < 0) throw UsageError("doublings must be nonnegative", std::to_string(c.doublings));
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : keys()) out.emplace_back(k.name);
  return out;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw UsageError("unknown configuration key", key);
  k->set(cfg, value);
}

ojson config_to_json(const RunConfig& cfg) {
  ojson j;
  j["command"] = to_string(cfg.command);
  for (const Key& k : keys()) j[k.name] = k.get(cfg);
  return j;
}

void apply_config_json(RunConfig& cfg, const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("configuration is not valid JSON: ") + e.what(), text.substr(0, 40));
  }
  if (!j.is_object()) throw UsageError("configuration must be a JSON object", text.substr(0, 40));
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      const Command c = command_from_string(value.get<std::string>());
      if (c != cfg.command) throw UsageError("configuration is for a different command", value.get<std::string>());
      continue;
    }
    const Key* k = find_key(key);
    if (!k) throw UsageError("unknown configuration key", key);
    if (value.is_string()) {
      k->set(cfg, value.get<std::string>());
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      k->set(cfg, value.dump());
    } else if (value.is_number_float()) {
      k->set(cfg, format_double(value.get<double>()));
    } else if (value.is_array() || value.is_object()) {
      k->set(cfg, value.dump());
    } else {
      throw UsageError("unsupported value type for " + key, value.dump());
    }
  }
}

RunConfig parse_config_json(const std::string& text, Command command) {
  RunConfig cfg;
  cfg.command = command;
  apply_config_json(cfg, text);
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"npch"};
  app.allow_extras();
  app.require_subcommand(1);
  std::map<std::string, std::string> values;
  std::string config_file;
  struct Entry {
    CLI::App* app;
    Command command;
  };
  std::vector<Entry> entries;
  const auto add_options = [&](CLI::App* sub) {
    sub->allow_extras();
    sub->add_option("--config", config_file, "JSON configuration file");
    for (const Key& k : keys()) {
      std::string flags = flag_of(k.name);
      if (const auto a = aliases().find(k.name); a != aliases().end()) flags += "," + a->second;
      sub->add_option(flags, values[k.name], help_of(k.name));
    }
  };
  const auto leaf = [&](CLI::App* parent, const std::string& name, Command c) {
    CLI::App* sub = parent->add_subcommand(name);
    add_options(sub);
    entries.push_back({sub, c});
  };
  leaf(&app, "space-check", Command::space_check);
  leaf(&app, "uniqueness", Command::uniqueness);
  leaf(&app, "calculus-check", Command::calculus_check);
  CLI::App* iso = app.add_subcommand("isometry");
  iso->require_subcommand(1);
  leaf(iso, "analyze", Command::isometry_analyze);
  CLI::App* solve = app.add_subcommand("solve");
  solve->require_subcommand(1);
  leaf(solve, "cylinder", Command::solve_cylinder);
  CLI::App* boch = app.add_subcommand("bochner");
  boch->require_subcommand(1);
  leaf(boch, "verify", Command::bochner_verify);
  for (const char* flat : {"isometry-analyze", "solve-cylinder", "bochner-verify"})
    leaf(&app, flat, command_from_string(flat));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream out, err;
    app.exit(e, out, err);
    throw HelpRequested(out.str());
  } catch (const CLI::ParseError& e) {
    std::string token = args.empty() ? std::string() : args.front();
    if (!app.remaining().empty()) token = app.remaining().front();
    throw UsageError(e.what(), token);
  }
  const Entry* chosen = nullptr;
  for (const Entry& en : entries)
    if (en.app->parsed()) chosen = &en;
  if (!chosen) throw UsageError("missing subcommand", args.empty() ? std::string() : args.front());
  const auto rest = chosen->app->remaining();
  if (!rest.empty()) throw UsageError("unknown option", rest.front());

  RunConfig cfg;
  cfg.command = chosen->command;
  if (!config_file.empty()) apply_config_json(cfg, read_text_file(config_file));
  for (const Key& k : keys()) {
    CLI::Option* opt = chosen->app->get_option(flag_of(k.name));
    if (opt->count() > 0) k.set(cfg, values[k.name]);
  }
  validate_config(cfg);
  return cfg;
}

std::string read_text_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open file", p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read file", p.string());
  return ss.str();
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

ojson matrix_to_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson r = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Matrix matrix_from_json(const ojson& j) {
  if (!j.is_array() || j.empty()) throw InvalidPoint("matrix must be a nonempty list of rows");
  const std::size_t n = j.size();
  const std::size_t m = j.front().size();
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != m) throw InvalidPoint("matrix rows have different lengths");
    for (std::size_t k = 0; k < m; ++k) {
      if (!j[i][k].is_number()) throw InvalidPoint("matrix entries must be numbers");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return out;
}

ojson point_to_json(const Point& p) {
  return std::visit(
      [](const auto& v) -> ojson {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Vector>) {
          ojson a = ojson::array();
          for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
          return {{"space", "euclidean"}, {"value", a}};
        } else if constexpr (std::is_same_v<T, std::complex<double>>) {
          return {{"space", "hyperbolic2"}, {"value", {v.real(), v.imag()}}};
        } else if constexpr (std::is_same_v<T, Matrix>) {
          return {{"space", "spd"}, {"value", matrix_to_json(v)}};
        } else {
          return {{"space", "tree"}, {"value", {{"edge", v.edge}, {"offset", v.offset}}}};
        }
      },
      p);
}

Point point_from_json(const ojson& j) {
  try {
    const std::string s = j.at("space").get<std::string>();
    const ojson& v = j.at("value");
    if (s == "euclidean") {
      Vector x(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i].get<double>();
      return x;
    }
    if (s == "hyperbolic2") return std::complex<double>(v.at(0).get<double>(), v.at(1).get<double>());
    if (s == "spd") return matrix_from_json(v);
    if (s == "tree") return TreePoint{v.at("edge").get<int>(), v.at("offset").get<double>()};
    throw InvalidPoint("unknown point space tag " + s);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidPoint(std::string("malformed point JSON: ") + e.what());
  }
}

std::string csv_text(const CsvTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw DomainError("CSV row width differs from header in " + t.name);
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += '\n';
  }
  return out;
}

namespace {

template <class T>
void put_le(std::string& out, T v) {
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  out.append(b.data(), b.size());
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("truncated section dump", "section.bin");
  std::array<char, sizeof(T)> b;
  std::memcpy(b.data(), in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

constexpr char kMagic[] = "NPCH1";

}  // namespace

void write_text_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed", p.string());
}

std::string encode_section(const SectionBlob& b) {
  if (b.data.size() != static_cast<std::size_t>(b.rows) * b.cols * b.point_dim)
    throw DomainError("section blob size does not match its header");
  std::string out(kMagic, 5);
  put_le<std::uint8_t>(out, b.space_code);
  put_le<std::uint32_t>(out, b.rows);
  put_le<std::uint32_t>(out, b.cols);
  put_le<std::uint32_t>(out, b.point_dim);
  put_le<double>(out, b.T);
  for (double x : b.data) put_le<double>(out, x);
  return out;
}

SectionBlob decode_section(const std::string& bytes) {
  if (bytes.size() < 5 || bytes.compare(0, 5, kMagic) != 0) throw IoError("bad section magic", "section.bin");
  std::size_t pos = 5;
  SectionBlob b;
  b.space_code = get_le<std::uint8_t>(bytes, pos);
  b.rows = get_le<std::uint32_t>(bytes, pos);
  b.cols = get_le<std::uint32_t>(bytes, pos);
  b.point_dim = get_le<std::uint32_t>(bytes, pos);
  b.T = get_le<double>(bytes, pos);
  const std::size_t n = static_cast<std::size_t>(b.rows) * b.cols * b.point_dim;
  if (bytes.size() != pos + n * sizeof(double)) throw IoError("section dump has the wrong length", "section.bin");
  b.data.resize(n);
  for (double& x : b.data) x = get_le<double>(bytes, pos);
  return b;
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunManifest emit_reports(const ReportBundle& bundle, const fs::path& out_dir, const ojson& config,
                         double wall_seconds) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory", out_dir.string());
  RunManifest m;
  m.config = config;
  m.wall_seconds = wall_seconds;
  if (bundle.report.contains("checks")) m.checks = bundle.report.at("checks");

  std::vector<std::pair<std::string, std::string>> files;
  if (!bundle.report.empty()) files.emplace_back(bundle.report_name, bundle.report.dump(2) + "\n");
  for (const CsvTable& t : bundle.tables) files.emplace_back(t.name, csv_text(t));
  if (bundle.section) files.emplace_back("section.bin", encode_section(*bundle.section));
  for (const auto& [name, bytes] : files) {
    write_text_file(out_dir / name, bytes);
    m.hashes.emplace_back(name, sha256_hex(bytes));
  }
  write_text_file(out_dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
  return m;
}

ojson manifest_to_json(const RunManifest& m) {
  ojson j;
  j["version"] = m.version;
  j["config"] = m.config;
  j["wall_seconds"] = m.wall_seconds;
  j["checks"] = m.checks;
  ojson h = ojson::object();
  for (const auto& [name, hash] : m.hashes) h[name] = hash;
  j["artifacts"] = h;
  return j;
}

}  // namespace npch
