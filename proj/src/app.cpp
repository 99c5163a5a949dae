#include "npch/app.hpp"

#include <chrono>
#include <iostream>

#include "npch/bochner.hpp"
#include "npch/calculus.hpp"
#include "npch/cylinder.hpp"
#include "npch/npc_core.hpp"
#include "npch/spd.hpp"

namespace npch {

namespace fs = std::filesystem;

namespace {

ojson parse_json_arg(const std::string& text, const std::string& what) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw UsageError(what + " is not valid JSON", text);
  }
}

ojson twist_json(const RunConfig& cfg) {
  return cfg.twist_file.empty() ? parse_json_arg(cfg.twist, "--twist")
                                : parse_json_arg(read_text_file(cfg.twist_file), cfg.twist_file);
}

ojson fit_json(const DecayFit& f) {
  return {{"delta", f.delta},
          {"a", f.a},
          {"b", f.b},
          {"r_squared", f.r_squared},
          {"classification", to_string(f.classification)},
          {"tail_start", f.tail_start},
          {"tail_points", f.tail_points}};
}

ojson profile_json(const EnergyProfile& p) {
  const LowerBoundCheck lb = lower_bound_check(p);
  return {{"annuli", p.annuli.size()},
          {"slope_fit", p.slope_fit},
          {"intercept", p.intercept},
          {"e_rho", p.e_rho},
          {"slope_ratio", p.e_rho > 0.0 ? p.slope_fit / p.e_rho : 0.0},
          {"bounded_defect", p.bounded_defect},
          {"min_slack", p.min_slack},
          {"total_energy", p.total_energy},
          {"modified_energy", p.modified_energy},
          {"lower_bound_margin", lb.worst_margin}};
}

CsvTable profile_table(const EnergyProfile& p) {
  CsvTable t{"profile.csv", {"t1", "t2", "energy", "slope_residual"}, {}};
  for (const Annulus& a : p.annuli) t.rows.push_back({a.t1, a.t2, a.energy, a.energy - p.e_rho * (a.t2 - a.t1)});
  return t;
}

SolveParams solve_params(const RunConfig& cfg) {
  SolveParams p;
  p.T0 = cfg.T0;
  p.doublings = cfg.doublings;
  p.rows_per_unit = cfg.rows_per_unit;
  p.n_theta = cfg.ntheta;
  p.cauchy_tol = cfg.cauchy_tol;
  p.relax.tol = cfg.tol;
  return p;
}

template <Geometry G>
ReportBundle solve_bundle(const G& space, const isometry_t<G>& twist, const Loop<G>& loop, const RunConfig& cfg) {
  const SolveResult<G> r = solve_punctured_disk(space, twist, loop, solve_params(cfg));
  const IsometryClass cls = classify_isometry(IsometryDescriptor(twist));
  ReportBundle b;
  ojson& rep = b.report;
  rep["command"] = to_string(cfg.command);
  rep["seed"] = cfg.seed;
  rep["space"] = G::kName;
  rep["classification"] = to_string(cls);
  rep["translation_length"] = translation_length(IsometryDescriptor(twist));
  rep["profile"] = profile_json(r.profile);
  ojson levels = ojson::array();
  bool lower_ok = true;
  for (std::size_t k = 0; k < r.level_profiles.size(); ++k) {
    const LowerBoundCheck lb = lower_bound_check(r.level_profiles[k]);
    lower_ok = lower_ok && lb.ok;
    levels.push_back({{"T", cfg.T0 * static_cast<double>(1 << k)},
                      {"sweeps", r.sweeps[k]},
                      {"slope_fit", r.level_profiles[k].slope_fit},
                      {"total_energy", r.level_profiles[k].total_energy},
                      {"lower_bound_margin", lb.worst_margin}});
  }
  rep["levels"] = levels;
  rep["cauchy_distances"] = r.cauchy_distances;
  const ThetaEnergyReport th = theta_energy_function(r.section, r.profile.e_rho, 2.0);
  rep["theta_energy"] = {{"delta_F", th.delta_F},       {"lipschitz", th.lipschitz}, {"max_increase", th.max_increase},
                         {"nonincreasing", th.nonincreasing}, {"min_F", th.min_F},      {"tF_ratio", th.tF_ratio}};
  const SublogReport sl = sublog_growth_check(r.deepest);
  rep["sublog"] = {{"eps", sl.eps},
                   {"c_eps", sl.c_eps},
                   {"ratio_at_end", sl.ratio_at_end},
                   {"radial_constant", sl.radial_constant},
                   {"finite", sl.finite}};
  ojson checks;
  checks["lower_bound"] = lower_ok;
  checks["theta_energy_nonincreasing"] = th.nonincreasing;
  checks["sublog_finite"] = sl.finite;
  if (cls == IsometryClass::hyperbolic && cfg.ntheta >= 64 && r.profile.e_rho > 0.0) {
    const double ratio = r.profile.slope_fit / r.profile.e_rho;
    checks["slope_law"] = ratio >= 0.98 && ratio <= 1.02;
  }
  rep["checks"] = checks;
  b.tables.push_back(profile_table(r.profile));
  CsvTable f{"F_of_t.csv", {"t", "F"}, {}};
  for (std::size_t i = 0; i < th.t.size(); ++i) f.rows.push_back({th.t[i], th.F[i]});
  b.tables.push_back(std::move(f));
  b.section = section_blob(r.section);
  return b;
}

template <Geometry G>
ReportBundle uniqueness_bundle(const G& space, const isometry_t<G>& twist, const Loop<G>& loop, const RunConfig& cfg) {
  const UniquenessReport u =
      uniqueness_probe(space, twist, loop, {SeedKind::prototype, SeedKind::random, SeedKind::constant_bridge},
                       solve_params(cfg), cfg.seed);
  ReportBundle b;
  b.report["command"] = to_string(cfg.command);
  b.report["seed"] = cfg.seed;
  b.report["space"] = G::kName;
  b.report["seeds"] = u.seeds;
  b.report["sup_distance"] = u.sup_distance;
  b.report["subharmonic_defect"] = u.subharmonic_defect;
  b.report["subharmonic_bound"] = u.subharmonic_bound;
  b.report["checks"] = {{"coincide", u.sup_distance <= 1e-5}, {"subharmonic", u.subharmonic_defect >= u.subharmonic_bound}};
  return b;
}

// Dispatches a solve-like command on the configured target.
template <class Fn>
ReportBundle with_target(const RunConfig& cfg, Fn&& fn) {
  const SpaceDescriptor space = space_from_config(cfg);
  const IsometryDescriptor twist = twist_from_config(cfg);
  if (const auto* h = std::get_if<HyperbolicPlane>(&space)) {
    const MobiusMap& m = std::get<MobiusMap>(twist);
    const bool perturb = cfg.boundary == "perturbed" && classify_isometry(twist) == IsometryClass::hyperbolic;
    const Loop<HyperbolicPlane> loop = perturb ? perturbed_helix(m, cfg.eps) : helix_loop(*h, m);
    return fn(*h, m, loop);
  }
  if (const auto* s = std::get_if<SpdManifold>(&space)) {
    const SpdIsometry& g = std::get<SpdIsometry>(twist);
    return fn(*s, g, helix_loop(*s, g));
  }
  if (const auto* e = std::get_if<EuclideanSpace>(&space)) {
    const EuclideanMotion& g = std::get<EuclideanMotion>(twist);
    return fn(*e, g, helix_loop(*e, g));
  }
  const MetricTree& t = std::get<MetricTree>(space);
  const TreeAutomorphism& g = std::get<TreeAutomorphism>(twist);
  return fn(t, g, helix_loop(t, g));
}

ReportBundle space_check(const RunConfig& cfg) {
  const SpaceDescriptor space = space_from_config(cfg);
  const ComparisonReport npc = check_npc_inequality(space, cfg.samples, cfg.seed, cfg.radius);
  ReportBundle b;
  b.report["command"] = to_string(cfg.command);
  b.report["seed"] = cfg.seed;
  b.report["space"] = space_name(space);
  b.report["samples"] = cfg.samples;
  b.report["npc_residual"] = npc.residual;
  ojson worst = ojson::array();
  for (const Point& p : npc.worst_case) worst.push_back(point_to_json(p));
  b.report["npc_worst_case"] = worst;
  b.report["npc_worst_t"] = npc.worst_t;
  ojson checks;
  checks["npc"] = npc.residual >= -1e-9;
  const bool cat_applies = std::holds_alternative<MetricTree>(space) ||
                           (std::holds_alternative<HyperbolicPlane>(space) && cfg.kappa <= 1.0);
  if (cat_applies) {
    const ComparisonReport cat = check_cat_kappa(space, cfg.kappa, cfg.samples, task_seed(cfg.seed, 1), cfg.radius);
    b.report["kappa"] = cfg.kappa;
    b.report["cat_residual"] = cat.residual;
    checks["cat_kappa"] = cat.residual >= -1e-9;
  }
  b.report["checks"] = checks;
  return b;
}

ReportBundle isometry_analyze(const RunConfig& cfg) {
  const IsometryDescriptor iso = twist_from_config(cfg);
  ReportBundle b;
  ojson& rep = b.report;
  rep["command"] = to_string(cfg.command);
  rep["seed"] = cfg.seed;
  rep["space"] = space_name(space_of(iso));
  const IsometryClass cls = classify_isometry(iso);
  const double rho = translation_length(iso);
  rep["classification"] = to_string(cls);
  rep["translation_length"] = rho;
  rep["min_energy_constant"] = min_energy_constant(rho);
  ojson checks = ojson::object();
  std::optional<RaySeries> series;
  if (const auto* g = std::get_if<SpdIsometry>(&iso)) {
    rep["semisimple"] = is_semisimple(g->g);
    const Iwasawa w = iwasawa(g->g);
    rep["iwasawa"] = {{"O", matrix_to_json(w.O)}, {"A", matrix_to_json(w.A)}, {"N", matrix_to_json(w.N)}};
    const DisplacementMinimum dm = minimize_displacement(g->g);
    rep["min_displacement"] = dm.value;
    checks["lower_bound_law"] = rho <= dm.value + 1e-8;
    series = decay_ray(spd_decay_ray(g->g), cfg.tmin, cfg.tmax, cfg.steps);
  } else if (const auto* m = std::get_if<MobiusMap>(&iso)) {
    series = decay_ray(disk_decay_ray(*m), cfg.tmin, cfg.tmax, cfg.steps);
  }
  if (series) {
    rep["decay_fit"] = fit_json(series->fit);
    if (cls == IsometryClass::parabolic) {
      checks["decay_fit"] = series->fit.r_squared >= 0.99 && series->fit.a > 0.0 && series->fit.delta <= 1e-6;
    } else {
      double dev = 0.0;
      for (double d : series->displacement) dev = std::max(dev, std::abs(d - rho));
      rep["displacement_deviation"] = dev;
      checks["constant_displacement"] = dev <= 1e-8 * (1.0 + rho);
    }
    CsvTable t{"ray.csv", {"t", "displacement"}, {}};
    for (std::size_t i = 0; i < series->t.size(); ++i) t.rows.push_back({series->t[i], series->displacement[i]});
    b.tables.push_back(std::move(t));
  }
  rep["checks"] = checks;
  return b;
}

ojson residual_json(const ResidualReport& r) {
  return {{"residual_h", r.residual_h},
          {"residual_half_h", r.residual_half_h},
          {"observed_order", r.order_reported ? ojson(r.observed_order) : ojson(nullptr)},
          {"discrete_defect", r.discrete_defect}};
}

bool order_ok(const ResidualReport& r) {
  if (!r.order_reported) return r.residual_h <= 1e-8;
  return r.observed_order >= 1.8 && r.observed_order <= 2.2;
}

ReportBundle bochner_verify(const RunConfig& cfg) {
  std::vector<Polynomial> gens;
  if (cfg.generator_file.empty()) {
    gens = reference_generators();
  } else {
    gens.push_back(Polynomial::from_json(read_text_file(cfg.generator_file)));
  }
  ProbeOptions opt;
  opt.mesh = cfg.mesh;
  ReportBundle b;
  b.report["command"] = to_string(cfg.command);
  b.report["seed"] = cfg.seed;
  b.report["mesh"] = cfg.mesh;
  ojson list = ojson::array();
  bool ok = true;
  CsvTable t{"residuals.csv", {"generator", "identity", "residual_h", "residual_half_h", "observed_order"}, {}};
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const ResidualReport f4 = check_form4(gens[k], opt);
    const ResidualReport cm = check_commutation(gens[k], opt);
    const SiuReport si = siu_residual_flat(gens[k], opt);
    list.push_back({{"generator", ojson::parse(gens[k].to_json())},
                    {"form4", residual_json(f4)},
                    {"commutation", residual_json(cm)},
                    {"siu", residual_json(si.original)},
                    {"siu_conjugate", residual_json(si.conjugate)},
                    {"siu_modified", residual_json(si.modified)},
                    {"factor_two", residual_json(si.factor_two)},
                    {"harmonic_defect", si.harmonic_defect}});
    ok = ok && order_ok(f4) && order_ok(cm) && order_ok(si.original) && order_ok(si.factor_two);
    int id = 0;
    for (const ResidualReport* r : {&f4, &cm, &si.original, &si.conjugate, &si.modified, &si.factor_two})
      t.rows.push_back({static_cast<double>(k), static_cast<double>(id++), r->residual_h, r->residual_half_h,
                        r->order_reported ? r->observed_order : std::numeric_limits<double>::quiet_NaN()});
  }
  b.report["generators"] = list;
  ojson curv = ojson::array();
  bool curv_ok = true;
  for (int n : {2, 3}) {
    const CurvatureProbe c = hermitian_negativity_probe(n, cfg.samples, cfg.seed);
    curv.push_back({{"n", n}, {"samples", c.samples}, {"max", c.max_value}, {"min", c.min_value}, {"sign", c.sign}});
    curv_ok = curv_ok && c.max_value <= 1e-9;
  }
  b.report["curvature"] = curv;
  b.report["checks"] = {{"orders", ok}, {"curvature_sign", curv_ok}};
  b.tables.push_back(std::move(t));
  const fs::path out(cfg.out);
  if (out.extension() == ".json") b.report_name = out.filename().string();
  return b;
}

std::vector<std::pair<double, double>> read_psi_table(const std::string& path) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw UsageError("psi table rows need r,psi", line);
    try {
      out.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      if (out.empty()) continue;  // header
      throw UsageError("psi table row is not numeric", line);
    }
  }
  return out;
}

ReportBundle calculus_check(const RunConfig& cfg) {
  CalculusReport r;
  if (!cfg.psi_table.empty()) {
    const auto table = read_psi_table(cfg.psi_table);
    r = calculus_weight_check(table, cfg.c);
  } else {
    const int kind = cfg.psi == "constant" ? 0 : (cfg.psi == "linear" ? 1 : 2);
    r = calculus_weight_check(reference_weight(kind, cfg.c), cfg.c);
  }
  ReportBundle b;
  b.report["command"] = to_string(cfg.command);
  b.report["seed"] = cfg.seed;
  b.report["psi"] = cfg.psi_table.empty() ? cfg.psi : cfg.psi_table;
  b.report["c"] = cfg.c;
  b.report["lhs"] = r.lhs;
  b.report["rhs"] = r.rhs;
  b.report["residual"] = r.residual;
  b.report["shells"] = r.shells;
  b.report["tolerance"] = r.tolerance;
  b.report["checks"] = {{"inequality", r.ok}};
  return b;
}

}  // namespace

MetricTree default_tree() {
  return MetricTree({"c", "a", "b", "d", "e"}, {{0, 1, 1.0}, {0, 2, 1.5}, {0, 3, 0.7}, {3, 4, 1.2}});
}

SpaceDescriptor space_from_config(const RunConfig& cfg) {
  if (cfg.target == "h2") return HyperbolicPlane{};
  if (cfg.target == "tree")
    return cfg.tree_file.empty() ? default_tree() : MetricTree::from_json(read_text_file(cfg.tree_file));
  if (cfg.command == Command::space_check) {
    if (cfg.target == "spd") return SpdManifold(cfg.dim);
    return EuclideanSpace(cfg.dim);
  }
  const IsometryDescriptor iso = twist_from_config(cfg);
  return space_of(iso);
}

IsometryDescriptor twist_from_config(const RunConfig& cfg) {
  const ojson j = twist_json(cfg);
  if (cfg.target == "h2") {
    const Matrix m = matrix_from_json(j);
    if (m.rows() != 2 || m.cols() != 2) throw UsageError("h2 twist must be a 2x2 matrix", j.dump());
    return MobiusMap(Eigen::Matrix2d(m));
  }
  if (cfg.target == "spd") return SpdIsometry(matrix_from_json(j));
  if (cfg.target == "euclidean") {
    if (!j.is_object() || !j.contains("rotation") || !j.contains("shift"))
      throw UsageError("euclidean twist needs {\"rotation\", \"shift\"}", j.dump());
    const Matrix r = matrix_from_json(j.at("rotation"));
    Vector s(static_cast<Eigen::Index>(j.at("shift").size()));
    for (std::size_t i = 0; i < j.at("shift").size(); ++i) s(static_cast<Eigen::Index>(i)) = j.at("shift")[i].get<double>();
    return EuclideanMotion(r, s);
  }
  MetricTree tree = cfg.tree_file.empty() ? default_tree() : MetricTree::from_json(read_text_file(cfg.tree_file));
  std::vector<int> perm;
  if (j.is_array() && !j.empty() && j.front().is_number_integer()) {
    for (const auto& v : j) perm.push_back(v.get<int>());
  } else {
    for (int v = 0; v < tree.vertex_count(); ++v) perm.push_back(v);
  }
  return TreeAutomorphism(std::move(tree), std::move(perm));
}

ReportBundle run_command(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::space_check: return space_check(cfg);
    case Command::isometry_analyze: return isometry_analyze(cfg);
    case Command::solve_cylinder:
      return with_target(cfg, [&](const auto& space, const auto& twist, const auto& loop) {
        return solve_bundle(space, twist, loop, cfg);
      });
    case Command::uniqueness:
      return with_target(cfg, [&](const auto& space, const auto& twist, const auto& loop) {
        return uniqueness_bundle(space, twist, loop, cfg);
      });
    case Command::bochner_verify: return bochner_verify(cfg);
    case Command::calculus_check: return calculus_check(cfg);
  }
  throw UsageError("unknown command", to_string(cfg.command));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const InvalidPoint*>(&e)) return kExitUsage;
  if (dynamic_cast<const UnsupportedSpace*>(&e)) return kExitUsage;
  if (dynamic_cast<const IoError*>(&e)) return kExitUsage;
  return kExitNumerical;
}

int execute(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ReportBundle b = run_command(cfg);
    bool pass = true;
    for (const auto& [name, v] : b.report["checks"].items()) pass = pass && v.get<bool>();
    b.pass = pass;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::path dir(cfg.out);
    if (dir.extension() == ".json") dir = dir.parent_path().empty() ? fs::path(".") : dir.parent_path();
    const RunManifest m = emit_reports(b, dir, config_to_json(cfg), secs);
    std::cout << to_string(cfg.command) << ": " << (pass ? "pass" : "FAIL") << " (" << m.hashes.size()
              << " artifacts in " << dir.string() << ")\n";
    return pass ? kExitPass : kExitFail;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace npch
