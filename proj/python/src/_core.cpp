#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "npch/acceptance.hpp"
#include "npch/app.hpp"
#include "npch/calculus.hpp"
#include "npch/isometry.hpp"
#include "npch/npc_core.hpp"
#include "npch/spd.hpp"

namespace py = pybind11;
using namespace npch;

namespace {

SpaceDescriptor make_space(const std::string& name, int dim) {
  if (name == "euclidean") return EuclideanSpace(dim);
  if (name == "h2") return HyperbolicPlane{};
  if (name == "spd") return SpdManifold(dim);
  if (name == "tree") return default_tree();
  throw UsageError("unknown space", name);
}

py::dict comparison(const ComparisonReport& r) {
  py::dict d;
  d["residual"] = r.residual;
  d["samples"] = r.samples;
  d["worst_t"] = r.worst_t;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "NPC geometry toolkit";
  m.attr("__version__") = kToolkitVersion;

  static py::exception<Error> base(m, "NpchError", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<InvalidPoint>(m, "InvalidPoint", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<UnsupportedSpace>(m, "UnsupportedSpace", base.ptr());
  py::register_exception<FitError>(m, "FitError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("spd_distance", &spd_distance, py::arg("p"), py::arg("q"));
  m.def("spd_geodesic", &spd_geodesic, py::arg("p"), py::arg("q"), py::arg("t"));
  m.def("group_action", &group_action, py::arg("g"), py::arg("p"));
  m.def("sym_eig", [](const Matrix& s) {
    const SymEig e = sym_eig(s);
    return py::make_tuple(Vector(e.values), Matrix(e.rotation));
  });

  m.def("npc_check", [](const std::string& space, int samples, std::uint64_t seed, int dim) {
    return comparison(check_npc_inequality(make_space(space, dim), samples, seed));
  }, py::arg("space"), py::arg("samples") = 1000, py::arg("seed") = 1, py::arg("dim") = 2);
  m.def("cat_check", [](const std::string& space, double kappa, int samples, std::uint64_t seed) {
    return comparison(check_cat_kappa(make_space(space, 2), kappa, samples, seed));
  }, py::arg("space"), py::arg("kappa") = 1.0, py::arg("samples") = 1000, py::arg("seed") = 1);

  m.def("translation_length", &translation_length_lower_bound, py::arg("g"));
  m.def("classify", [](const Matrix& g) { return to_string(classify_isometry(SpdIsometry(g))); }, py::arg("g"));
  m.def("decay_fit", [](const Matrix& g, double tmin, double tmax, int steps) {
    const RaySeries s = decay_ray(spd_decay_ray(g), tmin, tmax, steps);
    py::dict d;
    d["delta"] = s.fit.delta;
    d["a"] = s.fit.a;
    d["b"] = s.fit.b;
    d["r_squared"] = s.fit.r_squared;
    d["t"] = s.t;
    d["displacement"] = s.displacement;
    return d;
  }, py::arg("g"), py::arg("tmin") = 5.0, py::arg("tmax") = 40.0, py::arg("steps") = 400);

  m.def("calculus_check", [](int kind, double c) {
    const CalculusReport r = calculus_weight_check(reference_weight(kind, c), c);
    py::dict d;
    d["lhs"] = r.lhs;
    d["rhs"] = r.rhs;
    d["residual"] = r.residual;
    d["ok"] = r.ok;
    return d;
  }, py::arg("kind"), py::arg("c") = 1.0);

  // Whole commands; the report is returned as JSON text.
  m.def("run_report", [](const std::vector<std::string>& args) {
    const RunConfig cfg = parse_config(args);
    py::gil_scoped_release release;
    const ReportBundle b = run_command(cfg);
    return std::make_pair(b.report.dump(), b.pass);
  }, py::arg("args"));
  m.def("acceptance", [](int id, std::uint64_t seed) {
    CriterionResult r;
    {
      py::gil_scoped_release release;
      AcceptanceSuite suite(seed);
      r = suite.run(id);
    }
    return py::make_tuple(r.pass, r.title, r.detail.dump());
  }, py::arg("criterion"), py::arg("seed") = 20240611);
}
