#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "app.hpp"
#include "nck/analysis.hpp"
#include "nck/measure.hpp"
#include "nck/testfn.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Tables cross the boundary as {column: list}.
std::map<std::string, std::vector<double>> columns(const nck::Table& T) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& n : T.names()) out[n] = T.col(n);
  return out;
}

std::string run_json(const std::string& config) {
  const auto rc = nck::app::parse_run_config(json::parse(config));
  const auto out = nck::app::execute(rc);
  json j;
  j["manifest"] = out.manifest.to_json();
  j["diagnostics"] = out.diagnostics;
  j["bounds"] = nck::app::bounds_json(out.reports, out.manifest.config_hash);
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_nck, m) {
  m.doc() = "Bindings for the nck solver";
  m.attr("__version__") = nck::app::kCodeVersion;

  py::register_exception<nck::app::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("config_hash", [](const std::string& doc) { return nck::app::config_hash(json::parse(doc)); });
  m.def("functionals",
        [](const std::string& measure, const std::string& phi) {
          return nck::app::functionals_json(nck::measure_from_json(json::parse(measure)), phi).dump();
        },
        py::arg("measure"), py::arg("phi"));
  m.def("constants", [] { return nck::app::constants_json().dump(); });
  m.def("run", &run_json, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("trajectory",
        [](const std::string& config) {
          const auto out = nck::app::execute(nck::app::parse_run_config(json::parse(config)));
          return columns(out.trajectory);
        },
        py::arg("config"));
  m.def("moment",
        [](const std::string& measure, double alpha) {
          return nck::moment(nck::measure_from_json(json::parse(measure)), alpha);
        },
        py::arg("measure"), py::arg("alpha"));
  m.def("phi", [](const std::string& name, double x) { return nck::tf_from_name(name)(x); }, py::arg("name"),
        py::arg("x"));
  m.def("critical_constant_b", &nck::critical_constant_b);
  m.def("decay_threshold", &nck::decay_threshold, py::arg("alpha"));
}
