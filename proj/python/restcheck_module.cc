#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "restcheck/checker.h"
#include "restcheck/cli.h"
#include "restcheck/datagen.h"
#include "restcheck/error.h"
#include "restcheck/executor.h"
#include "restcheck/fixture.h"
#include "restcheck/history.h"
#include "restcheck/student.h"
#include "restcheck/workload.h"

namespace py = pybind11;

namespace restcheck {
namespace {

// `None` selects the built-in student service.
ServiceSpec spec_or_default(const std::optional<std::string>& yaml) {
  return yaml ? parse_service_spec(*yaml) : student_spec();
}

std::vector<std::string> validate(const std::string& yaml) {
  std::vector<std::string> out;
  for (const auto& d : validate_spec(load_service_spec(yaml))) out.push_back(d.text());
  return out;
}

// Objects are returned as JSON text; the Python package decodes them.
std::vector<std::string> generate(const std::string& resource, int count, std::uint64_t seed,
                                  const std::optional<std::string>& spec_yaml) {
  const ServiceSpec spec = spec_or_default(spec_yaml);
  const ResourceSpec* r = spec.find_resource(resource);
  if (!r) throw Error("unknown resource '" + resource + "'");
  Rng rng(seed);
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(generate_object(*r, rng).dump());
  return out;
}

py::dict check_history(const std::string& history_jsonl, const std::optional<std::string>& spec_yaml,
                       std::uint64_t max_states, double timeout_s) {
  const ServiceSpec spec = spec_or_default(spec_yaml);
  const History history = parse_history(history_jsonl);
  CheckLimits limits;
  limits.max_states = max_states;
  limits.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000.0));
  Verdict verdict;
  std::string report;
  {
    py::gil_scoped_release release;
    verdict = check(history, spec, limits);
    report = explain(verdict, history);
  }
  py::dict out;
  out["outcome"] = std::string(to_string(verdict.outcome));
  out["states"] = verdict.states_explored;
  out["elapsed_ms"] = verdict.elapsed.count();
  out["report"] = report;
  out["offender"] = verdict.offender ? py::cast(verdict.offender->op_id) : py::none();
  return out;
}

std::string run(const std::string& workload_yaml, const std::string& target, std::uint64_t seed,
                const std::optional<std::string>& spec_yaml, std::optional<int> clients,
                std::optional<std::int64_t> period_ms, std::optional<std::int64_t> duration_s,
                std::int64_t timeout_ms) {
  const ServiceSpec spec = spec_or_default(spec_yaml);
  Workload workload = parse_workload(workload_yaml, spec);
  if (clients) workload.clients = *clients;
  if (period_ms) workload.period_millis = *period_ms;
  if (duration_s) workload.duration_secs = *duration_s;
  RunConfig config = make_run_config(workload, parse_target(target), seed);
  config.timeout = std::chrono::milliseconds(timeout_ms);
  History history;
  {
    py::gil_scoped_release release;
    history = run_workload(spec, workload, config);
  }
  return serialize_history(history);
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace restcheck

PYBIND11_MODULE(_restcheck, m) {
  using namespace restcheck;
  m.doc() = "Linearizability testing for REST services";

  py::register_exception<Error>(m, "RestcheckError", PyExc_ValueError);

  m.def("student_spec_yaml", &student_spec_yaml, "The built-in student service spec.");
  m.def("student_workload_yaml", &student_workload_yaml, "A workload for the student service.");
  m.def("validate_spec", &validate, py::arg("spec_yaml"),
        "Diagnostics for a spec; empty when valid. Raises on YAML or structure errors.");
  m.def("generate", &generate, py::arg("resource"), py::arg("count") = 1, py::arg("seed") = 0,
        py::arg("spec_yaml") = py::none(), "Generated objects for a resource, as JSON text.");
  m.def("check", &check_history, py::arg("history_jsonl"), py::arg("spec_yaml") = py::none(),
        py::arg("max_states") = CheckLimits{}.max_states, py::arg("timeout_s") = 60.0,
        "Decides whether a JSONL history is linearizable.");
  m.def("render", [](const std::string& history_jsonl) { return render_log(parse_history(history_jsonl)); },
        py::arg("history_jsonl"), "The history in log form.");
  m.def("run", &run, py::arg("workload_yaml"), py::arg("target"), py::arg("seed"),
        py::arg("spec_yaml") = py::none(), py::arg("clients") = py::none(),
        py::arg("period_ms") = py::none(), py::arg("duration_s") = py::none(),
        py::arg("timeout_ms") = 1000, "Drives a workload against a target; returns the JSONL history.");
  m.def("cli", &cli, py::arg("args"), "Runs the command line tool; returns (exit code, stdout, stderr).");

  py::class_<FixtureServer>(m, "FixtureServer")
      .def(py::init([](const std::optional<std::string>& spec_yaml, const std::string& bug, int port,
                       bool allow_reset, std::uint64_t seed) {
             const auto mode = parse_bug_mode(bug);
             if (!mode) throw Error("unknown bug mode '" + bug + "'");
             FixtureOptions options;
             options.port = port;
             options.mode = *mode;
             options.allow_reset = allow_reset;
             options.seed = seed;
             return std::make_unique<FixtureServer>(spec_or_default(spec_yaml), options);
           }),
           py::arg("spec_yaml") = py::none(), py::arg("bug") = "atomic", py::arg("port") = 0,
           py::arg("allow_reset") = false, py::arg("seed") = 1)
      .def("start", &FixtureServer::start)
      .def("stop", &FixtureServer::stop, py::call_guard<py::gil_scoped_release>())
      .def("reset", &FixtureServer::reset)
      .def("object_count", &FixtureServer::object_count, py::arg("resource"))
      .def_property_readonly("port", &FixtureServer::port)
      .def_property_readonly("target", &FixtureServer::target);
}
