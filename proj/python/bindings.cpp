// JSON-in, JSON-out bindings: every document crosses the boundary as a
// string in the same format the CLI reads and writes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fips/baselines.hpp"
#include "fips/harness.hpp"
#include "fips/io.hpp"
#include "fips/pdb.hpp"
#include "fips/sim.hpp"

namespace py = pybind11;
using namespace fips;

namespace {

PyObject* fips_error = nullptr;

struct Inputs {
  NetworkGraph graph;
  std::vector<Stream> streams;
};

Inputs load(const std::string& network, const std::string& streams, const std::string& base_dir) {
  Inputs in{build_network(network_from_json(Json::parse(network), base_dir)), {}};
  in.streams = resolve_streams(in.graph, streams_from_json(Json::parse(streams)));
  return in;
}

py::tuple allocate(const std::vector<std::tuple<TimeNs, TimeNs, std::uint64_t>>& bins, double rel) {
  std::vector<Bin> b;
  for (const auto& [low, up, count] : bins) b.push_back({low, up, count});
  const Pdb p = allocate_pdb(DelayHistogram(std::move(b)), to_ppb(rel));
  return py::make_tuple(p.dmin(), p.dmax(), p.mass_num, p.mass_den);
}

std::string schedule_json(const std::string& network, const std::string& streams, const std::string& mode,
                          const std::string& base_dir) {
  const Inputs in = load(network, streams, base_dir);
  ScheduleResult r;
  {
    py::gil_scoped_release release;
    r = schedule_any(in.graph, in.streams, mode_from_string(mode));
  }
  Json out = to_json(r, in.graph);
  out["config"] = to_json(r.config, in.graph);
  return out.dump();
}

std::string simulate_json(const std::string& network, const std::string& streams, const std::string& config,
                          int cycles, std::uint64_t seed, bool clip, bool trace, const std::string& base_dir) {
  const Inputs in = load(network, streams, base_dir);
  const TsnConfiguration cfg = configuration_from_json(Json::parse(config), in.graph);
  SimOptions opt;
  opt.n_cycles = cycles;
  opt.seed = seed;
  opt.clip_to_pdb = clip;
  opt.keep_trace = trace;
  SimResult r;
  {
    py::gil_scoped_release release;
    r = run_hypercycles(cfg, in.graph, in.streams, opt);
  }
  Json out = Json::object();
  out["report"] = to_json(r.qos);
  if (trace) out["trace"] = to_json(r.trace, in.streams);
  return out.dump();
}

std::string verify_json(const std::string& network, const std::string& streams, const std::string& config,
                        const std::string& trace, const std::string& base_dir) {
  const Inputs in = load(network, streams, base_dir);
  const TsnConfiguration cfg = configuration_from_json(Json::parse(config), in.graph);
  const Trace t = trace_from_json(Json::parse(trace), in.streams);
  return to_json(validate_trace(t, cfg, in.graph, in.streams), in.graph).dump();
}

py::tuple generate_json(const std::string& scenario, int replication) {
  const ScenarioSpec spec = scenario == "scalability" ? scalability_scenario() : reliability_scenario();
  if (scenario != "reliability" && scenario != "scalability")
    throw Error(ErrorCode::Parse, "unknown scenario '" + scenario + "'");
  const NetworkGraph g = gen_agv_topology(spec.topology);
  const GridPoint* point = spec.grid.empty() ? nullptr : &spec.grid.front();
  const auto streams = gen_stream_set(g, spec, derive_seed(spec.seed, static_cast<std::uint64_t>(replication)), point);
  return py::make_tuple(to_json(to_spec(g)).dump(), to_json(streams).dump());
}

}  // namespace

PYBIND11_MODULE(_fips, m) {
  m.doc() = "Robust 802.1Qbv scheduling for 5G-TSN networks";

  // Messages start with the error code name, e.g. "Parse: ...".
  fips_error = py::register_exception<Error>(m, "FipsError", PyExc_ValueError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Json::exception& e) {
      PyErr_SetString(fips_error, (std::string("Parse: ") + e.what()).c_str());
    }
  });

  m.attr("FORMAT_VERSION") = kFormatVersion;
  m.def("measured_histogram", [] { return to_json(measured_histogram()).dump(); });
  m.def("allocate_pdb", &allocate, py::arg("bins"), py::arg("rel"));
  m.def("schedule", &schedule_json, py::arg("network"), py::arg("streams"), py::arg("mode"), py::arg("base_dir"));
  m.def("simulate", &simulate_json, py::arg("network"), py::arg("streams"), py::arg("config"), py::arg("cycles"),
        py::arg("seed"), py::arg("clip"), py::arg("trace"), py::arg("base_dir"));
  m.def("verify", &verify_json, py::arg("network"), py::arg("streams"), py::arg("config"), py::arg("trace"),
        py::arg("base_dir"));
  m.def("generate", &generate_json, py::arg("scenario"), py::arg("replication"));
}
