#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fips/baselines.hpp"
#include "fips/harness.hpp"
#include "fips/io.hpp"
#include "fips/sim.hpp"

namespace {

using namespace fips;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kRejected = 2;
constexpr int kViolations = 3;
constexpr int kUsage = 64;

struct Inputs {
  std::string network;
  std::string streams;
  std::string config;
};

struct Loaded {
  NetworkGraph graph;
  std::vector<Stream> streams;
};

Loaded load_inputs(const Inputs& in) {
  Loaded l{load_network(in.network), {}};
  l.streams = resolve_streams(l.graph, load_streams(in.streams));
  return l;
}

int cmd_schedule(const Inputs& in, const std::string& mode_name, const std::string& out) {
  Loaded l = load_inputs(in);
  const Mode mode = mode_from_string(mode_name);
  ScheduleResult r = schedule_any(l.graph, l.streams, mode);
  write_json_file(out, to_json(r.config, l.graph));
  std::cout << dump(to_json(r, l.graph));
  return r.rejected.empty() ? kOk : kRejected;
}

int cmd_simulate(const Inputs& in, const SimOptions& opt, const std::string& trace_out, const std::string& report) {
  Loaded l = load_inputs(in);
  const TsnConfiguration cfg = configuration_from_json(read_json_file(in.config), l.graph);
  SimOptions o = opt;
  o.keep_trace = !trace_out.empty();
  SimResult r = run_hypercycles(cfg, l.graph, l.streams, o);
  write_json_file(report, to_json(r.qos));
  if (o.keep_trace) write_json_file(trace_out, to_json(r.trace, l.streams));
  return kOk;
}

int cmd_verify(const Inputs& in, int samples, int cycles, std::uint64_t seed, bool clip, const std::string& trace_path) {
  Loaded l = load_inputs(in);
  const TsnConfiguration cfg = configuration_from_json(read_json_file(in.config), l.graph);
  std::vector<Violation> found;
  auto check = [&](const Trace& t) {
    for (Violation& v : validate_trace(t, cfg, l.graph, l.streams)) found.push_back(std::move(v));
    if (!clip) return;
    for (const PacketRecord& p : t.packets)
      if (p.drop == DropEvent::PsfpDrop)
        found.push_back({"Robustness", -1, l.streams[p.stream].id, p.instance, p.cycle,
                         "policing drop with delays inside their budgets"});
  };

  if (!trace_path.empty()) {
    check(trace_from_json(read_json_file(trace_path), l.streams));
  } else {
    for (int i = 0; i < samples; ++i) {
      SimOptions o;
      o.n_cycles = cycles;
      o.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
      o.clip_to_pdb = clip;
      o.keep_trace = true;
      check(run_hypercycles(cfg, l.graph, l.streams, o).trace);
    }
  }
  if (found.empty()) {
    std::cout << "no violations\n";
    return kOk;
  }
  std::cout << dump(to_json(found, l.graph));
  return kViolations;
}

void print_reliability(const ReliabilityReport& r) {
  std::printf("%-5s %9s %9s %12s %14s %14s\n", "mode", "accepted", "critical", "reliability", "latency_min", "latency_max");
  for (const ModeResult& m : r.modes) {
    const StreamQos& c = m.critical;
    std::printf("%-5s %9zu %6d/%-2d %12.6f %11.3f ms %11.3f ms\n", to_string(m.mode), m.accepted.size(),
                m.critical_accepted, m.critical_total, c.reliability(),
                c.latency_min == kInf ? 0.0 : static_cast<double>(c.latency_min) / kMs,
                static_cast<double>(c.latency_max) / kMs);
  }
}

void print_scalability(const ScalabilityReport& r) {
  std::printf("%-12s %-10s %10s %10s\n", "reliability", "jitter_us", "fips", "sti");
  for (const ScalabilityPoint& p : r.points)
    std::printf("%-12g %-10lld %10.1f %10.1f\n", p.point.reliability, static_cast<long long>(p.point.jitter / kUs),
                p.fips_mean(), p.sti_mean());
}

int cmd_bench(const std::string& which, const std::string& spec_path, const std::string& out) {
  const ScenarioSpec spec = scenario_from_json(read_json_file(spec_path));
  if (which == "reliability") {
    ReliabilityReport r = exp_reliability(spec);
    write_json_file(out, to_json(r));
    print_reliability(r);
  } else {
    ScalabilityReport r = exp_scalability(spec);
    write_json_file(out, to_json(r));
    print_scalability(r);
  }
  return kOk;
}

struct GenerateArgs {
  std::string scenario = "reliability";
  int replication = 0;
  std::string network;
  std::string streams;
  std::string spec;
};

int cmd_generate(const GenerateArgs& a) {
  const ScenarioSpec spec = a.scenario == "reliability" ? reliability_scenario() : scalability_scenario();
  const NetworkGraph g = gen_agv_topology(spec.topology);
  if (!a.network.empty()) write_json_file(a.network, to_json(to_spec(g)));
  if (!a.streams.empty()) {
    const GridPoint* point = spec.grid.empty() ? nullptr : &spec.grid.front();
    write_json_file(a.streams, to_json(gen_stream_set(g, spec, derive_seed(spec.seed, a.replication), point)));
  }
  if (!a.spec.empty()) write_json_file(a.spec, to_json(spec));
  return kOk;
}

void add_inputs(CLI::App* cmd, Inputs& in, bool with_config) {
  cmd->add_option("--network", in.network, "network file")->required();
  cmd->add_option("--streams", in.streams, "streams file")->required();
  if (with_config) cmd->add_option("--config", in.config, "configuration file")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust 802.1Qbv scheduling for 5G-TSN networks"};
  app.require_subcommand(1);

  Inputs in;
  std::string mode = "fips";
  std::string out;
  std::uint64_t seed = 0;

  auto* sched = app.add_subcommand("schedule", "compute a TSN configuration");
  add_inputs(sched, in, false);
  sched->add_option("--mode", mode, "fips, sti, med or max")->check(CLI::IsMember({"fips", "sti", "med", "max"}));
  sched->add_option("--out", out, "configuration output file")->required();
  sched->add_option("--seed", seed, "accepted for symmetry; scheduling is deterministic");

  SimOptions sim;
  std::string trace_out;
  std::string report;
  auto* simulate = app.add_subcommand("simulate", "simulate hypercycles of a configuration");
  add_inputs(simulate, in, true);
  simulate->add_option("--cycles", sim.n_cycles, "number of hypercycles")->required()->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim.seed, "random seed")->required();
  simulate->add_flag("--clip-to-pdb", sim.clip_to_pdb, "draw 5G delays only inside the budgets");
  simulate->add_option("--trace-out", trace_out, "execution trace output file");
  simulate->add_option("--report", report, "QoS report output file")->required();

  int samples = 1000;
  int cycles = 2;
  bool clip = false;
  std::string trace_path;
  auto* verify = app.add_subcommand("verify", "check execution traces against the formal constraints");
  add_inputs(verify, in, true);
  auto* samples_opt = verify->add_option("--samples", samples, "simulated runs")->check(CLI::NonNegativeNumber);
  verify->add_option("--cycles", cycles, "hypercycles per run")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "master seed");
  verify->add_flag("--clip-to-pdb", clip, "draw 5G delays inside the budgets and treat policing drops as violations");
  verify->add_option("--trace", trace_path, "validate this trace file instead of simulating")->excludes(samples_opt);

  std::string spec_path;
  auto* bench = app.add_subcommand("bench", "run an experiment");
  bench->require_subcommand(1);
  for (const char* name : {"reliability", "scalability"}) {
    auto* b = bench->add_subcommand(name, std::string(name) + " experiment");
    b->add_option("--spec", spec_path, "scenario file")->required();
    b->add_option("--out", out, "report output file")->required();
  }

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write the AGV network, a stream set and a scenario file");
  generate->add_option("scenario", gen.scenario, "reliability or scalability")
      ->check(CLI::IsMember({"reliability", "scalability"}));
  generate->add_option("--replication", gen.replication, "stream set of this replication")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--network", gen.network, "network output file");
  generate->add_option("--streams", gen.streams, "streams output file");
  generate->add_option("--spec", gen.spec, "scenario output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sched) return cmd_schedule(in, mode, out);
    if (*simulate) return cmd_simulate(in, sim, trace_out, report);
    if (*verify) return cmd_verify(in, samples, cycles, seed, clip, trace_path);
    if (*generate) return cmd_generate(gen);
    for (auto* b : bench->get_subcommands())
      if (*b) return cmd_bench(b->get_name(), spec_path, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kUsage;
}
