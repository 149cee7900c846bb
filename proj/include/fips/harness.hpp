#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fips/model.hpp"
#include "fips/scheduler.hpp"
#include "fips/sim.hpp"

namespace fips {

// The measured 5G port-to-port delay histogram used on both directions of
// the logical bridge: 99 bins of 103 us from 3.803 ms to 14.0 ms.
DelayHistogram measured_histogram();

struct AgvParams {
  int agv_end_stations = 4;       // spread over the two AGV switches
  int backbone_depth = 3;         // levels of the backbone switch tree
  int end_stations_per_leaf = 2;  // below each backbone leaf switch
  std::int64_t rate_bps = 100'000'000;
  TimeNs prop = 50;
  TimeNs proc = 0;

  bool operator==(const AgvParams&) const = default;
};

// AGV partition (root switch, two switches with a cross-link, end stations)
// and a backbone binary switch tree with a cross-link between the root's
// children, joined by a DS-TT/NW-TT pair. Node ids: L*, R*, DS-TT, NW-TT.
NetworkGraph gen_agv_topology(const AgvParams& p = {});

// Shortest path by hop count; ties broken by link order. Throws NoPath.
std::vector<std::string> shortest_path(const NetworkGraph& g, const std::string& src, const std::string& dst);

enum class GroupKind { WiredAgv, WiredBackbone, Uplink, Downlink };

const char* to_string(GroupKind k);
GroupKind group_kind_from_string(const std::string& s);

struct StreamGroup {
  std::string name;  // stream ids are "<name>-<k>"
  GroupKind kind = GroupKind::Uplink;
  int count = 0;
  TimeNs period = 20 * kMs;
  int size_bytes = 100;
  TimeNs latency = 20 * kMs;
  TimeNs jitter = 100 * kUs;
  double reliability = 0.5;
  bool on_grid = false;      // QoS replaced by the grid point
  bool critical = false;     // reported individually by the reliability experiment

  bool operator==(const StreamGroup&) const = default;
};

struct GridPoint {
  double reliability = 0.9;
  TimeNs jitter = 100 * kUs;

  bool operator==(const GridPoint&) const = default;
};

struct ScenarioSpec {
  AgvParams topology;
  std::vector<StreamGroup> groups;
  std::vector<GridPoint> grid;
  std::uint64_t seed = 1;
  int replications = 1;
  int n_cycles = 10'000;

  bool operator==(const ScenarioSpec&) const = default;
};

ScenarioSpec reliability_scenario();
ScenarioSpec scalability_scenario();

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Endpoints uniformly at random per group, shortest paths, phases uniform in
// whole microseconds. Grid groups take the QoS of `point` when given.
std::vector<StreamSpec> gen_stream_set(const NetworkGraph& g, const ScenarioSpec& spec, std::uint64_t seed,
                                       const GridPoint* point = nullptr);

struct ModeResult {
  Mode mode = Mode::Fips;
  std::vector<std::string> accepted;
  std::vector<Rejection> rejected;
  QosReport qos;
  StreamQos critical;  // pooled over the critical streams
  int critical_accepted = 0;
  int critical_total = 0;
};

struct ReliabilityReport {
  ScenarioSpec spec;
  std::uint64_t stream_seed = 0;
  std::vector<ModeResult> modes;  // fips, med, max
};

ReliabilityReport exp_reliability(const ScenarioSpec& spec, const std::vector<Mode>& modes = {Mode::Fips, Mode::Med,
                                                                                              Mode::Max});

struct ScalabilityPoint {
  GridPoint point;
  std::vector<int> fips;  // accepted wireless streams per replication
  std::vector<int> sti;

  double fips_mean() const;
  double sti_mean() const;
};

struct ScalabilityReport {
  ScenarioSpec spec;
  std::vector<ScalabilityPoint> points;
};

ScalabilityReport exp_scalability(const ScenarioSpec& spec);

}  // namespace fips
