#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fips/model.hpp"
#include "fips/scheduler.hpp"

namespace fips {

using Rng = std::mt19937_64;

// Draws port-to-port delays. Wireless draws pick a bin with probability
// proportional to its count, then a uniform offset inside [low, up).
class DelaySampler {
 public:
  explicit DelaySampler(const NetworkGraph& g);
  TimeNs sample(int link, int size_bytes, Rng& rng) const;

 private:
  const NetworkGraph* g_;
  std::vector<std::vector<std::uint64_t>> prefix_;  // [histogram] cumulative counts
};

TimeNs sample_delay(const NetworkGraph& g, int link, int size_bytes, Rng& rng);

// Periodic gate of an Ethernet port: the union of its batch windows repeated
// every hypercycle, with touching windows merged.
class PortGate {
 public:
  PortGate() = default;
  PortGate(const std::vector<GclWindow>& windows, TimeNs H);

  // Earliest t' >= t with t' inside an open interval [o, c] and t' + need <= c.
  TimeNs next_fit(TimeNs t, TimeNs need) const;
  // Close time of the open interval containing t, or -1.
  TimeNs close_at(TimeNs t) const;
  bool always_open() const { return always_open_; }
  const std::vector<GclWindow>& windows() const { return merged_; }

 private:
  TimeNs H_ = 0;
  bool always_open_ = false;
  std::vector<GclWindow> merged_;  // opens in [0, H), sorted, disjoint modulo H
};

enum class DropEvent { None, TransitDrop, PsfpDrop, NeverSent };

const char* to_string(DropEvent d);

struct HopRecord {
  TimeNs arrival = kInf;  // at the sending node of this hop
  TimeNs T = kInf;
  TimeNs D = kInf;
  TimeNs eD = kInf;
  bool reached = false;   // false: still pending at the horizon

  bool operator==(const HopRecord&) const = default;
};

struct PacketRecord {
  int stream = -1;  // index into the stream list
  int instance = 0;
  int cycle = 0;
  TimeNs release = 0;
  Interval listener_window;
  std::vector<HopRecord> hops;
  DropEvent drop = DropEvent::None;
  int drop_node = -1;
  bool arrived = false;  // reached the listener
  bool in_flight = false;

  TimeNs listener_arrival() const;
  bool operator==(const PacketRecord&) const = default;
};

struct Trace {
  Mode mode = Mode::Fips;
  bool policing = true;
  TimeNs hypercycle = 0;
  int n_cycles = 0;
  std::uint64_t seed = 0;
  std::vector<PacketRecord> packets;  // sorted by (cycle, stream, instance)

  bool operator==(const Trace&) const = default;
};

struct StreamQos {
  std::string id;
  std::uint64_t released = 0;
  std::uint64_t counted = 0;    // denominator of the reliability
  std::uint64_t delivered = 0;  // inside the listener window and the latency bound
  std::uint64_t on_time = 0;    // within the latency bound only
  std::uint64_t arrived = 0;
  std::uint64_t psfp_drops = 0;
  std::uint64_t transit_drops = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t excluded = 0;   // in flight and released in the final cycle
  TimeNs latency_min = kInf;
  TimeNs latency_max = 0;
  TimeNs delivered_min = kInf;
  TimeNs delivered_max = 0;

  double reliability() const;
  double on_time_fraction() const;
  TimeNs jitter() const;  // span of delivered latencies
  void merge(const StreamQos& o);
  bool operator==(const StreamQos&) const = default;
};

struct QosReport {
  Mode mode = Mode::Fips;
  std::uint64_t cycles = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<StreamQos> streams;  // in stream-list order

  const StreamQos* find(const std::string& id) const;
  // Associative: counters add, extrema combine, seeds concatenate.
  void merge(const QosReport& o);
  bool operator==(const QosReport&) const = default;
};

struct SimOptions {
  int n_cycles = 1;
  std::uint64_t seed = 0;
  bool clip_to_pdb = false;
  bool keep_trace = false;
};

struct SimResult {
  Trace trace;  // empty unless keep_trace
  QosReport qos;
};

SimResult run_hypercycles(const TsnConfiguration& config, const NetworkGraph& g, const std::vector<Stream>& streams,
                          const SimOptions& opt);

struct Violation {
  std::string constraint;
  int port = -1;
  std::string stream;
  int instance = -1;
  int cycle = -1;
  std::string detail;
};

std::vector<Violation> validate_trace(const Trace& trace, const TsnConfiguration& config, const NetworkGraph& g,
                                      const std::vector<Stream>& streams);

QosReport measure_qos(const std::vector<Trace>& traces, const std::vector<Stream>& streams);

}  // namespace fips
