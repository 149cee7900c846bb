#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fips/model.hpp"
#include "fips/pdb.hpp"

namespace fips {

enum class Mode { Fips, Sti, Med, Max };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& s);

struct GclWindow {
  TimeNs open = 0;
  TimeNs close = 0;

  bool operator==(const GclWindow&) const = default;
};

struct PortGcl {
  int link = -1;
  std::vector<GclWindow> windows;  // one per batch, sorted by open

  bool operator==(const PortGcl&) const = default;
};

struct HopConfig {
  int link = -1;
  int batch = -1;
  TimeNs smin = 0;
  TimeNs smax = 0;
  GclWindow window;    // gate window of this frame's batch
  Pdb pdb;             // the frame's own budget on this link
  Interval psfp;       // arrival window at the link's receiving node

  bool operator==(const HopConfig&) const = default;
};

struct FrameConfig {
  std::string stream;
  int instance = 0;
  TimeNs release = 0;
  std::vector<HopConfig> hops;

  bool operator==(const FrameConfig&) const = default;
};

struct TsnConfiguration {
  Mode mode = Mode::Fips;
  TimeNs hypercycle = 0;
  bool policing = true;
  std::vector<std::string> accepted;  // sorted
  std::vector<PortGcl> gcl;           // sorted by link
  std::vector<FrameConfig> frames;    // sorted by (stream, instance)

  const FrameConfig* find_frame(const std::string& stream, int instance) const;
  const PortGcl* find_port(int link) const;
  bool operator==(const TsnConfiguration&) const = default;
};

// Scheduler state shared by the incremental steps.
struct SchedContext {
  const NetworkGraph* net = nullptr;
  TimeNs H = 0;
  std::vector<Stream> streams;
  std::vector<std::vector<Pdb>> pdbs;           // [stream][hop]
  std::vector<FrameInstance> frames;            // all frames seen so far
  std::vector<std::vector<int>> stream_frames;  // [stream] -> frame ids

  SchedContext(const NetworkGraph& g, TimeNs hyper) : net(&g), H(hyper) {}
  int add_stream(const Stream& s, std::vector<Pdb> hop_pdbs);
  const Stream& stream_of(int frame) const { return streams[frames[frame].stream]; }
  const Pdb& pdb(int frame, int hop) const { return pdbs[frames[frame].stream][hop]; }
};

// Batch start times are local to the port's gate cycle; a member's own
// window opens at S + shift * H.
struct Member {
  int frame = -1;
  int shift = 0;

  bool operator==(const Member&) const = default;
};

using Batch = std::vector<Member>;

struct Ordering {
  std::vector<std::vector<Batch>> ports;  // [link][batch], sorted by local start on Ethernet

  explicit Ordering(std::size_t links = 0) : ports(links) {}
  // Index of the batch holding `frame` at `link`, or -1.
  int batch_of(int link, int frame) const;
  const Member* member(int link, int frame) const;
  bool operator==(const Ordering&) const = default;
};

enum class DeriveStatus { Ok, CyclicDependency, HorizonExceeded, WrapOverlap };

const char* to_string(DeriveStatus s);

struct Derivation {
  DeriveStatus status = DeriveStatus::Ok;
  std::string detail;
  std::vector<std::vector<TimeNs>> S;       // [link][batch]
  std::vector<std::vector<Interval>> bpdb;  // [link][batch]
  std::vector<std::vector<int>> hop_batch;  // [frame][hop], -1 if unscheduled
  std::vector<std::vector<int>> hop_shift;  // [frame][hop]

  // Absolute opening of the frame's window at its hop.
  TimeNs start(const SchedContext& ctx, int frame, int hop) const;

  bool ok() const { return status == DeriveStatus::Ok; }
};

TimeNs phi_lower_bound(const SchedContext& ctx, int frame, int hop);

Interval batch_pdb(const SchedContext& ctx, int link, const Batch& batch);

// Sender-side occupancy used by the ordering constraints: the whole batch
// budget on Ethernet, nothing on a frequency-multiplexed wireless link.
TimeNs batch_occupancy(const SchedContext& ctx, int link, const Interval& bpdb);

Ordering insert_frames(const SchedContext& ctx, const Ordering& ordering, const Derivation& previous,
                       int stream);

enum class MergeKind { None, Predecessor, Successor };

const char* to_string(MergeKind k);

struct Candidate {
  MergeKind kind = MergeKind::None;
  Ordering ordering;
};

std::vector<Candidate> merge_candidates(const SchedContext& ctx, const Ordering& inserted, int stream);

Derivation derive_configuration(const SchedContext& ctx, const Ordering& ordering);

// Listener arrival window of a scheduled frame.
Interval listener_window(const SchedContext& ctx, const Derivation& d, int frame);

TsnConfiguration make_configuration(const SchedContext& ctx, const Ordering& ordering, const Derivation& d,
                                    const std::vector<int>& accepted, Mode mode, bool policing);

enum class Verdict { Accepted, ViolatesLatency, ViolatesJitter };

const char* to_string(Verdict v);

Verdict check_feasibility(const TsnConfiguration& config, const Stream& stream);

struct Rejection {
  std::string stream;
  std::string reason;
};

struct ScheduleResult {
  TsnConfiguration config;
  std::vector<std::string> accepted;  // admission order
  std::vector<Rejection> rejected;
};

struct ScheduleOptions {
  Mode mode = Mode::Fips;
  bool merge = true;
  bool policing = true;
  // Retry a rejected candidate with its Ethernet batches reordered by their
  // unobstructed ready times.
  bool reorder_retry = true;
  // Budget for one hop of one stream; defaults to pdb_for_link.
  std::function<Pdb(const NetworkGraph&, int link, const Stream&)> pdb;
};

// Admission order: descending reliability, ascending latency bound, ascending id.
std::vector<int> admission_order(const std::vector<Stream>& streams);

ScheduleResult run_schedule(const NetworkGraph& g, const std::vector<Stream>& streams, const ScheduleOptions& opt);

ScheduleResult schedule(const NetworkGraph& g, const std::vector<Stream>& streams, Mode mode);

}  // namespace fips
