#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fips {

using TimeNs = std::int64_t;

// Dropped frames carry this instead of a finite time.
inline constexpr TimeNs kInf = std::numeric_limits<TimeNs>::max();

inline constexpr bool is_inf(TimeNs t) { return t == kInf; }

inline constexpr TimeNs kUs = 1000;
inline constexpr TimeNs kMs = 1000 * kUs;

// Reliabilities are fixed-point parts per billion.
inline constexpr std::int64_t kPpbOne = 1'000'000'000;

std::int64_t to_ppb(double rel);
double from_ppb(std::int64_t ppb);

enum class ErrorCode {
  DanglingLink,
  MissingHistogram,
  DuplicateNodeId,
  InvalidHistogram,
  InvalidLink,
  InvalidStream,
  Overflow,
  NotEthernet,
  UnreachableReliability,
  NoPath,
  ConfigMismatch,
  Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Interval {
  TimeNs lo = 0;
  TimeNs hi = 0;

  TimeNs width() const { return hi - lo; }
  bool contains(TimeNs t) const { return lo <= t && t <= hi; }
  bool operator==(const Interval&) const = default;
};

struct Bin {
  TimeNs low = 0;
  TimeNs up = 0;
  std::uint64_t count = 0;

  bool operator==(const Bin&) const = default;
};

// Contiguous sorted bins with integer counts; the normalized mass of a bin
// is count / total().
class DelayHistogram {
 public:
  DelayHistogram() = default;
  explicit DelayHistogram(std::vector<Bin> bins);

  const std::vector<Bin>& bins() const { return bins_; }
  std::uint64_t total() const { return total_; }
  TimeNs min() const { return bins_.front().low; }
  TimeNs max() const { return bins_.back().up; }
  bool empty() const { return bins_.empty(); }

  bool operator==(const DelayHistogram&) const = default;

 private:
  std::vector<Bin> bins_;
  std::uint64_t total_ = 0;
};

enum class NodeRole { EndStation, Bridge, DsTt, NwTt };

const char* to_string(NodeRole role);
NodeRole node_role_from_string(const std::string& s);

struct Node {
  std::string id;
  NodeRole role = NodeRole::Bridge;

  bool operator==(const Node&) const = default;
};

enum class LinkKind { Ethernet, Wireless };

struct Link {
  int src = -1;
  int dst = -1;
  LinkKind kind = LinkKind::Ethernet;
  std::int64_t rate_bps = 0;
  TimeNs prop = 0;
  TimeNs proc = 0;
  int histogram = -1;  // index into NetworkGraph::histograms

  bool is_wireless() const { return kind == LinkKind::Wireless; }
  bool operator==(const Link&) const = default;
};

// Unresolved description, as read from a network file.
struct NetworkSpec {
  struct LinkSpec {
    std::string src;
    std::string dst;
    LinkKind kind = LinkKind::Ethernet;
    std::int64_t rate_bps = 0;
    TimeNs prop = 0;
    TimeNs proc = 0;
    std::string histogram;

    bool operator==(const LinkSpec&) const = default;
  };

  std::vector<Node> nodes;
  std::vector<LinkSpec> links;
  std::map<std::string, DelayHistogram> histograms;
  int queues_per_port = 1;

  bool operator==(const NetworkSpec&) const = default;
};

class NetworkGraph {
 public:
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<std::string> histogram_names;
  std::vector<DelayHistogram> histograms;
  int queues_per_port = 1;

  int node_index(const std::string& id) const;  // -1 if absent
  int link_index(int src, int dst) const;       // -1 if absent
  const DelayHistogram& histogram_of(const Link& link) const;
  std::string port_name(int link) const;
  std::vector<int> out_links(int node) const;

 private:
  friend NetworkGraph build_network(const NetworkSpec& spec);
  std::map<std::string, int> node_ids_;
  std::map<std::pair<int, int>, int> link_ids_;
};

NetworkGraph build_network(const NetworkSpec& spec);
NetworkSpec to_spec(const NetworkGraph& g);

struct StreamSpec {
  std::string id;
  std::vector<std::string> path;
  TimeNs period = 0;
  TimeNs phase = 0;
  int size_bytes = 0;
  TimeNs latency_bound = 0;
  TimeNs jitter_bound = 0;
  std::int64_t rel_ppb = kPpbOne;
  int priority = 0;

  bool operator==(const StreamSpec&) const = default;
};

struct Stream {
  std::string id;
  std::vector<int> path;   // node indices, talker first
  std::vector<int> ports;  // link indices, ports[k] = [path[k], path[k+1]]
  TimeNs period = 0;
  TimeNs phase = 0;
  int size_bytes = 0;
  TimeNs latency_bound = 0;
  TimeNs jitter_bound = 0;
  std::int64_t rel_ppb = kPpbOne;
  int priority = 0;

  int hops() const { return static_cast<int>(ports.size()); }
  // Hop index of the Wireless link, or -1 for wired streams.
  int wireless_hop(const NetworkGraph& g) const;
  int hop_of_port(int port) const;
};

Stream resolve_stream(const NetworkGraph& g, const StreamSpec& spec);
StreamSpec to_spec(const NetworkGraph& g, const Stream& s);
std::vector<Stream> resolve_streams(const NetworkGraph& g, const std::vector<StreamSpec>& specs);

struct FrameInstance {
  int stream = -1;
  int index = 0;
  TimeNs release = 0;
};

TimeNs hypercycle(const std::vector<Stream>& streams);
TimeNs hypercycle_of_periods(const std::vector<TimeNs>& periods);
std::vector<FrameInstance> expand_frames(const Stream& stream, int stream_index, TimeNs H);

TimeNs serialization(const Link& link, int size_bytes);
Interval ethernet_delay(const Link& link, int size_bytes);

}  // namespace fips
