#include "fips/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace fips {

std::int64_t to_ppb(double rel) { return std::llround(rel * static_cast<double>(kPpbOne)); }

double from_ppb(std::int64_t ppb) { return static_cast<double>(ppb) / static_cast<double>(kPpbOne); }

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DanglingLink: return "DanglingLink";
    case ErrorCode::MissingHistogram: return "MissingHistogram";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::InvalidHistogram: return "InvalidHistogram";
    case ErrorCode::InvalidLink: return "InvalidLink";
    case ErrorCode::InvalidStream: return "InvalidStream";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotEthernet: return "NotEthernet";
    case ErrorCode::UnreachableReliability: return "UnreachableReliability";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

DelayHistogram::DelayHistogram(std::vector<Bin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw Error(ErrorCode::InvalidHistogram, "no bins");
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    const Bin& b = bins_[i];
    if (b.low < 0 || b.low >= b.up)
      throw Error(ErrorCode::InvalidHistogram, "bin " + std::to_string(i) + " has low >= up");
    if (i + 1 < bins_.size() && b.up != bins_[i + 1].low)
      throw Error(ErrorCode::InvalidHistogram, "bins " + std::to_string(i) + " and " +
                                                   std::to_string(i + 1) + " are not contiguous");
    total_ += b.count;
  }
  if (total_ == 0) throw Error(ErrorCode::InvalidHistogram, "zero total mass");
}

const char* to_string(NodeRole role) {
  switch (role) {
    case NodeRole::EndStation: return "end-station";
    case NodeRole::Bridge: return "bridge";
    case NodeRole::DsTt: return "ds-tt";
    case NodeRole::NwTt: return "nw-tt";
  }
  return "bridge";
}

NodeRole node_role_from_string(const std::string& s) {
  if (s == "end-station") return NodeRole::EndStation;
  if (s == "bridge") return NodeRole::Bridge;
  if (s == "ds-tt") return NodeRole::DsTt;
  if (s == "nw-tt") return NodeRole::NwTt;
  throw Error(ErrorCode::Parse, "unknown node role '" + s + "'");
}

int NetworkGraph::node_index(const std::string& id) const {
  auto it = node_ids_.find(id);
  return it == node_ids_.end() ? -1 : it->second;
}

int NetworkGraph::link_index(int src, int dst) const {
  auto it = link_ids_.find({src, dst});
  return it == link_ids_.end() ? -1 : it->second;
}

const DelayHistogram& NetworkGraph::histogram_of(const Link& link) const {
  return histograms.at(static_cast<std::size_t>(link.histogram));
}

std::string NetworkGraph::port_name(int link) const {
  const Link& l = links.at(static_cast<std::size_t>(link));
  return "[" + nodes[l.src].id + "," + nodes[l.dst].id + "]";
}

std::vector<int> NetworkGraph::out_links(int node) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].src == node) out.push_back(static_cast<int>(i));
  return out;
}

NetworkGraph build_network(const NetworkSpec& spec) {
  NetworkGraph g;
  g.queues_per_port = spec.queues_per_port;
  if (spec.queues_per_port < 1 || spec.queues_per_port > 8)
    throw Error(ErrorCode::InvalidLink, "queues_per_port must be in [1, 8]");
  for (const Node& n : spec.nodes) {
    if (!g.node_ids_.emplace(n.id, static_cast<int>(g.nodes.size())).second)
      throw Error(ErrorCode::DuplicateNodeId, n.id);
    g.nodes.push_back(n);
  }
  std::map<std::string, int> hist_ids;
  for (const auto& [name, h] : spec.histograms) {
    hist_ids[name] = static_cast<int>(g.histograms.size());
    g.histogram_names.push_back(name);
    g.histograms.push_back(h);
  }
  for (const auto& ls : spec.links) {
    Link l;
    l.src = g.node_index(ls.src);
    l.dst = g.node_index(ls.dst);
    if (l.src < 0 || l.dst < 0)
      throw Error(ErrorCode::DanglingLink, ls.src + " -> " + ls.dst);
    if (l.src == l.dst) throw Error(ErrorCode::InvalidLink, "self loop at " + ls.src);
    l.kind = ls.kind;
    if (l.kind == LinkKind::Ethernet) {
      if (ls.rate_bps <= 0) throw Error(ErrorCode::InvalidLink, ls.src + " -> " + ls.dst + ": rate must be > 0");
      if (ls.prop < 0 || ls.proc < 0)
        throw Error(ErrorCode::InvalidLink, ls.src + " -> " + ls.dst + ": negative delay");
      l.rate_bps = ls.rate_bps;
      l.prop = ls.prop;
      l.proc = ls.proc;
    } else {
      auto it = hist_ids.find(ls.histogram);
      if (it == hist_ids.end()) throw Error(ErrorCode::MissingHistogram, ls.histogram);
      l.histogram = it->second;
    }
    if (!g.link_ids_.emplace(std::make_pair(l.src, l.dst), static_cast<int>(g.links.size())).second)
      throw Error(ErrorCode::InvalidLink, "duplicate link " + ls.src + " -> " + ls.dst);
    g.links.push_back(l);
  }
  return g;
}

NetworkSpec to_spec(const NetworkGraph& g) {
  NetworkSpec spec;
  spec.nodes = g.nodes;
  spec.queues_per_port = g.queues_per_port;
  for (std::size_t i = 0; i < g.histograms.size(); ++i) spec.histograms[g.histogram_names[i]] = g.histograms[i];
  for (const Link& l : g.links) {
    NetworkSpec::LinkSpec ls;
    ls.src = g.nodes[l.src].id;
    ls.dst = g.nodes[l.dst].id;
    ls.kind = l.kind;
    ls.rate_bps = l.rate_bps;
    ls.prop = l.prop;
    ls.proc = l.proc;
    if (l.is_wireless()) ls.histogram = g.histogram_names[l.histogram];
    spec.links.push_back(ls);
  }
  return spec;
}

int Stream::wireless_hop(const NetworkGraph& g) const {
  for (int k = 0; k < hops(); ++k)
    if (g.links[ports[k]].is_wireless()) return k;
  return -1;
}

int Stream::hop_of_port(int port) const {
  for (int k = 0; k < hops(); ++k)
    if (ports[k] == port) return k;
  return -1;
}

Stream resolve_stream(const NetworkGraph& g, const StreamSpec& spec) {
  auto bad = [&](const std::string& why) { return Error(ErrorCode::InvalidStream, spec.id + ": " + why); };
  Stream s;
  s.id = spec.id;
  if (spec.path.size() < 2) throw bad("path needs at least two nodes");
  std::set<int> seen;
  for (const auto& name : spec.path) {
    int n = g.node_index(name);
    if (n < 0) throw bad("unknown node " + name);
    if (!seen.insert(n).second) throw bad("path is not simple");
    s.path.push_back(n);
  }
  for (std::size_t k = 1; k + 1 < s.path.size(); ++k)
    if (g.nodes[s.path[k]].role == NodeRole::EndStation) throw bad("end station inside path");
  int wireless = 0;
  for (std::size_t k = 0; k + 1 < s.path.size(); ++k) {
    int l = g.link_index(s.path[k], s.path[k + 1]);
    if (l < 0) throw bad("no link " + spec.path[k] + " -> " + spec.path[k + 1]);
    if (g.links[l].is_wireless()) {
      ++wireless;
      if (k == 0 || k + 2 == s.path.size()) throw bad("wireless link at path end");
    }
    s.ports.push_back(l);
  }
  if (wireless > 1) throw bad("more than one wireless link");
  if (spec.period <= 0) throw bad("period must be > 0");
  if (spec.phase < 0 || spec.phase >= spec.period) throw bad("phase outside [0, period)");
  if (spec.size_bytes < 64 || spec.size_bytes > 1522) throw bad("size outside [64, 1522]");
  if (spec.latency_bound < 0 || spec.jitter_bound < 0) throw bad("negative bound");
  if (spec.rel_ppb <= 0 || spec.rel_ppb > kPpbOne) throw bad("reliability outside (0, 1]");
  if (spec.priority < 0 || spec.priority > 7) throw bad("priority outside [0, 7]");
  s.period = spec.period;
  s.phase = spec.phase;
  s.size_bytes = spec.size_bytes;
  s.latency_bound = spec.latency_bound;
  s.jitter_bound = spec.jitter_bound;
  s.rel_ppb = spec.rel_ppb;
  s.priority = spec.priority;
  return s;
}

StreamSpec to_spec(const NetworkGraph& g, const Stream& s) {
  StreamSpec spec;
  spec.id = s.id;
  for (int n : s.path) spec.path.push_back(g.nodes[n].id);
  spec.period = s.period;
  spec.phase = s.phase;
  spec.size_bytes = s.size_bytes;
  spec.latency_bound = s.latency_bound;
  spec.jitter_bound = s.jitter_bound;
  spec.rel_ppb = s.rel_ppb;
  spec.priority = s.priority;
  return spec;
}

std::vector<Stream> resolve_streams(const NetworkGraph& g, const std::vector<StreamSpec>& specs) {
  std::vector<Stream> out;
  std::set<std::string> ids;
  for (const auto& sp : specs) {
    if (!ids.insert(sp.id).second) throw Error(ErrorCode::InvalidStream, "duplicate stream id " + sp.id);
    out.push_back(resolve_stream(g, sp));
  }
  return out;
}

TimeNs hypercycle_of_periods(const std::vector<TimeNs>& periods) {
  if (periods.empty()) throw Error(ErrorCode::InvalidStream, "hypercycle of an empty stream set");
  constexpr TimeNs kLimit = TimeNs{1} << 62;
  TimeNs h = 1;
  for (TimeNs p : periods) {
    if (p <= 0) throw Error(ErrorCode::InvalidStream, "period must be > 0");
    TimeNs step = p / std::gcd(h, p);
    if (h > kLimit / step) throw Error(ErrorCode::Overflow, "hypercycle exceeds 2^62 ns");
    h *= step;
  }
  return h;
}

TimeNs hypercycle(const std::vector<Stream>& streams) {
  std::vector<TimeNs> periods;
  for (const auto& s : streams) periods.push_back(s.period);
  return hypercycle_of_periods(periods);
}

std::vector<FrameInstance> expand_frames(const Stream& stream, int stream_index, TimeNs H) {
  std::vector<FrameInstance> out;
  const TimeNs n = H / stream.period;
  out.reserve(static_cast<std::size_t>(n));
  for (TimeNs i = 0; i < n; ++i)
    out.push_back({stream_index, static_cast<int>(i), stream.phase + i * stream.period});
  return out;
}

TimeNs serialization(const Link& link, int size_bytes) {
  if (link.kind != LinkKind::Ethernet) return 0;
  const __int128 bits = static_cast<__int128>(size_bytes) * 8 * 1'000'000'000;
  return static_cast<TimeNs>((bits + link.rate_bps - 1) / link.rate_bps);
}

Interval ethernet_delay(const Link& link, int size_bytes) {
  if (link.kind != LinkKind::Ethernet) throw Error(ErrorCode::NotEthernet, "ethernet_delay on a wireless link");
  const TimeNs d = serialization(link, size_bytes) + link.prop + link.proc;
  return {d, d};
}

}  // namespace fips
