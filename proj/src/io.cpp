#include "fips/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fips {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw Error(ErrorCode::Parse, where + ": " + why);
}

// Strict view of a JSON object: every field must be consumed.
class Obj {
 public:
  Obj(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) fail(where_, "expected an object");
  }

  const Json& at(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) fail(where_, "missing field '" + key + "'");
    used_.insert(key);
    return *it;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key) {
    const Json& v = at(key);
    return convert<T>(v, where_ + "." + key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  // Time or null for infinity.
  TimeNs time(const std::string& key) {
    const Json& v = at(key);
    if (v.is_null()) return kInf;
    return convert<TimeNs>(v, where_ + "." + key);
  }

  void version() {
    const Json& v = at("format_version");
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
      fail(where_, "unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(where_, "unknown field '" + it.key() + "'");
  }

  const std::string& where() const { return where_; }

  template <typename T>
  static T convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(where, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(where, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(where, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
    }
    try {
      return v.get<T>();
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

const Json& array_at(Obj& o, const std::string& key) {
  const Json& v = o.at(key);
  if (!v.is_array()) fail(o.where() + "." + key, "expected an array");
  return v;
}

Json time_json(TimeNs t) { return is_inf(t) ? Json(nullptr) : Json(t); }

Json versioned() {
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  return j;
}

Json interval_json(const Interval& iv) { return Json::array({time_json(iv.lo), time_json(iv.hi)}); }

Interval interval_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected [lo, hi]");
  auto t = [&](const Json& v) { return v.is_null() ? kInf : Obj::convert<TimeNs>(v, where); };
  return {t(j[0]), t(j[1])};
}

std::pair<std::string, std::string> port_ids(const NetworkGraph& g, int link) {
  const Link& l = g.links.at(static_cast<std::size_t>(link));
  return {g.nodes[l.src].id, g.nodes[l.dst].id};
}

int port_from(const NetworkGraph& g, Obj& o) {
  const auto src = o.get<std::string>("src");
  const auto dst = o.get<std::string>("dst");
  const int s = g.node_index(src);
  const int d = g.node_index(dst);
  const int l = (s < 0 || d < 0) ? -1 : g.link_index(s, d);
  if (l < 0) throw Error(ErrorCode::ConfigMismatch, o.where() + ": no link " + src + " -> " + dst);
  return l;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Parse, "cannot write " + path);
  out << dump(j);
  if (!out) throw Error(ErrorCode::Parse, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// histograms and networks

Json to_json(const DelayHistogram& h) {
  Json j = versioned();
  Json bins = Json::array();
  for (const Bin& b : h.bins()) bins.push_back(Json::array({b.low, b.up, b.count}));
  j["bins"] = bins;
  j["total"] = h.total();
  return j;
}

DelayHistogram histogram_from_json(const Json& j, const std::string& where) {
  Obj o(j, where);
  if (o.has("format_version")) o.version();
  const Json& arr = array_at(o, "bins");
  std::vector<Bin> bins;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string w = where + ".bins[" + std::to_string(i) + "]";
    const Json& b = arr[i];
    if (!b.is_array() || b.size() != 3) fail(w, "expected [low_ns, up_ns, count]");
    bins.push_back({Obj::convert<TimeNs>(b[0], w), Obj::convert<TimeNs>(b[1], w),
                    Obj::convert<std::uint64_t>(b[2], w)});
  }
  const auto total = o.get<std::uint64_t>("total");
  o.finish();
  DelayHistogram h(std::move(bins));
  if (h.total() != total) throw Error(ErrorCode::InvalidHistogram, where + ": total does not match the bin counts");
  return h;
}

Json to_json(const NetworkSpec& n) {
  Json j = versioned();
  Json nodes = Json::array();
  for (const Node& x : n.nodes) nodes.push_back({{"id", x.id}, {"role", to_string(x.role)}});
  j["nodes"] = nodes;
  Json links = Json::array();
  for (const auto& l : n.links) {
    Json x = {{"src", l.src}, {"dst", l.dst}};
    if (l.kind == LinkKind::Ethernet) {
      x["kind"] = "ethernet";
      x["rate_bps"] = l.rate_bps;
      x["prop_ns"] = l.prop;
      x["proc_ns"] = l.proc;
    } else {
      x["kind"] = "wireless";
      x["histogram"] = l.histogram;
    }
    links.push_back(x);
  }
  j["links"] = links;
  Json hs = Json::object();
  for (const auto& [name, h] : n.histograms) {
    Json hj = to_json(h);
    hj.erase("format_version");
    hs[name] = hj;
  }
  j["histograms"] = hs;
  j["queues_per_port"] = n.queues_per_port;
  return j;
}

NetworkSpec network_from_json(const Json& j, const std::string& base_dir) {
  Obj o(j, "network");
  o.version();
  NetworkSpec n;
  const Json& nodes = array_at(o, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Obj x(nodes[i], "network.nodes[" + std::to_string(i) + "]");
    Node node;
    node.id = x.get<std::string>("id");
    node.role = node_role_from_string(x.get<std::string>("role"));
    x.finish();
    n.nodes.push_back(node);
  }
  const Json& links = array_at(o, "links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    Obj x(links[i], "network.links[" + std::to_string(i) + "]");
    NetworkSpec::LinkSpec l;
    l.src = x.get<std::string>("src");
    l.dst = x.get<std::string>("dst");
    const auto kind = x.get<std::string>("kind");
    if (kind == "ethernet") {
      l.kind = LinkKind::Ethernet;
      l.rate_bps = x.get<std::int64_t>("rate_bps");
      l.prop = x.get<TimeNs>("prop_ns");
      l.proc = x.get_or<TimeNs>("proc_ns", 0);
    } else if (kind == "wireless") {
      l.kind = LinkKind::Wireless;
      l.histogram = x.get<std::string>("histogram");
    } else {
      fail(x.where() + ".kind", "expected 'ethernet' or 'wireless'");
    }
    x.finish();
    n.links.push_back(l);
  }
  if (o.has("histograms")) {
    const Json& hs = o.at("histograms");
    if (!hs.is_object()) fail("network.histograms", "expected an object");
    for (auto it = hs.begin(); it != hs.end(); ++it) {
      const std::string where = "network.histograms." + it.key();
      if (it->is_string()) {
        std::filesystem::path p(it->get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        n.histograms[it.key()] = histogram_from_json(read_json_file(p.string()), p.string());
      } else {
        n.histograms[it.key()] = histogram_from_json(*it, where);
      }
    }
  }
  n.queues_per_port = o.get_or<int>("queues_per_port", 1);
  o.finish();
  return n;
}

NetworkGraph load_network(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path().string();
  return build_network(network_from_json(read_json_file(path), dir.empty() ? "." : dir));
}

// ---------------------------------------------------------------------------
// streams

Json to_json(const std::vector<StreamSpec>& streams) {
  Json j = versioned();
  Json arr = Json::array();
  for (const auto& s : streams)
    arr.push_back({{"id", s.id},
                   {"path", s.path},
                   {"period_ns", s.period},
                   {"phase_ns", s.phase},
                   {"size_bytes", s.size_bytes},
                   {"latency_ns", s.latency_bound},
                   {"jitter_ns", s.jitter_bound},
                   {"reliability", from_ppb(s.rel_ppb)},
                   {"priority", s.priority}});
  j["streams"] = arr;
  return j;
}

std::vector<StreamSpec> streams_from_json(const Json& j) {
  Obj o(j, "streams");
  o.version();
  const Json& arr = array_at(o, "streams");
  std::vector<StreamSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Obj x(arr[i], "streams[" + std::to_string(i) + "]");
    StreamSpec s;
    s.id = x.get<std::string>("id");
    const Json& path = array_at(x, "path");
    for (std::size_t k = 0; k < path.size(); ++k)
      s.path.push_back(Obj::convert<std::string>(path[k], x.where() + ".path"));
    s.period = x.get<TimeNs>("period_ns");
    s.phase = x.get_or<TimeNs>("phase_ns", 0);
    s.size_bytes = x.get<int>("size_bytes");
    s.latency_bound = x.get<TimeNs>("latency_ns");
    s.jitter_bound = x.get<TimeNs>("jitter_ns");
    const double rel = x.get_or<double>("reliability", 1.0);
    if (!(rel > 0.0 && rel <= 1.0)) fail(x.where() + ".reliability", "must be in (0, 1]");
    s.rel_ppb = to_ppb(rel);
    s.priority = x.get_or<int>("priority", 0);
    x.finish();
    out.push_back(std::move(s));
  }
  o.finish();
  return out;
}

std::vector<StreamSpec> load_streams(const std::string& path) { return streams_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// configurations

Json to_json(const TsnConfiguration& c, const NetworkGraph& g) {
  Json j = versioned();
  j["mode"] = to_string(c.mode);
  j["hypercycle_ns"] = c.hypercycle;
  j["policing"] = c.policing;
  j["accepted"] = c.accepted;
  Json gcl = Json::array();
  for (const auto& p : c.gcl) {
    const auto [src, dst] = port_ids(g, p.link);
    Json w = Json::array();
    for (const auto& x : p.windows) w.push_back(Json::array({x.open, x.close}));
    gcl.push_back({{"src", src}, {"dst", dst}, {"windows", w}});
  }
  j["gcl"] = gcl;
  Json frames = Json::array();
  for (const auto& f : c.frames) {
    Json hops = Json::array();
    for (const auto& h : f.hops) {
      const auto [src, dst] = port_ids(g, h.link);
      hops.push_back({{"src", src},
                      {"dst", dst},
                      {"batch", h.batch},
                      {"smin", h.smin},
                      {"smax", h.smax},
                      {"window", Json::array({h.window.open, h.window.close})},
                      {"pdb", {{"interval", interval_json(h.pdb.interval)},
                               {"mass_num", h.pdb.mass_num},
                               {"mass_den", h.pdb.mass_den}}},
                      {"psfp", interval_json(h.psfp)}});
    }
    frames.push_back({{"stream", f.stream}, {"instance", f.instance}, {"release_ns", f.release}, {"hops", hops}});
  }
  j["frames"] = frames;
  return j;
}

TsnConfiguration configuration_from_json(const Json& j, const NetworkGraph& g) {
  Obj o(j, "config");
  o.version();
  TsnConfiguration c;
  c.mode = mode_from_string(o.get<std::string>("mode"));
  c.hypercycle = o.get<TimeNs>("hypercycle_ns");
  c.policing = o.get<bool>("policing");
  const Json& acc = array_at(o, "accepted");
  for (const auto& a : acc) c.accepted.push_back(Obj::convert<std::string>(a, "config.accepted"));
  const Json& gcl = array_at(o, "gcl");
  for (std::size_t i = 0; i < gcl.size(); ++i) {
    Obj x(gcl[i], "config.gcl[" + std::to_string(i) + "]");
    PortGcl p;
    p.link = port_from(g, x);
    for (const auto& w : array_at(x, "windows")) {
      const Interval iv = interval_from(w, x.where() + ".windows");
      p.windows.push_back({iv.lo, iv.hi});
    }
    x.finish();
    c.gcl.push_back(std::move(p));
  }
  const Json& frames = array_at(o, "frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Obj x(frames[i], "config.frames[" + std::to_string(i) + "]");
    FrameConfig f;
    f.stream = x.get<std::string>("stream");
    f.instance = x.get<int>("instance");
    f.release = x.get<TimeNs>("release_ns");
    const Json& hops = array_at(x, "hops");
    for (std::size_t k = 0; k < hops.size(); ++k) {
      Obj h(hops[k], x.where() + ".hops[" + std::to_string(k) + "]");
      HopConfig hc;
      hc.link = port_from(g, h);
      hc.batch = h.get<int>("batch");
      hc.smin = h.get<TimeNs>("smin");
      hc.smax = h.get<TimeNs>("smax");
      const Interval w = interval_from(h.at("window"), h.where() + ".window");
      hc.window = {w.lo, w.hi};
      Obj pdb(h.at("pdb"), h.where() + ".pdb");
      hc.pdb.interval = interval_from(pdb.at("interval"), pdb.where() + ".interval");
      hc.pdb.mass_num = pdb.get<std::uint64_t>("mass_num");
      hc.pdb.mass_den = pdb.get<std::uint64_t>("mass_den");
      pdb.finish();
      hc.psfp = interval_from(h.at("psfp"), h.where() + ".psfp");
      h.finish();
      f.hops.push_back(hc);
    }
    x.finish();
    c.frames.push_back(std::move(f));
  }
  o.finish();
  std::sort(c.accepted.begin(), c.accepted.end());
  std::sort(c.gcl.begin(), c.gcl.end(), [](const PortGcl& a, const PortGcl& b) { return a.link < b.link; });
  std::sort(c.frames.begin(), c.frames.end(), [](const FrameConfig& a, const FrameConfig& b) {
    return std::tie(a.stream, a.instance) < std::tie(b.stream, b.instance);
  });
  return c;
}

Json to_json(const ScheduleResult& r, const NetworkGraph&) {
  Json j = versioned();
  j["mode"] = to_string(r.config.mode);
  j["hypercycle_ns"] = r.config.hypercycle;
  j["accepted"] = r.accepted;
  Json rej = Json::array();
  for (const auto& x : r.rejected) rej.push_back({{"stream", x.stream}, {"reason", x.reason}});
  j["rejected"] = rej;
  return j;
}

// ---------------------------------------------------------------------------
// QoS reports and traces

namespace {

Json stream_qos_json(const StreamQos& s) {
  return {{"id", s.id},
          {"released", s.released},
          {"counted", s.counted},
          {"delivered", s.delivered},
          {"on_time", s.on_time},
          {"arrived", s.arrived},
          {"psfp_drops", s.psfp_drops},
          {"transit_drops", s.transit_drops},
          {"in_flight", s.in_flight},
          {"excluded", s.excluded},
          {"latency_min_ns", time_json(s.latency_min)},
          {"latency_max_ns", s.latency_max},
          {"delivered_min_ns", time_json(s.delivered_min)},
          {"delivered_max_ns", s.delivered_max},
          {"reliability", s.reliability()},
          {"on_time_fraction", s.on_time_fraction()},
          {"jitter_ns", s.jitter()}};
}

StreamQos stream_qos_from(const Json& j, const std::string& where) {
  Obj o(j, where);
  StreamQos s;
  s.id = o.get<std::string>("id");
  s.released = o.get<std::uint64_t>("released");
  s.counted = o.get<std::uint64_t>("counted");
  s.delivered = o.get<std::uint64_t>("delivered");
  s.on_time = o.get<std::uint64_t>("on_time");
  s.arrived = o.get<std::uint64_t>("arrived");
  s.psfp_drops = o.get<std::uint64_t>("psfp_drops");
  s.transit_drops = o.get<std::uint64_t>("transit_drops");
  s.in_flight = o.get<std::uint64_t>("in_flight");
  s.excluded = o.get<std::uint64_t>("excluded");
  s.latency_min = o.time("latency_min_ns");
  s.latency_max = o.get<TimeNs>("latency_max_ns");
  s.delivered_min = o.time("delivered_min_ns");
  s.delivered_max = o.get<TimeNs>("delivered_max_ns");
  // derived fields
  o.at("reliability");
  o.at("on_time_fraction");
  o.at("jitter_ns");
  o.finish();
  return s;
}

}  // namespace

Json to_json(const QosReport& q) {
  Json j = versioned();
  j["mode"] = to_string(q.mode);
  j["cycles"] = q.cycles;
  j["seeds"] = q.seeds;
  j["in_flight_rule"] = "frames in flight at the horizon are excluded only if released in the final hypercycle";
  Json arr = Json::array();
  for (const auto& s : q.streams) arr.push_back(stream_qos_json(s));
  j["streams"] = arr;
  return j;
}

QosReport qos_from_json(const Json& j) {
  Obj o(j, "report");
  o.version();
  QosReport q;
  q.mode = mode_from_string(o.get<std::string>("mode"));
  q.cycles = o.get<std::uint64_t>("cycles");
  for (const auto& s : array_at(o, "seeds")) q.seeds.push_back(Obj::convert<std::uint64_t>(s, "report.seeds"));
  o.at("in_flight_rule");
  const Json& arr = array_at(o, "streams");
  for (std::size_t i = 0; i < arr.size(); ++i)
    q.streams.push_back(stream_qos_from(arr[i], "report.streams[" + std::to_string(i) + "]"));
  o.finish();
  return q;
}

namespace {

DropEvent drop_from_string(const std::string& s, const std::string& where) {
  for (DropEvent d : {DropEvent::None, DropEvent::TransitDrop, DropEvent::PsfpDrop, DropEvent::NeverSent})
    if (s == to_string(d)) return d;
  fail(where, "unknown drop event '" + s + "'");
}

}  // namespace

Json to_json(const Trace& t, const std::vector<Stream>& streams) {
  Json j = versioned();
  j["mode"] = to_string(t.mode);
  j["policing"] = t.policing;
  j["hypercycle_ns"] = t.hypercycle;
  j["cycles"] = t.n_cycles;
  j["seed"] = t.seed;
  Json arr = Json::array();
  for (const auto& p : t.packets) {
    Json hops = Json::array();
    for (const auto& h : p.hops)
      hops.push_back({{"arrival", time_json(h.arrival)},
                      {"T", time_json(h.T)},
                      {"D", time_json(h.D)},
                      {"eD", time_json(h.eD)},
                      {"reached", h.reached}});
    arr.push_back({{"stream", streams.at(static_cast<std::size_t>(p.stream)).id},
                   {"instance", p.instance},
                   {"cycle", p.cycle},
                   {"release_ns", p.release},
                   {"listener_window", interval_json(p.listener_window)},
                   {"drop", to_string(p.drop)},
                   {"drop_node", p.drop_node},
                   {"arrived", p.arrived},
                   {"in_flight", p.in_flight},
                   {"hops", hops}});
  }
  j["packets"] = arr;
  return j;
}

Trace trace_from_json(const Json& j, const std::vector<Stream>& streams) {
  Obj o(j, "trace");
  o.version();
  Trace t;
  t.mode = mode_from_string(o.get<std::string>("mode"));
  t.policing = o.get<bool>("policing");
  t.hypercycle = o.get<TimeNs>("hypercycle_ns");
  t.n_cycles = o.get<int>("cycles");
  t.seed = o.get<std::uint64_t>("seed");
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < streams.size(); ++i) index[streams[i].id] = static_cast<int>(i);
  const Json& arr = array_at(o, "packets");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Obj x(arr[i], "trace.packets[" + std::to_string(i) + "]");
    PacketRecord p;
    const auto id = x.get<std::string>("stream");
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorCode::ConfigMismatch, x.where() + ": unknown stream " + id);
    p.stream = it->second;
    p.instance = x.get<int>("instance");
    p.cycle = x.get<int>("cycle");
    p.release = x.get<TimeNs>("release_ns");
    p.listener_window = interval_from(x.at("listener_window"), x.where() + ".listener_window");
    p.drop = drop_from_string(x.get<std::string>("drop"), x.where() + ".drop");
    p.drop_node = x.get<int>("drop_node");
    p.arrived = x.get<bool>("arrived");
    p.in_flight = x.get<bool>("in_flight");
    const Json& hops = array_at(x, "hops");
    for (std::size_t k = 0; k < hops.size(); ++k) {
      Obj h(hops[k], x.where() + ".hops[" + std::to_string(k) + "]");
      HopRecord r;
      r.arrival = h.time("arrival");
      r.T = h.time("T");
      r.D = h.time("D");
      r.eD = h.time("eD");
      r.reached = h.get<bool>("reached");
      h.finish();
      p.hops.push_back(r);
    }
    x.finish();
    t.packets.push_back(std::move(p));
  }
  o.finish();
  return t;
}

Json to_json(const std::vector<Violation>& v, const NetworkGraph& g) {
  Json j = versioned();
  Json arr = Json::array();
  for (const auto& x : v) {
    Json e = {{"constraint", x.constraint}};
    e["port"] = x.port >= 0 ? Json(g.port_name(x.port)) : Json(nullptr);
    e["stream"] = x.stream;
    e["instance"] = x.instance;
    e["cycle"] = x.cycle;
    e["detail"] = x.detail;
    arr.push_back(e);
  }
  j["violations"] = arr;
  return j;
}

// ---------------------------------------------------------------------------
// scenarios and experiment reports

Json to_json(const ScenarioSpec& s) {
  Json j = versioned();
  j["topology"] = {{"agv_end_stations", s.topology.agv_end_stations},
                   {"backbone_depth", s.topology.backbone_depth},
                   {"end_stations_per_leaf", s.topology.end_stations_per_leaf},
                   {"rate_bps", s.topology.rate_bps},
                   {"prop_ns", s.topology.prop},
                   {"proc_ns", s.topology.proc}};
  Json groups = Json::array();
  for (const auto& g : s.groups)
    groups.push_back({{"name", g.name},
                      {"kind", to_string(g.kind)},
                      {"count", g.count},
                      {"period_ns", g.period},
                      {"size_bytes", g.size_bytes},
                      {"latency_ns", g.latency},
                      {"jitter_ns", g.jitter},
                      {"reliability", g.reliability},
                      {"on_grid", g.on_grid},
                      {"critical", g.critical}});
  j["groups"] = groups;
  Json grid = Json::array();
  for (const auto& p : s.grid) grid.push_back({{"reliability", p.reliability}, {"jitter_ns", p.jitter}});
  j["grid"] = grid;
  j["seed"] = s.seed;
  j["replications"] = s.replications;
  j["cycles"] = s.n_cycles;
  return j;
}

ScenarioSpec scenario_from_json(const Json& j) {
  Obj o(j, "scenario");
  o.version();
  ScenarioSpec s;
  if (o.has("topology")) {
    Obj t(o.at("topology"), "scenario.topology");
    s.topology.agv_end_stations = t.get_or<int>("agv_end_stations", s.topology.agv_end_stations);
    s.topology.backbone_depth = t.get_or<int>("backbone_depth", s.topology.backbone_depth);
    s.topology.end_stations_per_leaf = t.get_or<int>("end_stations_per_leaf", s.topology.end_stations_per_leaf);
    s.topology.rate_bps = t.get_or<std::int64_t>("rate_bps", s.topology.rate_bps);
    s.topology.prop = t.get_or<TimeNs>("prop_ns", s.topology.prop);
    s.topology.proc = t.get_or<TimeNs>("proc_ns", s.topology.proc);
    t.finish();
  }
  const Json& groups = array_at(o, "groups");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    Obj x(groups[i], "scenario.groups[" + std::to_string(i) + "]");
    StreamGroup g;
    g.name = x.get<std::string>("name");
    g.kind = group_kind_from_string(x.get<std::string>("kind"));
    g.count = x.get<int>("count");
    if (g.count < 0) fail(x.where() + ".count", "must be >= 0");
    g.period = x.get_or<TimeNs>("period_ns", g.period);
    g.size_bytes = x.get_or<int>("size_bytes", g.size_bytes);
    g.latency = x.get_or<TimeNs>("latency_ns", g.latency);
    g.jitter = x.get_or<TimeNs>("jitter_ns", g.jitter);
    g.reliability = x.get_or<double>("reliability", g.reliability);
    g.on_grid = x.get_or<bool>("on_grid", false);
    g.critical = x.get_or<bool>("critical", false);
    x.finish();
    s.groups.push_back(g);
  }
  if (o.has("grid")) {
    const Json& grid = array_at(o, "grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Obj x(grid[i], "scenario.grid[" + std::to_string(i) + "]");
      GridPoint p;
      p.reliability = x.get<double>("reliability");
      p.jitter = x.get<TimeNs>("jitter_ns");
      x.finish();
      s.grid.push_back(p);
    }
  }
  s.seed = o.get_or<std::uint64_t>("seed", s.seed);
  s.replications = o.get_or<int>("replications", s.replications);
  s.n_cycles = o.get_or<int>("cycles", s.n_cycles);
  o.finish();
  return s;
}

Json to_json(const ReliabilityReport& r) {
  Json j = versioned();
  j["experiment"] = "reliability";
  j["spec"] = to_json(r.spec);
  j["stream_seed"] = r.stream_seed;
  Json modes = Json::array();
  for (const auto& m : r.modes) {
    Json rej = Json::array();
    for (const auto& x : m.rejected) rej.push_back({{"stream", x.stream}, {"reason", x.reason}});
    modes.push_back({{"mode", to_string(m.mode)},
                     {"accepted", m.accepted.size()},
                     {"rejected", rej},
                     {"critical_accepted", m.critical_accepted},
                     {"critical_total", m.critical_total},
                     {"critical", stream_qos_json(m.critical)},
                     {"qos", to_json(m.qos)}});
  }
  j["modes"] = modes;
  return j;
}

Json to_json(const ScalabilityReport& r) {
  Json j = versioned();
  j["experiment"] = "scalability";
  j["spec"] = to_json(r.spec);
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back({{"reliability", p.point.reliability},
                   {"jitter_ns", p.point.jitter},
                   {"fips", p.fips},
                   {"sti", p.sti},
                   {"fips_mean", p.fips_mean()},
                   {"sti_mean", p.sti_mean()}});
  j["points"] = pts;
  return j;
}

}  // namespace fips
