#include "fips/sim.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>

namespace fips {

DelaySampler::DelaySampler(const NetworkGraph& g) : g_(&g) {
  for (const auto& h : g.histograms) {
    std::vector<std::uint64_t> cum;
    std::uint64_t acc = 0;
    for (const Bin& b : h.bins()) cum.push_back(acc += b.count);
    prefix_.push_back(std::move(cum));
  }
}

TimeNs DelaySampler::sample(int link, int size_bytes, Rng& rng) const {
  const Link& l = g_->links.at(static_cast<std::size_t>(link));
  if (!l.is_wireless()) return ethernet_delay(l, size_bytes).hi;
  const auto& h = g_->histograms[l.histogram];
  const auto& cum = prefix_[l.histogram];
  const std::uint64_t r = rng() % h.total();
  const auto idx = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
  const Bin& b = h.bins()[idx];
  return b.low + static_cast<TimeNs>(rng() % static_cast<std::uint64_t>(b.up - b.low));
}

TimeNs sample_delay(const NetworkGraph& g, int link, int size_bytes, Rng& rng) {
  return DelaySampler(g).sample(link, size_bytes, rng);
}

namespace {

TimeNs floor_div(TimeNs a, TimeNs b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

}  // namespace

PortGate::PortGate(const std::vector<GclWindow>& windows, TimeNs H) : H_(H) {
  std::vector<GclWindow> w;
  for (const auto& x : windows) {
    const TimeNs o = ((x.open % H) + H) % H;
    const TimeNs len = x.close - x.open;
    if (len >= H) {
      always_open_ = true;
      return;
    }
    w.push_back({o, o + len});
  }
  std::sort(w.begin(), w.end(), [](const GclWindow& a, const GclWindow& b) {
    return std::tie(a.open, a.close) < std::tie(b.open, b.close);
  });
  for (const auto& x : w) {
    if (!merged_.empty() && x.open <= merged_.back().close)
      merged_.back().close = std::max(merged_.back().close, x.close);
    else
      merged_.push_back(x);
  }
  // The last interval may run into the first one of the next hypercycle.
  while (merged_.size() > 1 && merged_.back().close >= merged_.front().open + H) {
    merged_.back().close = std::max(merged_.back().close, merged_.front().close + H);
    merged_.erase(merged_.begin());
  }
  if (!merged_.empty() && merged_.back().close - merged_.back().open >= H) always_open_ = true;
}

TimeNs PortGate::next_fit(TimeNs t, TimeNs need) const {
  if (always_open_) return t;
  if (merged_.empty()) return kInf;
  const TimeNs base = floor_div(t, H_) * H_;
  for (TimeNs k = -1; k <= 2; ++k) {
    for (const auto& w : merged_) {
      const TimeNs o = w.open + base + k * H_;
      const TimeNs c = w.close + base + k * H_;
      const TimeNs start = std::max(o, t);
      if (start + need <= c) return start;
    }
  }
  return kInf;
}

TimeNs PortGate::close_at(TimeNs t) const {
  if (always_open_) return kInf;
  if (merged_.empty()) return -1;
  const TimeNs base = floor_div(t, H_) * H_;
  for (TimeNs k = -1; k <= 0; ++k)
    for (const auto& w : merged_)
      if (w.open + base + k * H_ <= t && t <= w.close + base + k * H_) return w.close + base + k * H_;
  return -1;
}

const char* to_string(DropEvent d) {
  switch (d) {
    case DropEvent::None: return "none";
    case DropEvent::TransitDrop: return "transit_drop";
    case DropEvent::PsfpDrop: return "psfp_drop";
    case DropEvent::NeverSent: return "never_sent";
  }
  return "none";
}

TimeNs PacketRecord::listener_arrival() const {
  if (!arrived || hops.empty()) return kInf;
  return hops.back().T + hops.back().D;
}

double StreamQos::reliability() const {
  return counted == 0 ? 0.0 : static_cast<double>(delivered) / static_cast<double>(counted);
}

double StreamQos::on_time_fraction() const {
  return counted == 0 ? 0.0 : static_cast<double>(on_time) / static_cast<double>(counted);
}

TimeNs StreamQos::jitter() const { return delivered == 0 ? 0 : delivered_max - delivered_min; }

void StreamQos::merge(const StreamQos& o) {
  released += o.released;
  counted += o.counted;
  delivered += o.delivered;
  on_time += o.on_time;
  arrived += o.arrived;
  psfp_drops += o.psfp_drops;
  transit_drops += o.transit_drops;
  in_flight += o.in_flight;
  excluded += o.excluded;
  latency_min = std::min(latency_min, o.latency_min);
  latency_max = std::max(latency_max, o.latency_max);
  delivered_min = std::min(delivered_min, o.delivered_min);
  delivered_max = std::max(delivered_max, o.delivered_max);
}

const StreamQos* QosReport::find(const std::string& id) const {
  for (const auto& s : streams)
    if (s.id == id) return &s;
  return nullptr;
}

void QosReport::merge(const QosReport& o) {
  if (streams.empty()) {
    mode = o.mode;
    for (const auto& s : o.streams) streams.push_back(StreamQos{s.id});
  }
  if (streams.size() != o.streams.size()) throw Error(ErrorCode::ConfigMismatch, "merging reports of different stream sets");
  cycles += o.cycles;
  seeds.insert(seeds.end(), o.seeds.begin(), o.seeds.end());
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].id != o.streams[i].id) throw Error(ErrorCode::ConfigMismatch, "stream order differs");
    streams[i].merge(o.streams[i]);
  }
}

namespace {

void accumulate(StreamQos& q, const PacketRecord& p, const Stream& s, int n_cycles) {
  ++q.released;
  if (p.in_flight) {
    ++q.in_flight;
    if (p.cycle == n_cycles - 1) {
      ++q.excluded;
      return;
    }
    ++q.counted;
    return;
  }
  ++q.counted;
  if (p.drop == DropEvent::PsfpDrop) ++q.psfp_drops;
  if (p.drop == DropEvent::TransitDrop) ++q.transit_drops;
  if (!p.arrived) return;
  ++q.arrived;
  const TimeNs a = p.listener_arrival();
  const TimeNs lat = a - p.release;
  q.latency_min = std::min(q.latency_min, lat);
  q.latency_max = std::max(q.latency_max, lat);
  if (lat > s.latency_bound) return;
  ++q.on_time;
  if (!p.listener_window.contains(a)) return;
  ++q.delivered;
  q.delivered_min = std::min(q.delivered_min, lat);
  q.delivered_max = std::max(q.delivered_max, lat);
}

struct BoundFrame {
  int stream = -1;  // index into streams
  const FrameConfig* cfg = nullptr;
};

std::vector<BoundFrame> bind_frames(const TsnConfiguration& config, const std::vector<Stream>& streams) {
  std::unordered_map<std::string, int> by_id;
  for (std::size_t i = 0; i < streams.size(); ++i) by_id[streams[i].id] = static_cast<int>(i);
  std::vector<BoundFrame> out;
  for (const auto& fc : config.frames) {
    auto it = by_id.find(fc.stream);
    if (it == by_id.end()) throw Error(ErrorCode::ConfigMismatch, "configuration names unknown stream " + fc.stream);
    const Stream& s = streams[it->second];
    if (static_cast<int>(fc.hops.size()) != s.hops())
      throw Error(ErrorCode::ConfigMismatch, "hop count differs for " + fc.stream);
    for (int h = 0; h < s.hops(); ++h)
      if (fc.hops[h].link != s.ports[h]) throw Error(ErrorCode::ConfigMismatch, "path differs for " + fc.stream);
    out.push_back({it->second, &fc});
  }
  return out;
}

std::vector<PortGate> build_gates(const TsnConfiguration& config, const NetworkGraph& g) {
  std::vector<PortGate> gates(g.links.size());
  for (const auto& p : config.gcl) {
    if (p.link < 0 || static_cast<std::size_t>(p.link) >= g.links.size())
      throw Error(ErrorCode::ConfigMismatch, "gate list for unknown port");
    if (config.hypercycle > 0) gates[p.link] = PortGate(p.windows, config.hypercycle);
  }
  return gates;
}

enum class EventType { Release = 0, Arrival = 1, Service = 2 };

struct Event {
  TimeNs time;
  int type;
  int node;
  int port;
  std::uint64_t packet;
  int hop;

  auto key() const { return std::tie(time, type, node, port, packet, hop); }
  bool operator>(const Event& o) const { return key() > o.key(); }
};

class Simulator {
 public:
  Simulator(const TsnConfiguration& config, const NetworkGraph& g, const std::vector<Stream>& streams,
            const SimOptions& opt)
      : cfg_(config), g_(g), streams_(streams), opt_(opt), sampler_(g), rng_(opt.seed),
        frames_(bind_frames(config, streams)), gates_(build_gates(config, g)), ports_(g.links.size()) {
    for (std::size_t i = 0; i < frames_.size(); ++i) frame_index_[{frames_[i].stream, frames_[i].cfg->instance}] = i;
  }

  SimResult run() {
    SimResult out;
    out.qos.mode = cfg_.mode;
    out.qos.cycles = static_cast<std::uint64_t>(opt_.n_cycles);
    out.qos.seeds.push_back(opt_.seed);
    for (const auto& s : streams_) out.qos.streams.push_back(StreamQos{s.id});
    qos_ = &out.qos;
    out.trace.mode = cfg_.mode;
    out.trace.policing = cfg_.policing;
    out.trace.hypercycle = cfg_.hypercycle;
    out.trace.n_cycles = opt_.n_cycles;
    out.trace.seed = opt_.seed;
    trace_ = &out.trace;

    const TimeNs H = cfg_.hypercycle;
    if (H <= 0 || frames_.empty()) return out;
    const TimeNs horizon = (static_cast<TimeNs>(opt_.n_cycles) + 3) * H;
    for (int c = 0; c < opt_.n_cycles; ++c) push({c * H, static_cast<int>(EventType::Release), -1, -1,
                                                  static_cast<std::uint64_t>(c), 0});

    while (!events_.empty()) {
      const Event e = events_.top();
      if (e.time > horizon) break;
      events_.pop();
      switch (static_cast<EventType>(e.type)) {
        case EventType::Release: release_cycle(static_cast<int>(e.packet)); break;
        case EventType::Arrival: arrive(e.packet, e.hop, e.time); break;
        case EventType::Service: service(e.port, e.time); break;
      }
    }

    for (auto& [id, p] : live_) {
      p.in_flight = true;
      finish_record(p);
    }
    live_.clear();
    if (opt_.keep_trace)
      std::sort(trace_->packets.begin(), trace_->packets.end(), [this](const PacketRecord& a, const PacketRecord& b) {
        return packet_id(a) < packet_id(b);
      });
    return out;
  }

 private:
  std::uint64_t packet_id(const PacketRecord& p) const {
    return static_cast<std::uint64_t>(p.cycle) * frames_.size() + frame_index_.at({p.stream, p.instance});
  }

  void push(const Event& e) { events_.push(e); }

  void release_cycle(int c) {
    const TimeNs shift = static_cast<TimeNs>(c) * cfg_.hypercycle;
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      const BoundFrame& bf = frames_[i];
      const std::uint64_t id = static_cast<std::uint64_t>(c) * frames_.size() + i;
      PacketRecord p;
      p.stream = bf.stream;
      p.instance = bf.cfg->instance;
      p.cycle = c;
      p.release = bf.cfg->release + shift;
      const Interval& w = bf.cfg->hops.back().psfp;
      p.listener_window = {w.lo + shift, w.hi + shift};
      p.hops.resize(bf.cfg->hops.size());
      live_.emplace(id, std::move(p));
      const Stream& s = streams_[bf.stream];
      push({bf.cfg->release + shift, static_cast<int>(EventType::Arrival), s.path[0], s.ports[0], id, 0});
    }
  }

  const FrameConfig& cfg_of(std::uint64_t id) const { return *frames_[id % frames_.size()].cfg; }
  const Stream& stream_of(std::uint64_t id) const { return streams_[frames_[id % frames_.size()].stream]; }
  TimeNs shift_of(std::uint64_t id) const { return static_cast<TimeNs>(id / frames_.size()) * cfg_.hypercycle; }

  void arrive(std::uint64_t id, int hop, TimeNs t) {
    PacketRecord& p = live_.at(id);
    const Stream& s = stream_of(id);
    const FrameConfig& fc = cfg_of(id);
    const TimeNs shift = shift_of(id);

    if (hop == s.hops()) {  // listener
      p.arrived = true;
      complete(id);
      return;
    }
    p.hops[hop].arrival = t;

    if (hop > 0 && cfg_.policing) {
      const Interval& w = fc.hops[hop - 1].psfp;
      if (t < w.lo + shift || t > w.hi + shift) {
        p.drop = DropEvent::PsfpDrop;
        p.drop_node = s.path[hop];
        for (int h = hop; h < s.hops(); ++h) p.hops[h].reached = true;
        complete(id);
        return;
      }
    }

    const int port = s.ports[hop];
    const Link& link = g_.links[port];
    if (hop == 0) {
      transmit(id, hop, fc.hops[0].smin + shift);
    } else if (link.is_wireless()) {
      const GclWindow& w = fc.hops[hop].window;
      TimeNs k = 0;
      if (t > w.close + shift) k = (t - w.close - shift + cfg_.hypercycle - 1) / cfg_.hypercycle;
      transmit(id, hop, std::max(t, w.open + shift + k * cfg_.hypercycle));
    } else {
      ports_[port].queue.push_back({id, hop});
      push({t, static_cast<int>(EventType::Service), link.src, port, 0, 0});
    }
  }

  void service(int port, TimeNs t) {
    PortState& ps = ports_[port];
    if (ps.queue.empty() || ps.busy_until > t) return;
    const auto [id, hop] = ps.queue.front();
    const Link& link = g_.links[port];
    const TimeNs need = serialization(link, stream_of(id).size_bytes);
    const TimeNs at = gates_[port].next_fit(t, need);
    if (at == kInf) return;
    if (at > t) {
      push({at, static_cast<int>(EventType::Service), link.src, port, 0, 0});
      return;
    }
    ps.queue.pop_front();
    ps.busy_until = t + need;
    transmit(id, hop, t);
    push({ps.busy_until, static_cast<int>(EventType::Service), link.src, port, 0, 0});
  }

  void transmit(std::uint64_t id, int hop, TimeNs T) {
    PacketRecord& p = live_.at(id);
    const Stream& s = stream_of(id);
    const int port = s.ports[hop];
    TimeNs D = sampler_.sample(port, s.size_bytes, rng_);
    if (opt_.clip_to_pdb) {
      const Pdb& pdb = cfg_of(id).hops[hop].pdb;
      D = std::clamp(D, pdb.dmin(), pdb.dmax());
    }
    HopRecord& rec = p.hops[hop];
    rec.reached = true;
    rec.T = T;
    rec.D = D;
    rec.eD = D;
    const int next = hop + 1;
    push({T + D, static_cast<int>(EventType::Arrival), s.path[next], next < s.hops() ? s.ports[next] : -1, id, next});
  }

  void complete(std::uint64_t id) {
    auto it = live_.find(id);
    finish_record(it->second);
    live_.erase(it);
  }

  void finish_record(PacketRecord& p) {
    accumulate(qos_->streams[p.stream], p, streams_[p.stream], opt_.n_cycles);
    if (opt_.keep_trace) trace_->packets.push_back(std::move(p));
  }

  struct PortState {
    std::deque<std::pair<std::uint64_t, int>> queue;
    TimeNs busy_until = 0;
  };

  const TsnConfiguration& cfg_;
  const NetworkGraph& g_;
  const std::vector<Stream>& streams_;
  SimOptions opt_;
  DelaySampler sampler_;
  Rng rng_;
  std::vector<BoundFrame> frames_;
  std::vector<PortGate> gates_;
  std::vector<PortState> ports_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::unordered_map<std::uint64_t, PacketRecord> live_;
  std::map<std::pair<int, int>, std::size_t> frame_index_;
  QosReport* qos_ = nullptr;
  Trace* trace_ = nullptr;
};

}  // namespace

SimResult run_hypercycles(const TsnConfiguration& config, const NetworkGraph& g, const std::vector<Stream>& streams,
                          const SimOptions& opt) {
  if (opt.n_cycles < 0) throw Error(ErrorCode::ConfigMismatch, "negative cycle count");
  return Simulator(config, g, streams, opt).run();
}

QosReport measure_qos(const std::vector<Trace>& traces, const std::vector<Stream>& streams) {
  QosReport total;
  for (const auto& s : streams) total.streams.push_back(StreamQos{s.id});
  for (const auto& t : traces) {
    QosReport r;
    r.mode = t.mode;
    r.cycles = static_cast<std::uint64_t>(t.n_cycles);
    r.seeds.push_back(t.seed);
    for (const auto& s : streams) r.streams.push_back(StreamQos{s.id});
    for (const auto& p : t.packets) {
      if (p.stream < 0 || static_cast<std::size_t>(p.stream) >= streams.size())
        throw Error(ErrorCode::ConfigMismatch, "trace refers to an unknown stream");
      accumulate(r.streams[p.stream], p, streams[p.stream], t.n_cycles);
    }
    total.mode = t.mode;
    total.merge(r);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Trace validation

namespace {

struct Visit {
  const PacketRecord* p;
  int hop;
};

class Validator {
 public:
  Validator(const Trace& t, const TsnConfiguration& c, const NetworkGraph& g, const std::vector<Stream>& s)
      : trace_(t), cfg_(c), g_(g), streams_(s), gates_(build_gates(c, g)) {
    for (const auto& bf : bind_frames(c, s)) frames_[{bf.stream, bf.cfg->instance}] = bf.cfg;
  }

  std::vector<Violation> run() {
    std::vector<std::vector<Visit>> at_port(g_.links.size());
    for (const auto& p : trace_.packets) {
      auto it = frames_.find({p.stream, p.instance});
      if (it == frames_.end()) {
        add("ConfigMismatch", -1, p, "packet without configuration");
        continue;
      }
      check_packet(p, *it->second);
      for (int h = 0; h < static_cast<int>(p.hops.size()); ++h)
        if (p.hops[h].reached) at_port[streams_[p.stream].ports[h]].push_back({&p, h});
    }
    for (std::size_t port = 0; port < at_port.size(); ++port) check_port(static_cast<int>(port), at_port[port]);
    return std::move(out_);
  }

 private:
  TimeNs shift(const PacketRecord& p) const { return static_cast<TimeNs>(p.cycle) * trace_.hypercycle; }

  TimeNs ser(const PacketRecord& p, int hop) const {
    const Stream& s = streams_[p.stream];
    return serialization(g_.links[s.ports[hop]], s.size_bytes);
  }

  void add(const std::string& constraint, int port, const PacketRecord& p, const std::string& detail) {
    Violation v;
    v.constraint = constraint;
    v.port = port;
    v.stream = streams_[p.stream].id;
    v.instance = p.instance;
    v.cycle = p.cycle;
    v.detail = detail;
    out_.push_back(std::move(v));
  }

  static std::string t2s(TimeNs t) { return is_inf(t) ? "inf" : std::to_string(t); }

  void check_packet(const PacketRecord& p, const FrameConfig& fc) {
    const Stream& s = streams_[p.stream];
    const TimeNs sh = shift(p);
    const int n = static_cast<int>(p.hops.size());
    bool dropped = false;
    for (int h = 0; h < n; ++h) {
      const HopRecord& r = p.hops[h];
      if (!r.reached) continue;
      const int port = s.ports[h];
      const Link& link = g_.links[port];
      const TimeNs arrival = h == 0 ? p.release : p.hops[h - 1].T + p.hops[h - 1].D;

      // PolicingConsistency: a dropped frame stays dropped.
      if (is_inf(r.T) && !is_inf(r.D)) add("PolicingConsistency", port, p, "T = inf but D = " + t2s(r.D));
      if (dropped && !is_inf(r.T)) add("PolicingConsistency", port, p, "transmitted after being dropped");
      if (is_inf(r.T)) dropped = true;

      // PSFP at the receiving bridge of the previous hop.
      if (h > 0 && trace_.policing && p.hops[h - 1].reached && !is_inf(p.hops[h - 1].T)) {
        const Interval& w = fc.hops[h - 1].psfp;
        const bool inside = !is_inf(arrival) && w.lo + sh <= arrival && arrival <= w.hi + sh;
        if (!inside && !is_inf(r.T))
          add("PSFP", port, p, "arrival " + t2s(arrival) + " outside [" + t2s(w.lo + sh) + ", " + t2s(w.hi + sh) +
                                   "] was forwarded");
        if (inside && is_inf(r.T)) add("PSFP", port, p, "arrival " + t2s(arrival) + " inside the window was dropped");
      }
      if (is_inf(r.T)) continue;

      if (h == 0) {
        if (r.T != fc.hops[0].smin + sh)
          add("IsochronousTalker", port, p, "T = " + t2s(r.T) + ", configured " + t2s(fc.hops[0].smin + sh));
      } else if (is_inf(arrival) || r.T < arrival) {
        add("SequentialTransmission", port, p, "T = " + t2s(r.T) + " before arrival " + t2s(arrival));
      }

      // TransmissionPolicing: frames on Ethernet are never cut short or lost.
      if (!link.is_wireless()) {
        const TimeNs need = ser(p, h);
        if (is_inf(r.D))
          add("TransmissionPolicing", port, p, "Ethernet frame lost in transit");
        else if (r.D - link.prop - link.proc > need)
          add("TransmissionPolicing", port, p, "transmission took " + t2s(r.D - link.prop - link.proc) +
                                                   " > " + t2s(need));
        // GCL-Encapsulation against the periodic port gate.
        const TimeNs c = gates_[port].close_at(r.T);
        if (c < 0 || r.T + need > c)
          add("GCL-Encapsulation", port, p, "T = " + t2s(r.T) + " outside an open window of the port");
      } else {
        const GclWindow& w = fc.hops[h].window;
        const TimeNs H = trace_.hypercycle;
        bool inside = false;
        if (H > 0 && r.T >= w.open + sh) {
          const TimeNs k = (r.T - w.open - sh) / H;
          inside = r.T <= w.close + sh + k * H;
        }
        if (!inside) add("GCL-Encapsulation", port, p, "T = " + t2s(r.T) + " outside the batch window");
      }
    }
  }

  void check_port(int port, std::vector<Visit>& visits) {
    const Link& link = g_.links[port];
    const bool talker_port = g_.nodes[link.src].role == NodeRole::EndStation;
    if (link.is_wireless()) return;

    // TransmissionConsistency
    std::vector<std::pair<TimeNs, const Visit*>> tx;
    for (const auto& v : visits)
      if (!is_inf(v.p->hops[v.hop].T)) tx.push_back({v.p->hops[v.hop].T, &v});
    std::sort(tx.begin(), tx.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    TimeNs busy_end = std::numeric_limits<TimeNs>::min();
    for (const auto& [T, v] : tx) {
      if (T < busy_end)
        add("TransmissionConsistency", port, *v->p, "starts at " + t2s(T) + " while the port is busy until " +
                                                        t2s(busy_end));
      busy_end = std::max(busy_end, T + ser(*v->p, v->hop));
    }
    if (talker_port) return;

    // FIFO: transmission order follows arrival order.
    struct Q {
      TimeNs a;
      TimeNs T;
      TimeNs need;
      const PacketRecord* p;
    };
    std::vector<Q> q;
    for (const auto& v : visits) {
      if (v.hop == 0) continue;
      const PacketRecord& p = *v.p;
      const HopRecord& prev = p.hops[v.hop - 1];
      if (is_inf(prev.T)) continue;
      const TimeNs a = prev.T + prev.D;
      if (p.hops[v.hop].T == kInf && trace_.policing && dropped_here(p, v.hop)) continue;
      q.push_back({a, p.hops[v.hop].T, ser(p, v.hop), &p});
    }
    std::sort(q.begin(), q.end(), [](const Q& x, const Q& y) { return std::tie(x.a, x.T) < std::tie(y.a, y.T); });
    TimeNs max_T_before = std::numeric_limits<TimeNs>::min();
    std::size_t i = 0;
    while (i < q.size()) {
      std::size_t j = i;
      while (j < q.size() && q[j].a == q[i].a) ++j;
      for (std::size_t k = i; k < j; ++k)
        if (q[k].T <= max_T_before)
          add("FIFO", port, *q[k].p, "arrived " + t2s(q[k].a) + " after a frame sent later, but sent at " +
                                         t2s(q[k].T));
      for (std::size_t k = i; k < j; ++k) max_T_before = std::max(max_T_before, q[k].T);
      i = j;
    }

    // GCL-Progress: an idle port with an open gate and a waiting head frame
    // that fits must transmit.
    std::vector<TimeNs> candidates;
    for (const auto& x : q) candidates.push_back(x.a);
    for (const auto& [T, v] : tx) candidates.push_back(T + ser(*v->p, v->hop));
    if (!gates_[port].always_open() && trace_.hypercycle > 0 && !q.empty()) {
      const TimeNs first = q.front().a;
      TimeNs last = first;
      for (const auto& x : q) last = std::max(last, is_inf(x.T) ? x.a : x.T);
      const TimeNs H = trace_.hypercycle;
      for (TimeNs base = floor_div(first, H) * H; base <= last; base += H)
        for (const auto& w : gates_[port].windows())
          if (w.open + base >= first && w.open + base <= last) candidates.push_back(w.open + base);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::size_t> order(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) order[k] = k;
    std::size_t next = 0;
    auto cmp = [&](std::size_t x, std::size_t y) { return std::tie(q[x].a, q[x].T, x) < std::tie(q[y].a, q[y].T, y); };
    std::set<std::size_t, decltype(cmp)> waiting(cmp);
    for (TimeNs t : candidates) {
      while (next < q.size() && q[next].a <= t) waiting.insert(order[next++]);
      while (!waiting.empty() && q[*waiting.begin()].T <= t) waiting.erase(waiting.begin());
      if (waiting.empty()) continue;
      auto it = std::upper_bound(tx.begin(), tx.end(), t, [](TimeNs x, const auto& e) { return x < e.first; });
      if (it != tx.begin()) {
        const auto& prev = *std::prev(it);
        if (t < prev.first + ser(*prev.second->p, prev.second->hop)) continue;
      }
      const Q& head = q[*waiting.begin()];
      const TimeNs c = gates_[port].close_at(t);
      if (c < 0 || t + head.need > c) continue;
      add("GCL-Progress", port, *head.p, "port idle at " + t2s(t) + " with the gate open and the frame waiting");
    }
  }

  static bool dropped_here(const PacketRecord& p, int hop) {
    return p.drop == DropEvent::PsfpDrop && (hop == 0 || !is_inf(p.hops[hop - 1].T));
  }

  const Trace& trace_;
  const TsnConfiguration& cfg_;
  const NetworkGraph& g_;
  const std::vector<Stream>& streams_;
  std::vector<PortGate> gates_;
  std::map<std::pair<int, int>, const FrameConfig*> frames_;
  std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> validate_trace(const Trace& trace, const TsnConfiguration& config, const NetworkGraph& g,
                                      const std::vector<Stream>& streams) {
  return Validator(trace, config, g, streams).run();
}

}  // namespace fips
