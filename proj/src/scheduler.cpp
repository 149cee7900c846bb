#include "fips/scheduler.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace fips {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Fips: return "fips";
    case Mode::Sti: return "sti";
    case Mode::Med: return "med";
    case Mode::Max: return "max";
  }
  return "fips";
}

Mode mode_from_string(const std::string& s) {
  if (s == "fips") return Mode::Fips;
  if (s == "sti") return Mode::Sti;
  if (s == "med") return Mode::Med;
  if (s == "max") return Mode::Max;
  throw Error(ErrorCode::Parse, "unknown mode '" + s + "'");
}

const char* to_string(DeriveStatus s) {
  switch (s) {
    case DeriveStatus::Ok: return "Ok";
    case DeriveStatus::CyclicDependency: return "CyclicDependency";
    case DeriveStatus::HorizonExceeded: return "HorizonExceeded";
    case DeriveStatus::WrapOverlap: return "WrapOverlap";
  }
  return "Ok";
}

const char* to_string(MergeKind k) {
  switch (k) {
    case MergeKind::None: return "no-merge";
    case MergeKind::Predecessor: return "merge-predecessor";
    case MergeKind::Successor: return "merge-successor";
  }
  return "no-merge";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Accepted: return "accepted";
    case Verdict::ViolatesLatency: return "violates_latency";
    case Verdict::ViolatesJitter: return "violates_jitter";
  }
  return "accepted";
}

const FrameConfig* TsnConfiguration::find_frame(const std::string& stream, int instance) const {
  auto it = std::lower_bound(frames.begin(), frames.end(), std::make_pair(stream, instance),
                             [](const FrameConfig& f, const std::pair<std::string, int>& key) {
                               return std::tie(f.stream, f.instance) < std::tie(key.first, key.second);
                             });
  if (it == frames.end() || it->stream != stream || it->instance != instance) return nullptr;
  return &*it;
}

const PortGcl* TsnConfiguration::find_port(int link) const {
  auto it = std::lower_bound(gcl.begin(), gcl.end(), link,
                             [](const PortGcl& p, int l) { return p.link < l; });
  if (it == gcl.end() || it->link != link) return nullptr;
  return &*it;
}

int SchedContext::add_stream(const Stream& s, std::vector<Pdb> hop_pdbs) {
  const int id = static_cast<int>(streams.size());
  streams.push_back(s);
  pdbs.push_back(std::move(hop_pdbs));
  std::vector<int> ids;
  for (const auto& f : expand_frames(s, id, H)) {
    ids.push_back(static_cast<int>(frames.size()));
    frames.push_back(f);
  }
  stream_frames.push_back(std::move(ids));
  return id;
}

int Ordering::batch_of(int link, int frame) const {
  const auto& batches = ports[link];
  for (std::size_t i = 0; i < batches.size(); ++i)
    for (const Member& m : batches[i])
      if (m.frame == frame) return static_cast<int>(i);
  return -1;
}

const Member* Ordering::member(int link, int frame) const {
  for (const auto& b : ports[link])
    for (const Member& m : b)
      if (m.frame == frame) return &m;
  return nullptr;
}

TimeNs Derivation::start(const SchedContext& ctx, int frame, int hop) const {
  const int p = ctx.stream_of(frame).ports[hop];
  return S[p][hop_batch[frame][hop]] + hop_shift[frame][hop] * ctx.H;
}

TimeNs phi_lower_bound(const SchedContext& ctx, int frame, int hop) {
  TimeNs phi = ctx.frames[frame].release;
  for (int i = 0; i < hop; ++i) phi += ctx.pdb(frame, i).dmax();
  return phi;
}

Interval batch_pdb(const SchedContext& ctx, int link, const Batch& batch) {
  const Link& l = ctx.net->links[link];
  if (l.is_wireless()) {
    Interval iv{kInf, 0};
    for (const Member& m : batch) {
      const Pdb& p = ctx.pdb(m.frame, ctx.stream_of(m.frame).hop_of_port(link));
      iv.lo = std::min(iv.lo, p.dmin());
      iv.hi = std::max(iv.hi, p.dmax());
    }
    return iv;
  }
  TimeNs d = l.prop + l.proc;
  for (const Member& m : batch) d += serialization(l, ctx.stream_of(m.frame).size_bytes);
  return {d, d};
}

TimeNs batch_occupancy(const SchedContext& ctx, int link, const Interval& bpdb) {
  return ctx.net->links[link].is_wireless() ? 0 : bpdb.hi;
}

namespace {

TimeNs floor_div(TimeNs a, TimeNs b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

int next_port(const SchedContext& ctx, int frame, int link) {
  const Stream& s = ctx.stream_of(frame);
  const int h = s.hop_of_port(link);
  return (h >= 0 && h + 1 < s.hops()) ? s.ports[h + 1] : -1;
}

bool batch_has_stream(const SchedContext& ctx, const Batch& b, int stream) {
  return std::any_of(b.begin(), b.end(), [&](const Member& m) { return ctx.frames[m.frame].stream == stream; });
}

struct Slot {
  int batch;
  int shift;
};

std::unordered_map<int, Slot> slots_of(const std::vector<Batch>& batches) {
  std::unordered_map<int, Slot> out;
  for (std::size_t j = 0; j < batches.size(); ++j)
    for (const Member& m : batches[j]) out[m.frame] = {static_cast<int>(j), m.shift};
  return out;
}

}  // namespace

Ordering insert_frames(const SchedContext& ctx, const Ordering& ordering, const Derivation& previous, int stream) {
  Ordering ord = ordering;
  const Stream& s = ctx.streams[stream];
  const TimeNs H = ctx.H;
  // Local start times of the previous configuration, kept aligned with the
  // batches as new singletons are inserted.
  std::vector<std::vector<TimeNs>> starts(ord.ports.size());
  for (int p : s.ports) {
    if (static_cast<std::size_t>(p) < previous.S.size()) starts[p] = previous.S[p];
    starts[p].resize(ord.ports[p].size(), 0);
  }

  for (int f : ctx.stream_frames[stream]) {
    TimeNs prev_abs = 0;
    for (int h = 0; h < s.hops(); ++h) {
      const int p = s.ports[h];
      auto& batches = ord.ports[p];
      auto& S = starts[p];
      const TimeNs phi = phi_lower_bound(ctx, f, h);
      const auto n = static_cast<TimeNs>(batches.size());
      if (n == 0 || ctx.net->links[p].is_wireless()) {
        batches.push_back(Batch{{f, 0}});
        S.push_back(phi);
        prev_abs = phi;
        continue;
      }

      // Insertion points are indices into the periodically unrolled batch
      // sequence: P = k * n + j sits before batch j of cycle k.
      const TimeNs k_phi = floor_div(phi - S[0], H);
      TimeNs P = k_phi * n + (std::upper_bound(S.begin(), S.end(), phi - k_phi * H) - S.begin());

      if (h > 0) {
        // Frames sharing the previous queue and this one keep their
        // relative order modulo the hypercycle.
        const int q = s.ports[h - 1];
        const auto at_p = slots_of(batches);
        const int mine = ord.batch_of(q, f);
        TimeNs lower = std::numeric_limits<TimeNs>::min(), upper = std::numeric_limits<TimeNs>::max();
        for (std::size_t j = 0; j < ord.ports[q].size(); ++j) {
          if (static_cast<int>(j) == mine) continue;
          for (const Member& g : ord.ports[q][j]) {
            if (next_port(ctx, g.frame, q) != p) continue;
            auto it = at_p.find(g.frame);
            if (it == at_p.end()) continue;
            const TimeNs delta = starts[q][j] + g.shift * H - prev_abs;
            TimeNs D = floor_div(delta, H);
            if (delta % H == 0 && static_cast<int>(j) < mine) D -= 1;
            const TimeNs at = (it->second.shift - D) * n + it->second.batch;
            upper = std::min(upper, at);
            lower = std::max(lower, at - n + 1);
          }
        }
        if (lower <= upper) P = std::clamp(P, lower, upper);
      }

      TimeNs k = floor_div(P, n);
      auto j = static_cast<std::size_t>(P - k * n);
      // The slot before batch 0 is also the one after the last batch of the
      // previous cycle; take the form whose local time follows S[0].
      if (j == 0 && phi - k * H < S[0]) {
        k -= 1;
        j = static_cast<std::size_t>(n);
      }
      TimeNs local = phi - k * H;
      if (j > 0) local = std::max(local, S[j - 1]);
      if (j < S.size()) local = std::min(local, S[j]);
      batches.insert(batches.begin() + static_cast<std::ptrdiff_t>(j), Batch{{f, static_cast<int>(k)}});
      S.insert(S.begin() + static_cast<std::ptrdiff_t>(j), local);
      prev_abs = local + k * H;
    }
  }
  return ord;
}

std::vector<Candidate> merge_candidates(const SchedContext& ctx, const Ordering& inserted, int stream) {
  std::vector<Candidate> out;
  out.push_back({MergeKind::None, inserted});
  const Stream& s = ctx.streams[stream];
  const int w = s.wireless_hop(*ctx.net);
  if (w < 0 || w + 1 >= s.hops()) return out;
  const int k = w + 1;

  for (MergeKind kind : {MergeKind::Predecessor, MergeKind::Successor}) {
    Ordering ord = inserted;
    bool ok = true;
    for (int f : ctx.stream_frames[stream]) {
      auto& batches = ord.ports[s.ports[k]];
      const int n = static_cast<int>(batches.size());
      const int own = ord.batch_of(s.ports[k], f);
      // Neighbours wrap around the hypercycle.
      int target = kind == MergeKind::Predecessor ? own - 1 : own + 1;
      int shift = 0;
      if (target < 0) {
        target += n;
        shift = -1;
      } else if (target >= n) {
        target -= n;
        shift = 1;
      }
      if (own < 0 || n < 2 || batch_has_stream(ctx, batches[target], stream)) {
        ok = false;
        break;
      }
      Member moved = batches[own].front();
      moved.shift += shift;
      batches[target].push_back(moved);
      batches.erase(batches.begin() + own);

      // Downstream, the frame stays with the batch members that share its queue.
      for (int h = k + 1; h < s.hops(); ++h) {
        const int q = s.ports[h - 1];
        const int p = s.ports[h];
        const Batch& prev = ord.ports[q][ord.batch_of(q, f)];
        const Member* self = ord.member(q, f);
        int joined = -1;
        int shift = 0;
        for (const Member& g : prev) {
          if (g.frame == f || next_port(ctx, g.frame, q) != p) continue;
          const Member* there = ord.member(p, g.frame);
          if (!there) continue;
          joined = ord.batch_of(p, g.frame);
          shift = there->shift + self->shift - g.shift;
          break;
        }
        if (joined < 0) break;
        auto& here = ord.ports[p];
        const int single = ord.batch_of(p, f);
        here[joined].push_back({f, shift});
        here.erase(here.begin() + single);
      }
    }
    if (ok) out.push_back({kind, std::move(ord)});
  }
  return out;
}

namespace {

constexpr TimeNs kLowest = std::numeric_limits<TimeNs>::min() / 4;

// S[to] >= S[from] + weight
struct Edge {
  int from;
  TimeNs weight;
  bool wrap;
};

// The ordering constraints are difference constraints over the batch start
// times; the earliest schedule is the longest path from the talker releases.
class Deriver {
 public:
  Deriver(const SchedContext& ctx, const Ordering& ord, Derivation& d) : ctx_(ctx), ord_(ord), d_(d) {}

  void run() {
    index();
    build_edges();
    order_nodes();
    if (!relax(false)) {
      fail(DeriveStatus::CyclicDependency, "cycle through ");
      return;
    }
    if (!relax(true)) {
      fail(DeriveStatus::WrapOverlap, "batches overlap across the hypercycle at ");
      return;
    }
    for (std::size_t p = 0; p < ord_.ports.size(); ++p)
      for (std::size_t i = 0; i < ord_.ports[p].size(); ++i) d_.S[p][i] = value_[node(p, i)];
    check_horizon();
  }

 private:
  // Frames share a wireless link by frequency multiplexing, so batches there
  // are not ordered against each other.
  bool wireless(std::size_t p) const { return ctx_.net->links[p].is_wireless(); }
  int node(std::size_t p, std::size_t i) const { return static_cast<int>(offset_[p] + i); }

  void index() {
    const std::size_t L = ord_.ports.size();
    d_.S.assign(L, {});
    d_.bpdb.assign(L, {});
    occ_.assign(L, {});
    offset_.assign(L + 1, 0);
    d_.hop_batch.assign(ctx_.frames.size(), {});
    d_.hop_shift.assign(ctx_.frames.size(), {});
    for (std::size_t f = 0; f < ctx_.frames.size(); ++f) {
      const auto n = static_cast<std::size_t>(ctx_.stream_of(static_cast<int>(f)).hops());
      d_.hop_batch[f].assign(n, -1);
      d_.hop_shift[f].assign(n, 0);
    }
    for (std::size_t p = 0; p < L; ++p) {
      const auto& batches = ord_.ports[p];
      offset_[p + 1] = offset_[p] + batches.size();
      d_.S[p].assign(batches.size(), 0);
      d_.bpdb[p].resize(batches.size());
      occ_[p].resize(batches.size());
      for (std::size_t i = 0; i < batches.size(); ++i) {
        d_.bpdb[p][i] = batch_pdb(ctx_, static_cast<int>(p), batches[i]);
        occ_[p][i] = batch_occupancy(ctx_, static_cast<int>(p), d_.bpdb[p][i]);
        for (const Member& m : batches[i]) {
          const int h = ctx_.stream_of(m.frame).hop_of_port(static_cast<int>(p));
          d_.hop_batch[m.frame][h] = static_cast<int>(i);
          d_.hop_shift[m.frame][h] = m.shift;
        }
      }
    }
    owner_.resize(offset_[L]);
    for (std::size_t p = 0; p < L; ++p)
      for (std::size_t i = 0; i < ord_.ports[p].size(); ++i) owner_[node(p, i)] = {static_cast<int>(p), static_cast<int>(i)};
  }

  void build_edges() {
    const TimeNs H = ctx_.H;
    const std::size_t N = owner_.size();
    in_.assign(N, {});
    floor_.assign(N, kLowest);
    for (std::size_t p = 0; p < ord_.ports.size(); ++p) {
      const auto& batches = ord_.ports[p];
      for (std::size_t i = 0; i < batches.size(); ++i) {
        const int v = node(p, i);
        for (const Member& m : batches[i]) {
          const int f = m.frame;
          const Stream& str = ctx_.stream_of(f);
          const int h = str.hop_of_port(static_cast<int>(p));
          const TimeNs own = m.shift * H;
          if (h == 0) {
            floor_[v] = std::max(floor_[v], ctx_.frames[f].release - own);  // C1 at the talker
          } else {
            const int q = str.ports[h - 1];
            const int j = d_.hop_batch[f][h - 1];
            in_[v].push_back({node(q, j), d_.hop_shift[f][h - 1] * H + d_.bpdb[q][j].hi - own, false});  // C1
          }
          if (h + 1 < str.hops() && !wireless(str.ports[h + 1])) {
            const int q = str.ports[h + 1];
            const int j = d_.hop_batch[f][h + 1];
            const TimeNs there = d_.hop_shift[f][h + 1] * H - ctx_.pdb(f, h).dmin() - own;
            if (j > 0) {
              in_[v].push_back({node(q, j - 1), occ_[q][j - 1] + there, false});  // C3
            } else {
              const std::size_t last = ord_.ports[q].size() - 1;
              in_[v].push_back({node(q, last), occ_[q][last] + there - H, true});
            }
          }
        }
        if (i > 0 && !wireless(p)) in_[v].push_back({node(p, i - 1), occ_[p][i - 1], false});  // C2
      }
      if (!batches.empty() && !wireless(p)) {
        const std::size_t last = batches.size() - 1;
        in_[node(p, 0)].push_back({node(p, last), occ_[p][last] - H, true});
      }
    }
  }

  // Dependencies before dependants wherever the constraint graph is acyclic.
  void order_nodes() {
    const std::size_t N = owner_.size();
    std::vector<char> seen(N, 0);
    order_.clear();
    order_.reserve(N);
    std::vector<std::pair<int, std::size_t>> stack;
    for (std::size_t root = 0; root < N; ++root) {
      if (seen[root]) continue;
      seen[root] = 1;
      stack.emplace_back(static_cast<int>(root), 0);
      while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (next < in_[v].size()) {
          const Edge& e = in_[v][next++];
          if (!e.wrap && !seen[e.from]) {
            seen[e.from] = 1;
            stack.emplace_back(e.from, 0);
          }
          continue;
        }
        order_.push_back(v);
        stack.pop_back();
      }
    }
  }

  // Bellman-Ford sweeps; a cycle among the predecessors marks a positive cycle.
  bool relax(bool with_wrap) {
    const std::size_t N = owner_.size();
    if (!with_wrap) {
      value_ = floor_;
      pred_.assign(N, -1);
    }
    for (std::size_t pass = 0; pass <= N; ++pass) {
      bool changed = false;
      for (int v : order_) {
        for (const Edge& e : in_[v]) {
          if (e.wrap && !with_wrap) continue;
          const TimeNs cand = value_[e.from] + e.weight;
          if (cand > value_[v]) {
            value_[v] = cand;
            pred_[v] = e.from;
            changed = true;
          }
        }
      }
      if (!changed) return true;
      if (pass > 0 && (cycle_node_ = pred_cycle()) >= 0) return false;
    }
    cycle_node_ = order_.empty() ? -1 : order_.front();
    return false;
  }

  int pred_cycle() const {
    const std::size_t N = pred_.size();
    std::vector<int> mark(N, -1);
    for (std::size_t start = 0; start < N; ++start) {
      int v = static_cast<int>(start);
      while (v >= 0 && mark[v] < 0) {
        mark[v] = static_cast<int>(start);
        v = pred_[v];
      }
      if (v >= 0 && mark[v] == static_cast<int>(start)) return v;
    }
    return -1;
  }

  void fail(DeriveStatus status, const std::string& prefix) {
    d_.status = status;
    d_.detail = prefix;
    if (cycle_node_ >= 0) {
      const auto [p, i] = owner_[cycle_node_];
      d_.detail += ctx_.net->port_name(p) + " batch " + std::to_string(i);
    }
  }

  void check_horizon() {
    for (std::size_t p = 0; p < ord_.ports.size(); ++p)
      for (std::size_t i = 0; i < ord_.ports[p].size(); ++i)
        for (const Member& m : ord_.ports[p][i])
          if (d_.S[p][i] + m.shift * ctx_.H + d_.bpdb[p][i].hi > ctx_.frames[m.frame].release + 2 * ctx_.H) {
            d_.status = DeriveStatus::HorizonExceeded;
            d_.detail = ctx_.net->port_name(static_cast<int>(p)) + " batch " + std::to_string(i);
            return;
          }
  }

  const SchedContext& ctx_;
  const Ordering& ord_;
  Derivation& d_;
  std::vector<std::vector<TimeNs>> occ_;
  std::vector<std::size_t> offset_;
  std::vector<std::pair<int, int>> owner_;
  std::vector<std::vector<Edge>> in_;
  std::vector<TimeNs> floor_;
  std::vector<TimeNs> value_;
  std::vector<int> pred_;
  std::vector<int> order_;
  int cycle_node_ = -1;
};

}  // namespace

Derivation derive_configuration(const SchedContext& ctx, const Ordering& ordering) {
  Derivation d;
  Deriver(ctx, ordering, d).run();
  return d;
}

Interval listener_window(const SchedContext& ctx, const Derivation& d, int frame) {
  const Stream& s = ctx.stream_of(frame);
  const int h = s.hops() - 1;
  const int p = s.ports[h];
  const TimeNs S = d.start(ctx, frame, h);
  return {S + ctx.pdb(frame, h).dmin(), S + d.bpdb[p][d.hop_batch[frame][h]].hi};
}

TsnConfiguration make_configuration(const SchedContext& ctx, const Ordering& ordering, const Derivation& d,
                                    const std::vector<int>& accepted, Mode mode, bool policing) {
  TsnConfiguration cfg;
  cfg.mode = mode;
  cfg.hypercycle = ctx.H;
  cfg.policing = policing;
  for (int s : accepted) cfg.accepted.push_back(ctx.streams[s].id);
  std::sort(cfg.accepted.begin(), cfg.accepted.end());

  for (std::size_t p = 0; p < ordering.ports.size(); ++p) {
    if (ordering.ports[p].empty()) continue;
    PortGcl port;
    port.link = static_cast<int>(p);
    for (std::size_t i = 0; i < ordering.ports[p].size(); ++i)
      port.windows.push_back({d.S[p][i], d.S[p][i] + d.bpdb[p][i].hi});
    std::sort(port.windows.begin(), port.windows.end(),
              [](const GclWindow& a, const GclWindow& b) { return std::tie(a.open, a.close) < std::tie(b.open, b.close); });
    cfg.gcl.push_back(std::move(port));
  }

  for (int s : accepted) {
    const Stream& str = ctx.streams[s];
    for (int f : ctx.stream_frames[s]) {
      FrameConfig fc;
      fc.stream = str.id;
      fc.instance = ctx.frames[f].index;
      fc.release = ctx.frames[f].release;
      for (int h = 0; h < str.hops(); ++h) {
        const int p = str.ports[h];
        const int b = d.hop_batch[f][h];
        const Link& link = ctx.net->links[p];
        HopConfig hc;
        hc.link = p;
        hc.batch = b;
        hc.smin = d.start(ctx, f, h);
        hc.smax = hc.smin;
        for (const Member& g : ordering.ports[p][b])
          if (g.frame != f) hc.smax += serialization(link, ctx.stream_of(g.frame).size_bytes);
        hc.window = {hc.smin, hc.smin + d.bpdb[p][b].hi};
        hc.pdb = ctx.pdb(f, h);
        hc.psfp = {hc.smin + hc.pdb.dmin(), hc.smin + d.bpdb[p][b].hi};
        fc.hops.push_back(hc);
      }
      cfg.frames.push_back(std::move(fc));
    }
  }
  std::sort(cfg.frames.begin(), cfg.frames.end(), [](const FrameConfig& a, const FrameConfig& b) {
    return std::tie(a.stream, a.instance) < std::tie(b.stream, b.instance);
  });
  return cfg;
}

Verdict check_feasibility(const TsnConfiguration& config, const Stream& stream) {
  for (TimeNs i = 0; config.hypercycle > 0 && i < config.hypercycle / stream.period; ++i) {
    const FrameConfig* fc = config.find_frame(stream.id, static_cast<int>(i));
    if (!fc || fc->hops.empty()) throw Error(ErrorCode::ConfigMismatch, "no configuration for " + stream.id);
    const Interval w = fc->hops.back().psfp;
    if (w.hi - fc->release > stream.latency_bound) return Verdict::ViolatesLatency;
    if (w.hi - w.lo > stream.jitter_bound) return Verdict::ViolatesJitter;
  }
  return Verdict::Accepted;
}

std::vector<int> admission_order(const std::vector<Stream>& streams) {
  std::vector<int> order(streams.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Stream& x = streams[a];
    const Stream& y = streams[b];
    if (x.rel_ppb != y.rel_ppb) return x.rel_ppb > y.rel_ppb;
    if (x.latency_bound != y.latency_bound) return x.latency_bound < y.latency_bound;
    return x.id < y.id;
  });
  return order;
}

namespace {

// Reorders the batches of every Ethernet port by the time their members
// would be ready if no frame ever waited for another one; batch membership is
// kept. Each batch is shifted by whole hypercycles so that this time falls
// into [0, H).
constexpr TimeNs kUnset = std::numeric_limits<TimeNs>::min();

Ordering reorder_by_ready(const SchedContext& ctx, const Ordering& ordering) {
  const TimeNs H = ctx.H;
  Ordering out = ordering;
  std::vector<std::vector<TimeNs>> ready(out.ports.size());
  for (std::size_t p = 0; p < out.ports.size(); ++p) ready[p].assign(out.ports[p].size(), kUnset);

  // Local ready time of a batch; hop-wise recursion along the members' paths.
  std::function<TimeNs(int, int)> local_ready = [&](int p, int i) -> TimeNs {
    TimeNs& r = ready[p][i];
    if (r != kUnset) return r;
    TimeNs best = std::numeric_limits<TimeNs>::min();
    for (const Member& m : out.ports[p][i]) {
      const Stream& str = ctx.stream_of(m.frame);
      const int h = str.hop_of_port(p);
      TimeNs at = ctx.frames[m.frame].release;
      if (h > 0) {
        const int q = str.ports[h - 1];
        const int j = out.batch_of(q, m.frame);
        const Member* prev = out.member(q, m.frame);
        at = local_ready(q, j) + prev->shift * H + batch_pdb(ctx, q, out.ports[q][j]).hi;
      }
      best = std::max(best, at - m.shift * H);
    }
    return r = best;
  };

  for (std::size_t p = 0; p < out.ports.size(); ++p)
    for (std::size_t i = 0; i < out.ports[p].size(); ++i) local_ready(static_cast<int>(p), static_cast<int>(i));

  for (std::size_t p = 0; p < out.ports.size(); ++p) {
    auto& batches = out.ports[p];
    if (batches.size() < 2 || ctx.net->links[p].is_wireless()) continue;
    std::vector<std::pair<TimeNs, std::size_t>> key;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      const TimeNs k = floor_div(ready[p][i], H);
      for (Member& m : batches[i]) m.shift += static_cast<int>(k);
      key.emplace_back(ready[p][i] - k * H, i);
    }
    std::sort(key.begin(), key.end());
    std::vector<Batch> sorted;
    sorted.reserve(batches.size());
    for (const auto& [r, i] : key) sorted.push_back(std::move(batches[i]));
    batches = std::move(sorted);
  }
  return out;
}

struct Check {
  bool ok = true;
  std::string reason;
  TimeNs worst = 0;
};

// Bounds of the new stream and all admitted ones; `worst` is the new
// stream's largest listener latency.
Check check_all(const SchedContext& ctx, const Derivation& d, const std::vector<int>& admitted, int fresh) {
  Check c;
  auto check_stream = [&](int s) {
    const Stream& str = ctx.streams[s];
    for (int f : ctx.stream_frames[s]) {
      const Interval w = listener_window(ctx, d, f);
      const TimeNs lat = w.hi - ctx.frames[f].release;
      if (lat > str.latency_bound) {
        c.ok = false;
        c.reason = s == fresh ? "violates_latency" : "violates_latency of " + str.id;
        return;
      }
      if (w.hi - w.lo > str.jitter_bound) {
        c.ok = false;
        c.reason = s == fresh ? "violates_jitter" : "violates_jitter of " + str.id;
        return;
      }
      if (s == fresh) c.worst = std::max(c.worst, lat);
    }
  };
  check_stream(fresh);
  for (std::size_t i = 0; c.ok && i < admitted.size(); ++i) check_stream(admitted[i]);
  return c;
}

}  // namespace

ScheduleResult run_schedule(const NetworkGraph& g, const std::vector<Stream>& streams, const ScheduleOptions& opt) {
  ScheduleResult result;
  result.config.mode = opt.mode;
  result.config.policing = opt.policing;
  if (streams.empty()) return result;

  const TimeNs H = hypercycle(streams);
  SchedContext ctx(g, H);
  Ordering ord(g.links.size());
  Derivation der;
  der.S.assign(g.links.size(), {});
  std::vector<int> admitted;
  auto pdb_fn = opt.pdb ? opt.pdb : [](const NetworkGraph& net, int link, const Stream& s) {
    return pdb_for_link(net, link, s);
  };

  for (int idx : admission_order(streams)) {
    const Stream& s = streams[idx];
    std::vector<Pdb> pdbs;
    try {
      for (int p : s.ports) pdbs.push_back(pdb_fn(g, p, s));
    } catch (const Error& e) {
      result.rejected.push_back({s.id, e.what()});
      continue;
    }
    const int sid = ctx.add_stream(s, std::move(pdbs));
    Ordering inserted = insert_frames(ctx, ord, der, sid);
    std::vector<Candidate> cands;
    if (opt.merge)
      cands = merge_candidates(ctx, inserted, sid);
    else
      cands.push_back({MergeKind::None, std::move(inserted)});

    int best = -1;
    TimeNs best_worst = 0;
    Derivation best_der;
    Ordering best_ord;
    std::string reasons;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const MergeKind kind = cands[c].kind;
      Ordering cand = std::move(cands[c].ordering);
      std::string why;
      for (bool retry = opt.reorder_retry;; retry = false) {
        Derivation d = derive_configuration(ctx, cand);
        if (d.ok()) {
          Check chk = check_all(ctx, d, admitted, sid);
          if (chk.ok) {
            if (best < 0 || chk.worst < best_worst) {
              best = static_cast<int>(c);
              best_worst = chk.worst;
              best_der = std::move(d);
              best_ord = std::move(cand);
            }
            why.clear();
            break;
          }
          why = chk.reason;
        } else {
          why = to_string(d.status);
          break;
        }
        if (!retry) break;
        cand = reorder_by_ready(ctx, cand);
      }
      if (why.empty()) continue;
      if (!reasons.empty()) reasons += "; ";
      reasons += std::string(to_string(kind)) + ": " + why;
    }
    if (best < 0) {
      result.rejected.push_back({s.id, reasons});
      continue;
    }
    ord = std::move(best_ord);
    der = std::move(best_der);
    admitted.push_back(sid);
    result.accepted.push_back(s.id);
  }

  result.config = make_configuration(ctx, ord, der, admitted, opt.mode, opt.policing);
  return result;
}

ScheduleResult schedule(const NetworkGraph& g, const std::vector<Stream>& streams, Mode mode) {
  if (mode != Mode::Fips && mode != Mode::Sti)
    throw Error(ErrorCode::ConfigMismatch, "schedule() handles fips and sti; use schedule_scalar for med/max");
  ScheduleOptions opt;
  opt.mode = mode;
  opt.merge = mode == Mode::Fips;
  return run_schedule(g, streams, opt);
}

}  // namespace fips
