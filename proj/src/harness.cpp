#include "fips/harness.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <functional>
#include <mutex>
#include <map>
#include <set>
#include <thread>

#include "fips/baselines.hpp"

namespace fips {

namespace {

// {low_ns, up_ns, count}, counts scaled to a total of 99999.
constexpr Bin kMeasuredBins[] = {
    {3803000, 3906000, 1}, {3906000, 4009000, 11}, {4009000, 4112000, 11}, {4112000, 4215000, 29},
    {4215000, 4318000, 41}, {4318000, 4421000, 55}, {4421000, 4524000, 88}, {4524000, 4627000, 136},
    {4627000, 4730000, 161}, {4730000, 4833000, 224}, {4833000, 4936000, 372}, {4936000, 5039000, 452},
    {5039000, 5142000, 866}, {5142000, 5245000, 1582}, {5245000, 5348000, 2163}, {5348000, 5451000, 3399},
    {5451000, 5554000, 3653}, {5554000, 5657000, 5760}, {5657000, 5760000, 6254}, {5760000, 5863000, 8382},
    {5863000, 5966000, 6751}, {5966000, 6069000, 3065}, {6069000, 6172000, 1778}, {6172000, 6275000, 2070},
    {6275000, 6378000, 1947}, {6378000, 6481000, 2322}, {6481000, 6584000, 2457}, {6584000, 6687000, 2623},
    {6687000, 6790000, 3085}, {6790000, 6893000, 3164}, {6893000, 6996000, 4050}, {6996000, 7099000, 3587},
    {7099000, 7202000, 4674}, {7202000, 7305000, 3896}, {7305000, 7408000, 4160}, {7408000, 7511000, 3652},
    {7511000, 7614000, 3066}, {7614000, 7717000, 3047}, {7717000, 7820000, 2029}, {7820000, 7923000, 1577},
    {7923000, 8026000, 345}, {8026000, 8129000, 41}, {8129000, 8232000, 26}, {8232000, 8335000, 44},
    {8335000, 8438000, 48}, {8438000, 8541000, 33}, {8541000, 8644000, 41}, {8644000, 8747000, 93},
    {8747000, 8850000, 57}, {8850000, 8953000, 75}, {8953000, 9056000, 116}, {9056000, 9159000, 262},
    {9159000, 9262000, 180}, {9262000, 9365000, 104}, {9365000, 9468000, 103}, {9468000, 9571000, 219},
    {9571000, 9674000, 187}, {9674000, 9777000, 109}, {9777000, 9880000, 183}, {9880000, 9983000, 148},
    {9983000, 10086000, 39}, {10086000, 10189000, 17}, {10189000, 10292000, 20}, {10292000, 10395000, 20},
    {10395000, 10498000, 28}, {10498000, 10601000, 24}, {10601000, 10704000, 30}, {10704000, 10807000, 171},
    {10807000, 10910000, 45}, {10910000, 11013000, 27}, {11013000, 11116000, 37}, {11116000, 11219000, 50},
    {11219000, 11322000, 33}, {11322000, 11425000, 46}, {11425000, 11528000, 70}, {11528000, 11631000, 158},
    {11631000, 11734000, 57}, {11734000, 11837000, 23}, {11837000, 11940000, 20}, {11940000, 12043000, 5},
    {12043000, 12146000, 1}, {12146000, 12249000, 0}, {12249000, 12352000, 1}, {12352000, 12455000, 1},
    {12455000, 12558000, 0}, {12558000, 12661000, 3}, {12661000, 12764000, 6}, {12764000, 12867000, 1},
    {12867000, 12970000, 1}, {12970000, 13073000, 1}, {13073000, 13176000, 1}, {13176000, 13279000, 1},
    {13279000, 13382000, 0}, {13382000, 13485000, 0}, {13485000, 13588000, 4}, {13588000, 13691000, 0},
    {13691000, 13794000, 2}, {13794000, 13897000, 0}, {13897000, 14000000, 2},
};

}  // namespace

DelayHistogram measured_histogram() {
  return DelayHistogram(std::vector<Bin>(std::begin(kMeasuredBins), std::end(kMeasuredBins)));
}

NetworkGraph gen_agv_topology(const AgvParams& p) {
  if (p.agv_end_stations < 2 || p.backbone_depth < 2 || p.end_stations_per_leaf < 1)
    throw Error(ErrorCode::InvalidLink, "AGV topology needs >= 2 AGV end stations and a backbone of depth >= 2");
  NetworkSpec spec;
  spec.histograms["5g"] = measured_histogram();
  auto node = [&](const std::string& id, NodeRole role) { spec.nodes.push_back({id, role}); };
  std::vector<std::pair<std::string, std::string>> cables;

  // AGV partition.
  node("L0", NodeRole::Bridge);
  node("L1", NodeRole::Bridge);
  node("L2", NodeRole::Bridge);
  cables.push_back({"L1", "L2"});
  cables.push_back({"L0", "L1"});
  cables.push_back({"L0", "L2"});
  for (int i = 0; i < p.agv_end_stations; ++i) {
    const std::string id = "L" + std::to_string(3 + i);
    node(id, NodeRole::EndStation);
    cables.push_back({i < (p.agv_end_stations + 1) / 2 ? "L1" : "L2", id});
  }

  // Backbone: complete binary tree of switches R0..R(2^depth - 2).
  const int switches = (1 << p.backbone_depth) - 1;
  for (int i = 0; i < switches; ++i) node("R" + std::to_string(i), NodeRole::Bridge);
  cables.push_back({"R1", "R2"});
  for (int i = 1; i < switches; ++i) cables.push_back({"R" + std::to_string((i - 1) / 2), "R" + std::to_string(i)});
  int next = switches;
  for (int leaf = switches / 2; leaf < switches; ++leaf)
    for (int k = 0; k < p.end_stations_per_leaf; ++k) {
      const std::string id = "R" + std::to_string(next++);
      node(id, NodeRole::EndStation);
      cables.push_back({"R" + std::to_string(leaf), id});
    }

  node("DS-TT", NodeRole::DsTt);
  node("NW-TT", NodeRole::NwTt);
  cables.push_back({"L0", "DS-TT"});
  cables.push_back({"R0", "NW-TT"});

  for (const auto& [a, b] : cables)
    for (const auto& [s, d] : {std::pair{a, b}, std::pair{b, a}}) {
      NetworkSpec::LinkSpec l;
      l.src = s;
      l.dst = d;
      l.rate_bps = p.rate_bps;
      l.prop = p.prop;
      l.proc = p.proc;
      spec.links.push_back(l);
    }
  for (const auto& [s, d] : {std::pair<std::string, std::string>{"DS-TT", "NW-TT"}, {"NW-TT", "DS-TT"}}) {
    NetworkSpec::LinkSpec l;
    l.src = s;
    l.dst = d;
    l.kind = LinkKind::Wireless;
    l.histogram = "5g";
    spec.links.push_back(l);
  }
  return build_network(spec);
}

std::vector<std::string> shortest_path(const NetworkGraph& g, const std::string& src, const std::string& dst) {
  const int s = g.node_index(src);
  const int d = g.node_index(dst);
  if (s < 0 || d < 0) throw Error(ErrorCode::NoPath, src + " -> " + dst + ": unknown node");
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const Link& l : g.links) adj[l.src].push_back(l.dst);
  std::vector<int> parent(g.nodes.size(), -2);
  std::deque<int> queue{s};
  parent[s] = -1;
  while (!queue.empty() && parent[d] == -2) {
    const int u = queue.front();
    queue.pop_front();
    // End stations only terminate paths.
    if (u != s && g.nodes[u].role == NodeRole::EndStation) continue;
    for (int v : adj[u])
      if (parent[v] == -2) {
        parent[v] = u;
        queue.push_back(v);
      }
  }
  if (parent[d] == -2) throw Error(ErrorCode::NoPath, src + " -> " + dst);
  std::vector<std::string> path;
  for (int v = d; v != -1; v = parent[v]) path.push_back(g.nodes[v].id);
  std::reverse(path.begin(), path.end());
  return path;
}

const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::WiredAgv: return "wired-agv";
    case GroupKind::WiredBackbone: return "wired-backbone";
    case GroupKind::Uplink: return "uplink";
    case GroupKind::Downlink: return "downlink";
  }
  return "uplink";
}

GroupKind group_kind_from_string(const std::string& s) {
  if (s == "wired-agv") return GroupKind::WiredAgv;
  if (s == "wired-backbone") return GroupKind::WiredBackbone;
  if (s == "uplink") return GroupKind::Uplink;
  if (s == "downlink") return GroupKind::Downlink;
  throw Error(ErrorCode::Parse, "unknown stream group kind '" + s + "'");
}

namespace {

StreamGroup wired(const std::string& name, GroupKind kind, int count) {
  StreamGroup g;
  g.name = name;
  g.kind = kind;
  g.count = count;
  g.period = 5 * kMs;
  g.latency = 500 * kUs;
  g.jitter = 1 * kUs;
  g.reliability = 1.0;
  return g;
}

StreamGroup wireless(const std::string& name, GroupKind kind, int count, double rel) {
  StreamGroup g;
  g.name = name;
  g.kind = kind;
  g.count = count;
  g.reliability = rel;
  return g;
}

}  // namespace

ScenarioSpec reliability_scenario() {
  ScenarioSpec s;
  s.groups.push_back(wired("wired-agv", GroupKind::WiredAgv, 5));
  s.groups.push_back(wired("wired-bb", GroupKind::WiredBackbone, 5));
  auto hc_up = wireless("hc-up", GroupKind::Uplink, 5, 0.9999);
  auto hc_down = wireless("hc-down", GroupKind::Downlink, 5, 0.9999);
  hc_up.critical = hc_down.critical = true;
  s.groups.push_back(hc_up);
  s.groups.push_back(hc_down);
  s.groups.push_back(wireless("bg-up", GroupKind::Uplink, 40, 0.5));
  s.groups.push_back(wireless("bg-down", GroupKind::Downlink, 40, 0.5));
  s.seed = 1;
  s.n_cycles = 10'000;
  return s;
}

ScenarioSpec scalability_scenario() {
  ScenarioSpec s;
  s.groups.push_back(wired("wired-agv", GroupKind::WiredAgv, 15));
  s.groups.push_back(wired("wired-bb", GroupKind::WiredBackbone, 15));
  auto up = wireless("up", GroupKind::Uplink, 200, 0.9);
  auto down = wireless("down", GroupKind::Downlink, 200, 0.9);
  up.on_grid = down.on_grid = true;
  s.groups.push_back(up);
  s.groups.push_back(down);
  for (double r : {0.9, 0.99, 0.999, 0.9999}) s.grid.push_back({r, 100 * kUs});
  for (double r : {0.9, 0.9999})
    for (TimeNs j : {1, 20, 40, 60, 80}) s.grid.push_back({r, j * kUs});
  s.seed = 1;
  s.replications = 10;
  s.n_cycles = 0;
  return s;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over the pair
  std::uint64_t z = master * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<StreamSpec> gen_stream_set(const NetworkGraph& g, const ScenarioSpec& spec, std::uint64_t seed,
                                       const GridPoint* point) {
  std::vector<std::string> agv, backbone;
  for (const Node& n : g.nodes) {
    if (n.role != NodeRole::EndStation) continue;
    (n.id.rfind("L", 0) == 0 ? agv : backbone).push_back(n.id);
  }
  Rng rng(seed);
  auto pick = [&](const std::vector<std::string>& from) { return from[rng() % from.size()]; };

  std::vector<StreamSpec> out;
  for (const auto& grp : spec.groups) {
    if (grp.count < 0) throw Error(ErrorCode::InvalidStream, "negative count in group " + grp.name);
    for (int k = 0; k < grp.count; ++k) {
      std::string talker, listener;
      switch (grp.kind) {
        case GroupKind::WiredAgv:
        case GroupKind::WiredBackbone: {
          const auto& es = grp.kind == GroupKind::WiredAgv ? agv : backbone;
          if (es.size() < 2) throw Error(ErrorCode::NoPath, "partition has fewer than two end stations");
          const std::size_t a = rng() % es.size();
          std::size_t b = rng() % (es.size() - 1);
          if (b >= a) ++b;
          talker = es[a];
          listener = es[b];
          break;
        }
        case GroupKind::Uplink:
          talker = pick(agv);
          listener = pick(backbone);
          break;
        case GroupKind::Downlink:
          talker = pick(backbone);
          listener = pick(agv);
          break;
      }
      StreamSpec s;
      s.id = grp.name + "-" + std::to_string(k);
      s.path = shortest_path(g, talker, listener);
      s.period = grp.period;
      s.phase = static_cast<TimeNs>(rng() % static_cast<std::uint64_t>(std::max<TimeNs>(1, grp.period / kUs))) * kUs;
      s.size_bytes = grp.size_bytes;
      s.latency_bound = grp.latency;
      s.jitter_bound = grp.jitter;
      s.rel_ppb = to_ppb(grp.reliability);
      if (grp.on_grid && point) {
        s.rel_ppb = to_ppb(point->reliability);
        s.jitter_bound = point->jitter;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ReliabilityReport exp_reliability(const ScenarioSpec& spec, const std::vector<Mode>& modes) {
  ReliabilityReport rep;
  rep.spec = spec;
  rep.stream_seed = derive_seed(spec.seed, 0);
  const NetworkGraph g = gen_agv_topology(spec.topology);
  const auto streams = resolve_streams(g, gen_stream_set(g, spec, rep.stream_seed));

  std::set<std::string> critical;
  std::size_t pos = 0;
  for (const auto& grp : spec.groups) {
    for (int k = 0; k < grp.count; ++k, ++pos)
      if (grp.critical) critical.insert(streams[pos].id);
  }

  rep.modes.resize(modes.size());
  parallel_for(modes.size(), [&](std::size_t i) {
    ModeResult& m = rep.modes[i];
    m.mode = modes[i];
    const ScheduleResult sched = schedule_any(g, streams, m.mode);
    m.accepted = sched.accepted;
    m.rejected = sched.rejected;
    SimOptions opt;
    opt.n_cycles = spec.n_cycles;
    opt.seed = derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(m.mode));
    m.qos = run_hypercycles(sched.config, g, streams, opt).qos;
    m.critical.id = "critical";
    m.critical_total = static_cast<int>(critical.size());
    for (const auto& id : sched.accepted) m.critical_accepted += critical.count(id) ? 1 : 0;
    for (const auto& q : m.qos.streams)
      if (critical.count(q.id)) m.critical.merge(q);
  });
  return rep;
}

double ScalabilityPoint::fips_mean() const {
  double s = 0;
  for (int v : fips) s += v;
  return fips.empty() ? 0.0 : s / static_cast<double>(fips.size());
}

double ScalabilityPoint::sti_mean() const {
  double s = 0;
  for (int v : sti) s += v;
  return sti.empty() ? 0.0 : s / static_cast<double>(sti.size());
}

ScalabilityReport exp_scalability(const ScenarioSpec& spec) {
  ScalabilityReport rep;
  rep.spec = spec;
  if (spec.grid.empty()) throw Error(ErrorCode::InvalidStream, "scalability grid is empty");
  if (spec.replications < 1) throw Error(ErrorCode::InvalidStream, "replications must be >= 1");
  const NetworkGraph g = gen_agv_topology(spec.topology);
  const std::size_t P = spec.grid.size();
  const std::size_t R = static_cast<std::size_t>(spec.replications);
  rep.points.resize(P);
  for (std::size_t p = 0; p < P; ++p) {
    rep.points[p].point = spec.grid[p];
    rep.points[p].fips.assign(R, 0);
    rep.points[p].sti.assign(R, 0);
  }

  parallel_for(P * R * 2, [&](std::size_t task) {
    const std::size_t p = task / (R * 2);
    const std::size_t r = (task / 2) % R;
    const Mode mode = task % 2 == 0 ? Mode::Fips : Mode::Sti;
    const auto streams = resolve_streams(g, gen_stream_set(g, spec, derive_seed(spec.seed, r), &spec.grid[p]));
    std::set<std::string> wireless;
    for (const auto& s : streams)
      if (s.wireless_hop(g) >= 0) wireless.insert(s.id);
    int n = 0;
    for (const auto& id : schedule(g, streams, mode).accepted) n += wireless.count(id) ? 1 : 0;
    (mode == Mode::Fips ? rep.points[p].fips : rep.points[p].sti)[r] = n;
  });
  return rep;
}

}  // namespace fips
