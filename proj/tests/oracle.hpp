#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fips/model.hpp"
#include "fips/scheduler.hpp"

// Reference implementations that share no code with the library beyond its
// data types.
namespace oracle {

using fips::TimeNs;

// Smallest bin up-edge whose cumulative count reaches rel: the first bin with
// floor(cum * 1e9 / total) >= ppb. Counts must stay below 1.8e10.
inline TimeNs percentile_up(const std::vector<fips::Bin>& bins, std::int64_t ppb) {
  std::uint64_t total = 0;
  for (const auto& b : bins) total += b.count;
  std::uint64_t cum = 0;
  for (const auto& b : bins) {
    cum += b.count;
    if (cum * 1'000'000'000ULL / total >= static_cast<std::uint64_t>(ppb)) return b.up;
  }
  return -1;
}

inline TimeNs ceil_div(TimeNs a, TimeNs b) { return (a + b - 1) / b; }

// S[to] >= S[from] + w, or S[to] >= w when from < 0.
struct Req {
  int to;
  int from;
  TimeNs w;
};

// The C1-C3 start-time constraints of one transmission ordering, written out
// frame by frame, together with the gate wrap-around of each Ethernet port.
// Wireless links are frequency multiplexed: they carry no C2 and no C3 is
// taken toward them.
class StartTimeProblem {
 public:
  StartTimeProblem(const fips::SchedContext& ctx, const fips::Ordering& ord) : ctx_(ctx), ord_(ord) {
    for (std::size_t p = 0; p < ord.ports.size(); ++p)
      for (std::size_t i = 0; i < ord.ports[p].size(); ++i) {
        id_[{static_cast<int>(p), static_cast<int>(i)}] = static_cast<int>(vars_.size());
        vars_.push_back({static_cast<int>(p), static_cast<int>(i)});
        budget_.push_back(budget(static_cast<int>(p), ord.ports[p][i]));
      }
    build();
  }

  int size() const { return static_cast<int>(vars_.size()); }
  const std::vector<Req>& reqs() const { return reqs_; }
  std::pair<int, int> var(int v) const { return vars_[v]; }
  int var_of(int port, int batch) const { return id_.at({port, batch}); }
  TimeNs budget_of(int v) const { return budget_[v]; }

  bool satisfied(const std::vector<TimeNs>& x) const {
    for (const Req& r : reqs_)
      if (x[r.to] < (r.from < 0 ? 0 : x[r.from]) + r.w) return false;
    return true;
  }

  // Largest start any least solution can need: every constraint path visits
  // each batch once and adds at most its budget.
  TimeNs upper_bound() const {
    TimeNs floor = 0;
    TimeNs sum = 0;
    for (const Req& r : reqs_)
      if (r.from < 0) floor = std::max(floor, r.w);
    for (TimeNs b : budget_) sum += b;
    return floor + sum;
  }

 private:
  TimeNs budget(int port, const fips::Batch& batch) const {
    const fips::Link& l = ctx_.net->links[port];
    if (l.is_wireless()) {
      TimeNs hi = 0;
      for (const auto& m : batch) hi = std::max(hi, pdb_of(m.frame, port).dmax());
      return hi;
    }
    TimeNs d = l.prop + l.proc;
    for (const auto& m : batch)
      d += ceil_div(static_cast<TimeNs>(ctx_.stream_of(m.frame).size_bytes) * 8'000'000'000, l.rate_bps);
    return d;
  }

  const fips::Pdb& pdb_of(int frame, int port) const {
    const auto& s = ctx_.stream_of(frame);
    for (int h = 0; h < s.hops(); ++h)
      if (s.ports[h] == port) return ctx_.pdb(frame, h);
    throw std::logic_error("frame does not use port");
  }

  int batch_at(int port, int frame) const {
    const auto& bs = ord_.ports[port];
    for (std::size_t i = 0; i < bs.size(); ++i)
      for (const auto& m : bs[i])
        if (m.frame == frame) return static_cast<int>(i);
    throw std::logic_error("frame missing from port");
  }

  void build() {
    const TimeNs H = ctx_.H;
    for (std::size_t f = 0; f < ctx_.frames.size(); ++f) {
      const int frame = static_cast<int>(f);
      const auto& s = ctx_.stream_of(frame);
      for (int h = 0; h < s.hops(); ++h) {
        const int p = s.ports[h];
        if (ord_.ports[p].empty()) continue;
        const int me = var_of(p, batch_at(p, frame));
        // C1: not before the latest arrival from the previous hop.
        if (h == 0) {
          reqs_.push_back({me, -1, ctx_.frames[f].release});
        } else {
          const int prev = var_of(s.ports[h - 1], batch_at(s.ports[h - 1], frame));
          reqs_.push_back({me, prev, budget_[prev]});
        }
        // C3: the earliest arrival downstream does not precede the end of
        // the batch ahead of it there.
        if (h + 1 < s.hops() && !ctx_.net->links[s.ports[h + 1]].is_wireless()) {
          const int q = s.ports[h + 1];
          const int j = batch_at(q, frame);
          const TimeNs dmin = ctx_.pdb(frame, h).dmin();
          if (j > 0) {
            const int ahead = var_of(q, j - 1);
            reqs_.push_back({me, ahead, budget_[ahead] - dmin});
          } else {
            const int last = var_of(q, static_cast<int>(ord_.ports[q].size()) - 1);
            reqs_.push_back({me, last, budget_[last] - dmin - H});
          }
        }
      }
    }
    for (std::size_t p = 0; p < ord_.ports.size(); ++p) {
      const auto n = static_cast<int>(ord_.ports[p].size());
      if (n == 0 || ctx_.net->links[p].is_wireless()) continue;
      const int port = static_cast<int>(p);
      // C2: after the previous batch has been sent.
      for (int i = 1; i < n; ++i) reqs_.push_back({var_of(port, i), var_of(port, i - 1), budget_[var_of(port, i - 1)]});
      // The last batch ends before the first one reopens.
      reqs_.push_back({var_of(port, 0), var_of(port, n - 1), budget_[var_of(port, n - 1)] - H});
    }
  }

  const fips::SchedContext& ctx_;
  const fips::Ordering& ord_;
  std::vector<std::pair<int, int>> vars_;
  std::map<std::pair<int, int>, int> id_;
  std::vector<TimeNs> budget_;
  std::vector<Req> reqs_;
};

// Depth-first enumeration of every assignment on a grid inside a box, with
// each constraint checked as soon as both of its ends are assigned.
class GridSearch {
 public:
  GridSearch(const StartTimeProblem& p, TimeNs step) : p_(p), step_(step) {
    const int n = p.size();
    // Assign next the variable tied by the most constraints to those already
    // assigned, so that violations surface early.
    std::vector<int> pos(n, -1);
    for (int k = 0; k < n; ++k) {
      int best = -1;
      int best_links = -1;
      for (int v = 0; v < n; ++v) {
        if (pos[v] >= 0) continue;
        int links = 0;
        for (const Req& r : p.reqs())
          if ((r.to == v && (r.from < 0 || pos[r.from] >= 0)) || (r.from == v && pos[r.to] >= 0)) ++links;
        if (links > best_links) {
          best = v;
          best_links = links;
        }
      }
      pos[best] = k;
      order_.push_back(best);
    }
    by_late_.assign(n, {});
    for (const Req& r : p.reqs()) by_late_[std::max(pos[r.to], r.from < 0 ? -1 : pos[r.from])].push_back(r);
  }

  // Visits every feasible grid point x with lo <= x <= hi. The callback
  // returns false to stop the search. Returns false if `limit` nodes were
  // expanded before the search finished.
  template <class F>
  bool each_solution(const std::vector<TimeNs>& lo, const std::vector<TimeNs>& hi, F&& on_solution,
                     std::uint64_t limit = 200'000'000) {
    x_.assign(p_.size(), 0);
    nodes_ = 0;
    limit_ = limit;
    stop_ = false;
    const bool done = dfs(0, lo, hi, on_solution);
    return done || stop_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  template <class F>
  bool dfs(int k, const std::vector<TimeNs>& lo, const std::vector<TimeNs>& hi, F& on_solution) {
    if (k == p_.size()) {
      if (!on_solution(x_)) stop_ = true;
      return true;
    }
    const int v = order_[k];
    for (TimeNs t = lo[v]; t <= hi[v]; t += step_) {
      if (++nodes_ > limit_) return false;
      x_[v] = t;
      bool ok = true;
      for (const Req& r : by_late_[k]) {
        const TimeNs base = r.from < 0 ? 0 : x_[r.from];
        if (x_[r.to] < base + r.w) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      if (!dfs(k + 1, lo, hi, on_solution)) return false;
      if (stop_) return true;
    }
    return true;
  }

  const StartTimeProblem& p_;
  TimeNs step_;
  std::vector<int> order_;
  std::vector<std::vector<Req>> by_late_;  // by the search position of their later end
  std::vector<TimeNs> x_;
  std::uint64_t nodes_ = 0;
  std::uint64_t limit_ = 0;
  bool stop_ = false;
};

struct Verdict {
  bool searched = true;  // false if the node limit was hit
  bool feasible = false;
  std::vector<TimeNs> least;
};

// Least C1-C3 assignment on the grid, by exhaustive enumeration of the box
// [0, upper_bound]^n. The feasible set of difference constraints is closed
// under componentwise minimum, so the componentwise minimum over all feasible
// grid points is itself the least solution.
inline Verdict least_by_enumeration(const StartTimeProblem& p, TimeNs step, std::uint64_t limit = 200'000'000) {
  const int n = p.size();
  const TimeNs ub = (p.upper_bound() + step - 1) / step * step;
  std::vector<TimeNs> lo(n, 0);
  std::vector<TimeNs> hi(n, ub);
  Verdict v;
  v.least.assign(n, fips::kInf);
  GridSearch g(p, step);
  v.searched = g.each_solution(
      lo, hi,
      [&](const std::vector<TimeNs>& x) {
        v.feasible = true;
        for (int i = 0; i < n; ++i) v.least[i] = std::min(v.least[i], x[i]);
        return true;
      },
      limit);
  return v;
}

// Cheaper check of a claimed least solution s: s is feasible, and no other
// feasible grid point lies in [0, s]. Any smaller solution would put the
// least one in that box.
inline std::optional<std::vector<TimeNs>> smaller_solution(const StartTimeProblem& p, const std::vector<TimeNs>& s,
                                                           TimeNs step, bool* searched = nullptr) {
  std::optional<std::vector<TimeNs>> found;
  GridSearch g(p, step);
  const bool done = g.each_solution(std::vector<TimeNs>(s.size(), 0), s, [&](const std::vector<TimeNs>& x) {
    if (x == s) return true;
    found = x;
    return false;
  });
  if (searched) *searched = done;
  return found;
}

}  // namespace oracle

namespace oracle {

// A handful of single-frame streams over a complete digraph of four bridges,
// one link of which is wireless, with random batches on every port. All
// delays are whole microseconds.
struct OrderingInstance {
  std::unique_ptr<fips::NetworkGraph> graph;
  std::unique_ptr<fips::SchedContext> ctx;
  fips::Ordering ordering;
};

inline OrderingInstance random_ordering_instance(std::uint64_t seed, int max_frames = 4, int max_hops = 3) {
  using namespace fips;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  constexpr int kNodes = 4;
  const TimeNs H = 1'000'000;

  NetworkSpec spec;
  for (int i = 0; i < kNodes; ++i) spec.nodes.push_back({"n" + std::to_string(i), NodeRole::Bridge});
  spec.histograms["h"] = DelayHistogram({{1000, 2000, 1}});
  for (int a = 0; a < kNodes; ++a)
    for (int b = 0; b < kNodes; ++b) {
      if (a == b) continue;
      NetworkSpec::LinkSpec l{"n" + std::to_string(a), "n" + std::to_string(b), LinkKind::Ethernet,
                              pick(0, 1) ? 800'000'000 : 400'000'000, pick(0, 2) == 0 ? 1000 : 0, 0, ""};
      if (a == 1 && b == 2) l = {"n1", "n2", LinkKind::Wireless, 0, 0, 0, "h"};
      spec.links.push_back(l);
    }

  OrderingInstance inst;
  inst.graph = std::make_unique<NetworkGraph>(build_network(spec));
  inst.ctx = std::make_unique<SchedContext>(*inst.graph, H);
  const NetworkGraph& g = *inst.graph;

  const int n = pick(1, max_frames);
  for (int i = 0; i < n; ++i) {
    Stream s;
    s.id = "f" + std::to_string(i);
    s.period = H;
    s.phase = pick(0, 4) * 1000;
    s.size_bytes = pick(0, 1) ? 100 : 200;
    s.latency_bound = H;
    s.jitter_bound = H;
    const int hops = pick(1, max_hops);
    std::vector<int> path{pick(0, kNodes - 1)};
    while (static_cast<int>(path.size()) <= hops) {
      std::vector<int> next;
      for (int v = 0; v < kNodes; ++v)
        if (std::find(path.begin(), path.end(), v) == path.end()) next.push_back(v);
      path.push_back(next[pick(0, static_cast<int>(next.size()) - 1)]);
    }
    s.path = path;
    std::vector<Pdb> pdbs;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const int l = g.link_index(path[k], path[k + 1]);
      s.ports.push_back(l);
      const Link& link = g.links[l];
      if (link.is_wireless()) {
        const TimeNs lo = pick(1, 3) * 1000;
        pdbs.push_back(Pdb{{lo, lo + pick(0, 3) * 1000}, 1, 1});
      } else {
        const TimeNs d = ceil_div(static_cast<TimeNs>(s.size_bytes) * 8'000'000'000, link.rate_bps) + link.prop;
        pdbs.push_back(Pdb{{d, d}, 1, 1});
      }
    }
    inst.ctx->add_stream(s, std::move(pdbs));
  }

  inst.ordering = Ordering(g.links.size());
  for (std::size_t p = 0; p < g.links.size(); ++p) {
    std::vector<int> users;
    for (std::size_t f = 0; f < inst.ctx->frames.size(); ++f)
      if (inst.ctx->stream_of(static_cast<int>(f)).hop_of_port(static_cast<int>(p)) >= 0)
        users.push_back(static_cast<int>(f));
    std::shuffle(users.begin(), users.end(), rng);
    auto& batches = inst.ordering.ports[p];
    for (std::size_t k = 0; k < users.size(); ++k) {
      if (k == 0 || pick(0, 9) < 7) batches.emplace_back();
      batches.back().push_back({users[k], 0});
    }
  }
  return inst;
}

// Heaviest simple cycle of the constraint graph, by enumerating every simple
// cycle from its smallest node. A positive cycle makes the constraints
// unsatisfiable: summing them around it gives 0 >= weight.
inline std::optional<TimeNs> heaviest_cycle(const StartTimeProblem& p) {
  const int n = p.size();
  std::vector<std::vector<std::pair<int, TimeNs>>> out(n);
  for (const Req& r : p.reqs())
    if (r.from >= 0) out[r.from].push_back({r.to, r.w});
  std::optional<TimeNs> best;
  std::vector<char> on_path(n, 0);
  auto dfs = [&](auto& self, int start, int v, TimeNs w) -> void {
    for (const auto& [u, e] : out[v]) {
      if (u == start) {
        if (!best || w + e > *best) best = w + e;
      } else if (u > start && !on_path[u]) {
        on_path[u] = 1;
        self(self, start, u, w + e);
        on_path[u] = 0;
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    on_path[s] = 1;
    dfs(dfs, s, s, 0);
    on_path[s] = 0;
  }
  return best;
}

// Compares derive_configuration with the constraints written out above. An
// accepted ordering must yield a feasible assignment with no other feasible
// grid point below it (exhaustive enumeration on a 1 us grid); a rejected one
// must contain a positive cycle.
inline std::string compare_with_enumeration(const OrderingInstance& inst, bool* derived_ok = nullptr) {
  constexpr TimeNs kGrid = 1000;
  const fips::Derivation d = fips::derive_configuration(*inst.ctx, inst.ordering);
  const StartTimeProblem p(*inst.ctx, inst.ordering);
  if (derived_ok) *derived_ok = d.ok();
  if (!d.ok()) {
    const auto cycle = heaviest_cycle(p);
    if (!cycle || *cycle <= 0)
      return std::string("rejected (") + fips::to_string(d.status) + ") without a positive cycle";
    return "";
  }
  std::vector<TimeNs> s(p.size());
  for (int v = 0; v < p.size(); ++v) {
    const auto [port, batch] = p.var(v);
    s[v] = d.S[port][batch];
    if (s[v] % kGrid != 0) return "start off the grid";
  }
  if (!p.satisfied(s)) return "derived starts violate a constraint";
  bool searched = false;
  if (smaller_solution(p, s, kGrid, &searched)) return "a smaller feasible assignment exists";
  if (!searched) return "minimality search did not finish";
  return "";
}

}  // namespace oracle
