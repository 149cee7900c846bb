#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "fips/baselines.hpp"
#include "fips/harness.hpp"
#include "fips/model.hpp"
#include "fips/pdb.hpp"
#include "fips/scheduler.hpp"
#include "fips/sim.hpp"

namespace testing {

using namespace fips;

class NetBuilder {
 public:
  NetBuilder& node(const std::string& id, NodeRole role = NodeRole::Bridge) {
    spec_.nodes.push_back({id, role});
    return *this;
  }
  NetBuilder& station(const std::string& id) { return node(id, NodeRole::EndStation); }

  NetBuilder& eth(const std::string& a, const std::string& b, std::int64_t rate = 100'000'000, TimeNs prop = 50,
                  TimeNs proc = 0, bool both = true) {
    spec_.links.push_back({a, b, LinkKind::Ethernet, rate, prop, proc, ""});
    if (both) spec_.links.push_back({b, a, LinkKind::Ethernet, rate, prop, proc, ""});
    return *this;
  }

  NetBuilder& radio(const std::string& a, const std::string& b, const std::string& hist) {
    spec_.links.push_back({a, b, LinkKind::Wireless, 0, 0, 0, hist});
    return *this;
  }

  NetBuilder& histogram(const std::string& name, DelayHistogram h) {
    spec_.histograms[name] = std::move(h);
    return *this;
  }

  const NetworkSpec& spec() const { return spec_; }
  NetworkGraph build() const { return build_network(spec_); }

 private:
  NetworkSpec spec_;
};

inline StreamSpec stream(const std::string& id, std::vector<std::string> path, TimeNs period = 5 * kMs,
                         TimeNs phase = 0, int size = 100, TimeNs latency = 5 * kMs, TimeNs jitter = 5 * kMs,
                         double rel = 1.0) {
  StreamSpec s;
  s.id = id;
  s.path = std::move(path);
  s.period = period;
  s.phase = phase;
  s.size_bytes = size;
  s.latency_bound = latency;
  s.jitter_bound = jitter;
  s.rel_ppb = to_ppb(rel);
  return s;
}

// Bins of equal width starting at `low`, one per count.
inline DelayHistogram uniform_bins(TimeNs low, TimeNs width, const std::vector<std::uint64_t>& counts) {
  std::vector<Bin> bins;
  for (std::size_t i = 0; i < counts.size(); ++i)
    bins.push_back({low + static_cast<TimeNs>(i) * width, low + static_cast<TimeNs>(i + 1) * width, counts[i]});
  return DelayHistogram(std::move(bins));
}

// Talker, bridge chain and listener: T - B1 - ... - Bn - L.
inline NetworkGraph chain(int bridges, std::int64_t rate = 100'000'000, TimeNs prop = 50) {
  NetBuilder b;
  b.station("T");
  for (int i = 1; i <= bridges; ++i) b.node("B" + std::to_string(i));
  b.station("L");
  std::string prev = "T";
  for (int i = 1; i <= bridges; ++i) {
    b.eth(prev, "B" + std::to_string(i), rate, prop);
    prev = "B" + std::to_string(i);
  }
  b.eth(prev, "L", rate, prop);
  return b.build();
}

inline std::vector<std::string> chain_path(int bridges) {
  std::vector<std::string> p{"T"};
  for (int i = 1; i <= bridges; ++i) p.push_back("B" + std::to_string(i));
  p.push_back("L");
  return p;
}

// A small 5G-TSN network: device-side stations behind DS-TT, network-side
// stations behind a bridge at NW-TT.
//   D1, D2 - SW - DS-TT ~~ NW-TT - BR - N1, N2
inline NetworkGraph small_5g(const DelayHistogram& h) {
  NetBuilder b;
  b.station("D1").station("D2").node("SW").node("DS-TT", NodeRole::DsTt).node("NW-TT", NodeRole::NwTt);
  b.node("BR").station("N1").station("N2");
  b.eth("D1", "SW").eth("D2", "SW").eth("SW", "DS-TT").eth("NW-TT", "BR").eth("BR", "N1").eth("BR", "N2");
  b.histogram("radio", h).radio("DS-TT", "NW-TT", "radio").radio("NW-TT", "DS-TT", "radio");
  return b.build();
}

// Random network of at most `max_nodes` nodes: a random bridge tree with end
// stations hung off it, optionally joined to a second tree by a 5G bridge.
struct RandomInstance {
  NetworkGraph graph;
  std::vector<Stream> streams;
};

inline RandomInstance random_instance(std::uint64_t seed, int max_nodes = 10, int max_streams = 20) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  NetBuilder b;
  const bool radio = pick(0, 2) > 0;
  const int budget = radio ? max_nodes - 2 : max_nodes;
  const int sides = radio ? 2 : 1;
  std::vector<std::vector<std::string>> stations(sides);
  int made = 0;
  for (int side = 0; side < sides; ++side) {
    const int share = budget / sides;
    const int bridges = pick(1, std::max(1, share / 2 - 1));
    const int hosts = share - bridges;
    std::vector<std::string> br;
    for (int i = 0; i < bridges; ++i) {
      br.push_back("B" + std::to_string(made++));
      b.node(br.back());
      if (i > 0) b.eth(br[pick(0, i - 1)], br.back(), pick(0, 1) ? 100'000'000 : 1'000'000'000, 50);
    }
    for (int i = 0; i < hosts; ++i) {
      stations[side].push_back("E" + std::to_string(made++));
      b.station(stations[side].back());
      b.eth(br[pick(0, bridges - 1)], stations[side].back(), 100'000'000, 50);
    }
    if (radio) {
      const std::string tt = side == 0 ? "DS-TT" : "NW-TT";
      b.node(tt, side == 0 ? NodeRole::DsTt : NodeRole::NwTt);
      b.eth(br[pick(0, bridges - 1)], tt);
    }
  }
  if (radio) {
    const auto scale = static_cast<TimeNs>(pick(1, 4));
    b.histogram("radio", uniform_bins(500 * kUs * scale, 100 * kUs * scale, {5, 20, 40, 20, 10, 4, 1}));
    b.radio("DS-TT", "NW-TT", "radio").radio("NW-TT", "DS-TT", "radio");
  }
  RandomInstance out{b.build(), {}};

  std::vector<std::string> all;
  for (const auto& s : stations) all.insert(all.end(), s.begin(), s.end());
  const int n = pick(1, max_streams);
  const std::vector<double> rels{0.5, 0.9, 0.99, 0.999};
  for (int i = 0; i < n; ++i) {
    std::string src;
    std::string dst;
    bool crosses = false;
    if (radio && pick(0, 1)) {
      const int up = pick(0, 1);
      src = stations[up ? 0 : 1][pick(0, static_cast<int>(stations[up ? 0 : 1].size()) - 1)];
      dst = stations[up ? 1 : 0][pick(0, static_cast<int>(stations[up ? 1 : 0].size()) - 1)];
      crosses = true;
    } else {
      const auto& side = stations[pick(0, sides - 1)];
      if (side.size() < 2) continue;
      src = side[pick(0, static_cast<int>(side.size()) - 1)];
      do dst = side[pick(0, static_cast<int>(side.size()) - 1)];
      while (dst == src);
    }
    const TimeNs period = crosses ? 20 * kMs : (pick(0, 1) ? 5 * kMs : 10 * kMs);
    StreamSpec s = stream("s" + std::to_string(i), shortest_path(out.graph, src, dst), period,
                          static_cast<TimeNs>(pick(0, 999)) * kUs, pick(64, 600), period,
                          crosses ? static_cast<TimeNs>(pick(1, 20)) * 100 * kUs : static_cast<TimeNs>(pick(1, 50)) * kUs,
                          crosses ? rels[pick(0, 3)] : 1.0);
    out.streams.push_back(resolve_stream(out.graph, s));
  }
  return out;
}

inline std::vector<Stream> accepted_streams(const std::vector<Stream>& all, const ScheduleResult& r) {
  std::vector<Stream> out;
  for (const auto& s : all)
    if (std::binary_search(r.config.accepted.begin(), r.config.accepted.end(), s.id)) out.push_back(s);
  return out;
}

}  // namespace testing
