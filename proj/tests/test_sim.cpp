#include <cmath>
#include <set>

#include "doctest.h"
#include "support.hpp"

using namespace fips;
using namespace testing;

namespace {

struct Scheduled {
  NetworkGraph g;
  std::vector<Stream> streams;
  ScheduleResult r;
};

Scheduled radio_pair(double rel, Mode mode = Mode::Fips) {
  Scheduled s{small_5g(measured_histogram()), {}, {}};
  s.streams = resolve_streams(s.g, {stream("up", {"D1", "SW", "DS-TT", "NW-TT", "BR", "N1"}, 20 * kMs, 0, 100,
                                           20 * kMs, 100 * kUs, rel),
                                    stream("down", {"N2", "BR", "NW-TT", "DS-TT", "SW", "D2"}, 20 * kMs, 3 * kMs,
                                           100, 20 * kMs, 100 * kUs, rel),
                                    stream("wired", {"D1", "SW", "D2"}, 5 * kMs, 0, 100, 500 * kUs, 1 * kUs)});
  s.r = schedule_any(s.g, s.streams, mode);
  return s;
}

SimResult simulate(const Scheduled& s, int cycles, std::uint64_t seed, bool clip = false, bool trace = false) {
  SimOptions opt;
  opt.n_cycles = cycles;
  opt.seed = seed;
  opt.clip_to_pdb = clip;
  opt.keep_trace = trace;
  return run_hypercycles(s.r.config, s.g, s.streams, opt);
}

}  // namespace

TEST_CASE("sample_delay: Ethernet is deterministic") {
  const NetworkGraph g = chain(1);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(sample_delay(g, 0, 100, rng) == 8050);
  CHECK(sample_delay(g, 0, 1500, rng) == ethernet_delay(g.links[0], 1500).hi);
}

TEST_CASE("sample_delay: wireless draws stay inside the drawn bin") {
  NetBuilder b;
  b.node("A").node("B").histogram("h", DelayHistogram({{1000, 1010, 1}})).radio("A", "B", "h");
  const NetworkGraph g = b.build();
  Rng rng(2);
  std::set<TimeNs> seen;
  for (int i = 0; i < 2000; ++i) {
    const TimeNs d = sample_delay(g, 0, 100, rng);
    CHECK(d >= 1000);
    CHECK(d < 1010);
    seen.insert(d);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("sample_delay: empirical mass matches the histogram") {
  const DelayHistogram h = measured_histogram();
  const NetworkGraph g = small_5g(h);
  const int radio = g.link_index(g.node_index("DS-TT"), g.node_index("NW-TT"));
  const DelaySampler sampler(g);
  Rng rng(3);
  constexpr int kN = 100'000;
  std::vector<TimeNs> draws(kN);
  for (auto& d : draws) d = sampler.sample(radio, 100, rng);
  for (double rel : {0.5, 0.9, 0.99, 0.9999}) {
    const Pdb p = allocate_pdb(h, to_ppb(rel));
    const double expect = static_cast<double>(p.mass_num) / static_cast<double>(p.mass_den);
    const auto inside = std::count_if(draws.begin(), draws.end(), [&](TimeNs d) { return d < p.dmax(); });
    const double sigma = std::sqrt(expect * (1 - expect) / kN);
    CHECK(std::abs(static_cast<double>(inside) / kN - expect) <= 4 * sigma + 1e-12);
  }
  std::sort(draws.begin(), draws.end());
  const TimeNs q = draws[static_cast<std::size_t>(0.9999 * kN)];
  CHECK(std::abs(q - 13'176'000) <= 103'000);
  CHECK(draws.front() >= h.min());
  CHECK(draws.back() < h.max());
}

TEST_CASE("single wired stream: every frame arrives after the path delay") {
  Scheduled s{chain(2), {}, {}};
  s.streams = resolve_streams(s.g, {stream("a", chain_path(2), 5 * kMs, 100 * kUs)});
  s.r = schedule(s.g, s.streams, Mode::Fips);
  const SimResult out = simulate(s, 10, 7, false, true);
  const StreamQos& q = out.qos.streams[0];
  CHECK(q.released == 10);
  CHECK(q.counted == 10);
  CHECK(q.delivered == 10);
  CHECK(q.reliability() == 1.0);
  CHECK(q.latency_min == 3 * 8050);
  CHECK(q.latency_max == 3 * 8050);
  CHECK(q.jitter() == 0);
  CHECK(out.trace.packets.size() == 10);
  CHECK(validate_trace(out.trace, s.r.config, s.g, s.streams).empty());
}

TEST_CASE("simulated traces pass validation") {
  for (bool clip : {true, false}) {
    const Scheduled s = radio_pair(0.9);
    REQUIRE(s.r.accepted.size() == 3);
    const SimResult out = simulate(s, 300, 11, clip, true);
    const auto v = validate_trace(out.trace, s.r.config, s.g, s.streams);
    CHECK(v.empty());
    if (!v.empty()) MESSAGE(v[0].constraint << ": " << v[0].detail);
    CHECK(measure_qos({out.trace}, s.streams) == out.qos);
  }
}

TEST_CASE("measure_qos on hand-built traces") {
  const NetworkGraph g = chain(1);
  const auto streams = resolve_streams(g, {stream("a", chain_path(1), 5 * kMs, 0, 100, 1 * kMs, 1 * kMs)});
  auto packet = [&](int cycle, TimeNs lat, DropEvent drop) {
    PacketRecord p;
    p.stream = 0;
    p.cycle = cycle;
    p.release = cycle * 5 * kMs;
    p.listener_window = {p.release, p.release + 1 * kMs};
    p.hops.resize(2);
    p.hops[0] = {p.release, p.release, 8050, 8050, true};
    p.drop = drop;
    if (drop == DropEvent::None) {
      p.arrived = true;
      p.hops[1] = {p.release + 8050, p.release + lat - 8050, 8050, 8050, true};
    } else {
      p.drop_node = 1;
      p.hops[1].reached = true;
    }
    return p;
  };
  Trace t;
  t.hypercycle = 5 * kMs;
  t.n_cycles = 4;
  for (int c = 0; c < 4; ++c) t.packets.push_back(packet(c, 20000, c % 2 ? DropEvent::PsfpDrop : DropEvent::None));
  const QosReport q = measure_qos({t}, streams);
  const StreamQos& sq = q.streams[0];
  CHECK(sq.counted == 4);
  CHECK(sq.delivered == 2);
  CHECK(sq.psfp_drops == 2);
  CHECK(sq.reliability() == 0.5);
  CHECK(sq.jitter() == 0);
  CHECK(sq.latency_min == 20000);

  // Late beyond the bound: arrives but is not on time.
  t.packets[0] = packet(0, 2 * kMs, DropEvent::None);
  const StreamQos late = measure_qos({t}, streams).streams[0];
  CHECK(late.arrived == 2);
  CHECK(late.on_time == 1);
  CHECK(late.delivered == 1);
  CHECK(late.latency_max == 2 * kMs);
  CHECK(late.delivered_max == 20000);

  // In flight at the end of the run: excluded only when released in the final cycle.
  t.packets[3].drop = DropEvent::None;
  t.packets[3].in_flight = true;
  t.packets[1].drop = DropEvent::None;
  t.packets[1].in_flight = true;
  const StreamQos fl = measure_qos({t}, streams).streams[0];
  CHECK(fl.excluded == 1);
  CHECK(fl.in_flight == 2);
  CHECK(fl.counted == 3);
}

TEST_CASE("PortGate") {
  const PortGate g({{10, 20}, {20, 30}, {50, 60}}, 100);
  REQUIRE(g.windows().size() == 2);
  CHECK(g.windows()[0] == GclWindow{10, 30});
  CHECK(g.next_fit(0, 5) == 10);
  CHECK(g.next_fit(12, 18) == 12);
  CHECK(g.next_fit(25, 10) == 50);
  CHECK(g.next_fit(95, 10) == 110);
  CHECK(g.next_fit(0, 25) == kInf);
  CHECK(g.close_at(15) == 30);
  CHECK(g.close_at(30) == 30);
  CHECK(g.close_at(40) == -1);
  CHECK(g.close_at(255) == 260);

  const PortGate wrap({{90, 110}}, 100);
  CHECK(wrap.next_fit(0, 5) == 0);
  CHECK(wrap.next_fit(5, 10) == 90);
  CHECK(wrap.close_at(105) == 110);
  CHECK(wrap.close_at(5) == 10);

  CHECK(PortGate({{0, 60}, {50, 110}}, 100).always_open());
  CHECK(PortGate({{3, 103}}, 100).always_open());
  CHECK(PortGate({}, 100).next_fit(0, 1) == kInf);
}

TEST_CASE("property: packets are conserved") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const RandomInstance inst = random_instance(seed + 500);
    const ScheduleResult r = schedule(inst.graph, inst.streams, Mode::Fips);
    SimOptions opt;
    opt.n_cycles = 20;
    opt.seed = seed;
    const QosReport q = run_hypercycles(r.config, inst.graph, inst.streams, opt).qos;
    for (const auto& sq : q.streams) {
      CHECK(sq.released == sq.counted + sq.excluded);
      CHECK(sq.counted == sq.arrived + sq.psfp_drops + sq.transit_drops + (sq.in_flight - sq.excluded));
      CHECK(sq.delivered <= sq.on_time);
      CHECK(sq.on_time <= sq.arrived);
      const bool accepted = std::binary_search(r.config.accepted.begin(), r.config.accepted.end(), sq.id);
      if (!accepted) {
        CHECK(sq.released == 0);
        continue;
      }
      const Stream& s = *std::find_if(inst.streams.begin(), inst.streams.end(),
                                      [&](const Stream& x) { return x.id == sq.id; });
      CHECK(sq.released == static_cast<std::uint64_t>(20 * (r.config.hypercycle / s.period)));
    }
  }
}

TEST_CASE("property: clipped runs of accepted streams deliver everything") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const RandomInstance inst = random_instance(seed + 900);
    const ScheduleResult r = schedule(inst.graph, inst.streams, Mode::Fips);
    SimOptions opt;
    opt.n_cycles = 5;
    opt.seed = seed;
    opt.clip_to_pdb = true;
    opt.keep_trace = true;
    const SimResult out = run_hypercycles(r.config, inst.graph, inst.streams, opt);
    CHECK(validate_trace(out.trace, r.config, inst.graph, inst.streams).empty());
    for (const auto& sq : out.qos.streams) {
      CHECK(sq.psfp_drops == 0);
      CHECK(sq.delivered == sq.counted);
      CHECK(sq.excluded == 0);
    }
  }
}

TEST_CASE("property: runs are reproducible from the seed") {
  const Scheduled s = radio_pair(0.99);
  const SimResult a = simulate(s, 50, 42, false, true);
  const SimResult b = simulate(s, 50, 42, false, true);
  CHECK(a.trace == b.trace);
  CHECK(a.qos == b.qos);
  CHECK_FALSE(simulate(s, 50, 43, false, true).trace == a.trace);
}

TEST_CASE("property: report merging is associative") {
  const Scheduled s = radio_pair(0.9);
  std::vector<QosReport> parts;
  for (std::uint64_t seed : {1, 2, 3}) parts.push_back(simulate(s, 40, seed).qos);
  QosReport left = parts[0];
  left.merge(parts[1]);
  left.merge(parts[2]);
  QosReport tail = parts[1];
  tail.merge(parts[2]);
  QosReport right = parts[0];
  right.merge(tail);
  CHECK(left == right);
  CHECK(left.cycles == 120);
  CHECK(left.seeds == std::vector<std::uint64_t>{1, 2, 3});

  QosReport empty;
  empty.merge(parts[0]);
  CHECK(empty == parts[0]);
}

TEST_CASE("property: measured reliability matches the budget mass") {
  const Scheduled s = radio_pair(0.9);
  constexpr int kCycles = 6000;
  const QosReport q = simulate(s, kCycles, 99).qos;
  const Pdb p = allocate_pdb(measured_histogram(), to_ppb(0.9));
  const double expect = static_cast<double>(p.mass_num) / static_cast<double>(p.mass_den);
  for (const char* id : {"up", "down"}) {
    const StreamQos& sq = *q.find(id);
    const double n = static_cast<double>(sq.counted);
    const double sigma = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(sq.reliability() - expect) <= 3 * sigma);
    CHECK(sq.jitter() <= 100 * kUs);
    CHECK(sq.psfp_drops + sq.delivered == sq.counted);
  }
  CHECK(q.find("wired")->reliability() == 1.0);
}
