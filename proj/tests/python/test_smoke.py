import pytest

import fips


def small_network():
    hist = fips.measured_histogram()
    hist.pop("format_version", None)
    eth = {"kind": "ethernet", "rate_bps": 100_000_000, "prop_ns": 50}
    cables = [("D1", "SW"), ("SW", "DS-TT"), ("NW-TT", "N1")]
    links = [dict(eth, src=a, dst=b) for x, y in cables for a, b in ((x, y), (y, x))]
    links += [{"src": "DS-TT", "dst": "NW-TT", "kind": "wireless", "histogram": "5g"},
              {"src": "NW-TT", "dst": "DS-TT", "kind": "wireless", "histogram": "5g"}]
    return {
        "format_version": fips.FORMAT_VERSION,
        "nodes": [{"id": "D1", "role": "end-station"}, {"id": "SW", "role": "bridge"},
                  {"id": "DS-TT", "role": "ds-tt"}, {"id": "NW-TT", "role": "nw-tt"},
                  {"id": "N1", "role": "end-station"}],
        "links": links,
        "histograms": {"5g": hist},
    }


def streams(rel=0.9999):
    return {
        "format_version": fips.FORMAT_VERSION,
        "streams": [{"id": "up", "path": ["D1", "SW", "DS-TT", "NW-TT", "N1"], "period_ns": 20_000_000,
                     "phase_ns": 0, "size_bytes": 100, "latency_ns": 20_000_000, "jitter_ns": 100_000,
                     "reliability": rel}],
    }


def test_allocate_pdb_on_the_measured_histogram():
    bins = [(b[0], b[1], b[2]) for b in fips.measured_histogram()["bins"]]
    assert fips.allocate_pdb(bins, 0.9)[:2] == (3_803_000, 7_717_000)
    assert fips.allocate_pdb(bins, 0.9999)[1] == 13_176_000


def test_schedule_simulate_verify():
    net = small_network()
    result = fips.schedule(net, streams())
    assert result["accepted"] == ["up"]
    out = fips.simulate(net, streams(), result["config"], cycles=200, seed=1, clip_to_pdb=True, trace=True)
    report = out["report"]["streams"][0]
    assert report["delivered"] == report["counted"] == 200
    assert fips.verify(net, streams(), result["config"], out["trace"]) == []


def test_scalar_baseline_loses_frames():
    net = small_network()
    cfg = fips.schedule(net, streams(), mode="med")["config"]
    report = fips.simulate(net, streams(), cfg, cycles=500, seed=2)["report"]["streams"][0]
    assert report["delivered"] < report["counted"] / 2


def test_generate_is_deterministic():
    assert fips.generate("reliability") == fips.generate("reliability")
    net, specs = fips.generate("reliability")
    assert len(net["nodes"]) == 24
    assert len(specs["streams"]) == 100


def test_errors_carry_their_code():
    bad = streams()
    bad["streams"][0]["colour"] = "red"
    with pytest.raises(fips.FipsError, match="^Parse"):
        fips.schedule(small_network(), bad)
    with pytest.raises(fips.FipsError, match="^Parse"):
        fips.schedule("{", streams())
    with pytest.raises(ValueError):
        fips.schedule(small_network(), streams(), mode="fastest")
