"""Robust 802.1Qbv scheduling for 5G-TSN networks.

Documents are plain dicts in the JSON formats the ``fips`` CLI reads and
writes. Times are integer nanoseconds.
"""

import json
import os

from . import _fips
from ._fips import FORMAT_VERSION, FipsError

__all__ = [
    "FORMAT_VERSION",
    "FipsError",
    "allocate_pdb",
    "generate",
    "measured_histogram",
    "schedule",
    "simulate",
    "verify",
]

MODES = ("fips", "sti", "med", "max")


def _dump(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def measured_histogram():
    """The measured 5G delay histogram as a histogram document."""
    return json.loads(_fips.measured_histogram())


def allocate_pdb(bins, rel):
    """Tightest budget of a histogram given as (low_ns, up_ns, count) triples.

    Returns ``(dmin, dmax, mass_num, mass_den)``.
    """
    return _fips.allocate_pdb([tuple(b) for b in bins], rel)


def generate(scenario="reliability", replication=0):
    """The AGV network and one stream set of a built-in scenario."""
    network, streams = _fips.generate(scenario, replication)
    return json.loads(network), json.loads(streams)


def schedule(network, streams, mode="fips", base_dir="."):
    """Schedule a stream set. The result holds ``accepted``, ``rejected`` and ``config``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    return json.loads(_fips.schedule(_dump(network), _dump(streams), mode, os.fspath(base_dir)))


def simulate(network, streams, config, cycles, seed=0, clip_to_pdb=False, trace=False, base_dir="."):
    """Simulate hypercycles. Returns ``{"report": ..., "trace": ...}``; the trace only when asked for."""
    return json.loads(
        _fips.simulate(_dump(network), _dump(streams), _dump(config), cycles, seed, clip_to_pdb, trace,
                       os.fspath(base_dir)))


def verify(network, streams, config, trace, base_dir="."):
    """Violations of the formal execution constraints found in a trace."""
    doc = _fips.verify(_dump(network), _dump(streams), _dump(config), _dump(trace), os.fspath(base_dir))
    return json.loads(doc)["violations"]
