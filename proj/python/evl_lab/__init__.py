"""Empirical value learning experiments and analysis tools."""

import json

from ._evl_lab import (
    SpecError,
    __version__,
    acrobot_energy,
    chain_steady_state,
    dominance_violations,
    replacement_oracle,
    validate_spec,
    verify_run,
)
from . import _evl_lab


def run_spec(spec, output_dir="", jobs=1, seed_offset=0):
    """Runs a spec (dict or JSON text) and returns the run summary as a dict."""
    text = spec if isinstance(spec, str) else json.dumps(spec)
    return json.loads(_evl_lab.run_spec(text, str(output_dir), jobs, seed_offset))


def bounds(**inputs):
    """Sample-complexity calculator outputs for both formula variants."""
    return json.loads(_evl_lab.bounds_json(json.dumps(inputs)))


def chain(q, k_star, steps=100000, replicas=0, delta_prime=0.1, seed=0):
    """Dominating-chain report: steady state, simulated occupancy, mixing check."""
    return json.loads(_evl_lab.chain_json(q, k_star, steps, replicas, delta_prime, seed))


__all__ = [
    "SpecError",
    "__version__",
    "acrobot_energy",
    "bounds",
    "chain",
    "chain_steady_state",
    "dominance_violations",
    "replacement_oracle",
    "run_spec",
    "validate_spec",
    "verify_run",
]
