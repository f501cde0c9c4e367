"""Federated sequential-recommendation simulator (Python bindings)."""

import json as _json

from ._cffedsr import (
    convergence_round,
    fairness_variance,
    fairness_weights,
    fedavg_weights,
    hr_ndcg,
    rank_of_target,
    round_bytes,
    _run_json,
)

__all__ = [
    "convergence_round",
    "fairness_variance",
    "fairness_weights",
    "fedavg_weights",
    "hr_ndcg",
    "rank_of_target",
    "round_bytes",
    "run",
]


def run(**overrides):
    """Run one experiment and return its summary as a dict.

    Keyword arguments are the same ``key=value`` overrides the CLI accepts,
    e.g. ``run(algorithm="fedavg", syn_clients=20, total_rounds=3, seed=1)``.
    """
    return _json.loads(_run_json({k: str(v) for k, v in overrides.items()}))
