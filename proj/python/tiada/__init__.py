"""Time-scale adaptive minimax optimizers (TiAda and baselines).

The heavy lifting lives in the compiled ``_core`` extension; this module adds
dict-based wrappers around the JSON experiment configs.
"""

import csv
import io
import json

from ._core import (
    NonFiniteGradient,
    Optimizer,
    Oracle,
    Problem,
    Trajectory,
    UnsupportedOperation,
    detect_stage_transition,
    finite_difference_gradient,
    make_optimizer,
    make_problem,
    optimizer_ids,
    rate_check,
    run_checks,
)
from . import _core

__all__ = [
    "NonFiniteGradient",
    "Optimizer",
    "Oracle",
    "Problem",
    "Trajectory",
    "UnsupportedOperation",
    "detect_stage_transition",
    "finite_difference_gradient",
    "make_optimizer",
    "make_problem",
    "normalize_config",
    "optimizer_ids",
    "project",
    "rate_check",
    "run_ablation",
    "run_checks",
    "run_experiment",
    "run_sweep",
]


def normalize_config(config):
    """Validate an experiment config and fill in every default."""
    return json.loads(_core.normalize_config_json(json.dumps(config)))


def run_experiment(config):
    """Run an experiment config. Returns (trajectories, summary dict)."""
    trajectories, summary = _core.run_experiment_json(json.dumps(config))
    return trajectories, json.loads(summary)


def run_sweep(spec):
    """Run a sweep spec and return the aggregated table as a list of row dicts."""
    table = _core.sweep_table_csv(json.dumps(spec))
    return list(csv.DictReader(io.StringIO(table)))


def run_ablation(spec):
    """Run an alpha ablation. Returns one dict per alpha."""
    rows = _core.ablation_t_stars(json.dumps(spec))
    return [
        {"alpha": a, "beta": b, "t_star": t, "stays_in_stage_ii": stays}
        for a, b, t, stays in rows
    ]


def project(domain, y):
    """Euclidean projection of y onto a domain given as a config-style dict."""
    return _core.project(json.dumps(domain), list(y))
