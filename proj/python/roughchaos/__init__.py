"""Rough-path mean-field toolkit."""

import json as _json

from ._core import (
    ConfigError,
    RoughPath,
    experiment_ids,
    git_blob_sha1,
    homogeneous_distance,
    lift_brownian,
    lift_piecewise_linear,
    read_rough_path_csv,
    solve_transport,
    wasserstein1,
    write_rough_path_csv,
)
from ._core import run_experiment as _run_experiment


def run_experiment(experiment, config, seed=None, threads=1, out=None):
    """Run an experiment from config text and return the parsed report."""
    return _json.loads(_run_experiment(experiment, config, seed, threads, out))


__all__ = [
    "ConfigError",
    "RoughPath",
    "experiment_ids",
    "git_blob_sha1",
    "homogeneous_distance",
    "lift_brownian",
    "lift_piecewise_linear",
    "read_rough_path_csv",
    "run_experiment",
    "solve_transport",
    "wasserstein1",
    "write_rough_path_csv",
]
