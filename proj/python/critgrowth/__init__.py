"""Python bindings for the critgrowth library."""

import json
import os

from ._core import (
    ComputationError,
    ConfigError,
    CritgrowthError,
    cell_division_threshold,
    classify_growth,
    contraction_factor,
    is_primitive,
    perron,
)
from . import _core

__all__ = [
    "ComputationError",
    "ConfigError",
    "CritgrowthError",
    "analyze",
    "audit",
    "cell_division_threshold",
    "classify_growth",
    "contraction_factor",
    "is_primitive",
    "load_config",
    "lyapunov",
    "perron",
    "run",
    "simulate",
]


def load_config(path):
    """Parses and validates a JSON config file; returns it with defaults filled in."""
    return json.loads(_core.load_config_json(os.fspath(path)))


def run(command, config):
    """Runs a subcommand on a config dict or path and returns the report dict."""
    if not isinstance(config, dict):
        config = load_config(config)
    return json.loads(_core.run_json(command, json.dumps(config)))


def analyze(config):
    return run("analyze", config)


def simulate(config):
    return run("simulate", config)


def lyapunov(config):
    return run("lyapunov", config)


def audit(config):
    return run("audit", config)
