"""Graphical mean curvature flow with weak-formulation verification.

Thin wrapper around the C++ core. The heavy lifting (solver, varifold
integrals, Brakke residuals) happens in `graflow._core`; this module adds
small conveniences on top.
"""

import json as _json

from ._core import (
    __version__,
    induced_metric,
    legendre_hadamard,
    mean_curvature,
    project_normal,
    tangent_projection,
)
from ._core import flow_values as _flow_values_raw
from ._core import run_scenario as _run_scenario_raw


def _as_json(config):
    return _json.dumps(config) if isinstance(config, dict) else config


def run_scenario(config):
    """Run a scenario and return the manifest as a dict.

    `config` may be a dict or a JSON string matching the CLI config schema.
    """
    return _json.loads(_run_scenario_raw(_as_json(config)))


def flow_values(config):
    """Run a scenario and return (times, node_points, values) arrays."""
    return _flow_values_raw(_as_json(config))


__all__ = [
    "__version__",
    "flow_values",
    "induced_metric",
    "legendre_hadamard",
    "mean_curvature",
    "project_normal",
    "run_scenario",
    "tangent_projection",
]
