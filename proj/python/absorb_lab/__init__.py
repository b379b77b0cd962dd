"""Lattice walkers with cumulative absorption: ABM and PDE engines."""

import json as _json

from ._core import (
    ConfigError,
    IoError,
    NumericalError,
    green_weights,
    philox,
    spectral_check,
)
from . import _core

__all__ = [
    "ConfigError",
    "IoError",
    "NumericalError",
    "classify_regime",
    "green_weights",
    "philox",
    "run_ensemble",
    "run_pde",
    "spectral_check",
    "validate_config",
]


def _text(config):
    # Accept either a dict or an already serialized document.
    return config if isinstance(config, str) else _json.dumps(config)


def validate_config(config):
    return _core.validate_config(_text(config))


def run_pde(config):
    return _core.run_pde(_text(config))


def run_ensemble(config, workers=0):
    return _core.run_ensemble(_text(config), workers)


def classify_regime(config):
    return _json.loads(_core.classify_regime(_text(config)))
