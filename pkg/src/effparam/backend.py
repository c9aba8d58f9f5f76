"""Integrator backend selection.

The compiled accelerator (``effparam._speedups``) is picked up at import time
when present; every consumer falls back to the pure-Python integrators in
``_ode_py`` otherwise.  Setting the environment variable
``EFFPARAM_PURE_PYTHON=1`` forces the fallback even when the extension is
installed, which is how the benchmark compares the two paths.
"""

from __future__ import annotations

import os

try:
    from . import _speedups
except ImportError:  # extension not built on this install
    _speedups = None

#: field-kind codes shared with the compiled core
KIND_KINETICS = 1
KIND_PELLET_RADIUS = 2
KIND_PELLET_SCALED = 3


def compiled_available() -> bool:
    return _speedups is not None


def use_compiled() -> bool:
    """True when the compiled core exists and is not disabled by environment."""
    if _speedups is None:
        return False
    return os.environ.get("EFFPARAM_PURE_PYTHON", "").strip() in ("", "0")


def active() -> str:
    return "compiled" if use_compiled() else "python"


def speedups():
    if _speedups is None:
        raise RuntimeError("compiled core requested but not available")
    return _speedups
