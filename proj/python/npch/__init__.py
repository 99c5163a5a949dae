"""Numerical toolkit for harmonic maps into nonpositively curved spaces."""

import json

from ._core import (
    ConvergenceError,
    DomainError,
    FitError,
    InvalidPoint,
    IoError,
    NpchError,
    UnsupportedSpace,
    UsageError,
    __version__,
    calculus_check,
    cat_check,
    classify,
    decay_fit,
    group_action,
    npc_check,
    spd_distance,
    spd_geodesic,
    sym_eig,
    translation_length,
)
from ._core import acceptance as _acceptance
from ._core import run_report as _run_report


def run(*args):
    """Run a CLI command in-process and return (report dict, passed)."""
    text, passed = _run_report([str(a) for a in args])
    return json.loads(text), passed


def acceptance(criterion, seed=20240611):
    ok, title, detail = _acceptance(criterion, seed)
    return {"pass": ok, "title": title, "detail": json.loads(detail)}


__all__ = [
    "ConvergenceError", "DomainError", "FitError", "InvalidPoint", "IoError", "NpchError",
    "UnsupportedSpace", "UsageError", "__version__", "acceptance", "calculus_check", "cat_check",
    "classify", "decay_fit", "group_action", "npc_check", "run", "spd_distance", "spd_geodesic",
    "sym_eig", "translation_length",
]
