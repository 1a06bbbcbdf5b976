"""Centralized numerical tolerances.

Every routine that compares against a threshold takes an optional
``tol: Tolerances`` argument; ``None`` means :func:`default_tolerances`.
The environment variable ``UNIFINSLER_TOL_SCALE`` multiplies every
tolerance. It exists for debugging and is not part of any guarantee.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

TOL_SCALE_ENV = "UNIFINSLER_TOL_SCALE"


@dataclass(frozen=True)
class Tolerances:
    skew_tol: float = 1e-12    # relative: ||m + m*|| <= skew_tol * ||m||
    unit_tol: float = 1e-10    # ||u* u - id||
    eig_tol: float = 1e-10     # spectral reconstruction, per unit of n
    branch_tol: float = 1e-8   # |lambda + 1| below this counts as -1
    normal_tol: float = 1e-9   # relative: ||m m* - m* m|| <= normal_tol * ||m||^2
    fix_tol: float = 1e-6      # fixed point / intertwiner residual
    scan_c: float = 10.0       # scan_tol = scan_c * h**2 + scan_abs
    scan_abs: float = 1e-6
    chord_tol: float = 1e-8

    def scaled(self, factor: float) -> "Tolerances":
        """Return a copy with every tolerance (not ``scan_c``) multiplied by ``factor``."""
        return replace(self, **{
            f.name: getattr(self, f.name) * factor
            for f in fields(self) if f.name != "scan_c"
        })

    def scan_tol(self, h: float) -> float:
        return self.scan_c * h * h + self.scan_abs


def default_tolerances() -> Tolerances:
    scale = os.environ.get(TOL_SCALE_ENV)
    base = Tolerances()
    if scale is None:
        return base
    try:
        factor = float(scale)
    except ValueError:
        factor = float("nan")
    if not factor > 0 or factor == float("inf"):
        raise ConfigError(f"{TOL_SCALE_ENV} must be a positive number, got {scale!r}")
    return base.scaled(factor)


def resolve(tol: Tolerances | None) -> Tolerances:
    return default_tolerances() if tol is None else tol
