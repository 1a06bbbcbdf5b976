"""Numerical convexity scans along geodesics.

Every scan samples a scalar function ``f`` on a grid and records central
second differences. Smooth targets (``d_p^p`` and ``d_2^2``) are judged by
``min f'' >= floor - scan_tol``. Targets built from ``d_inf`` are maxima of
eigenvalue angles and have kinks, so they are judged by random chord
inequalities ``f(a s + (1-a) t) <= a f(s) + (1-a) f(t) + chord_tol``; their
second differences are kept as diagnostics only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import HypothesisViolation, SpreadViolation
from .io import csv_text, matrix_to_json
from .linalg import (TraceConvention, as_convention, as_skew, as_unitary, dagger,
                     eigen_angles, exp_skew, log_unitary)
from .metric import BallSpec, Geodesic, d_inf, d_p, default_grid, in_ball, spectral_flow
from .sampling import rng_from
from .tolerances import Tolerances, resolve

CHORD_TRIALS = 50


@dataclass
class ConvexityScanReport:
    grid: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray      # at interior grid points
    min_second_difference: float
    floor: float
    scan_tol: float
    passed: bool
    criterion: str                      # "second_difference" or "chord"
    sense: str = "convex"               # "concave" reports test -f
    chord_min_slack: float | None = None
    strict: bool | None = None
    context: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_csv(self) -> str:
        d2 = np.concatenate([[np.nan], self.second_differences, [np.nan]])
        return csv_text(["t", "f", "d2f"],
                        ([t, f, "" if np.isnan(d) else d]
                         for t, f, d in zip(self.grid, self.values, d2)))

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "criterion": self.criterion,
            "sense": self.sense,
            "floor": self.floor,
            "scan_tol": self.scan_tol,
            "min_second_difference": self.min_second_difference,
            "chord_min_slack": self.chord_min_slack,
            "strict": self.strict,
            "grid": [float(t) for t in self.grid],
            "values": [float(v) for v in self.values],
            "context": self.context,
        }


def second_differences(grid, values) -> np.ndarray:
    """Three-point second derivative estimates at interior points of a (possibly non-uniform) grid."""
    t = np.asarray(grid, dtype=float)
    f = np.asarray(values, dtype=float)
    if t.size < 3:
        return np.empty(0)
    hl = t[1:-1] - t[:-2]
    hr = t[2:] - t[1:-1]
    return 2.0 * ((f[2:] - f[1:-1]) / hr - (f[1:-1] - f[:-2]) / hl) / (hl + hr)


def chord_slack(f: Callable[[float], float], lo: float, hi: float, trials: int, rng) -> float:
    """Smallest ``a f(s) + (1-a) f(t) - f(a s + (1-a) t)`` over random ``s, t, a``."""
    rng = rng_from(rng)
    worst = np.inf
    for _ in range(trials):
        s, t = rng.uniform(lo, hi, size=2)
        a = rng.uniform()
        worst = min(worst, a * f(s) + (1 - a) * f(t) - f(a * s + (1 - a) * t))
    return float(worst)


def _build(grid, values, floor, tol, criterion, *, sense="convex", f=None,
           chord_trials=CHORD_TRIALS, seed=0, context=None) -> ConvexityScanReport:
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    sign = 1.0 if sense == "convex" else -1.0
    d2 = second_differences(grid, values)
    h = float(np.max(np.diff(grid))) if grid.size > 1 else 0.0
    stol = tol.scan_tol(h)
    min_d2 = float(np.min(sign * d2)) if d2.size else np.inf
    slack = None
    if criterion == "chord":
        g = f if sense == "convex" else (lambda t: -f(t))
        slack = chord_slack(g, grid[0], grid[-1], chord_trials, seed)
        passed = slack >= -tol.chord_tol
    else:
        passed = min_d2 >= floor - stol
    return ConvexityScanReport(grid, values, d2, min_d2, floor, stol, bool(passed), criterion,
                               sense, slack, None, context or {})


def _geodesic_forced(u, v, tol):
    x, ambiguous = log_unitary(dagger(u) @ v, tol, return_flag=True)
    return Geodesic(u, x), ambiguous


def scan_dinf_convexity(w, u, v, grid: Sequence[float] | None = None, *, force: bool = False,
                        chord_trials: int = CHORD_TRIALS, seed=0,
                        tol: Tolerances | None = None) -> ConvexityScanReport:
    """Convexity of ``t -> d_inf(gamma_{u,v}(t), w)``.

    Hypotheses: ``u, v`` in ``B_inf[w, pi/2]`` and ``d_inf(u, v) < pi``. With
    ``force`` the scan runs regardless, which is how the sharpness
    counterexamples are produced.
    """
    tol = resolve(tol)
    w, u, v = (as_unitary(m, tol) for m in (w, u, v))
    du, dv, duv = d_inf(u, w, tol), d_inf(v, w, tol), d_inf(u, v, tol)
    bad = []
    if du > np.pi / 2 + tol.eig_tol:
        bad.append(("d_inf(u, w)", du))
    if dv > np.pi / 2 + tol.eig_tol:
        bad.append(("d_inf(v, w)", dv))
    if duv >= np.pi - tol.branch_tol:
        bad.append(("d_inf(u, v)", duv))
    if bad and not force:
        raise HypothesisViolation(f"hypotheses fail: {bad}", bad)
    g, _ = _geodesic_forced(u, v, tol)

    def f(t):
        return d_inf(g.at(t), w, tol)

    grid = default_grid() if grid is None else grid
    ctx = {"metric": "d_inf", "w": matrix_to_json(w), "u": matrix_to_json(u),
           "v": matrix_to_json(v), "hypothesis_violations": [list(b) for b in bad]}
    return _build(grid, [f(t) for t in grid], 0.0, tol, "chord", f=f,
                  chord_trials=chord_trials, seed=seed, context=ctx)


def scan_dp_convexity(u, beta: Geodesic, p=2, conv=TraceConvention.STANDARD,
                      grid: Sequence[float] | None = None, *, force: bool = False,
                      tol: Tolerances | None = None) -> ConvexityScanReport:
    """Strict convexity of ``t -> d_p(u, beta(t))^p`` for ``beta`` inside ``B_inf(u, pi/2)``.

    ``strict`` on the report is true when every interior second difference
    is positive.
    """
    tol = resolve(tol)
    u = as_unitary(u, tol)
    conv = as_convention(conv)
    grid = default_grid() if grid is None else grid
    points = [beta.at(t) for t in grid]
    bad = [float(t) for t, b in zip(grid, points) if d_inf(u, b, tol) >= np.pi / 2]
    if bad and not force:
        raise HypothesisViolation("beta leaves the open ball B_inf(u, pi/2)", bad)
    values = [d_p(u, b, p, conv, tol) ** p for b in points]
    rep = _build(grid, values, 0.0, tol, "second_difference",
                 context={"metric": f"d_{p}^{p}", "conv": conv.value,
                          "hypothesis_violations": bad})
    rep.strict = bool(rep.second_differences.size and np.all(rep.second_differences > 0))
    return rep


def strong_convexity_floor(speed: float, r: float) -> float:
    """Lower bound ``c^2 sin(2r)/r`` for the second derivative of ``d_2(w, beta)^2``."""
    return speed ** 2 * np.sin(2 * r) / r


def scan_strong_convexity_d2(w, beta: Geodesic, r: float, conv=TraceConvention.STANDARD,
                             grid: Sequence[float] | None = None, *, force: bool = False,
                             tol: Tolerances | None = None) -> ConvexityScanReport:
    """Check ``f'' >= c^2 sin(2r)/r`` for ``f(t) = d_2(w, beta(t))^2``.

    ``c`` is the d_2 speed of ``beta`` under ``conv``; every sampled point
    must lie in ``B_inf[w, r]`` with ``0 < r < pi/2``.
    """
    tol = resolve(tol)
    w = as_unitary(w, tol)
    conv = as_convention(conv)
    grid = default_grid() if grid is None else grid
    if not 0 < r < np.pi / 2 and not force:
        raise HypothesisViolation(f"radius {r} not in (0, pi/2)", [r])
    points = [beta.at(t) for t in grid]
    ball = BallSpec(w, min(r, np.pi))
    bad = [float(t) for t, b in zip(grid, points) if not in_ball(b, ball, tol).inside]
    if bad and not force:
        raise HypothesisViolation("beta leaves B_inf[w, r] at some grid points", bad)
    c = beta.speed_p(2, conv)
    floor = strong_convexity_floor(c, r)
    values = [d_p(w, b, 2, conv, tol) ** 2 for b in points]
    return _build(grid, values, floor, tol, "second_difference",
                  context={"metric": "d_2^2", "conv": conv.value, "r": r, "speed": c,
                           "hypothesis_violations": bad})


ROTATION_GENERATOR = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)


def counterexample_family(theta: float):
    """The 2x2 family ``u = diag(e^{i theta}, e^{-i theta})``, ``x = [[0, -1], [1, 0]]``."""
    u = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
    return u, ROTATION_GENERATOR.copy()


class CounterexampleReport(NamedTuple):
    theta: float
    grid: np.ndarray
    closed_form: np.ndarray
    measured: np.ndarray
    max_abs_diff: float
    fpp0_estimate: float
    cot_theta: float
    report: ConvexityScanReport


def counterexample_flow(theta: float, grid: Sequence[float] | None = None, h: float = 1e-3,
                        tol: Tolerances | None = None) -> CounterexampleReport:
    """Largest eigenvalue angle of ``u exp(t x)`` for the 2x2 family, against ``arccos(cos theta cos t)``.

    ``fpp0_estimate`` is a central difference of the measured curve at 0
    with step ``h``; the exact value is ``cot(theta)``.
    """
    tol = resolve(tol)
    u, x = counterexample_family(theta)
    grid = default_grid(201, -0.5, 0.5) if grid is None else np.asarray(grid, dtype=float)
    closed = np.arccos(np.cos(theta) * np.cos(grid))
    measured = np.array([s.theta_max for s in spectral_flow(u, x, grid, tol)])
    m = [s.theta_max for s in spectral_flow(u, x, [-h, 0.0, h], tol)]
    fpp0 = (m[0] - 2 * m[1] + m[2]) / h ** 2

    def f(t):
        return float(eigen_angles(u @ exp_skew(t * x), tol)[-1])

    rep = _build(grid, measured, 0.0, tol, "chord", f=f,
                 context={"family": "2x2 rotation", "theta": theta})
    return CounterexampleReport(theta, grid, closed, measured,
                                float(np.max(np.abs(closed - measured))), float(fpp0),
                                float(1 / np.tan(theta)), rep)


def scan_theta_extremes(u, x, interval=(0.0, 1.0), grid: Sequence[float] | None = None, *,
                        force: bool = False, chord_trials: int = CHORD_TRIALS, seed=0,
                        tol: Tolerances | None = None):
    """Convexity of the largest and concavity of the smallest eigenvalue angle of ``u exp(t x)``.

    Returns ``(max_report, min_report)``; the second has ``sense="concave"``.

    Raises
    ------
    SpreadViolation
        If some sample has spread ``theta_max - theta_min >= pi`` or touches
        ``-1``, unless ``force``.
    """
    tol = resolve(tol)
    u = as_unitary(u, tol)
    x = as_skew(x, tol)
    lo, hi = interval
    grid = default_grid(201, lo, hi) if grid is None else np.asarray(grid, dtype=float)
    samples = spectral_flow(u, x, grid, tol)
    bad = [s.t for s in samples if not s.branch_ok or s.theta_max - s.theta_min >= np.pi]
    if bad and not force:
        raise SpreadViolation("spread >= pi or branch crossing on the interval", bad)

    def angles(t):
        return eigen_angles(u @ exp_skew(t * x), tol)

    ctx = {"u": matrix_to_json(u), "x": matrix_to_json(x), "interval": [lo, hi],
           "hypothesis_violations": bad}
    rep_max = _build(grid, [s.theta_max for s in samples], 0.0, tol, "chord",
                     f=lambda t: float(angles(t)[-1]), chord_trials=chord_trials, seed=seed,
                     context=dict(ctx, function="theta_max"))
    rep_min = _build(grid, [s.theta_min for s in samples], 0.0, tol, "chord", sense="concave",
                     f=lambda t: float(angles(t)[0]), chord_trials=chord_trials, seed=seed,
                     context=dict(ctx, function="theta_min"))
    return rep_max, rep_min
