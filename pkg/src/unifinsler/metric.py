"""Geodesics, the d_inf / d_p metrics, metric balls and spectral flows.

Distances are read off the principal logarithm: a curve ``u exp(t x)`` with
``||x|| <= pi`` is length minimizing for every norm considered here, so
``d(u, v) = ||log(u^{-1} v)||`` in the matching norm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import AntipodalSpectrum, DimensionMismatch, NotSkewHermitian
from .linalg import (TraceConvention, as_convention, as_skew, as_unitary, dagger, eigen_angles,
                     exp_skew, hermitian_min_eig, log_unitary, op_norm, schatten_norm, _check_p)
from .tolerances import Tolerances, resolve

DEFAULT_GRID_POINTS = 201


def _relative(u, v, tol):
    u = as_unitary(u, tol)
    v = as_unitary(v, tol)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape} differ")
    return dagger(u) @ v


def d_inf(u, v, tol: Tolerances | None = None) -> float:
    """Operator-norm geodesic distance, a value in ``[0, pi]``."""
    tol = resolve(tol)
    return float(np.max(np.abs(eigen_angles(_relative(u, v, tol), tol))))


def d_p(u, v, p=2, conv=TraceConvention.STANDARD, tol: Tolerances | None = None) -> float:
    """Schatten p-norm geodesic distance (``p`` even)."""
    tol = resolve(tol)
    p = _check_p(p)
    theta = np.abs(eigen_angles(_relative(u, v, tol), tol))
    top = theta.max()
    if top == 0.0:
        return 0.0
    value = top * np.sum((theta / top) ** p) ** (1.0 / p)
    if as_convention(conv) is TraceConvention.NORMALIZED:
        value /= theta.size ** (1.0 / p)
    return float(value)


def d_2(u, v, conv=TraceConvention.STANDARD, tol: Tolerances | None = None) -> float:
    return d_p(u, v, 2, conv, tol)


@dataclass(frozen=True)
class Geodesic:
    """The curve ``t -> base @ exp(t * direction)``."""

    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        tol = resolve(None)
        base = as_unitary(self.base)
        direction = as_skew(self.direction)
        if base.shape != direction.shape:
            raise DimensionMismatch("base and direction have different shapes")
        if op_norm(direction) > np.pi + tol.branch_tol:
            raise NotSkewHermitian("geodesic direction has operator norm above pi")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    def at(self, t: float) -> np.ndarray:
        return self.base @ exp_skew(t * self.direction)

    __call__ = at

    def speed_inf(self) -> float:
        return op_norm(self.direction)

    def speed_p(self, p=2, conv=TraceConvention.STANDARD) -> float:
        return schatten_norm(self.direction, p, conv)


def geodesic_between(u, v, tol: Tolerances | None = None) -> Geodesic:
    """Unique short geodesic with ``g.at(0) = u`` and ``g.at(1) = v``.

    Raises
    ------
    AntipodalSpectrum
        If ``u^{-1} v`` has an eigenvalue within ``branch_tol`` of ``-1``.
    """
    tol = resolve(tol)
    x, ambiguous = log_unitary(_relative(u, v, tol), tol, return_flag=True)
    if ambiguous:
        raise AntipodalSpectrum("u^{-1} v has eigenvalue -1; the geodesic is not unique")
    return Geodesic(np.asarray(u, dtype=complex), x)


def midpoint(u, v, tol: Tolerances | None = None) -> np.ndarray:
    return geodesic_between(u, v, tol).at(0.5)


@dataclass(frozen=True)
class BallSpec:
    """Closed metric ball of ``radius`` around ``center``.

    ``metric`` is ``"d_inf"`` or ``"d_p"``; ``p`` and ``conv`` only matter for the latter.
    """

    center: np.ndarray
    radius: float
    metric: str = "d_inf"
    p: int = 2
    conv: TraceConvention = TraceConvention.STANDARD

    def __post_init__(self):
        object.__setattr__(self, "center", as_unitary(self.center))
        object.__setattr__(self, "conv", as_convention(self.conv))
        if self.metric not in ("d_inf", "d_p"):
            raise ValueError(f"unknown ball metric {self.metric!r}")
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if self.metric == "d_inf" and self.radius > np.pi:
            raise ValueError("d_inf balls need radius <= pi")
        if self.metric == "d_p":
            _check_p(self.p)


class BallMembership(NamedTuple):
    inside: bool
    margin: float


def in_ball(u, ball: BallSpec, tol: Tolerances | None = None) -> BallMembership:
    """Ball membership with a signed margin.

    For ``d_inf`` the test is ``w^{-1}u + (w^{-1}u)* >= 2 cos(r) id`` and the
    margin is ``lambda_min(w^{-1}u + (w^{-1}u)*) - 2 cos(r)``. This stays
    well defined at the branch cut where the logarithm does not. For
    ``d_p`` the margin is ``r - d_p(w, u)``.
    """
    tol = resolve(tol)
    if ball.metric == "d_inf":
        rel = _relative(ball.center, u, tol)
        margin = 2.0 * hermitian_min_eig(rel) - 2.0 * np.cos(ball.radius)
    else:
        margin = ball.radius - d_p(ball.center, u, ball.p, ball.conv, tol)
    return BallMembership(bool(margin >= -tol.eig_tol), float(margin))


class SpectralFlowSample(NamedTuple):
    t: float
    theta_min: float
    theta_max: float
    branch_ok: bool


def default_grid(num: int = DEFAULT_GRID_POINTS, start: float = 0.0, stop: float = 1.0) -> np.ndarray:
    return np.linspace(start, stop, num)


def spectral_flow(u, x, grid: Sequence[float] | None = None,
                  tol: Tolerances | None = None) -> list[SpectralFlowSample]:
    """Extremes of ``spec(-i log(u exp(t x)))`` along ``grid``.

    Samples whose spectrum touches ``-1`` (within ``branch_tol``) are
    returned with ``branch_ok=False`` instead of aborting the scan.
    """
    tol = resolve(tol)
    u = as_unitary(u, tol)
    x = as_skew(x, tol)
    grid = default_grid() if grid is None else grid
    out = []
    for t in grid:
        theta = eigen_angles(u @ exp_skew(t * x), tol)
        lam = np.exp(1j * theta)
        ok = bool(np.all(np.abs(lam + 1) > tol.branch_tol))
        out.append(SpectralFlowSample(float(t), float(theta[0]), float(theta[-1]), ok))
    return out
