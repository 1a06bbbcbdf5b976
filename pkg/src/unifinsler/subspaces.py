"""Geodesic subsets of U(n): membership, geodesic closure and hull sampling.

A geodesic subset with length parameter ``l`` contains the short geodesic
between any two of its points at d_inf distance below ``l``. Each kind below
exposes ``residual(u)``, the largest violation of its defining equations,
and ``project(u)``, a cheap map back onto the set used to clean rounding
drift.
"""
from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DimensionMismatch, LengthParameterExceeded, RadiusViolation
from .linalg import (as_matrix, as_unitary, dagger, hermitian_part, log_unitary, op_norm,
                     polar_unitary)
from .metric import BallSpec, Geodesic, d_inf, default_grid, geodesic_between, in_ball
from .sampling import rng_from
from .tolerances import Tolerances, resolve

MEMBER_TOL = 1e-8


def _unit_defect(u) -> float:
    return op_norm(dagger(u) @ u - np.eye(u.shape[0]))


class Subspace:
    kind = "abstract"
    length_parameter = np.pi

    def residual(self, u) -> float:
        raise NotImplementedError

    def project(self, u) -> np.ndarray:
        return polar_unitary(u)

    def to_config(self) -> dict:
        raise ConfigError(f"{self.kind} subspaces cannot be serialized")


class FullGroup(Subspace):
    kind = "full"

    def residual(self, u) -> float:
        return _unit_defect(np.asarray(u))

    def to_config(self) -> dict:
        return {"kind": self.kind}


class SpecialUnitary(Subspace):
    """SU(n); its length parameter is ``min(2 pi / n, pi)``."""

    kind = "special_unitary"

    def __init__(self, n: int):
        self.n = int(n)
        self.length_parameter = min(2 * np.pi / self.n, np.pi)

    def residual(self, u) -> float:
        u = np.asarray(u)
        if u.shape != (self.n, self.n):
            raise DimensionMismatch(f"expected {self.n}x{self.n}")
        return float(abs(np.linalg.det(u) - 1.0))

    def project(self, u) -> np.ndarray:
        w = polar_unitary(u)
        return w * np.exp(-1j * np.angle(np.linalg.det(w)) / self.n)

    def to_config(self) -> dict:
        return {"kind": self.kind, "n": self.n}


class Orthogonal(Subspace):
    """Fixed points of ``u -> J u J`` where ``J`` is complex conjugation in the basis ``basis``.

    In basis coordinates ``J u J`` is the entrywise conjugate, so the
    residual is ``||b* u b - conj(b* u b)||``.
    """

    kind = "orthogonal"

    def __init__(self, basis=None):
        self.basis = None if basis is None else as_unitary(basis)

    def _coords(self, u):
        u = np.asarray(u, dtype=complex)
        return u if self.basis is None else dagger(self.basis) @ u @ self.basis

    def residual(self, u) -> float:
        c = self._coords(u)
        return op_norm(c - np.conj(c))

    def project(self, u) -> np.ndarray:
        real = polar_unitary(self._coords(u).real).astype(complex)
        return real if self.basis is None else self.basis @ real @ dagger(self.basis)

    def to_config(self) -> dict:
        from .io import matrix_to_json
        cfg = {"kind": self.kind}
        if self.basis is not None:
            cfg["basis"] = matrix_to_json(self.basis)
        return cfg


class Grassmannian(Subspace):
    """Symmetries ``e_p = id - 2p`` of rank-``m`` projections.

    Give either ``rank`` (standard trace: ``Tr(id - u) = 2m``) or
    ``trace_value`` ``s`` (normalized trace: ``tau(u) = 1 - 2s``).
    """

    kind = "grassmannian"

    def __init__(self, rank: int | None = None, trace_value: float | None = None):
        if (rank is None) == (trace_value is None):
            raise ConfigError("give exactly one of rank or trace_value")
        self.rank = rank
        self.trace_value = trace_value

    def _rank_for(self, n: int) -> int:
        if self.rank is not None:
            return int(self.rank)
        m = self.trace_value * n
        if abs(m - round(m)) > 1e-9:
            raise ConfigError(f"trace value {self.trace_value} is not attainable in dimension {n}")
        return int(round(m))

    def residual(self, u) -> float:
        u = np.asarray(u, dtype=complex)
        n = u.shape[0]
        herm = op_norm(u - dagger(u))
        if self.rank is not None:
            tr = abs(np.trace(np.eye(n) - u) - 2 * self.rank)
        else:
            tr = abs(np.trace(u) / n - (1 - 2 * self.trace_value))
        return float(max(herm, tr, _unit_defect(u)))

    def project(self, u) -> np.ndarray:
        h = hermitian_part(u)
        n = h.shape[0]
        m = self._rank_for(n)
        _, v = np.linalg.eigh(h)
        signs = np.ones(n)
        signs[:m] = -1.0
        return (v * signs) @ dagger(v)

    def to_config(self) -> dict:
        if self.rank is not None:
            return {"kind": self.kind, "rank": self.rank}
        return {"kind": self.kind, "trace_value": self.trace_value}


class Subgroup(Subspace):
    """Caller-defined subgroup given by a residual oracle ``u -> float``.

    Geodesic closure of such a set is only checked empirically, and
    closedness of the subgroup cannot be verified at all.
    """

    kind = "subgroup"

    def __init__(self, oracle: Callable[[np.ndarray], float], length_parameter: float = np.pi,
                 projector: Callable[[np.ndarray], np.ndarray] | None = None):
        self.oracle = oracle
        self.length_parameter = length_parameter
        self.projector = projector

    def residual(self, u) -> float:
        return float(self.oracle(np.asarray(u)))

    def project(self, u) -> np.ndarray:
        return self.projector(u) if self.projector is not None else np.asarray(u, dtype=complex)


class FixedPointSet(Subspace):
    """Fixed points of ``u -> left[h] u right[h]^{-1}`` over a finite list of group elements."""

    kind = "fixed_point_set"

    def __init__(self, left: Sequence, right: Sequence):
        if len(left) != len(right):
            raise DimensionMismatch("left and right representations differ in length")
        self.left = [as_unitary(a) for a in left]
        self.right = [as_unitary(b) for b in right]

    def residual(self, u) -> float:
        u = np.asarray(u, dtype=complex)
        return max((op_norm(a @ u @ dagger(b) - u) for a, b in zip(self.left, self.right)),
                   default=0.0)

    def project(self, u) -> np.ndarray:
        # the group average is an intertwiner, and so is its polar factor
        avg = sum(a @ u @ dagger(b) for a, b in zip(self.left, self.right)) / len(self.left)
        return polar_unitary(avg)

    def to_config(self) -> dict:
        from .io import matrix_to_json
        return {"kind": self.kind,
                "left": [matrix_to_json(a) for a in self.left],
                "right": [matrix_to_json(b) for b in self.right]}


class BallIntersection(Subspace):
    kind = "ball_intersection"

    def __init__(self, balls: Sequence[BallSpec]):
        self.balls = list(balls)

    def residual(self, u) -> float:
        return max((max(0.0, -in_ball(u, b).margin) for b in self.balls), default=0.0)

    def to_config(self) -> dict:
        from .io import matrix_to_json
        return {"kind": self.kind,
                "balls": [{"center": matrix_to_json(b.center), "radius": b.radius}
                          for b in self.balls]}


class ConvexHull(Subspace):
    """Geodesic convex hull of ``seeds``, which lie in ``B_inf[center, radius]``.

    Exact membership in the hull is not decidable from finite data; the
    residual is measured against the enclosing ball, which contains the
    hull. Use :func:`convex_hull_sample` to produce hull points.
    """

    kind = "convex_hull"

    def __init__(self, seeds: Sequence, center, radius: float):
        self.seeds = [as_unitary(s) for s in seeds]
        self.center = as_unitary(center)
        self.radius = float(radius)

    def residual(self, u) -> float:
        return max(0.0, d_inf(u, self.center) - self.radius)

    def to_config(self) -> dict:
        from .io import matrix_to_json
        return {"kind": self.kind, "seeds": [matrix_to_json(s) for s in self.seeds],
                "center": matrix_to_json(self.center), "radius": self.radius}


class Membership(NamedTuple):
    inside: bool
    residual: float


def member(space: Subspace, u, tol: float = MEMBER_TOL) -> Membership:
    r = space.residual(as_matrix(u))
    return Membership(bool(r <= tol), float(r))


class ClosureReport(NamedTuple):
    t: np.ndarray
    residuals: np.ndarray
    max_residual: float
    distance: float
    branch_ambiguity: bool


def geodesic_closure_check(space: Subspace, u, v, samples: Sequence[float] | None = None,
                           *, force: bool = False, tol: Tolerances | None = None) -> ClosureReport:
    """Membership residuals of the geodesic from ``u`` to ``v`` at the sample times.

    Raises
    ------
    LengthParameterExceeded
        If ``d_inf(u, v)`` is not below the length parameter and ``force`` is off.
        A forced run uses the principal logarithm even on the branch cut, so
        counterexamples can be exhibited.
    """
    tol = resolve(tol)
    dist = d_inf(u, v, tol)
    if dist >= space.length_parameter and not force:
        raise LengthParameterExceeded(
            f"d_inf(u, v) = {dist:.6g} >= length parameter {space.length_parameter:.6g}")
    x, ambiguous = log_unitary(dagger(np.asarray(u)) @ np.asarray(v), tol, return_flag=True)
    g = Geodesic(np.asarray(u, dtype=complex), x)
    ts = default_grid(21) if samples is None else np.asarray(samples, dtype=float)
    res = np.array([space.residual(g.at(t)) for t in ts])
    return ClosureReport(ts, res, float(res.max()), dist, ambiguous)


def convex_hull_sample(seeds: Sequence, center, radius: float, depth: int = 1,
                       count: int = 100, seed=0, tol: Tolerances | None = None) -> list[np.ndarray]:
    """Seeded sample of the geodesic convex hull of ``seeds``.

    Level ``k`` adds ``count`` points ``gamma_{u,v}(t)`` with ``u, v`` drawn
    from all earlier levels and ``t`` uniform in ``[0, 1]``; the points of
    the last level are returned (the seeds themselves when ``depth == 0``).

    Raises
    ------
    RadiusViolation
        If ``radius >= pi/2`` or some seed is outside ``B_inf[center, radius]``.
    """
    tol = resolve(tol)
    if radius >= np.pi / 2:
        raise RadiusViolation("hull sampling needs radius < pi/2")
    ball = BallSpec(center, radius)
    pool = [as_unitary(s, tol) for s in seeds]
    if not pool:
        raise ValueError("need at least one seed")
    for s in pool:
        if not in_ball(s, ball, tol).inside:
            raise RadiusViolation("seed lies outside the stated ball")
    rng = rng_from(seed)
    level = pool
    for _ in range(depth):
        level = []
        for _ in range(count):
            i, j = rng.integers(0, len(pool), size=2)
            t = rng.uniform()
            level.append(geodesic_between(pool[i], pool[j], tol).at(t))
        pool = pool + level
    return level


def projection_from_symmetry(u) -> np.ndarray:
    return (np.eye(np.shape(u)[0]) - np.asarray(u)) / 2


def symmetry_from_projection(p) -> np.ndarray:
    return np.eye(np.shape(p)[0]) - 2 * np.asarray(p)


def projection_residual(p) -> float:
    """Largest of ``||p^2 - p||`` and ``||p - p*||``."""
    p = np.asarray(p, dtype=complex)
    return max(op_norm(p @ p - p), op_norm(p - dagger(p)))


def subspace_from_config(cfg: dict) -> Subspace:
    """Build a subspace from its JSON description (``{"kind": ..., ...}``)."""
    from .io import matrix_from_json
    try:
        kind = cfg["kind"]
    except (KeyError, TypeError):
        raise ConfigError("subspace config needs a 'kind'") from None
    try:
        if kind == "full":
            space = FullGroup()
        elif kind == "special_unitary":
            space = SpecialUnitary(cfg["n"])
        elif kind == "orthogonal":
            basis = cfg.get("basis")
            space = Orthogonal(None if basis is None else matrix_from_json(basis))
        elif kind == "grassmannian":
            space = Grassmannian(cfg.get("rank"), cfg.get("trace_value"))
        elif kind == "fixed_point_set":
            space = FixedPointSet([matrix_from_json(a) for a in cfg["left"]],
                                  [matrix_from_json(b) for b in cfg["right"]])
        elif kind == "ball_intersection":
            space = BallIntersection([BallSpec(matrix_from_json(b["center"]), b["radius"])
                                      for b in cfg["balls"]])
        elif kind == "convex_hull":
            space = ConvexHull([matrix_from_json(s) for s in cfg["seeds"]],
                               matrix_from_json(cfg["center"]), cfg["radius"])
        elif kind == "subgroup":
            raise ConfigError("subgroup oracles cannot be given in JSON")
        else:
            raise ConfigError(f"unknown subspace kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"subspace config for {kind!r} is missing {exc}") from None
    if "length_parameter" in cfg:
        lp = float(cfg["length_parameter"])
        if not 0 < lp <= np.pi:
            raise ConfigError("length_parameter must lie in (0, pi]")
        space.length_parameter = lp
    return space
