"""Fixed points of finite group actions on unitary groups.

An action is ``pi(h)(u) = left(h) u right(h)^{-1}``. If the orbit of some
point has d_inf-circumradius below ``pi/2`` (relative to an invariant
geodesic subset ``M``), the circumcenter of the orbit is unique, hence
invariant, hence a fixed point. Two applications:

* intertwiners: fixed points of ``u -> phi(h) u rho(h)^{-1}`` satisfy
  ``phi(h) = g rho(h) g^{-1}``;
* invariant projections: a fixed point of conjugation on the Grassmannian
  symmetries ``e_p = id - 2p`` gives a projection commuting with the group.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .center import CenterProblem, CenterResult, circumradius_witness, select_radius, solve_center
from .errors import NoConvergence, NotHomomorphism, NotProjection, RadiusTooLarge
from .linalg import TraceConvention, as_unitary, dagger, op_norm
from .metric import d_inf
from .subspaces import (FullGroup, Grassmannian, Subspace, member, projection_from_symmetry,
                        projection_residual, symmetry_from_projection)
from .tolerances import Tolerances, resolve

HOM_TOL = 1e-9
DEDUP_TOL = 1e-8
MAX_GROUP_ORDER = 10_000


def _index_of(mats: Sequence[np.ndarray], m: np.ndarray, tol: float) -> int | None:
    for i, a in enumerate(mats):
        if op_norm(a - m) <= tol:
            return i
    return None


class _MatrixSet:
    """Append-only list of equal-shape matrices with vectorized near-duplicate lookup.

    Matching uses the largest entrywise difference, which is within a factor
    ``n`` of the operator norm and far cheaper at group-enumeration sizes.
    """

    def __init__(self, first: np.ndarray, capacity: int = 64):
        self._buf = np.empty((capacity,) + first.shape, dtype=complex)
        self._buf[0] = first
        self.size = 1

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> np.ndarray:
        return self._buf[i]

    def find(self, m: np.ndarray, tol: float) -> int | None:
        diff = np.abs(self._buf[:self.size] - m).max(axis=(1, 2))
        i = int(np.argmin(diff))
        return i if diff[i] <= tol else None

    def append(self, m: np.ndarray) -> int:
        if self.size == len(self._buf):
            self._buf = np.concatenate([self._buf, np.empty_like(self._buf)])
        self._buf[self.size] = m
        self.size += 1
        return self.size - 1


@dataclass
class FiniteGroupAction:
    """Finite group given by its multiplication table, with left and right representations.

    ``table[i][j]`` is the index of ``elements[i] * elements[j]``.
    """

    elements: list
    table: list
    left: list
    right: list

    def __post_init__(self):
        k = len(self.elements)
        self.left = [as_unitary(m) for m in self.left]
        self.right = [as_unitary(m) for m in self.right]
        if len(self.left) != k or len(self.right) != k:
            raise NotHomomorphism("need one left and one right matrix per group element")
        tab = np.asarray(self.table, dtype=int)
        if tab.shape != (k, k) or tab.min(initial=0) < 0 or tab.max(initial=0) >= k:
            raise NotHomomorphism("multiplication table has the wrong shape or entries")
        self.table = tab.tolist()
        for rep, name in ((self.left, "left"), (self.right, "right")):
            for i in range(k):
                for j in range(k):
                    err = op_norm(rep[i] @ rep[j] - rep[self.table[i][j]])
                    if err > HOM_TOL:
                        raise NotHomomorphism(
                            f"{name} representation breaks the table at ({i}, {j}): {err:.3g}")

    @classmethod
    def from_generators(cls, left_generators: Sequence, right_generators: Sequence | None = None):
        """Enumerate the group generated by pairs ``(left_g, right_g)`` and build its table.

        ``right_generators`` defaults to the left ones (a conjugation action).
        """
        lg = [as_unitary(m) for m in left_generators]
        rg = lg if right_generators is None else [as_unitary(m) for m in right_generators]
        if len(lg) != len(rg) or not lg:
            raise NotHomomorphism("need matching, non-empty generator lists")
        n_l, n_r = lg[0].shape[0], rg[0].shape[0]
        stacked = [np.block([[a, np.zeros((n_l, n_r))], [np.zeros((n_r, n_l)), b]])
                   for a, b in zip(lg, rg)]
        found = _MatrixSet(np.eye(n_l + n_r, dtype=complex))
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                for g in stacked:
                    prod = found[i] @ g
                    if found.find(prod, DEDUP_TOL) is None:
                        nxt.append(found.append(prod))
                        if len(found) > MAX_GROUP_ORDER:
                            raise NotHomomorphism("generated group is too large or infinite")
            frontier = nxt
        elems = [found[i].copy() for i in range(len(found))]
        table = [[found.find(a @ b, 1e-6) for b in elems] for a in elems]
        if any(j is None for row in table for j in row):
            raise NotHomomorphism("generated set is not closed under products")
        return cls([str(i) for i in range(len(elems))], table,
                   [e[:n_l, :n_l] for e in elems], [e[n_l:, n_l:] for e in elems])

    @classmethod
    def conjugation(cls, generators: Sequence):
        return cls.from_generators(generators, generators)

    def __len__(self) -> int:
        return len(self.elements)

    def apply(self, i: int, u) -> np.ndarray:
        return self.left[i] @ np.asarray(u) @ dagger(self.right[i])

    def displacement(self, u, tol: Tolerances | None = None) -> float:
        """``max_h d_inf(pi(h)(u), u)``; zero exactly at fixed points."""
        return max(d_inf(self.apply(i, u), u, tol) for i in range(len(self)))


class OrbitReport(NamedTuple):
    points: list
    radius_bound: float
    witness: np.ndarray


def _dedup(points, tol=DEDUP_TOL):
    out = []
    for p in points:
        if _index_of(out, p, tol) is None:
            out.append(p)
    return out


def orbit(action: FiniteGroupAction, v, space: Subspace | None = None,
          conv=TraceConvention.STANDARD, tol: Tolerances | None = None) -> OrbitReport:
    """Orbit of ``v`` (deduplicated) with a heuristic circumradius bound and its witness center."""
    space = FullGroup() if space is None else space
    v = as_unitary(v, tol)
    points = _dedup([action.apply(i, v) for i in range(len(action))])
    witness, bound = circumradius_witness(points, space, conv, tol)
    return OrbitReport(points, bound, witness)


class FixedPointResult(NamedTuple):
    point: np.ndarray
    displacement: float
    radius_bound: float
    radius: float
    solve: CenterResult


def _admissible_cap(space: Subspace) -> float:
    return min(np.pi, space.length_parameter) / 2


def _fixed_point_of_orbit(points, space, displacement, conv, r, tol):
    tol = resolve(tol)
    cap = _admissible_cap(space)
    if r is None:
        sel = select_radius(points, space, conv, cap=cap, tol=tol)
        if sel.bound >= cap:
            raise RadiusTooLarge(sel.bound, cap, sel.witness)
        r, witness, bound = sel
    else:
        witness, bound = circumradius_witness(points, space, conv, tol)
        if bound >= cap:
            raise RadiusTooLarge(bound, cap, witness)
        if not bound < r < cap:
            raise ValueError(f"radius {r} must lie strictly between {bound:.6g} and {cap:.6g}")
    res = solve_center(CenterProblem(points, space, r, conv, witness), tol)
    disp = displacement(res.center)
    if disp > tol.fix_tol:
        raise NoConvergence(f"circumcenter moves by {disp:.3g} under the action")
    return FixedPointResult(res.center, disp, bound, r, res)


def find_fixed_point(action: FiniteGroupAction, v, space: Subspace | None = None,
                     r: float | None = None, conv=TraceConvention.STANDARD,
                     tol: Tolerances | None = None) -> FixedPointResult:
    """Fixed point of ``action`` in ``space`` as the circumcenter of the orbit of ``v``.

    The orbit's witness bound must be below ``min(pi, l)/2`` where ``l`` is
    the length parameter of ``space`` (``pi/2`` for the standard subsets,
    ``min(2 pi/n, pi)/2`` for SU(n)). ``r`` defaults to the witness bound
    plus a small margin.

    Raises
    ------
    RadiusTooLarge
        With the measured bound when it does not fit under the cap.
    NoConvergence
        If the returned center is not fixed within ``fix_tol``.
    """
    space = FullGroup() if space is None else space
    v = as_unitary(v, tol)
    points = _dedup([action.apply(i, v) for i in range(len(action))])
    return _fixed_point_of_orbit(points, space, lambda g: action.displacement(g, tol),
                                 conv, r, tol)


class IntertwinerResult(NamedTuple):
    g: np.ndarray
    residual: float          # max_h ||phi(h) - g rho(h) g^{-1}||
    radius_bound: float
    solve: CenterResult


def find_intertwiner(action: FiniteGroupAction, u0=None, space: Subspace | None = None,
                     conv=TraceConvention.STANDARD, tol: Tolerances | None = None) -> IntertwinerResult:
    """Unitary ``g`` in ``space`` with ``left(h) = g right(h) g^{-1}`` for every group element.

    ``u0`` (default identity) seeds the orbit ``{left(h) u0 right(h)^{-1}}``.
    """
    tol = resolve(tol)
    space = FullGroup() if space is None else space
    n = action.left[0].shape[0]
    u0 = np.eye(n, dtype=complex) if u0 is None else as_unitary(u0, tol)
    fp = find_fixed_point(action, u0, space, None, conv, tol)
    g = fp.point
    resid = max(op_norm(a - g @ b @ dagger(g)) for a, b in zip(action.left, action.right))
    if resid > tol.fix_tol or not member(space, g).inside:
        raise NoConvergence(f"intertwining residual {resid:.3g}")
    return IntertwinerResult(g, float(resid), fp.radius_bound, fp.solve)


class ProjectionResult(NamedTuple):
    q: np.ndarray
    commutator: float        # max over generators of ||h q - q h||
    radius_bound: float
    orbit_size: int
    solve: CenterResult


def conjugation_orbit(generators: Sequence, u, limit: int = MAX_GROUP_ORDER) -> list:
    """Orbit of ``u`` under conjugation by the group generated by ``generators`` (finite groups)."""
    gens = [as_unitary(h) for h in generators]
    found = _MatrixSet(np.asarray(u, dtype=complex))
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for h in gens:
                q = h @ found[i] @ dagger(h)
                if found.find(q, DEDUP_TOL) is None:
                    nxt.append(found.append(q))
                    if len(found) > limit:
                        raise NotHomomorphism("orbit does not close; is the group finite?")
        frontier = nxt
    return [found[i].copy() for i in range(len(found))]


def find_invariant_projection(generators: Sequence, rank: int, p0,
                              conv=TraceConvention.STANDARD,
                              tol: Tolerances | None = None) -> ProjectionResult:
    """Rank-``rank`` projection ``q`` commuting with every generator.

    Solves the circumcenter problem for the conjugation orbit of
    ``e_{p0} = id - 2 p0`` inside the Grassmannian of symmetries and
    returns ``q = (id - center)/2``.

    Raises
    ------
    RadiusTooLarge
        If the orbit's witness bound is not below ``pi/2``.
    NotProjection
        If the center fails to be a symmetry; that means the iterates left
        the Grassmannian and indicates a bug.
    """
    tol = resolve(tol)
    p0 = np.asarray(p0, dtype=complex)
    if projection_residual(p0) > 1e-9:
        raise NotProjection("p0 is not an orthogonal projection")
    space = Grassmannian(rank=rank)
    e0 = symmetry_from_projection(p0)
    if not member(space, e0).inside:
        raise NotProjection(f"p0 does not have rank {rank}")
    gens = [as_unitary(h, tol) for h in generators]
    points = conjugation_orbit(gens, e0)

    def displacement(u):
        return max((d_inf(h @ u @ dagger(h), u, tol) for h in gens), default=0.0)

    fp = _fixed_point_of_orbit(points, space, displacement, conv, None, tol)
    q = projection_from_symmetry(fp.point)
    if projection_residual(q) > 1e-9 or not member(space, fp.point).inside:
        raise NotProjection("circumcenter left the Grassmannian")
    comm = max((op_norm(h @ q - q @ h) for h in gens), default=0.0)
    return ProjectionResult(q, float(comm), fp.radius_bound, len(points), fp.solve)
