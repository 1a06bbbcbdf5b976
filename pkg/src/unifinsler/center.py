"""Circumcenters: minimize ``f_A(u) = max_a d_2(u, a)^2`` over ``C = M ∩ ⋂_a B_inf[a, r]``.

For ``r < pi/2`` every ``d_2(a, .)^2`` is ``lam``-convex on ``C`` with
``lam = sin(2r)/(2r)``, so the minimizer is unique and any point ``c`` in
``C`` satisfies ``d_2(c, c*)^2 <= (f_A(c) - f*)/lam``. The solver reports
that bound with a certified lower estimate of ``f*``.

Iteration (``step_rule="tangent_ball"``): at ``u`` take the site logs
``l_a = log(u^{-1} a)``; the flat model of ``f_A`` near ``u`` is
``max_a ||l_a - xi||^2``. Eigen-angles of the ``l_a`` close to ``r`` enter
as linear constraints on ``xi``, and the model is solved through its small
dual (the enclosing-ball problem with extra constraint weights). Move along
``u exp(eta xi)`` with backtracking on ``f_A`` and on feasibility. With a
single active site and no constraints this is the farthest-site pull, which
is kept as ``step_rule="farthest"``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import AntipodalSpectrum, InfeasibleStart, NotInSubspace, UnifinslerError
from .io import csv_text, matrix_to_json
from .linalg import (TraceConvention, as_convention, as_unitary, dagger, exp_skew, log_unitary,
                     polar_unitary)
from .metric import BallSpec, d_2, d_inf, geodesic_between, in_ball
from .sampling import rng_from
from .subspaces import FullGroup, Subspace, member
from .tolerances import Tolerances, resolve

log = logging.getLogger(__name__)

FEASIBILITY_SLACK = 1e-12
MEMBER_SLACK = 1e-8


class StallWarning(RuntimeWarning):
    """The solver hit ``max_iters`` while still moving by more than ``stop_tol``."""


def strong_convexity_modulus(r: float) -> float:
    """``sin(2r)/(2r)``, the modulus of ``d_2(a, .)^2`` on ``B_inf[a, r]`` for unit-speed geodesics."""
    return float(np.sin(2 * r) / (2 * r)) if r > 0 else 1.0


def circumradius_upper(sites: Sequence, space: Subspace, candidate,
                       tol: Tolerances | None = None) -> float:
    """``max_a d_inf(a, c)``, an upper bound on the d_inf-circumradius of the sites relative to ``space``."""
    tol = resolve(tol)
    if not member(space, candidate).inside:
        raise NotInSubspace("candidate center is not in the subspace")
    return max(d_inf(a, candidate, tol) for a in sites)


def f_A(sites: Sequence, u, conv=TraceConvention.STANDARD, tol: Tolerances | None = None) -> float:
    return max(d_2(u, a, conv, tol) ** 2 for a in sites)


@dataclass
class CenterProblem:
    sites: list
    subspace: Subspace = field(default_factory=FullGroup)
    radius: float | None = None          # None: no ball constraints (heuristic use only)
    conv: TraceConvention = TraceConvention.STANDARD
    start: np.ndarray | None = None
    max_iters: int = 100_000
    step_rule: str = "tangent_ball"
    stop_tol: float = 1e-9

    def __post_init__(self):
        self.sites = [as_unitary(a) for a in self.sites]
        if not self.sites:
            raise ValueError("need at least one site")
        self.conv = as_convention(self.conv)
        if self.start is None:
            self.start = self.sites[0]
        self.start = as_unitary(self.start)
        if self.step_rule not in ("tangent_ball", "farthest"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")

    def balls(self) -> list[BallSpec]:
        if self.radius is None:
            return []
        return [BallSpec(a, self.radius) for a in self.sites]


@dataclass
class CenterResult:
    center: np.ndarray
    value: float
    iterations: int
    max_move_last: float
    stalled: bool
    kkt_step: float                 # norm of the last proposed tangent step
    site_margins: list
    member_residual: float
    lam: float | None
    lower_bound: float | None
    gap_bound: float | None         # bound on d_2(center, true minimizer)^2
    weights: list
    trace: list = field(default_factory=list)
    constraint_weights: list = field(default_factory=list)

    @property
    def distance_bound(self) -> float | None:
        return None if self.gap_bound is None else float(np.sqrt(self.gap_bound))

    def to_json(self) -> dict:
        return {
            "center": matrix_to_json(self.center),
            "value": self.value,
            "iterations": self.iterations,
            "max_move_last": self.max_move_last,
            "stalled": self.stalled,
            "kkt_step": self.kkt_step,
            "certificates": {
                "site_margins": self.site_margins,
                "member_residual": self.member_residual,
                "lambda": self.lam,
                "lower_bound": self.lower_bound,
                "gap_bound": self.gap_bound,
                "distance_bound": self.distance_bound,
            },
            "weights": self.weights,
            "constraint_weights": self.constraint_weights,
        }

    def trace_csv(self) -> str:
        return csv_text(["iter", "f_A", "step"], self.trace)


def _project_simplex(v: np.ndarray) -> np.ndarray:
    s = np.sort(v)[::-1]
    css = np.cumsum(s) - 1.0
    idx = np.arange(1, v.size + 1)
    k = idx[s - css / idx > 0][-1]
    return np.maximum(v - css[k - 1] / k, 0.0)


def _project_feasible(z: np.ndarray, k: int) -> np.ndarray:
    out = np.empty_like(z)
    out[:k] = _project_simplex(z[:k])
    out[k:] = np.maximum(z[k:], 0.0)
    return out


def _support_solve(g, q, k, support):
    """Stationary point of the dual on ``support`` (equality constrained), with its multiplier."""
    s = np.flatnonzero(support)
    sk = s < k
    kkt = np.zeros((s.size + 1, s.size + 1))
    kkt[:-1, :-1] = 2 * g[np.ix_(s, s)]
    kkt[:-1, -1] = sk
    kkt[-1, :-1] = sk
    sol = np.linalg.lstsq(kkt, np.concatenate([q[s], [1.0]]), rcond=None)[0]
    cand = np.zeros(q.size)
    cand[s] = sol[:-1]
    return s, cand, float(sol[-1])


def _polish(g, q, k, z, obj):
    """Active-set refinement from the support of ``z``.

    Returns ``(z_new, exact)`` where ``exact`` means the KKT conditions hold
    for ``z_new`` within rounding.
    """
    m = q.size
    support = z > 1e-12
    support[:k] |= (z[:k] == z[:k].max())
    for _ in range(m):
        s, cand, tau = _support_solve(g, q, k, support)
        if np.all(cand >= -1e-14):
            cand = np.maximum(cand, 0.0)
            cand[:k] /= cand[:k].sum()
            if obj(cand) < obj(z) - 1e-15 * max(1.0, abs(obj(z))):
                return z, False
            grad = q - 2 * g @ cand
            slack = np.concatenate([grad[:k] - tau, grad[k:]])
            eps = 1e-11 * max(1.0, float(np.abs(q).max()))
            exact = bool(np.all(slack[~support] <= eps))
            return cand, exact
        drop = s[np.argmin(cand[s])]
        if drop < k and support[:k].sum() == 1:
            break
        support[drop] = False
    return z, False


def model_dual_weights(gram: np.ndarray, lin: np.ndarray, k: int, iters: int = 20000) -> np.ndarray:
    """Maximize ``lin . z - z^T G z`` with ``z[:k]`` on the simplex and ``z[k:] >= 0``.

    This is the dual of the flat step model: the first ``k`` weights belong
    to the sites, the rest to linearized ball constraints. Accelerated
    projected gradient with restarts; every few dozen iterations the
    detected support is solved exactly and the loop stops once that
    solution satisfies the KKT conditions.
    """
    g = np.asarray(gram, dtype=float)
    q = np.asarray(lin, dtype=float)
    m = g.shape[0]
    if m == 1:
        return np.ones(1)

    def obj(z):
        return z @ q - z @ g @ z

    lip = 2.0 * max(np.linalg.eigvalsh(g)[-1], 1e-300)
    z = np.zeros(m)
    z[:k] = 1.0 / k
    y, t = z.copy(), 1.0
    for it in range(iters):
        nxt = _project_feasible(y + (q - 2 * g @ y) / lip, k)
        if np.abs(nxt - z).sum() < 1e-16:
            z = nxt
            break
        t_next = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = nxt + (t - 1) / t_next * (nxt - z)
        if obj(nxt) < obj(z):           # adaptive restart
            y, t_next = nxt.copy(), 1.0
        z, t = nxt, t_next
        if it % 25 == 24:
            cand, exact = _polish(g, q, k, z, obj)
            if exact:
                return cand
    return _polish(g, q, k, z, obj)[0]


def enclosing_ball_weights(gram: np.ndarray, iters: int = 20000) -> np.ndarray:
    """Weights on the simplex of the smallest ball enclosing vectors with Gram matrix ``gram``.

    The center is ``sum mu_j v_j``.
    """
    g = np.asarray(gram, dtype=float)
    return model_dual_weights(g, np.diag(g).copy(), g.shape[0], iters)


class _State(NamedTuple):
    u: np.ndarray
    logs: list
    sq: np.ndarray          # squared d_2 distances to sites


class _Constraint(NamedTuple):
    site: int
    normal: np.ndarray      # c with d/d eta |theta| = <c, xi> along u exp(eta xi)
    angle: float            # |theta|
    top: bool               # |theta| is d_inf(u, site) up to rounding


ACTIVE_BAND = 0.05
TOP_TOL = 1e-9


def _inner(a: np.ndarray, b: np.ndarray, conv: TraceConvention) -> float:
    val = float(np.vdot(b, a).real)
    return val / a.shape[0] if conv is TraceConvention.NORMALIZED else val


def _state(u, sites, conv, tol) -> _State:
    logs = [log_unitary(dagger(u) @ a, tol) for a in sites]
    sq = np.array([_inner(x, x, conv) for x in logs])
    return _State(u, logs, sq)


def _feasible(u, problem: CenterProblem, balls, tol) -> bool:
    if problem.subspace.residual(u) > MEMBER_SLACK:
        return False
    return all(in_ball(u, b, tol).margin >= -FEASIBILITY_SLACK for b in balls)


def _constraints(st: _State, problem: CenterProblem) -> list[_Constraint]:
    """Linearized ball constraints for eigen-angles of ``log(u^{-1} a)`` near ``r``.

    Along ``u exp(eta xi)`` an eigen-angle ``theta`` of ``log(u^{-1} a)``
    with unit eigenvector ``v`` moves at rate ``-Im(v* xi v)``.
    """
    if problem.radius is None:
        return []
    r = problem.radius
    n = st.u.shape[0]
    scale = n if problem.conv is TraceConvention.NORMALIZED else 1.0
    out = []
    for i, x in enumerate(st.logs):
        theta, vecs = np.linalg.eigh(-1j * x)
        top = np.max(np.abs(theta))
        for j in np.flatnonzero(np.abs(theta) >= r - ACTIVE_BAND):
            v = vecs[:, j:j + 1]
            grad = 1j * scale * (v @ dagger(v))          # <grad, xi> = Im(v* xi v)
            out.append(_Constraint(i, -np.sign(theta[j]) * grad, float(abs(theta[j])),
                                   bool(abs(theta[j]) >= top - TOP_TOL)))
    return out


class _Step(NamedTuple):
    xi: np.ndarray
    mu: np.ndarray          # site weights
    nu: np.ndarray          # constraint weights
    cons: list
    model: float            # flat-model value max_a ||l_a - xi||^2 at the step


def _combine(st, cons, mu, nu):
    xi = sum(m * x for m, x in zip(mu, st.logs))
    for w, c in zip(nu, cons):
        if w:
            xi = xi - 0.5 * w * c.normal
    return xi


def _direction(st: _State, problem: CenterProblem) -> _Step:
    """Minimizer of the flat model ``max_a ||l_a - xi||^2`` under linearized ball constraints."""
    k = len(st.logs)
    conv = problem.conv
    if problem.step_rule == "farthest":
        j = int(np.argmax(st.sq))
        mu = np.zeros(k)
        mu[j] = 1.0
        xi = st.logs[j]
        return _Step(xi, mu, np.zeros(0), [],
                     max(_inner(x - xi, x - xi, conv) for x in st.logs))
    cons = _constraints(st, problem)
    basis = list(st.logs) + [-0.5 * c.normal for c in cons]
    gram = np.array([[_inner(a, b, conv) for b in basis] for a in basis])
    lin = np.concatenate([st.sq, [-(problem.radius - c.angle) for c in cons]])
    z = model_dual_weights(gram, lin, k)
    mu, nu = z[:k], z[k:]
    xi = _combine(st, cons, mu, nu)
    return _Step(xi, mu, nu, cons, max(_inner(x - xi, x - xi, conv) for x in st.logs))


def _retract(u, space: Subspace):
    if space.residual(u) > 1e-12:
        u = space.project(u)
    return polar_unitary(u)


def _min_margin(u, balls, tol) -> float:
    return min((in_ball(u, b, tol).margin for b in balls), default=np.inf)


def _interior_point(problem: CenterProblem, balls, tol):
    """A point of ``C`` with every ball margin positive, used to pull trial steps back inside."""
    if _min_margin(problem.start, balls, tol) > 1e-9:
        return problem.start
    try:
        witness, _ = circumradius_witness(problem.sites, problem.subspace, problem.conv, tol)
    except UnifinslerError:
        return None
    return witness if _min_margin(witness, balls, tol) > 1e-9 else None


def _pull_inside(cand, interior, problem, balls, tol, rounds: int = 40):
    """First feasible point on the geodesic from ``cand`` toward ``interior`` (bisection)."""
    try:
        g = geodesic_between(cand, interior, tol)
    except AntipodalSpectrum:
        return None
    lo, hi = 0.0, 1.0
    for _ in range(rounds):
        mid = (lo + hi) / 2
        if _feasible(_retract(g.at(mid), problem.subspace), problem, balls, tol):
            hi = mid
        else:
            lo = mid
    best = _retract(g.at(hi), problem.subspace)
    return best if _feasible(best, problem, balls, tol) else None


def solve_center(problem: CenterProblem, tol: Tolerances | None = None) -> CenterResult:
    """Minimize ``f_A`` over the feasible set, starting from ``problem.start``.

    Iterates stay in the feasible set: a trial step is accepted only if it
    decreases ``f_A`` (Armijo) and keeps every ball margin and the subspace
    residual within tolerance. Trial points that curvature pushes slightly
    out of a ball are pulled back along the geodesic toward a strictly
    interior point.

    Raises
    ------
    InfeasibleStart
        If the start is not in the subspace or outside some site ball.
    """
    tol = resolve(tol)
    sites = problem.sites
    conv = problem.conv
    balls = problem.balls()
    if not _feasible(problem.start, problem, balls, tol):
        raise InfeasibleStart("start is not in the feasible set")
    interior = _interior_point(problem, balls, tol) if balls else None
    st = _state(problem.start, sites, conv, tol)
    f = float(st.sq.max())
    trace = [(0, f, 0.0)]
    move = 0.0
    steps = 0
    stalled = False
    for it in range(1, problem.max_iters + 1):
        step = _direction(st, problem)
        xi_norm = float(np.sqrt(max(_inner(step.xi, step.xi, conv), 0.0)))
        if xi_norm < problem.stop_tol:
            move = 0.0
            break
        if problem.step_rule == "farthest":
            eta = 1.0 / (it + 1)
            predicted = 2.0 * xi_norm ** 2
        else:
            eta = 1.0
            predicted = max(f - step.model, 0.0)
        accepted = None
        while eta * xi_norm >= problem.stop_tol * 1e-3:
            cand = _retract(st.u @ exp_skew(eta * step.xi), problem.subspace)
            if not _feasible(cand, problem, balls, tol) and interior is not None:
                cand = _pull_inside(cand, interior, problem, balls, tol)
            if cand is not None and _feasible(cand, problem, balls, tol):
                cst = _state(cand, sites, conv, tol)
                fc = float(cst.sq.max())
                if fc <= f - 1e-4 * eta * predicted + 1e-14 * max(1.0, f):
                    accepted = (cst, fc, float(np.sqrt(max(d_2(st.u, cand, conv, tol) ** 2, 0.0))))
                    break
            eta *= 0.5
        if accepted is None:
            move = 0.0
            break
        st, f, move = accepted
        steps += 1
        trace.append((steps, f, move))
        if move < problem.stop_tol:
            break
    else:
        stalled = move > problem.stop_tol
    if stalled:
        warnings.warn(f"center solver stopped at max_iters={problem.max_iters} "
                      f"with last move {move:.3g}", StallWarning, stacklevel=2)
    return _finish(problem, st, f, steps, move, stalled, _direction(st, problem), trace, tol)


def _finish(problem, st, f, iters, move, stalled, step: _Step, trace, tol) -> CenterResult:
    conv = problem.conv
    margins = [in_ball(st.u, b, tol).margin for b in problem.balls()]
    xi_norm = float(np.sqrt(max(_inner(step.xi, step.xi, conv), 0.0)))
    lam = lower = gap = None
    if problem.radius is not None and 0 < problem.radius < np.pi / 2:
        lam = strong_convexity_modulus(problem.radius)
        r = problem.radius
        sites = problem.sites
        diam = max(d_2(a, b, conv, tol) for a in sites for b in sites)
        pair_bound = diam ** 2 / 4
        # For u = c exp(x) in C: sum mu f_a(u) >= sum mu f_a(c) - 2<sum mu l_a, x> + lam |x|^2,
        # and a top eigen-angle linearization of d_inf(., a) <= r adds nu (|theta| - r + <n, x>) <= 0.
        # Minimizing over x gives f* >= sum mu f_a(c) + sum nu (|theta| - r) - |xi|^2 / lam.
        nu = np.array([w if c.top else 0.0 for w, c in zip(step.nu, step.cons)])
        xi = _combine(st, step.cons, step.mu, nu)
        dual_bound = (float(step.mu @ st.sq)
                      + sum(w * (c.angle - r) for w, c in zip(nu, step.cons))
                      - _inner(xi, xi, conv) / lam)
        lower = max(pair_bound, dual_bound)
        rounding = 1e-13 * max(1.0, f) + TOP_TOL * float(nu.sum())
        gap = (max(f - lower, 0.0) + rounding) / lam
    return CenterResult(st.u, float(f), int(iters), float(move), bool(stalled), xi_norm,
                        [float(m) for m in margins], float(problem.subspace.residual(st.u)),
                        lam, lower, gap, [float(m) for m in step.mu], trace,
                        [float(w) for w in step.nu])


class UniquenessReport(NamedTuple):
    centers: list
    values: list
    spread: float
    bound: float
    within_bound: bool


def random_feasible_start(problem: CenterProblem, anchor, rng, tol: Tolerances | None = None,
                          attempts: int = 40):
    """A feasible point on a geodesic from ``anchor`` toward a random site, shrinking until feasible."""
    tol = resolve(tol)
    rng = rng_from(rng)
    balls = problem.balls()
    for _ in range(attempts):
        a = problem.sites[int(rng.integers(len(problem.sites)))]
        if d_inf(anchor, a, tol) >= min(np.pi, problem.subspace.length_parameter) - 1e-9:
            continue
        g = geodesic_between(anchor, a, tol)
        t = rng.uniform()
        for _ in range(30):
            cand = _retract(g.at(t), problem.subspace)
            if _feasible(cand, problem, balls, tol):
                return cand
            t *= 0.5
    return np.array(anchor)


def verify_uniqueness(problem: CenterProblem, restarts: int = 10, seed=0,
                      tol: Tolerances | None = None) -> UniquenessReport:
    """Solve from ``restarts`` feasible starts and compare the centers.

    ``bound`` is the sum of the two largest certified distance bounds, so
    ``spread <= bound`` is what uniqueness plus the certificates predict.
    """
    tol = resolve(tol)
    rng = rng_from(seed)
    first = solve_center(problem, tol)
    results = [first]
    for _ in range(restarts - 1):
        start = random_feasible_start(problem, first.center, rng, tol)
        prob = CenterProblem(problem.sites, problem.subspace, problem.radius, problem.conv, start,
                             problem.max_iters, problem.step_rule, problem.stop_tol)
        results.append(solve_center(prob, tol))
    centers = [r.center for r in results]
    spread = max((d_2(a, b, problem.conv, tol) for a in centers for b in centers), default=0.0)
    dists = sorted((r.distance_bound or 0.0 for r in results), reverse=True)
    bound = dists[0] + (dists[1] if len(dists) > 1 else 0.0)
    return UniquenessReport(centers, [r.value for r in results], float(spread), float(bound),
                            bool(spread <= bound))


class RadiusSelection(NamedTuple):
    radius: float
    witness: np.ndarray
    bound: float


def karcher_start(sites: Sequence, space: Subspace, tol: Tolerances | None = None) -> np.ndarray:
    """``a_0 exp(mean_a log(a_0^{-1} a))``, pushed back onto ``space``."""
    tol = resolve(tol)
    a0 = sites[0]
    mean = sum(log_unitary(dagger(a0) @ a, tol) for a in sites) / len(sites)
    return _retract(a0 @ exp_skew(mean), space)


def circumradius_witness(sites: Sequence, space: Subspace, conv=TraceConvention.STANDARD,
                         tol: Tolerances | None = None, max_iters: int = 2000):
    """Heuristic witness center for the d_inf-circumradius of ``sites`` relative to ``space``.

    Candidates are the sites, a log-average start, and the d_2 minimax
    center over ``space`` with ball constraints dropped. Returns
    ``(witness, bound)`` for the candidate with the smallest
    ``max_a d_inf(a, witness)``; ``bound`` only ever upper-bounds the true
    circumradius.
    """
    tol = resolve(tol)
    sites = [as_unitary(a) for a in sites]
    candidates = [a for a in sites if member(space, a).inside]
    k0 = karcher_start(sites, space, tol)
    if member(space, k0).inside:
        candidates.append(k0)
        try:
            relaxed = solve_center(CenterProblem(sites, space, None, conv, k0, max_iters=max_iters),
                                   tol)
            if member(space, relaxed.center).inside:
                candidates.append(relaxed.center)
        except (InfeasibleStart, ArithmeticError) as exc:
            log.debug("relaxed center failed: %s", exc)
    if not candidates:
        raise NotInSubspace("no candidate witness lies in the subspace")
    scored = [(max(d_inf(a, c, tol) for a in sites), i) for i, c in enumerate(candidates)]
    bound, i = min(scored)
    return candidates[i], float(bound)


def select_radius(sites: Sequence, space: Subspace, conv=TraceConvention.STANDARD,
                  cap: float = np.pi / 2, margin: float = 1e-3,
                  tol: Tolerances | None = None) -> RadiusSelection:
    """Pick a feasible radius: the witness bound plus ``margin``, kept below ``cap``.

    Heuristic; the returned radius is strictly above the witness bound, so
    the witness is a feasible start for the center problem.
    """
    witness, bound = circumradius_witness(sites, space, conv, tol)
    r = bound + margin
    if r >= cap:
        r = (bound + cap) / 2
    return RadiusSelection(float(r), witness, bound)
