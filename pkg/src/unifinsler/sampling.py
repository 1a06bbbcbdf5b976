"""Seeded random generators for unitary-group test instances."""
from __future__ import annotations

import numpy as np

from .linalg import exp_skew, op_norm, skew_part


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_skew(n: int, rng, norm: float | None = None) -> np.ndarray:
    """Gaussian skew-Hermitian matrix, rescaled to operator norm ``norm`` when given."""
    rng = rng_from(rng)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    x = skew_part(g)
    if norm is not None:
        s = op_norm(x)
        x = x * (norm / s) if s > 0 else x
    return x


def random_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase fix)."""
    rng = rng_from(rng)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_in_ball(center: np.ndarray, radius: float, rng, *, exact: bool = False) -> np.ndarray:
    """Random point at d_inf distance ``<= radius`` from ``center`` (``== radius`` if ``exact``)."""
    rng = rng_from(rng)
    n = center.shape[0]
    r = radius if exact else radius * rng.uniform(0.0, 1.0)
    return center @ exp_skew(random_skew(n, rng, norm=r))


def random_symmetry(n: int, rng, rank: int | None = None) -> np.ndarray:
    """Random self-adjoint unitary ``id - 2p`` with ``p`` a random projection of the given rank."""
    rng = rng_from(rng)
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    q = random_unitary(n, rng)
    p = q[:, :rank] @ np.conj(q[:, :rank]).T
    return np.eye(n) - 2 * p
