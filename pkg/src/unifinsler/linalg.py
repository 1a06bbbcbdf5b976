"""Dense complex linear algebra for unitary groups.

Matrices are plain complex ``numpy`` arrays of shape ``(n, n)``. The
validators :func:`as_matrix`, :func:`as_skew` and :func:`as_unitary` check
the invariants of the three carrier types (square finite matrix,
skew-Hermitian tangent vector, unitary group element) and return a fresh
read-only complex array.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (DimensionMismatch, InvalidP, MatrixFormatError, NoConvergence,
                     NotNormal, NotSkewHermitian, NotUnitary)
from .tolerances import Tolerances, resolve


class TraceConvention(str, enum.Enum):
    """``standard`` is the usual trace, ``normalized`` is ``Tr / n`` so that the identity has trace 1."""

    STANDARD = "standard"
    NORMALIZED = "normalized"


def as_convention(conv) -> TraceConvention:
    return conv if isinstance(conv, TraceConvention) else TraceConvention(conv)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise MatrixFormatError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise MatrixFormatError("matrix has non-finite entries")
    return _frozen(a)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def skew_part(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    return (a - dagger(a)) / 2


def hermitian_part(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    return (a + dagger(a)) / 2


def as_skew(m, tol: Tolerances | None = None) -> np.ndarray:
    """Validate a skew-Hermitian tangent vector and return its canonical form ``(m - m*)/2``."""
    tol = resolve(tol)
    a = as_matrix(m)
    scale = op_norm(a)
    defect = op_norm(a + dagger(a))
    if defect > tol.skew_tol * max(scale, 1.0):
        raise NotSkewHermitian(f"||m + m*|| = {defect:.3g} exceeds skew tolerance")
    return _frozen(skew_part(a))


def as_unitary(m, tol: Tolerances | None = None) -> np.ndarray:
    tol = resolve(tol)
    a = as_matrix(m)
    defect = op_norm(dagger(a) @ a - np.eye(a.shape[0]))
    if defect > tol.unit_tol:
        raise NotUnitary(f"||u*u - id|| = {defect:.3g} exceeds unit_tol = {tol.unit_tol:.3g}")
    return a


def same_dimension(*mats) -> int:
    dims = {np.shape(m) for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"incompatible shapes {sorted(dims)}")
    return np.shape(mats[0])[0]


def polar_unitary(m) -> np.ndarray:
    """Closest unitary to ``m`` in any unitarily invariant norm (polar factor)."""
    w, _, vh = np.linalg.svd(np.asarray(m, dtype=complex))
    return w @ vh


def op_norm(m) -> float:
    """Operator norm, the largest singular value."""
    a = np.asarray(m, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _check_p(p) -> int:
    try:
        ip = int(p)
    except (TypeError, ValueError):
        raise InvalidP(f"p must be an even integer >= 2, got {p!r}") from None
    if ip != p or ip < 2 or ip % 2:
        raise InvalidP(f"p must be an even integer >= 2, got {p!r}")
    return ip


def schatten_norm(m, p=2, conv=TraceConvention.STANDARD) -> float:
    """Schatten p-norm ``(sum sigma_i^p)^(1/p)``, divided by ``n^(1/p)`` under the normalized trace."""
    p = _check_p(p)
    conv = as_convention(conv)
    a = np.asarray(m, dtype=complex)
    sv = np.linalg.svd(a, compute_uv=False)
    top = sv.max() if sv.size else 0.0
    if top == 0.0:
        return 0.0
    # scale out the largest value to keep sigma^p finite for large p
    value = top * np.sum((sv / top) ** p) ** (1.0 / p)
    if conv is TraceConvention.NORMALIZED:
        value /= a.shape[0] ** (1.0 / p)
    return float(value)


def trace(m, conv=TraceConvention.STANDARD) -> complex:
    a = np.asarray(m)
    t = complex(np.trace(a))
    if as_convention(conv) is TraceConvention.NORMALIZED:
        t /= a.shape[0]
    return t


def trace_inner(x, y, conv=TraceConvention.STANDARD) -> float:
    """Real inner product ``Re tr(y* x)`` on skew-Hermitian matrices."""
    same_dimension(x, y)
    return trace(dagger(np.asarray(y)) @ np.asarray(x), conv).real


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def principal_angle(z) -> np.ndarray:
    """Argument in ``(-pi, pi]``; ``np.angle`` can return ``-pi`` for ``-1 - 0j``."""
    ang = np.angle(z)
    return np.where(ang <= -np.pi, np.pi, ang)


def spectral_normal(m, tol: Tolerances | None = None) -> SpectralDecomposition:
    """Unitary diagonalization of a normal matrix.

    Eigenvalues are sorted by principal angle, then by modulus. Uses the
    complex Schur form, which is diagonal for normal input.

    Raises
    ------
    NotNormal
        If ``||m m* - m* m|| > normal_tol * max(1, ||m||^2)``.
    NoConvergence
        If the Schur iteration fails or the reconstruction residual exceeds
        ``eig_tol * n``.
    """
    tol = resolve(tol)
    a = as_matrix(m)
    n = a.shape[0]
    scale = max(1.0, op_norm(a) ** 2)
    if op_norm(a @ dagger(a) - dagger(a) @ a) > tol.normal_tol * scale:
        raise NotNormal("matrix is not normal within normal_tol")
    try:
        t, z = scipy.linalg.schur(a, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NoConvergence(str(exc)) from exc
    lam = np.diag(t).copy()
    order = np.lexsort((np.abs(lam), principal_angle(lam)))
    dec = SpectralDecomposition(lam[order], z[:, order])
    resid = op_norm(a - dec.reconstruct())
    if resid > tol.eig_tol * n * max(1.0, op_norm(a)):
        raise NoConvergence(f"spectral reconstruction residual {resid:.3g}")
    return dec


def _hermitian_eig(x: np.ndarray):
    # eigenvalues of the skew matrix x are i * mu, mu from the Hermitian matrix -i x
    mu, v = np.linalg.eigh(-1j * x)
    return mu, v


def exp_skew(x, tol: Tolerances | None = None) -> np.ndarray:
    """Matrix exponential of a skew-Hermitian matrix; the result is unitary."""
    x = as_skew(x, tol)
    mu, v = _hermitian_eig(x)
    return (v * np.exp(1j * mu)) @ dagger(v)


def log_unitary(u, tol: Tolerances | None = None, *, return_flag: bool = False):
    """Principal logarithm of a unitary matrix.

    Eigenvalue angles are taken in ``(-pi, pi]``; eigenvalues within
    ``branch_tol`` of ``-1`` get angle exactly ``pi``. When that happens the
    logarithm, and the short geodesic it defines, is not unique.

    Parameters
    ----------
    u : array_like
        Unitary matrix.
    return_flag : bool
        If true, return ``(x, branch_ambiguity)``.

    Returns
    -------
    x : ndarray
        Skew-Hermitian matrix with ``exp(x) = u`` and ``||x|| <= pi``.
    branch_ambiguity : bool
        Only when ``return_flag`` is set.
    """
    tol = resolve(tol)
    u = as_unitary(u, tol)
    dec = spectral_normal(u, tol)
    lam = dec.eigenvalues
    near = np.abs(lam + 1) <= tol.branch_tol
    theta = np.where(near, np.pi, principal_angle(lam))
    v = dec.eigenvectors
    x = skew_part((v * (1j * theta)) @ dagger(v))
    if return_flag:
        return x, bool(near.any())
    return x


def eigen_angles(u, tol: Tolerances | None = None) -> np.ndarray:
    """Sorted principal angles of the spectrum of a unitary, i.e. the spectrum of ``-i log(u)``."""
    tol = resolve(tol)
    lam = spectral_normal(as_unitary(u, tol), tol).eigenvalues
    theta = np.where(np.abs(lam + 1) <= tol.branch_tol, np.pi, principal_angle(lam))
    return np.sort(theta)


def hermitian_min_eig(h) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(h))[0])
