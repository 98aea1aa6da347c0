"""Dense real matrix kernels shared by every solver.

Matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)``; ``as_matrix``
is the single entry point that validates them. The norm is Frobenius
throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InputError, NotNilpotent, Overflow, Singular

DEFAULT_NILPOTENCY_TOL = 1e-12

# Pade [13/13] numerator coefficients and the 1-norm bound under which it
# is accurate to double precision without squaring.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite square float array or raise ``InputError``."""
    A = np.array(M, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} has non-finite entries")
    return A


def operator_norm(M) -> float:
    """Frobenius norm (the declared norm everywhere in this package)."""
    return float(np.linalg.norm(np.asarray(M, dtype=float), "fro"))


@dataclass(frozen=True)
class NilpotencyCert:
    """Certificate that ``M**q`` vanishes numerically while ``M**(q-1)`` does not.

    ``residual`` is the largest relative residual ``||M^k|| / (1 + ||M||^k)``
    seen for ``k <= q``; ``tol`` is the threshold it was compared against.
    """

    q: int
    residual: float
    tol: float


def _relative_power_residual(P, normM, k):
    return operator_norm(P) / (1.0 + normM**k)


def nilpotency_index(M, tol: float = DEFAULT_NILPOTENCY_TOL) -> NilpotencyCert:
    """Smallest ``q >= 1`` with ``||M^q||_F <= tol * (1 + ||M||_F^q)``.

    Cayley-Hamilton bounds the index of a nilpotent matrix by its dimension,
    so only ``q <= n`` is tried.

    >>> nilpotency_index([[0.0, 1.0], [0.0, 0.0]]).q
    2
    """
    if tol < 0:
        raise InputError("tol must be nonnegative")
    A = as_matrix(M)
    n = A.shape[0]
    normA = operator_norm(A)
    P = np.eye(n)
    worst = 0.0
    for q in range(1, n + 1):
        P = P @ A
        res = _relative_power_residual(P, normA, q)
        worst = max(worst, res)
        if res <= tol:
            return NilpotencyCert(q=q, residual=worst, tol=tol)
    raise NotNilpotent(f"no power M^q with q <= {n} vanishes (last relative residual {res:.3e})")


def nilpotent_shift_split(M, tol: float = DEFAULT_NILPOTENCY_TOL):
    """Write ``M = s*I + K`` with ``K`` nilpotent, or return ``None``.

    ``s`` is the mean diagonal entry (the only candidate, since a nilpotent
    ``K`` is traceless).
    """
    A = as_matrix(M)
    n = A.shape[0]
    s = float(np.trace(A)) / n
    K = A - s * np.eye(n)
    try:
        cert = nilpotency_index(K, tol)
    except NotNilpotent:
        return None
    return s, K, cert


def _nilpotent_series(K, q, scale=1.0):
    n = K.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, q):
        term = term @ K * (scale / k)
        out = out + term
    return out


def _expm_pade13(A):
    n = A.shape[0]
    norm1 = float(np.linalg.norm(A, 1))
    if not math.isfinite(norm1):
        raise Overflow("matrix norm is not finite")
    s = 0 if norm1 <= _THETA13 else int(math.ceil(math.log2(norm1 / _THETA13)))
    if s > 1000:
        raise Overflow(f"norm {norm1:.3e} too large for scaling and squaring")
    A = A / (2.0**s)
    b = _PADE13
    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    R = np.linalg.solve(V - U, V + U)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            R = R @ R
    return R


def mat_exp(M, tol: float = DEFAULT_NILPOTENCY_TOL):
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant.

    When ``M`` is a scalar shift of a nilpotent matrix (the perturbation
    families used throughout) the exponential is instead the exact terminating
    series ``e^s * sum_k K^k / k!``.

    Raises ``Overflow`` when the result is not representable.
    """
    A = as_matrix(M)
    split = nilpotent_shift_split(A, tol)
    with np.errstate(over="ignore", invalid="ignore"):
        if split is not None:
            s, K, cert = split
            R = math.exp(s) * _nilpotent_series(K, cert.q) if s < 709.78 else np.full(A.shape, np.inf)
        else:
            R = _expm_pade13(A)
    if not np.all(np.isfinite(R)):
        raise Overflow("matrix exponential exceeds the representable range")
    return R


def mat_inverse(M, tol: float = 1e-14):
    """Inverse via LU with partial pivoting.

    Raises ``Singular`` when a pivot magnitude falls below ``tol * ||M||_F``.
    """
    A = as_matrix(M)
    n = A.shape[0]
    scale = operator_norm(A)
    if scale == 0.0:
        raise Singular("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported below as Singular
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= tol * scale:
        raise Singular(f"pivot {pivots.min():.3e} below {tol:.1e} * ||M||_F = {tol * scale:.3e}")
    return scipy.linalg.lu_solve((lu, piv), np.eye(n), check_finite=False)


def rank_split(M, tol: float = 1e-10, reference: float | None = None):
    """Rank, column-space basis and kernel basis of ``M``.

    Both bases come from QR with column pivoting: the range from ``M`` itself,
    the kernel as the orthogonal complement of the row space (pivoted QR of
    ``M.T``). A diagonal entry of R counts toward the rank when it exceeds
    ``tol`` times the largest column norm, or ``tol * reference`` if that is
    larger (useful when ``M`` may be pure rounding noise).

    Returns
    -------
    rank : int
    range_basis : (n, rank) ndarray with orthonormal columns
    null_basis : (n, n - rank) ndarray with orthonormal columns
    """
    A = as_matrix(M)
    n = A.shape[0]
    colmax = float(np.max(np.linalg.norm(A, axis=0)))
    level = max(colmax, reference or 0.0)
    if colmax <= tol * level:
        return 0, np.zeros((n, 0)), np.eye(n)
    Q, R, _ = scipy.linalg.qr(A, pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > tol * level))
    Qt, Rt, _ = scipy.linalg.qr(A.T, pivoting=True)
    return rank, Q[:, :rank].copy(), Qt[:, rank:].copy()


def spectral_data(M):
    """Spectral abscissa (max real part) and spectral radius of ``M``."""
    ev = np.linalg.eigvals(as_matrix(M))
    return float(np.max(ev.real)), float(np.max(np.abs(ev)))


def matrix_power(M, k: int):
    return np.linalg.matrix_power(np.asarray(M, dtype=float), k)
