"""Exact distributional solution of ``N x' = x + f``, ``x(0) = x0`` with nilpotent ``N``.

With ``q`` the nilpotency index of ``N``,

    x = -sum_{i<q} N^i f^(i)  -  sum_{k=1}^{q-1} delta^(k-1) N^k (x0 + sum_{i<q} N^i f^(i)(0)),

where ``f^(i)(0)`` is the right-hand derivative at the origin. The impulses
vanish exactly when ``x0`` is a consistent initial value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import (
    PRUNE_TOL,
    GeneralizedFunction,
    combine,
    distributional_derivative,
    smooth_as_distribution,
    transform,
)
from .errors import DimensionMismatch, SmoothnessError
from .matrix_core import DEFAULT_NILPOTENCY_TOL, NilpotencyCert, as_matrix, nilpotency_index
from .signal_lang import (
    VectorSignal,
    apply_matrix,
    as_piecewise,
    combine_signals,
    differentiate,
    right_derivative_at_zero,
)


@dataclass(frozen=True, eq=False)
class SolveRequest:
    N: np.ndarray
    x0: np.ndarray
    f: object
    tol: float = DEFAULT_NILPOTENCY_TOL

    def __post_init__(self):
        N = as_matrix(self.N, "N")
        x0 = np.asarray(self.x0, dtype=float).ravel()
        n = N.shape[0]
        if x0.shape != (n,):
            raise DimensionMismatch(f"x0 has {x0.size} entries, N is {n}x{n}")
        f = self.f if self.f is not None else VectorSignal.zeros(n)
        if f.n != n:
            raise DimensionMismatch(f"forcing has {f.n} components, N is {n}x{n}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return self.N.shape[0]

    def certificate(self) -> NilpotencyCert:
        return nilpotency_index(self.N, self.tol)


def _check_smoothness(f, q):
    pw = as_piecewise(f)
    if pw.breakpoints and pw.smoothness_order < q - 1:
        raise SmoothnessError(
            f"forcing is only C^{pw.smoothness_order} across its breakpoints; C^{q - 1} is required"
        )


def bracket_vector(N, f, x0, q):
    """``x0 + sum_{i<q} N^i f^(i)(0+)``."""
    out = np.array(x0, dtype=float)
    P = np.eye(N.shape[0])
    for i in range(q):
        out = out + P @ right_derivative_at_zero(f, i)
        P = P @ N
    return out


def solve_singular(req: SolveRequest, terms: int | None = None) -> GeneralizedFunction:
    """Distributional solution of the reduced problem.

    ``terms`` overrides the upper summation limit (default ``q - 1``); any value
    ``>= q - 1`` gives the same answer because ``N^q = 0``.
    """
    q = req.certificate().q
    _check_smoothness(req.f, q)
    m = q - 1 if terms is None else terms
    N, f = req.N, req.f
    n = req.n

    smooth = as_piecewise(VectorSignal.zeros(n))
    P = np.eye(n)
    for i in range(m + 1):
        if np.any(P):
            smooth = combine_signals(1.0, smooth, -1.0, apply_matrix(P, differentiate(as_piecewise(f), i)))
        P = P @ N

    B = bracket_vector(N, f, req.x0, m + 1)
    impulses = []
    P = N.copy()
    for k in range(1, m + 1):
        c = -(P @ B)
        if np.linalg.norm(c) >= PRUNE_TOL:
            impulses.append((k - 1, c))
        P = P @ N
    return GeneralizedFunction(smooth, impulses)


def distributional_residual(req: SolveRequest, x: GeneralizedFunction) -> GeneralizedFunction:
    """``N D x - x - f*step - delta * N x0``, which vanishes for the exact solution."""
    lhs = transform(req.N, distributional_derivative(x))
    r = combine(1.0, lhs, -1.0, x)
    r = combine(1.0, r, -1.0, smooth_as_distribution(req.f))
    return combine(1.0, r, -1.0, GeneralizedFunction.impulse(0, req.N @ req.x0))


def consistent_initial_set_check(N, f, x0, tol: float = DEFAULT_NILPOTENCY_TOL, atol: float = 1e-12) -> bool:
    """True iff ``N (x0 + sum_{i<q} N^i f^(i)(0))`` vanishes, i.e. no impulses arise."""
    req = SolveRequest(N, x0, f, tol)
    q = req.certificate().q
    v = req.N @ bracket_vector(req.N, req.f, req.x0, q)
    scale = 1.0 + np.linalg.norm(req.N) * np.linalg.norm(bracket_vector(req.N, req.f, req.x0, q))
    return bool(np.linalg.norm(v) <= atol * scale)


def summary(req: SolveRequest, x: GeneralizedFunction) -> str:
    q = req.certificate().q
    lines = [f"nilpotency index q = {q}"]
    if x.impulses:
        for j, c in x.impulses:
            lines.append(f"impulse delta^({j}): coefficient {np.array2string(c, precision=6)}, norm {np.linalg.norm(c):.6g}")
    else:
        lines.append("no impulses (consistent initial value)")
    return "\n".join(lines)
