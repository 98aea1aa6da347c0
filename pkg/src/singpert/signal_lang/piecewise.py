"""Vector signals, piecewise signals and the compact-support Hermite extension."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import DimensionMismatch, InputError
from .expr import ZERO, Expr, T, add, const, derivative, is_const, linear_combination, mul, power, to_text

BREAKPOINT_MATCH_TOL = 1e-10


@dataclass(frozen=True)
class VectorSignal:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise DimensionMismatch("a signal needs at least one component")

    @property
    def n(self) -> int:
        return len(self.components)

    def __call__(self, t):
        return eval_signal(self, t)

    def to_text(self) -> str:
        return "[" + ", ".join(to_text(c) for c in self.components) + "]"

    __str__ = to_text

    @classmethod
    def zeros(cls, n):
        return cls((ZERO,) * n)

    @classmethod
    def constant(cls, values):
        return cls(tuple(const(v) for v in values))

    def is_zero(self) -> bool:
        return all(is_const(c, 0.0) for c in self.components)


@dataclass(frozen=True)
class PiecewiseSignal:
    """Signal made of ``len(breakpoints) + 1`` pieces.

    Piece ``j`` owns ``(b_j, b_{j+1}]`` with ``b_0 = -inf``; a breakpoint's
    value therefore comes from the piece on its left. ``smoothness_order`` is
    the number of derivatives claimed to match across every breakpoint; ``None``
    means there are no breakpoints and the signal is smooth, ``-1`` means even
    continuity is not claimed.
    """

    breakpoints: tuple
    pieces: tuple
    smoothness_order: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        bps = self.breakpoints
        if len(self.pieces) != len(bps) + 1:
            raise InputError("need exactly one more piece than breakpoints")
        if any(b <= 0 for b in bps) or any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise InputError("breakpoints must be positive and strictly increasing")
        dims = {p.n for p in self.pieces}
        if len(dims) != 1:
            raise DimensionMismatch("pieces have different dimensions")
        if not bps:
            object.__setattr__(self, "smoothness_order", None)
        elif self.smoothness_order is None or self.smoothness_order < -1:
            raise InputError("piecewise signals with breakpoints need smoothness_order >= -1")

    @property
    def n(self) -> int:
        return self.pieces[0].n

    @property
    def smooth(self) -> int:
        """Smoothness as a comparable number (infinite when there are no breakpoints)."""
        return math.inf if self.smoothness_order is None else self.smoothness_order

    @classmethod
    def from_signal(cls, sig):
        if isinstance(sig, PiecewiseSignal):
            return sig
        return cls((), (sig,), None)

    def piece_index(self, t):
        return np.searchsorted(self.breakpoints, t, side="left")

    def __call__(self, t):
        return eval_signal(self, t)

    def matching_defects(self, max_order):
        """Largest one-sided mismatch of derivatives ``0..max_order`` at each breakpoint."""
        out = []
        for j, b in enumerate(self.breakpoints):
            left, right = self.pieces[j], self.pieces[j + 1]
            worst = 0.0
            for k in range(max_order + 1):
                dl = eval_signal(differentiate(left, k), b)
                dr = eval_signal(differentiate(right, k), b)
                worst = max(worst, float(np.max(np.abs(dl - dr))))
            out.append(worst)
        return out


def as_piecewise(sig) -> PiecewiseSignal:
    if isinstance(sig, PiecewiseSignal):
        return sig
    if isinstance(sig, VectorSignal):
        return PiecewiseSignal.from_signal(sig)
    raise TypeError(f"not a signal: {sig!r}")


def _eval_vector(sig: VectorSignal, t):
    vals = [c.eval(t) for c in sig.components]
    return np.array(vals, dtype=float)


def eval_signal(sig, t):
    """Evaluate componentwise; returns shape ``(n,)`` for scalar ``t`` and
    ``(n, m)`` for an array of ``m`` times."""
    if isinstance(sig, VectorSignal):
        return _eval_vector(sig, t)
    if isinstance(sig, PiecewiseSignal):
        if not sig.breakpoints:
            return _eval_vector(sig.pieces[0], t)
        if np.ndim(t) == 0:
            return _eval_vector(sig.pieces[int(sig.piece_index(t))], t)
        t = np.asarray(t, dtype=float)
        idx = sig.piece_index(t)
        out = np.empty((sig.n,) + t.shape)
        for j in np.unique(idx):
            mask = idx == j
            out[:, mask] = _eval_vector(sig.pieces[j], t[mask])
        return out
    raise TypeError(f"not a signal: {sig!r}")


def differentiate(sig, order: int = 1):
    """Exact symbolic derivative of every component, ``order`` times.

    For piecewise signals each piece is differentiated; the claimed smoothness
    drops by ``order``. Differentiating past the point where continuity is
    claimed would need impulses at the breakpoints, which are not represented.
    """
    if order < 0:
        raise InputError("derivative order must be nonnegative")
    if isinstance(sig, VectorSignal):
        return VectorSignal(tuple(derivative(c, order) for c in sig.components))
    if isinstance(sig, PiecewiseSignal):
        if not sig.breakpoints:
            return PiecewiseSignal.from_signal(differentiate(sig.pieces[0], order))
        if order > sig.smoothness_order + 1:
            raise InputError(
                f"cannot differentiate {order} times a piecewise signal of smoothness {sig.smoothness_order}"
            )
        return PiecewiseSignal(
            sig.breakpoints,
            tuple(differentiate(p, order) for p in sig.pieces),
            sig.smoothness_order - order,
        )
    raise TypeError(f"not a signal: {sig!r}")


def right_derivative_at_zero(sig, order: int):
    """``sig^(order)(0+)``: the first piece's symbolic derivative evaluated at 0."""
    first = sig.pieces[0] if isinstance(sig, PiecewiseSignal) else sig
    return eval_signal(differentiate(first, order), 0.0)


def apply_matrix(M, sig):
    """The signal ``t -> M @ sig(t)`` for a constant matrix ``M`` (shape ``(m, n)``)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if isinstance(sig, PiecewiseSignal):
        return PiecewiseSignal(
            sig.breakpoints, tuple(apply_matrix(M, p) for p in sig.pieces), sig.smoothness_order
        )
    if M.shape[1] != sig.n:
        raise DimensionMismatch(f"matrix with {M.shape[1]} columns applied to {sig.n}-signal")
    return VectorSignal(tuple(linear_combination(row, sig.components) for row in M))


def _merge_smoothness(a, b):
    vals = [s for s in (a, b) if s is not None]
    return min(vals) if vals else None


def _refine(sig: PiecewiseSignal, bps):
    """Pieces of ``sig`` over the finer breakpoint list ``bps``."""
    # each merged interval is right-closed, so its right end picks the owner
    probes = list(bps) + [math.inf]
    return [sig.pieces[int(np.searchsorted(sig.breakpoints, p, side="left"))] for p in probes]


def combine_signals(a: float, s1, b: float, s2) -> PiecewiseSignal:
    """``a*s1 + b*s2`` as a piecewise signal over the merged breakpoints."""
    p1, p2 = as_piecewise(s1), as_piecewise(s2)
    if p1.n != p2.n:
        raise DimensionMismatch(f"cannot combine {p1.n}- and {p2.n}-dimensional signals")
    bps = tuple(sorted(set(p1.breakpoints) | set(p2.breakpoints)))
    pieces = []
    for v1, v2 in zip(_refine(p1, bps), _refine(p2, bps)):
        comps = tuple(
            linear_combination((a, b), (c1, c2)) for c1, c2 in zip(v1.components, v2.components)
        )
        pieces.append(VectorSignal(comps))
    smooth = _merge_smoothness(p1.smoothness_order, p2.smoothness_order) if bps else None
    return PiecewiseSignal(bps, tuple(pieces), smooth)


def _hermite_coefficients(values_at_b, q):
    """Monomial coefficients (in ``s = t - b``) of the degree ``2q-1`` polynomial
    with ``P^(k)(0) = values_at_b[k]`` and ``P^(k)(1) = 0`` for ``k < q``.

    The confluent Vandermonde system has integer entries, so it is solved in
    exact rational arithmetic and rounded once at the end.
    """
    m = 2 * q
    rows = []
    rhs = []
    for k in range(q):
        row = [Fraction(0)] * m
        row[k] = Fraction(math.factorial(k))
        rows.append(row)
        rhs.append(Fraction(float(values_at_b[k])))
    for k in range(q):
        rows.append([Fraction(math.perm(j, k)) if j >= k else Fraction(0) for j in range(m)])
        rhs.append(Fraction(0))
    # Gauss-Jordan elimination over the rationals
    A = [r + [v] for r, v in zip(rows, rhs)]
    for col in range(m):
        piv = next(r for r in range(col, m) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(m):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [float(A[j][m]) for j in range(m)]


def hermite_polynomial(coeffs, b: float) -> Expr:
    s = add(T, const(-b)) if b != 0 else T
    out = ZERO
    for j, a in enumerate(coeffs):
        if a != 0.0:
            out = add(out, mul(const(a), power(s, j)))
    return out


def hermite_extend(f, b: float, q: int) -> PiecewiseSignal:
    """Extend ``f`` beyond ``b`` so that it vanishes after ``b + 1``.

    On ``[0, b]`` the result is ``f`` itself (the same expression trees); on
    ``(b, b+1]`` it is the unique degree ``2q-1`` polynomial matching
    ``f, f', ..., f^(q-1)`` at ``b`` (from the left) and vanishing to order
    ``q-1`` at ``b+1``; after that it is zero. The result is ``C^(q-1)`` at the
    new breakpoints and integrable. A piecewise ``f`` keeps its breakpoints
    below ``b``.
    """
    if not b > 0:
        raise InputError("b must be positive")
    if q < 1:
        raise InputError("q must be at least 1")
    pw = as_piecewise(f)
    owner = int(pw.piece_index(b))
    keep_bps = pw.breakpoints[:owner]
    keep = pw.pieces[: owner + 1]
    derivs = [eval_signal(differentiate(keep[-1], k), b) for k in range(q)]
    comps = []
    for c in range(pw.n):
        coeffs = _hermite_coefficients([d[c] for d in derivs], q)
        comps.append(hermite_polynomial(coeffs, b))
    P = VectorSignal(tuple(comps))
    smooth = q - 1 if not keep_bps else min(q - 1, pw.smoothness_order)
    return PiecewiseSignal(keep_bps + (b, b + 1.0), keep + (P, VectorSignal.zeros(pw.n)), smooth)
