"""Globally adaptive Gauss-Kronrod (7/15) quadrature.

The integrand is called once per batch of nodes with a 1-D array of abscissae
and must return either shape ``(m,)`` (scalar integrand) or ``(k, m)``
(``k``-vector integrand). The interval with the largest error is bisected
until the summed error estimate meets ``max(abs_tol, rel_tol * |I|)``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, QuadratureFailure

# Kronrod abscissae (nonnegative half) and weights; Gauss points are the odd
# entries, Gauss weights listed separately.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])  # 15 nodes, ascending
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for one adaptive integration."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 4000
    extra_breakpoints: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InputError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise InputError("max_subdivisions must be at least 1")
        object.__setattr__(self, "extra_breakpoints", tuple(float(b) for b in self.extra_breakpoints))

    def tightened(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(
            self.abs_tol * factor, self.rel_tol * factor, self.max_subdivisions, self.extra_breakpoints
        )


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: float
    intervals: int


def _rule(f, intervals):
    """Apply the 15-point rule to each ``(a, b)`` in ``intervals`` with one call."""
    a = np.array([iv[0] for iv in intervals])
    b = np.array([iv[1] for iv in intervals])
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    y = np.asarray(f(x), dtype=float)
    scalar = y.ndim == 1
    y = y.reshape((1 if scalar else y.shape[0], len(intervals), 15))
    kron = np.einsum("kij,j->ki", y, KRONROD_WEIGHTS) * half
    gauss = np.einsum("kij,j->ki", y, GAUSS_WEIGHTS) * half
    # QUADPACK-style error scaling, taken componentwise then maxed
    mean = kron / np.where(half == 0, 1.0, 2.0 * half)
    resasc = np.einsum("kij,j->ki", np.abs(y - mean[:, :, None]), KRONROD_WEIGHTS) * np.abs(half)
    resabs = np.einsum("kij,j->ki", np.abs(y), KRONROD_WEIGHTS) * np.abs(half)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(
            (resasc != 0) & (err != 0), resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5), err
        )
    floor = 50.0 * _EPS * resabs
    scaled = np.where(resabs > np.finfo(float).tiny / (50 * _EPS), np.maximum(floor, scaled), scaled)
    return kron, scaled.max(axis=0), scalar


def split_points(a, b, points):
    """Sorted unique breakpoints strictly inside ``(a, b)``, with ends attached."""
    inner = sorted({float(p) for p in points if a < p < b})
    return [a] + inner + [b]


def integrate(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(), points=()) -> QuadResult:
    """Adaptive integral of ``f`` over ``[a, b]``.

    ``points`` (and ``spec.extra_breakpoints``) inside the interval become
    mandatory initial split points. ``b < a`` gives the negated integral over
    ``[b, a]``; an empty interval gives a scalar 0. Raises ``QuadratureFailure`` when the
    tolerance is not met within ``spec.max_subdivisions`` intervals.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise InputError("integration limits must be finite")
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        res = integrate(f, b, a, spec, points)
        return QuadResult(-res.value, res.error, res.intervals)
    edges = split_points(a, b, tuple(points) + spec.extra_breakpoints)
    intervals = list(zip(edges[:-1], edges[1:]))
    vals, errs, scalar = _rule(f, intervals)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(errs))):
        raise QuadratureFailure("integrand produced non-finite values")
    # heap of (-err, seq, a, b, col); values kept in a dict keyed by seq
    store = {}
    heap = []
    for s, (iv, e) in enumerate(zip(intervals, errs)):
        store[s] = vals[:, s]
        heapq.heappush(heap, (-float(e), s, iv[0], iv[1]))
    seq = len(intervals)
    frozen = []
    total = np.sum(vals, axis=1)
    total_err = float(np.sum(errs))

    def target():
        return max(spec.abs_tol, spec.rel_tol * float(np.max(np.abs(total))))

    while total_err > target():
        if len(heap) + len(frozen) >= spec.max_subdivisions:
            raise QuadratureFailure(
                f"error estimate {total_err:.3e} above tolerance {target():.3e} "
                f"after {len(heap) + len(frozen)} subintervals on [{a}, {b}]"
            )
        neg_e, s, lo, hi = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi) or (hi - lo) <= 4 * _EPS * max(abs(lo), abs(hi), 1.0):
            # roundoff limit: keep the interval (and its error) but stop splitting it
            frozen.append(-neg_e)
            if not heap:
                break
            continue
        v2, e2, _ = _rule(f, [(lo, mid), (mid, hi)])
        if not (np.all(np.isfinite(v2)) and np.all(np.isfinite(e2))):
            raise QuadratureFailure("integrand produced non-finite values")
        total = total - store.pop(s) + v2[:, 0] + v2[:, 1]
        total_err += float(e2[0] + e2[1]) + neg_e
        for j, (l2, h2) in enumerate(((lo, mid), (mid, hi))):
            store[seq] = v2[:, j]
            heapq.heappush(heap, (-float(e2[j]), seq, l2, h2))
            seq += 1
    # re-sum to shed accumulated update error
    total = np.sum(np.array(list(store.values())), axis=0)
    total_err = float(sum(-h[0] for h in heap) + sum(frozen))
    if total_err > target():
        raise QuadratureFailure(f"error estimate {total_err:.3e} above tolerance {target():.3e} at roundoff limit")
    value = float(total[0]) if scalar else total
    return QuadResult(value, total_err, len(heap) + len(frozen))
