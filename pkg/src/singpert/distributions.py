"""Generalized functions of the form "causal smooth part + impulses at t = 0".

A ``GeneralizedFunction`` pairs with a test function ``lam`` as

    <w, lam> = int_0^inf smooth(t) . lam(t) dt + sum_j (-1)^j c_j . lam^(j)(0)

i.e. the smooth part is extended by zero to ``t < 0`` and each impulse
``(j, c_j)`` stands for ``c_j * delta^(j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError
from .quadrature import QuadratureSpec, integrate
from .signal_lang import (
    PiecewiseSignal,
    VectorSignal,
    apply_matrix,
    as_piecewise,
    combine_signals,
    differentiate,
    eval_signal,
    parse_signal,
    right_derivative_at_zero,
)

PRUNE_TOL = 1e-14


def _canonical_impulses(impulses, n, prune=PRUNE_TOL):
    merged = {}
    for order, coeff in impulses:
        order = int(order)
        if order < 0:
            raise InputError("impulse orders must be nonnegative")
        c = np.asarray(coeff, dtype=float).ravel()
        if c.shape != (n,):
            raise DimensionMismatch(f"impulse coefficient has shape {c.shape}, expected ({n},)")
        merged[order] = merged.get(order, np.zeros(n)) + c
    out = []
    for order in sorted(merged):
        c = merged[order]
        if np.linalg.norm(c) >= prune:
            c.setflags(write=False)
            out.append((order, c))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class GeneralizedFunction:
    smooth: PiecewiseSignal
    impulses: tuple = ()

    def __post_init__(self):
        smooth = as_piecewise(self.smooth)
        object.__setattr__(self, "smooth", smooth)
        object.__setattr__(self, "impulses", _canonical_impulses(self.impulses, smooth.n))

    @property
    def n(self) -> int:
        return self.smooth.n

    @classmethod
    def zero(cls, n):
        return cls(VectorSignal.zeros(n))

    @classmethod
    def impulse(cls, order, coeff):
        coeff = np.asarray(coeff, dtype=float)
        return cls(VectorSignal.zeros(coeff.size), ((order, coeff),))

    def impulse_dict(self):
        return {j: c for j, c in self.impulses}

    def is_zero(self) -> bool:
        return not self.impulses and all(p.is_zero() for p in self.smooth.pieces)

    def __eq__(self, other):
        if not isinstance(other, GeneralizedFunction):
            return NotImplemented
        return (
            self.smooth == other.smooth
            and len(self.impulses) == len(other.impulses)
            and all(j1 == j2 and np.array_equal(c1, c2) for (j1, c1), (j2, c2) in zip(self.impulses, other.impulses))
        )

    __hash__ = None

    def summary(self) -> str:
        parts = [f"n={self.n}", f"breakpoints={list(self.smooth.breakpoints)}"]
        if self.impulses:
            imp = ", ".join(f"delta^({j}) |c|={np.linalg.norm(c):.6g}" for j, c in self.impulses)
            parts.append(f"impulses: {imp}")
        else:
            parts.append("no impulses")
        return "; ".join(parts)


@dataclass(frozen=True)
class PairingResult:
    value: float
    integral_part: float
    impulse_part: float
    quadrature_error_estimate: float


def pair(w: GeneralizedFunction, lam, quad: QuadratureSpec = QuadratureSpec()) -> PairingResult:
    """``<w, lam>`` with the smooth part integrated over ``supp lam`` on ``[0, inf)``."""
    if w.n != lam.n:
        raise DimensionMismatch(f"{w.n}-dimensional distribution paired with {lam.n}-dimensional test function")
    direction = np.asarray(lam.direction)
    lo, hi = lam.support
    lo = max(lo, 0.0)
    integral, err = 0.0, 0.0
    if hi > lo:
        smooth = w.smooth

        def integrand(t):
            return direction @ eval_signal(smooth, t) * lam.scalar(t)

        res = integrate(integrand, lo, hi, quad, points=smooth.breakpoints)
        integral, err = float(res.value), res.error
    impulse = 0.0
    for j, c in w.impulses:
        impulse += (-1) ** j * float(c @ direction) * lam.scalar(0.0, j)
    return PairingResult(integral + impulse, integral, impulse, err)


def distributional_derivative(w: GeneralizedFunction) -> GeneralizedFunction:
    """``D w = w' + delta * w(0+)`` plus every impulse raised by one order."""
    sm = w.smooth
    if sm.breakpoints and sm.smoothness_order < 0:
        raise InputError("smooth part may jump at a breakpoint; its derivative would need impulses there")
    value0 = right_derivative_at_zero(sm, 0)
    impulses = [(j + 1, c) for j, c in w.impulses] + [(0, value0)]
    return GeneralizedFunction(differentiate(sm, 1), impulses)


def combine(a: float, w1: GeneralizedFunction, b: float, w2: GeneralizedFunction) -> GeneralizedFunction:
    """``a*w1 + b*w2``; impulses whose coefficient norm drops below 1e-14 are pruned."""
    if w1.n != w2.n:
        raise DimensionMismatch(f"cannot combine {w1.n}- and {w2.n}-dimensional distributions")
    smooth = combine_signals(a, w1.smooth, b, w2.smooth)
    impulses = [(j, a * c) for j, c in w1.impulses] + [(j, b * c) for j, c in w2.impulses]
    return GeneralizedFunction(smooth, impulses)


def transform(M, w: GeneralizedFunction) -> GeneralizedFunction:
    """``M w`` for a constant matrix ``M`` acting on values and impulse coefficients."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return GeneralizedFunction(apply_matrix(M, w.smooth), [(j, M @ c) for j, c in w.impulses])


def smooth_as_distribution(sig) -> GeneralizedFunction:
    """The causal embedding of a classical signal (``f * step``)."""
    return GeneralizedFunction(as_piecewise(sig))


# JSON -----------------------------------------------------------------------


def piecewise_to_json(sig) -> dict:
    p = as_piecewise(sig)
    return {
        "breakpoints": list(p.breakpoints),
        "pieces": [p_.to_text() for p_ in p.pieces],
        "smoothness_order": p.smoothness_order,
    }


def piecewise_from_json(obj, n=None) -> PiecewiseSignal:
    if isinstance(obj, str):
        return as_piecewise(parse_signal(obj, n))
    try:
        pieces = tuple(parse_signal(text, n) for text in obj["pieces"])
        return PiecewiseSignal(tuple(obj.get("breakpoints", ())), pieces, obj.get("smoothness_order"))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad piecewise signal JSON: {exc}") from exc


def gf_to_json(w: GeneralizedFunction) -> dict:
    return {
        "smooth": piecewise_to_json(w.smooth),
        "impulses": [{"order": j, "coeff": c.tolist()} for j, c in w.impulses],
    }


def gf_from_json(obj) -> GeneralizedFunction:
    try:
        smooth = piecewise_from_json(obj["smooth"])
        imps = [(d["order"], d["coeff"]) for d in obj.get("impulses", [])]
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad generalized function JSON: {exc}") from exc
    return GeneralizedFunction(smooth, imps)
