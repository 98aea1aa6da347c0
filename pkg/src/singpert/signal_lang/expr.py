"""Expression trees for scalar signals of one variable ``t``.

Nodes are frozen dataclasses, so equal trees compare equal and hash alike.
The parser builds trees verbatim; the lower-case constructors (``add``,
``mul``, ...) fold constants and drop neutral elements and are what
differentiation uses to keep derivative trees small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class Expr:
    __slots__ = ()

    def eval(self, t):
        raise NotImplementedError

    def diff(self) -> "Expr":
        raise NotImplementedError

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def eval(self, t):
        if np.ndim(t):
            return np.full(np.shape(t), self.value)
        return self.value

    def diff(self):
        return ZERO


@dataclass(frozen=True)
class Var(Expr):
    def eval(self, t):
        return np.asarray(t, dtype=float) if np.ndim(t) else float(t)

    def diff(self):
        return ONE


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def eval(self, t):
        return self.left.eval(t) + self.right.eval(t)

    def diff(self):
        return add(self.left.diff(), self.right.diff())


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def eval(self, t):
        return self.left.eval(t) * self.right.eval(t)

    def diff(self):
        return add(mul(self.left.diff(), self.right), mul(self.left, self.right.diff()))


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def eval(self, t):
        return -self.arg.eval(t)

    def diff(self):
        return neg(self.arg.diff())


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def eval(self, t):
        return self.base.eval(t) ** self.exponent

    def diff(self):
        k = self.exponent
        if k == 0:
            return ZERO
        return mul(mul(Const(float(k)), power(self.base, k - 1)), self.base.diff())


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr

    def eval(self, t):
        a = self.arg.eval(t)
        if self.name == "sin":
            return np.sin(a)
        if self.name == "cos":
            return np.cos(a)
        return np.exp(a)

    def diff(self):
        inner = self.arg.diff()
        if self.name == "sin":
            outer = func("cos", self.arg)
        elif self.name == "cos":
            outer = neg(func("sin", self.arg))
        else:
            outer = self
        return mul(outer, inner)


FUNCTIONS = ("sin", "cos", "exp")
ZERO = Const(0.0)
ONE = Const(1.0)
T = Var()


def const(v) -> Const:
    v = float(v)
    if not math.isfinite(v):
        raise ValueError("signal constants must be finite")
    return Const(v + 0.0)  # normalises -0.0


def is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def add(a: Expr, b: Expr) -> Expr:
    if is_const(a, 0.0):
        return b
    if is_const(b, 0.0):
        return a
    if is_const(a) and is_const(b):
        return const(a.value + b.value)
    if isinstance(b, Neg) and b.arg == a:
        return ZERO
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def neg(a: Expr) -> Expr:
    if is_const(a):
        return const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if is_const(a, 0.0) or is_const(b, 0.0):
        return ZERO
    if is_const(a, 1.0):
        return b
    if is_const(b, 1.0):
        return a
    if is_const(a) and is_const(b):
        return const(a.value * b.value)
    if is_const(b):
        a, b = b, a
    if is_const(a, -1.0):
        return neg(b)
    if is_const(a) and isinstance(b, Mul) and is_const(b.left):
        return mul(const(a.value * b.left.value), b.right)
    return Mul(a, b)


def power(a: Expr, k: int) -> Expr:
    if k == 0:
        return ONE
    if k == 1:
        return a
    if is_const(a):
        return const(a.value**k)
    return Pow(a, k)


def func(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if is_const(a):
        return const(Func(name, a).eval(0.0))
    return Func(name, a)


def scale(c: float, e: Expr) -> Expr:
    return mul(const(c), e)


def linear_combination(coeffs, exprs) -> Expr:
    """``sum_j coeffs[j] * exprs[j]`` skipping exact zero coefficients."""
    out = ZERO
    for c, e in zip(coeffs, exprs):
        c = float(c)
        if c == 0.0 or is_const(e, 0.0):
            continue
        out = add(out, scale(c, e))
    return out


def derivative(e: Expr, order: int = 1) -> Expr:
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    for _ in range(order):
        e = e.diff()
    return e


# Printing. Precedence levels mirror the grammar: expr < term < unary < postfix.
_EXPR, _TERM, _UNARY, _POSTFIX = range(4)


def _fmt_number(v: float) -> str:
    return repr(float(v))


def _prec(e: Expr) -> int:
    if isinstance(e, Add):
        return _EXPR
    if isinstance(e, Mul):
        return _TERM
    if isinstance(e, Neg) or (isinstance(e, Const) and e.value < 0):
        return _UNARY
    return _POSTFIX


def _wrap(e: Expr, level: int) -> str:
    s = to_text(e)
    return s if _prec(e) >= level else f"({s})"


def to_text(e: Expr) -> str:
    """Render ``e`` in the textual grammar; ``parse_expr(to_text(e)) == e``."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Add):
        left = _wrap(e.left, _EXPR)
        if isinstance(e.right, Neg):
            return f"{left} - {_wrap(e.right.arg, _TERM)}"
        return f"{left} + {_wrap(e.right, _TERM)}"
    if isinstance(e, Mul):
        return f"{_wrap(e.left, _TERM)}*{_wrap(e.right, _UNARY)}"
    if isinstance(e, Neg):
        # "-3" would read back as a negative literal, so keep literals wrapped
        if isinstance(e.arg, Const):
            return f"-({to_text(e.arg)})"
        return f"-{_wrap(e.arg, _UNARY)}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _POSTFIX)}^{e.exponent}"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")
