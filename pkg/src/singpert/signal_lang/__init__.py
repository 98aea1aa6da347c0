"""Forcing-signal expression language with exact differentiation."""

from .expr import Add, Const, Expr, Func, Mul, Neg, Pow, Var, derivative, to_text
from .parse import parse_components, parse_expr, parse_signal
from .piecewise import (
    PiecewiseSignal,
    VectorSignal,
    apply_matrix,
    as_piecewise,
    combine_signals,
    differentiate,
    eval_signal,
    hermite_extend,
    right_derivative_at_zero,
)

__all__ = [
    "Add",
    "Const",
    "Expr",
    "Func",
    "Mul",
    "Neg",
    "PiecewiseSignal",
    "Pow",
    "Var",
    "VectorSignal",
    "apply_matrix",
    "as_piecewise",
    "combine_signals",
    "derivative",
    "differentiate",
    "eval_signal",
    "hermite_extend",
    "parse_components",
    "parse_expr",
    "parse_signal",
    "right_derivative_at_zero",
    "to_text",
]
