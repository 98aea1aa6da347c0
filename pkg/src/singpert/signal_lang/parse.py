"""Recursive-descent parser for the signal grammar.

    vector  := "[" expr ("," expr)* "]"
    expr    := term (("+" | "-") term)*
    term    := unary ("*" unary)*
    unary   := "-" unary | postfix
    postfix := primary ("^" uint)*
    primary := number | "t" | ("sin" | "cos" | "exp") "(" expr ")" | "(" expr ")"

A minus sign directly in front of a numeric literal (not raised to a power)
is folded into the literal. Offsets in ``ParseError`` are byte offsets into
the input.
"""

from __future__ import annotations

import re

from ..errors import DimensionMismatch, ParseError
from .expr import FUNCTIONS, Add, Const, Func, Mul, Neg, Pow, Var

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^(),\[\]])
    """,
    re.VERBOSE,
)

_EOF = "<end>"


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(_byte_offset(text, pos), {"number", "t", "(", "-"} | set(FUNCTIONS), text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(("eof", _EOF, _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, k=1):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def fail(self, expected):
        raise ParseError(self.tok[2], expected, self.text)

    def accept(self, value):
        if self.tok[1] == value and self.tok[0] in ("op", "name"):
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            self.fail({value})

    def vector(self):
        self.expect("[")
        items = [self.expr()]
        while self.accept(","):
            items.append(self.expr())
        self.expect("]")
        if self.tok[0] != "eof":
            self.fail({_EOF})
        return items

    def expr(self):
        node = self.term()
        while True:
            if self.accept("+"):
                node = Add(node, self.term())
            elif self.accept("-"):
                node = Add(node, Neg(self.term()))
            else:
                return node

    def term(self):
        node = self.unary()
        while self.accept("*"):
            node = Mul(node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            kind, text, _ = self.tok
            if kind == "number" and self.peek()[1] != "^":
                self.i += 1
                return Const(-float(text) + 0.0)
            return Neg(self.unary())
        return self.postfix()

    def postfix(self):
        node = self.primary()
        while self.accept("^"):
            kind, text, _ = self.tok
            if kind != "number" or not text.isdigit():
                self.fail({"uint"})
            self.i += 1
            node = Pow(node, int(text))
        return node

    def primary(self):
        kind, text, _ = self.tok
        if kind == "number":
            self.i += 1
            return Const(float(text))
        if kind == "name":
            if text == "t":
                self.i += 1
                return Var()
            if text in FUNCTIONS:
                self.i += 1
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            self.fail({"number", "t", "(", "-"} | set(FUNCTIONS))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail({"number", "t", "(", "-"} | set(FUNCTIONS))


def parse_expr(text: str):
    """Parse a single scalar expression."""
    p = _Parser(text)
    node = p.expr()
    if p.tok[0] != "eof":
        p.fail({"+", "-", "*", "^", _EOF})
    return node


def parse_components(text: str):
    """Parse a bracketed vector into a list of expressions (no length check)."""
    return _Parser(text).vector()


def parse_signal(text: str, n: int | None = None):
    """Parse ``"[e1, ..., en]"`` into a ``VectorSignal``.

    Raises ``DimensionMismatch`` when ``n`` is given and the list length differs.
    """
    from .piecewise import VectorSignal

    comps = parse_components(text)
    if n is not None and len(comps) != n:
        raise DimensionMismatch(f"signal has {len(comps)} components, expected {n}")
    return VectorSignal(tuple(comps))
