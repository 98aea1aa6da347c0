"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): ``InputError`` for
malformed or inconsistent user input, and ``NumericError`` for failures that
are only discovered while computing.
"""


class SingpertError(Exception):
    pass


class InputError(SingpertError, ValueError):
    pass


class NumericError(SingpertError, ArithmeticError):
    pass


class ParseError(InputError):
    def __init__(self, offset, expected, text=""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.text = text
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"parse error at offset {offset}: expected one of {{{exp}}}")


class DimensionMismatch(InputError):
    pass


class PreconditionError(InputError):
    pass


class MissingIndex(InputError, KeyError):
    pass


class NotNilpotent(NumericError):
    pass


class Singular(NumericError):
    pass


class SingularMember(Singular):
    pass


class Overflow(NumericError, OverflowError):
    pass


class QuadratureFailure(NumericError):
    pass


class NotRegular(NumericError):
    pass


class IllConditioned(NumericError):
    pass


class SmoothnessError(InputError):
    pass


class DivergentFamily(NumericError):
    pass
