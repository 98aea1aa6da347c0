import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import jordan_nilpotent, random_nilpotent
from singpert.distributions import pair
from singpert.errors import DimensionMismatch, NotNilpotent, SmoothnessError
from singpert.signal_lang import PiecewiseSignal, differentiate, eval_signal, hermite_extend, parse_signal
from singpert.singular import (
    SolveRequest,
    consistent_initial_set_check,
    distributional_residual,
    solve_singular,
    summary,
)
from singpert.test_functions import standard_bank

N2 = jordan_nilpotent([2])


# symbolic pre-verification --------------------------------------------------------------


@pytest.mark.parametrize("q", [1, 2, 3])
def test_solution_formula_satisfies_identity_symbolically(q):
    """Generic strictly upper-triangular N of size q (index q) and generic forcing.

    A distribution is held as (smooth vector, {order: coefficient}); with
    D(s, {j: c}) = (s', {0: s(0+)} + {j+1: c}) the residual
    N D x - x - f - delta N x0 must vanish identically.
    """
    t = sympy.Symbol("t")
    N = sympy.zeros(q, q)
    for r in range(q):
        for c in range(r + 1, q):
            N[r, c] = sympy.Symbol(f"n{r}{c}")
    f = sympy.Matrix([sympy.Function(f"f{k}")(t) for k in range(q)])
    x0 = sympy.Matrix(sympy.symbols(f"a0:{q}"))
    assert N**q == sympy.zeros(q, q)

    smooth = -sum((N**i * f.diff(t, i) for i in range(q)), sympy.zeros(q, 1))
    B = x0 + sum((N**i * f.diff(t, i).subs(t, 0) for i in range(q)), sympy.zeros(q, 1))
    impulses = {k - 1: -(N**k) * B for k in range(1, q)}

    d_smooth = smooth.diff(t)
    d_imp = {0: smooth.subs(t, 0)}
    for j, c in impulses.items():
        d_imp[j + 1] = d_imp.get(j + 1, sympy.zeros(q, 1)) + c

    res_smooth = N * d_smooth - smooth - f
    assert sympy.simplify(res_smooth) == sympy.zeros(q, 1)
    orders = set(d_imp) | set(impulses) | {0}
    for j in orders:
        lhs = N * d_imp.get(j, sympy.zeros(q, 1))
        rhs = impulses.get(j, sympy.zeros(q, 1)) + (N * x0 if j == 0 else sympy.zeros(q, 1))
        assert sympy.simplify((lhs - rhs).doit()) == sympy.zeros(q, 1)


# examples -------------------------------------------------------------------------------------


def test_scalar_example():
    x = solve_singular(SolveRequest([[0.0]], [5.0], parse_signal("[1]")))
    assert x.impulses == ()
    assert eval_signal(x.smooth, 3.0)[0] == -1.0


@pytest.mark.parametrize("a, b", [(0.0, 1.0), (2.0, -3.0), (1.5, 0.0)])
def test_two_by_two_example(a, b):
    x = solve_singular(SolveRequest(N2, [a, b], parse_signal("[0, t]")))
    ts = np.array([0.5, 2.0])
    np.testing.assert_allclose(eval_signal(x.smooth, ts), [[-1.0, -1.0], -ts])
    if b == 0:
        assert x.impulses == ()
    else:
        assert list(x.impulse_dict()) == [0]
        np.testing.assert_allclose(x.impulse_dict()[0], [-b, 0.0])


def test_zero_problem():
    x = solve_singular(SolveRequest(N2, [0.0, 0.0], None))
    assert x.is_zero()


def test_consistent_set_examples():
    f = parse_signal("[sin(t), t^2 + 1]")
    x0 = -eval_signal(f, 0.0) - N2 @ eval_signal(differentiate(f, 1), 0.0)
    assert consistent_initial_set_check(N2, f, x0)
    assert not consistent_initial_set_check(N2, parse_signal("[0, t]"), [0.0, 1.0])
    assert consistent_initial_set_check([[0.0]], parse_signal("[t]"), [7.0])
    assert solve_singular(SolveRequest(N2, x0, f)).impulses == ()


def test_request_validation():
    with pytest.raises(DimensionMismatch):
        SolveRequest(N2, [1.0], None)
    with pytest.raises(DimensionMismatch):
        SolveRequest(N2, [1.0, 2.0], parse_signal("[t]"))
    with pytest.raises(NotNilpotent):
        solve_singular(SolveRequest([[1.0]], [0.0], None))


def test_smoothness_requirement():
    rough = PiecewiseSignal((1.0,), (parse_signal("[1, 0]"), parse_signal("[0, 0]")), -1)
    with pytest.raises(SmoothnessError):
        solve_singular(SolveRequest(N2, [0.0, 0.0], rough))
    ok = hermite_extend(parse_signal("[t, 1]"), 1.0, 2)
    solve_singular(SolveRequest(N2, [0.0, 0.0], ok))


# properties ----------------------------------------------------------------------------------


FORCINGS = {1: ["[t^2 + 1]"], 2: ["[sin(t), t^3]", "[1 - t, exp(-t)]"], 3: ["[t, cos(2*t), t^2]", "[exp(t), 1, sin(t)*t]"]}


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1), st.data())
def test_numeric_residual_vanishes(q, seed, data):
    rng = np.random.default_rng(seed)
    N = random_nilpotent(rng, q, q)
    f = parse_signal(data.draw(st.sampled_from(FORCINGS[q])))
    req = SolveRequest(N, rng.standard_normal(q), f, tol=1e-10)
    r = distributional_residual(req, solve_singular(req))
    for lam in standard_bank(q, q):
        assert abs(pair(r, lam).value) <= 1e-8


@pytest.mark.parametrize("extra", [1, 3])
def test_truncation_beyond_index_changes_nothing(extra):
    rng = np.random.default_rng(3)
    req = SolveRequest(jordan_nilpotent([3]), rng.standard_normal(3), parse_signal("[t^4, sin(t), exp(t)]"))
    base = solve_singular(req)
    more = solve_singular(req, terms=2 + extra)
    assert base.impulse_dict().keys() == more.impulse_dict().keys()
    for k, c in base.impulse_dict().items():
        np.testing.assert_allclose(more.impulse_dict()[k], c, atol=1e-14)
    ts = np.linspace(0, 2, 7)
    np.testing.assert_allclose(eval_signal(more.smooth, ts), eval_signal(base.smooth, ts), atol=1e-13)


def test_classical_equation_away_from_origin():
    req = SolveRequest(jordan_nilpotent([3]), [1.0, 2.0, 3.0], parse_signal("[t^4, sin(t), exp(t)]"))
    s = solve_singular(req).smooth
    ts = np.linspace(0.1, 3.0, 11)
    lhs = req.N @ eval_signal(differentiate(s, 1), ts)
    np.testing.assert_allclose(lhs, eval_signal(s, ts) + eval_signal(req.f, ts), atol=1e-12)


def test_summary_text():
    req = SolveRequest(N2, [0.0, 1.0], None)
    text = summary(req, solve_singular(req))
    assert "q = 2" in text and "delta^(0)" in text
