import math

import mpmath
import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from singpert.errors import InputError, QuadratureFailure
from singpert.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureSpec, integrate


def test_rule_tables():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    np.testing.assert_allclose(NODES, -NODES[::-1])
    # Kronrod rule is exact for degree 22, Gauss subrule for degree 13
    assert KRONROD_WEIGHTS @ NODES**22 == pytest.approx(2 / 23, rel=1e-13)
    assert GAUSS_WEIGHTS @ NODES**12 == pytest.approx(2 / 13, rel=1e-13)


def test_bump_integral_against_mpmath():
    f = lambda u: np.where(np.abs(u) < 1, np.exp(-1 / np.maximum(1 - u**2, 1e-300)), 0.0)
    ref = mpmath.quad(lambda u: mpmath.exp(-1 / (1 - u**2)), [-1, 0, 1])
    res = integrate(f, -1.0, 1.0)
    assert res.value == pytest.approx(float(ref), abs=1e-12)
    assert res.value == pytest.approx(0.443994, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 200.0), st.floats(0.0, 5.0))
def test_stiff_exponential(rate, b):
    res = integrate(lambda t: rate * np.exp(-rate * t), 0.0, b, points=[1 / rate, 5 / rate])
    assert res.value == pytest.approx(-math.expm1(-rate * b), abs=1e-10)


def test_vector_integrand_and_breakpoints():
    def f(t):
        return np.vstack([np.abs(t - 0.3), np.sin(t)])

    res = integrate(f, 0.0, 1.0, points=[0.3])
    np.testing.assert_allclose(res.value, [0.045 + 0.245, 1 - math.cos(1)], atol=1e-12)
    ref = scipy.integrate.quad(lambda t: abs(t - 0.3), 0, 1, points=[0.3])[0]
    assert res.value[0] == pytest.approx(ref, abs=1e-12)


def test_empty_and_reversed_intervals():
    assert integrate(np.cos, 1.0, 1.0).value == 0.0
    assert integrate(np.cos, 1.0, 0.0).value == pytest.approx(-math.sin(1.0), abs=1e-13)


def test_subdivision_cap():
    with pytest.raises(QuadratureFailure):
        integrate(lambda t: np.sin(1 / np.maximum(t, 1e-300)), 0.0, 1.0, QuadratureSpec(1e-14, 1e-14, 20))


def test_spec_validation():
    with pytest.raises(InputError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(InputError):
        QuadratureSpec(max_subdivisions=0)
    tight = QuadratureSpec().tightened(0.1)
    assert tight.abs_tol == pytest.approx(1e-11)


def test_error_estimate_is_honest():
    res = integrate(lambda t: np.sqrt(t), 0.0, 1.0, QuadratureSpec(1e-10, 1e-10))
    assert abs(res.value - 2 / 3) <= max(res.error, 1e-15) * 10
