import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypwps.errors import NonConvergence
from hypwps.quadrature import (
    W_GAUSS,
    W_KRONROD,
    gauss_legendre,
    gk15,
    periodic_trapezoid,
    quad_adaptive,
    uniform_oracle,
)


def test_rule_weights():
    assert W_KRONROD.sum() == pytest.approx(2.0, abs=1e-15)
    assert W_GAUSS.sum() == pytest.approx(2.0, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 13))
def test_gk15_exact_on_polynomials(k):
    val, _ = gk15(lambda x: x ** k, np.array([-0.5]), np.array([1.5]))
    assert val[0] == pytest.approx((1.5 ** (k + 1) - (-0.5) ** (k + 1)) / (k + 1), rel=1e-13)


def test_quad_adaptive_oscillatory():
    val, err = quad_adaptive(lambda x: np.cos(200 * x) * np.exp(-x * x), -5, 5, tol=1e-12)
    assert val == pytest.approx(np.sqrt(np.pi) * np.exp(-200 ** 2 / 4), abs=1e-11)
    assert err < 1e-11


def test_quad_adaptive_budget():
    with pytest.raises(NonConvergence) as info:
        quad_adaptive(lambda x: np.sign(x - 0.3) * np.sin(1 / np.abs(x - 0.3 + 1e-300)),
                      0, 1, tol=1e-15, max_intervals=60)
    assert info.value.value is not None


def test_gauss_legendre_and_trapezoid():
    x, w = gauss_legendre(0, np.pi, 20)
    assert np.sum(w * np.sin(x)) == pytest.approx(2.0, abs=1e-14)
    assert periodic_trapezoid(lambda b: np.exp(np.cos(b)), 64) == pytest.approx(
        2 * np.pi * 1.2660658777520082, rel=1e-14)
    assert uniform_oracle(lambda x: np.exp(-x * x), -8, 8, n=2 ** 12) == pytest.approx(np.sqrt(np.pi))
