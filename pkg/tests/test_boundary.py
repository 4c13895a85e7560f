import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypwps.boundary import (
    BoundaryFunction,
    SpectralPair,
    boundary_quadrature,
    check_lambda,
    compact_bump,
    constant,
    eigen_residual,
    equivariance_residual,
    fourier,
    from_config,
    poisson_transform,
    vonmises_bump,
)
from hypwps.errors import ForbiddenParameter, NonConvergence
from hypwps.lie_kernel import GroupElement


def test_fourier_and_callable_agree():
    T = vonmises_bump(0.5, 1.5).fourier_truncation(40)
    b = np.linspace(0, 2 * np.pi, 17)
    assert np.allclose(T.eval_fourier(b), T(b), atol=1e-13)
    assert T.band_limit == 40


def test_boundary_function_validation():
    with pytest.raises(ValueError):
        BoundaryFunction()
    with pytest.raises(ValueError):
        fourier([1.0, 2.0])
    with pytest.raises(ValueError):
        compact_bump(0.0, 4.0)
    with pytest.raises(ValueError):
        vonmises_bump(0.0, 1.0, phase=0.5)


def test_from_config_kinds():
    assert from_config({"kind": "constant", "value": 2.0})(0.3) == 2.0
    assert from_config({"kind": "fourier", "coeffs": [0, 1, 0]})(0.0) == pytest.approx(1.0)
    assert from_config({"kind": "vonmises_bump", "center": 1.0, "concentration": 3.0})(1.0) == 1.0
    assert from_config({"kind": "compact_bump", "center": 1.0, "halfwidth": 0.5})(2.0) == 0.0
    with pytest.raises(ValueError):
        from_config({"kind": "nope"})


def test_spectral_pair():
    sp = SpectralPair(0.2, -0.1, 30.0)
    assert sp.s0 == 0.2 + 30j and sp.s0_prime == -0.1 - 30j
    assert sp.with_r(5.0).r == 5.0
    with pytest.raises(ValueError):
        SpectralPair(0.6, 0.0, 1.0)
    with pytest.raises(ValueError):
        SpectralPair(0.0, 0.0, 0.0)


def test_boundary_quadrature():
    assert boundary_quadrature(lambda b: np.cos(b) ** 2) == pytest.approx(np.pi, abs=1e-14)
    with pytest.raises(NonConvergence):
        boundary_quadrature(lambda b: np.abs(np.sin(b)) ** 0.5, max_doublings=3)


def test_forbidden_lambda():
    with pytest.raises(ForbiddenParameter):
        check_lambda(-2.0 + 1e-8)
    check_lambda(-2.5)
    check_lambda(-1.0 + 0.1j)
    with pytest.raises(ForbiddenParameter):
        poisson_transform(constant(), -1.0, 0.2)


def test_poisson_at_center_is_mean():
    T = vonmises_bump(0.7, 2.0)
    mean = boundary_quadrature(T)
    for lam in (-0.5 + 3j, 0.2 + 0.0j):
        assert poisson_transform(T, lam, 0j) == pytest.approx(mean, rel=1e-13)


def test_poisson_of_fourier_mode_vanishes_at_center():
    assert abs(poisson_transform(fourier([0, 0, 0, 1, 0]), -0.3 + 2j, 0j)) < 1e-14


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.0, 0.7), st.floats(0, 6.28))
def test_poisson_is_linear(a, b, rad, ang):
    T1, T2 = vonmises_bump(0.1, 2.0), fourier([0.3, 1.0, -0.2j])
    w = rad * np.exp(1j * ang)
    lam = -0.4 + 1.5j
    lhs = poisson_transform(BoundaryFunction(lambda x: a * T1(x) + b * T2(x)), lam, w)
    rhs = a * poisson_transform(T1, lam, w) + b * poisson_transform(T2, lam, w)
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(rhs))


def test_eigen_residual_selects_exponent_two():
    pts = np.array([0.1 + 0.2j, -0.3j, 0.45])
    T = vonmises_bump(0.3, 3.0)
    assert eigen_residual(T, 0.5 + 5j, pts) < 1e-5
    assert eigen_residual(T, 0.5 + 5j, pts, kernel_exponent=1) > 1e-2


def test_equivariance(rng):
    T = compact_bump(2.0, 1.0)
    assert equivariance_residual(GroupElement.identity(), T, 0.3 + 1j) < 1e-12
    g = GroupElement.random(rng, scale=0.7)
    assert equivariance_residual(g, T, -0.2 + 2.5j, rng=rng) < 1e-8
