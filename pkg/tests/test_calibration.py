import numpy as np
import pytest

from hypwps.calibration import (
    DX_NORMALIZATION,
    ConstantsRecord,
    calibrate_haar,
    frozen_constants,
    haar_test_bumps,
    integrate_ank,
    integrate_cartan,
    integrate_kan,
)
from hypwps.lie_kernel import rotation_arrays


def test_dx_normalization_value():
    assert DX_NORMALIZATION == pytest.approx(1 / (np.sqrt(2) * np.pi ** 1.5))


def test_cartan_oracle_closed_form():
    # f = exp(-a |g|^2) with |g|^2 = 2 cosh(rho) on the Cartan chart:
    # int = 4 pi^2 * int_0^inf exp(-2a cosh rho) sinh rho d rho * dx_norm
    a = 0.5
    f = haar_test_bumps()[0][1]
    exact = 4 * np.pi ** 2 * np.exp(-2 * a) / (2 * a) * DX_NORMALIZATION
    assert integrate_cartan(f) == pytest.approx(exact, rel=1e-12)


def test_bumps_are_sign_invariant(rng):
    m = rng.normal(size=(10, 2, 2))
    for _, f in haar_test_bumps():
        assert np.allclose(f(m), f(-m))


def test_left_k_invariance_of_integral():
    f = haar_test_bumps()[2][1]
    k = rotation_arrays(0.9)
    g = lambda m: f(k @ m)
    assert integrate_ank(g) == pytest.approx(integrate_ank(f), rel=1e-10)


def test_haar_calibration_selects_one():
    h = calibrate_haar()
    assert h.selected == 1
    assert h.identity_residual < 1e-8
    assert all(v > 1e-2 for k, v in h.residuals.items() if k != 1)
    f = haar_test_bumps()[1][1]
    assert integrate_kan(f, 1) == pytest.approx(integrate_cartan(f), abs=1e-8)


def test_constants_record_text():
    rec = frozen_constants()
    txt = rec.to_text()
    assert "kernel_exponent = 2" in txt
    assert "haar_exponent = 1" in txt
    assert "0.797884560802865 * exp(-i pi / 4)" in txt
    assert rec.to_text() == ConstantsRecord().to_text()
