import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypwps.boundary import SpectralPair
from hypwps.errors import DegeneratePair
from hypwps.lie_kernel import GroupElement, kan_arrays
from hypwps.transforms import (
    C_LEADING,
    EndpointCutoff,
    IwasawaBox,
    intertwine,
    intertwine_leading,
    intertwine_weight,
    intertwine_weight_generic,
    iwasawa_bump,
    make_endpoint_cutoff,
    stationary_points_residual,
    weighted_radon,
    zero_function,
)
from hypwps.quadrature import quad_adaptive


@pytest.fixture(scope="module")
def bump():
    return iwasawa_bump(0.3, 0.1, 0.2, 0.7, 0.9, 1.0)


@pytest.fixture(scope="module")
def g0():
    return GroupElement.from_matrix(kan_arrays(0.35, 0.0, 0.1))


def test_leading_constant():
    assert abs(C_LEADING) == pytest.approx(np.sqrt(2 / np.pi))
    assert np.angle(C_LEADING) == pytest.approx(-np.pi / 4)


def test_bump_support(bump):
    m = kan_arrays(0.3 + 0.8, 0.1, 0.2)          # outside the K-window
    assert bump.on_matrices(m) == 0.0
    assert bump.box.contains(0.3, 0.1, 0.2)
    assert not IwasawaBox(0, 0, 0, 0.1, 0.1, 0.1).contains(0.5, 0, 0)


def test_weight_two_paths():
    x = np.linspace(-200, 200, 801)
    assert np.max(np.abs(intertwine_weight(x, 0.3 - 5j) - intertwine_weight_generic(x, 0.3 - 5j))) < 1e-12


def test_intertwine_against_independent_quadrature(bump, g0):
    # oracle: real and imaginary parts integrated separately by the scalar adaptive rule
    from hypwps.lie_kernel import n_plus_arrays
    s0p = 0.2 - 7j
    f = lambda x: (intertwine_weight(x, s0p) * bump.on_matrices(g0.matrix @ n_plus_arrays(x)) / np.pi)
    lo, hi = -2.0, 2.0
    ref = (quad_adaptive(lambda x: f(x).real, lo, hi, tol=1e-14)[0]
           + 1j * quad_adaptive(lambda x: f(x).imag, lo, hi, tol=1e-14)[0])
    assert abs(intertwine(bump, s0p, g0)[0] - ref) < 1e-12


def test_intertwine_outside_support(bump):
    g = GroupElement.from_matrix(kan_arrays(3.0, 0.0, 0.0))
    assert intertwine(bump, 0.2 - 10j, g) == (0j, 0.0)


def test_intertwine_approaches_leading_term(bump, g0):
    devs = [abs(intertwine(bump, 0.2 - 1j * r, g0)[0] / intertwine_leading(bump, r, g0) - 1)
            for r in (40, 160, 640)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-3


@settings(max_examples=10, deadline=None)
@given(st.floats(-1.5, 1.5))
def test_radon_independent_of_shift(bump, shift):
    sp = SpectralPair(0.2, 0.1, 15.0)
    pair = (0.3, 0.3 + np.pi + 0.4)
    a, _ = weighted_radon(bump, sp, pair)
    b, _ = weighted_radon(bump, sp, pair, shift=shift)
    assert abs(a - b) < 1e-12


def test_radon_degenerate_and_zero(bump):
    sp = SpectralPair(0.2, 0.1, 5.0)
    assert weighted_radon(bump, sp, (1.0, 1.0)) == (0j, 0.0)
    z = zero_function(bump.box)
    assert weighted_radon(z, sp, (0.3, 2.0))[0] == 0


def test_endpoint_cutoff():
    cut = EndpointCutoff(0.4)
    assert cut(0.0, 0.1) == 0.0
    assert cut(0.0, 0.5) == 1.0
    assert cut.of_y(cut.y_max() * 1.01) == 0.0
    assert cut.of_y(0.0) == 1.0


def test_endpoint_cutoff_covers_geodesics(bump):
    cut = make_endpoint_cutoff(bump)
    assert 0 < cut.delta_min < np.pi


def test_stationary_set():
    rep = stationary_points_residual((0.3, 2.5))
    assert rep.passed()
    with pytest.raises(DegeneratePair):
        stationary_points_residual((1.0, 1.0))
