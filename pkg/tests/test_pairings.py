import numpy as np
import pytest

from hypwps.boundary import BoundaryFunction, SpectralPair, constant, vonmises_bump
from hypwps.pairings import (
    PS_NORMALIZATION,
    PairingResult,
    Resolution,
    disk_parameter,
    flowed,
    joint_pairings,
    ps_product,
    ps_radon,
    quasi_invariance_profile,
    wigner,
)
from hypwps.transforms import C_LEADING


def test_pairing_result_rejects_negative_error():
    with pytest.raises(ValueError):
        PairingResult(1.0, -1e-3)


def test_disk_parameter():
    assert disk_parameter(0.4 + 6j) == 0.2 + 3j


def test_flowed_box_moves(plane_problem):
    _, _, u = plane_problem
    v = flowed(u, 0.5)
    m = np.eye(2)
    assert v.func(m) == pytest.approx(u.func(np.diag([np.exp(0.25), np.exp(-0.25)])))
    assert v.box.t0 == pytest.approx(u.box.t0 - 0.5)


def test_sesquilinear(plane_problem):
    T, Tp, u = plane_problem
    T2 = vonmises_bump(0.5, 3.0)
    a, b = 0.7 - 0.2j, 1.3j
    sp = SpectralPair(0.2, 0.1, 10.0)
    mix = BoundaryFunction(lambda x: a * T(x) + b * T2(x))
    W_mix, PS_mix = joint_pairings(mix, Tp, sp, u)
    W1, PS1 = joint_pairings(T, Tp, sp, u)
    W2, PS2 = joint_pairings(T2, Tp, sp, u)
    assert abs(W_mix.value - (a * W1.value + b * W2.value)) <= 1e-10 * abs(W_mix.value)
    assert abs(PS_mix.value - (a * PS1.value + b * PS2.value)) <= 1e-10 * abs(PS_mix.value)
    # conjugate-linear in T'
    mixp = BoundaryFunction(lambda x: a * Tp(x))
    W3, PS3 = joint_pairings(T, mixp, sp, u)
    assert abs(W3.value - np.conj(a) * W1.value) <= 1e-10 * abs(W3.value)
    assert abs(PS3.value - np.conj(a) * PS1.value) <= 1e-10 * abs(PS3.value)


def test_zero_data(plane_problem):
    _, Tp, u = plane_problem
    W, PS = joint_pairings(constant(0.0), Tp, SpectralPair(0.2, 0.1, 10.0), u)
    assert W.value == 0 and PS.value == 0


def test_joint_matches_single_routes(plane_problem):
    T, Tp, u = plane_problem
    sp = SpectralPair(0.2, 0.1, 12.0)
    W, PS = joint_pairings(T, Tp, sp, u)
    assert wigner(T, Tp, sp, u).value == W.value
    assert ps_radon(T, Tp, sp, u).value == PS.value


def test_ps_routes_agree(plane_problem):
    T, Tp, u = plane_problem
    sp = SpectralPair(0.2, 0.1, 5.0)
    a = ps_radon(T, Tp, sp, u)
    b = ps_radon(T, Tp, sp, u, method="radon_pair")
    c = ps_product(T, Tp, sp, u)
    assert abs(a.value - b.value) <= a.error_estimate + b.error_estimate + 1e-12
    assert abs(a.value - PS_NORMALIZATION * c.value) <= 1e-6 * abs(a.value)


def test_wrong_haar_density_breaks_product_route(plane_problem):
    T, Tp, u = plane_problem
    sp = SpectralPair(0.2, 0.1, 5.0)
    a = ps_radon(T, Tp, sp, u).value
    c = ps_product(T, Tp, sp, u, haar_exponent=0).value
    assert abs(a / (PS_NORMALIZATION * c) - 1) > 1e-2


def test_factorized_route_remainder_shrinks(plane_problem):
    # the factorized route drops a term that decays rapidly in r
    T, Tp, u = plane_problem
    gaps = []
    for r in (4.0, 8.0):
        sp = SpectralPair(0.2, 0.1, r)
        d = wigner(T, Tp, sp, u, path="direct").value
        f = wigner(T, Tp, sp, u).value
        gaps.append(abs(f / d - 1))
    assert gaps[1] < 0.5 * gaps[0]


def test_unknown_wigner_path(plane_problem):
    T, Tp, u = plane_problem
    with pytest.raises(ValueError):
        wigner(T, Tp, SpectralPair(0.2, 0.1, 4.0), u, path="nope")


def test_ratio_close_to_one(plane_problem):
    T, Tp, u = plane_problem
    sp = SpectralPair(0.2, 0.1, 80.0)
    W, PS = joint_pairings(T, Tp, sp, u)
    rho = W.value / (C_LEADING * sp.r ** -0.5 * PS.value)
    assert abs(rho - 1) < 0.02


def test_measured_flow_rate_is_half_of_q_difference(plane_problem):
    """PS(u o phi_t) = e^{kappa t} PS(u) with kappa = (q' - q) / 2 in this chart."""
    T, Tp, u = plane_problem
    sp = SpectralPair(0.2, -0.3, 20.0)
    rep = quasi_invariance_profile(T, Tp, sp, u)
    assert rep.kappa == pytest.approx(0.5 * (sp.q_prime - sp.q), rel=1e-3)
    assert rep.fit_residual < 1e-5
    assert "e^{kappa t}" in rep.sign_convention


def test_quasi_invariance_grid_validation(plane_problem):
    T, Tp, u = plane_problem
    with pytest.raises(ValueError):
        quasi_invariance_profile(T, Tp, SpectralPair(0.2, 0.2, 5.0), u, t_grid=[0.0, 2.0])
