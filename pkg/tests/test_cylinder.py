import numpy as np
import pytest

from hypwps.boundary import compact_bump, poisson_transform, vonmises_bump
from hypwps.cylinder import (
    FIXED_ANGLES,
    CylinderModel,
    GammaAverage,
    cylinder_symbol,
    gamma_average,
    gamma_invariance_residual,
    make_cutoff,
    orbit_poisson,
    xi_of_angle,
)
from hypwps.errors import FixedPointSupport, TruncationTooSmall
from hypwps.lie_kernel import cayley, inverse_cayley


@pytest.fixture(scope="module")
def model():
    return CylinderModel(2.0, 12)


def test_model_validation():
    with pytest.raises(ValueError):
        CylinderModel(0.0, 3)


def test_disk_action_matches_dilation(model):
    w = np.array([0.1 + 0.2j, -0.4j])
    for n in (-2, 1, 3):
        assert np.allclose(model.act_disk(n, w), cayley(np.exp(2.0 * n) * inverse_cayley(w)))
    assert np.allclose(model.gamma(0), np.eye(2))


def test_fixed_points(model):
    for f in FIXED_ANGLES:
        assert np.mod(model.act_boundary(3, f) - f + 1, 2 * np.pi) - 1 == pytest.approx(0, abs=1e-12)
    assert xi_of_angle(np.pi) == pytest.approx(0.0, abs=1e-15)
    assert np.isinf(xi_of_angle(0.0))


def test_boundary_derivative_matches_fd(model):
    beta = np.linspace(0.3, 6.0, 9)
    h = 1e-5
    for n in (-1, 2):
        step = model.act_boundary(n, beta + h) - model.act_boundary(n, beta - h)
        fd = (np.mod(step + np.pi, 2 * np.pi) - np.pi) / (2 * h)
        assert np.allclose(model.boundary_derivative(n, beta), fd, rtol=1e-7)
    # finite for huge orbit index
    assert np.all(np.isfinite(model.boundary_derivative(400, beta)))


def test_partition_of_unity(model):
    for kw in ({}, dict(shift=0.7, width=0.6, arg_range=(0.5, np.pi - 0.5))):
        chi = make_cutoff(model, **kw)
        assert chi.partition_residual(chi.sample_points()) <= 1e-10


def test_cutoff_is_compact(model):
    chi = make_cutoff(model)
    z = np.array([np.exp(6.0) * 1j, np.exp(-3.0) * 1j, 1e3 + 1j])
    assert np.all(chi.on_points(z) == 0)


def test_truncation_guard():
    with pytest.raises(TruncationTooSmall):
        make_cutoff(CylinderModel(2.0, 1), width=0.4)


def test_fixed_point_guard(model):
    with pytest.raises(FixedPointSupport):
        gamma_average(compact_bump(0.1, 0.5), 0.4 + 3j, model)
    with pytest.raises(FixedPointSupport):
        gamma_average(vonmises_bump(1.0, 2.0), 0.4 + 3j, model)
    assert gamma_average(compact_bump(2.0, 0.5), 0.4 + 3j, model, N=0)(2.0) == 1.0


def test_gamma_average_transforms_like_a_density(model):
    """T_G(gamma beta) |gamma'(beta)|^{-lam} = T_G(beta) up to the orbit ends."""
    T = compact_bump(1.5 * np.pi, 1.0)
    s0 = 0.6 + 4j
    avg = GammaAverage(T, s0, model, 12)
    beta = np.linspace(3.6, 5.8, 7)
    lhs = avg(model.act_boundary(1, beta)) * model.boundary_derivative(1, beta) ** (-avg.lam)
    assert np.max(np.abs(lhs - avg(beta))) < 1e-9


def test_gamma_invariance_improves_with_N(model):
    T = compact_bump(1.5 * np.pi, 1.0)
    pts = 0.3 * np.exp(1j * np.linspace(0.2, 3.0, 7))
    res = [gamma_invariance_residual(T, 0.6 + 4j, model, pts, N=N) for N in (3, 6, 12)]
    assert res[0].residual > res[1].residual > res[2].residual
    for rep in res:
        assert rep.residual <= rep.tail_bound


def test_orbit_poisson_matches_direct_sum(model):
    Tp = compact_bump(0.5 * np.pi, 1.2)
    s0p = 0.5 - 5j
    w = np.array([0.1 + 0.3j, -0.2 + 0.05j])
    phi = orbit_poisson(Tp, s0p, model, N=2)
    direct = sum(poisson_transform(Tp, 0.5 * s0p - 1.0, model.act_disk(n, w), tol=1e-12)
                 for n in range(-2, 3))
    assert np.allclose(phi(w), direct, rtol=1e-6, atol=1e-12)  # 64-node rule


def test_symbol_is_gamma_invariant(model):
    u = cylinder_symbol(arg_range=(1.1, np.pi - 1.1), log_ratio=1.0)
    from hypwps.lie_kernel import kna_arrays
    m = kna_arrays(np.linspace(2.0, 4.0, 50)[:, None], np.linspace(-2, 2, 40)[None, :], 0.3)
    assert np.any(u(m) != 0)
    assert np.allclose(u(model.gamma(1) @ m), u(m), atol=1e-12)
