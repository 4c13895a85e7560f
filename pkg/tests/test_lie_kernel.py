import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypwps.errors import BoundaryProximity, DegeneratePair, DomainError
from hypwps.lie_kernel import (
    U_MINUS,
    U_PLUS,
    X,
    BoundaryPoint,
    GroupElement,
    LieVector,
    adjoint,
    alpha_A,
    boundary_action,
    boundary_maps,
    cayley,
    compose,
    geodesic_flow,
    horocycle_bracket,
    horocycle_flow,
    inverse_cayley,
    iwasawa,
    kan_arrays,
    kernel_exponent_relation,
    poisson_kernel,
    psi_inverse,
    rho_A,
)

coord = st.floats(-3.0, 3.0, allow_nan=False)
angle = st.floats(0.0, 2 * np.pi, allow_nan=False, exclude_max=True)


def element(beta, t, x):
    return GroupElement.from_matrix(kan_arrays(beta, t, x))


def test_identity_and_w0():
    e = GroupElement.identity()
    assert np.allclose(e.matrix, np.eye(2))
    w0 = GroupElement.w0()
    assert compose(w0, w0).isclose(e)


def test_sign_representative():
    g = GroupElement.from_matrix([[-2.0, 1.0], [-1.0, 0.0]])
    assert g.a > 0
    assert GroupElement.from_matrix(-g.matrix) == g


def test_non_unimodular_rejected():
    with pytest.raises(DomainError):
        GroupElement.from_matrix([[1.0, 0.0], [0.0, 0.0]])


@settings(max_examples=60, deadline=None)
@given(coord, coord, coord, angle, angle, coord)
def test_group_law_associative(t1, x1, t2, b1, b2, x3):
    g, h, k = element(b1, t1, x1), element(b2, t2, 0.3), element(0.7, 0.1, x3)
    assert compose(compose(g, h), k).isclose(compose(g, compose(h, k)), tol=1e-9)
    assert compose(g, g.inverse()).isclose(GroupElement.identity(), tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(angle, st.floats(-8, 8), st.floats(-20, 20))
def test_iwasawa_round_trip(beta, t, x):
    g = element(beta, t, x)
    co = iwasawa(g)
    assert np.allclose(co.reconstruct(), g.matrix, atol=1e-10 * max(1.0, np.abs(g.matrix).max()))
    assert abs(alpha_A(g) - co.t_A) < 1e-12 * max(1.0, abs(t))
    assert rho_A(g) == pytest.approx(0.5 * co.t_A)


def test_iwasawa_known_values():
    co = iwasawa(GroupElement.exp_x(1.5))
    assert (co.beta, co.t_A, co.x_N) == pytest.approx((0.0, 1.5, 0.0), abs=1e-15)
    co = iwasawa(GroupElement.n_plus(2.0))
    assert co.x_N == pytest.approx(2.0)


@pytest.mark.parametrize("t", [-10.0, -1.0, 0.0, 2.5, 10.0])
def test_adjoint_scaling(t):
    a = GroupElement.exp_x(t)
    assert np.allclose(adjoint(a, U_PLUS).as_array(), np.exp(t) * U_PLUS.as_array(), rtol=1e-12)
    assert np.allclose(adjoint(a, U_MINUS).as_array(), np.exp(-t) * U_MINUS.as_array(), rtol=1e-12)
    assert np.allclose(adjoint(a, X).as_array(), X.as_array())


def test_lie_vector_round_trip():
    v = LieVector(0.3, -1.2, 0.5)
    assert LieVector.from_matrix(v.matrix) == pytest.approx(v)
    assert LieVector.from_root_coords(*v.root_coords).as_array() == pytest.approx(v.as_array())


def test_cayley_inverse():
    z = np.array([0.3 + 0.2j, -4 + 1j, 2j])
    assert np.allclose(inverse_cayley(cayley(z)), z)
    with pytest.raises(DomainError):
        cayley(-1j)
    with pytest.raises(DomainError):
        inverse_cayley(1.0 + 0j)


def test_geodesic_flow_moves_along_endpoints(rng):
    g = GroupElement.random(rng)
    bp, bm = boundary_maps(g)
    h = geodesic_flow(g, 1.7)
    bp2, bm2 = boundary_maps(h)
    assert bp2.angle == pytest.approx(bp.angle)
    assert bm2.angle == pytest.approx(bm.angle)
    # unit-speed geodesic
    from hypwps.lie_kernel import hyperbolic_distance_disk
    assert hyperbolic_distance_disk(g.point(), h.point()) == pytest.approx(1.7)


def test_horocycle_flow_fixes_forward_endpoint(rng):
    g = GroupElement.random(rng)
    assert boundary_maps(horocycle_flow(g, 0.9))[0].angle == pytest.approx(boundary_maps(g)[0].angle)


def test_boundary_action_of_rotation():
    m = GroupElement.rotation(0.8).matrix
    assert boundary_action(m, 1.0) == pytest.approx(1.8)


def test_psi_inverse_endpoints():
    g = psi_inverse(BoundaryPoint(0.4), BoundaryPoint(2.9))
    bp, bm = boundary_maps(g)
    assert bp.angle == pytest.approx(0.4)
    assert bm.angle == pytest.approx(2.9)
    with pytest.raises(DegeneratePair):
        psi_inverse(BoundaryPoint(1.0), BoundaryPoint(1.0 + 1e-12))


def test_poisson_kernel_examples():
    o = GroupElement.identity()
    b = BoundaryPoint(0.3)
    assert poisson_kernel(o, b, "disk") == pytest.approx(1.0)
    assert poisson_kernel(o, b, "bracket") == pytest.approx(1.0)
    t = 0.9
    w = np.tanh(t / 2) * b.disk
    assert poisson_kernel(w, b, "disk") == pytest.approx(np.exp(t))
    with pytest.raises(BoundaryProximity):
        poisson_kernel(b.disk * (1 - 1e-14), b, "disk")


def test_bracket_paths_agree(rng):
    for _ in range(20):
        g = GroupElement.random(rng)
        b = BoundaryPoint(rng.uniform(0, 2 * np.pi))
        from hypwps.lie_kernel import bracket_disk
        assert horocycle_bracket(g, b) == pytest.approx(float(bracket_disk(g.point(), b.angle)), abs=1e-10)


def test_kernel_exponent_is_two(rng):
    ratio = kernel_exponent_relation(rng)
    assert np.max(np.abs(ratio - 2.0)) < 1e-10
