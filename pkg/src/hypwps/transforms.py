"""Intertwining operator, weighted Radon transform, J kernel and endpoint cutoff.

Charts used below (all elements of G):

* Iwasawa chart ``k(beta) exp(t X) n(x)``.
* Geodesic chart ``k(b) n(y) exp(t X)``: for fixed ``(b, y)`` this runs
  along the geodesic with endpoints ``b`` and ``b' = b + pi + 2 arctan y``.
  Along it ``rho(A(g a_t)) = t/2`` and
  ``rho(A(g a_t w0)) = -t/2 + log(1 + y^2)/2``.

Haar measures: ``da = dt / sqrt(2 pi)``, ``dn = dx / pi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .boundary import BoundaryFunction, SpectralPair, bump_profile, smooth_step
from .errors import DegeneratePair, EmptySupport, NonConvergence
from .lie_kernel import (
    TWO_PI,
    GroupElement,
    bracket_disk,
    boundary_minus_arrays,
    boundary_plus_arrays,
    cayley,
    circular_distance,
    disk_point_arrays,
    hyperbolic_distance_disk,
    inverse_cayley,
    iwasawa_arrays,
    kan_arrays,
    kna_arrays,
    n_plus_arrays,
    pair_to_y,
    rho_a_arrays,
    rho_a_w0_arrays,
    rotation_arrays,
)
from .quadrature import gauss_legendre, quad_adaptive

C_LEADING = np.sqrt(2.0 / np.pi) * np.exp(-0.25j * np.pi)
SQRT_2PI = np.sqrt(2.0 * np.pi)


# ---------------------------------------------------------------------------
# compactly supported functions on G


@dataclass(frozen=True)
class IwasawaBox:
    """Box in Iwasawa coordinates: |beta - beta0| <= d_K (circular), etc."""

    beta0: float
    t0: float
    x0: float
    d_K: float
    d_A: float
    d_N: float

    def contains(self, beta, t, x):
        return ((circular_distance(beta, self.beta0) <= self.d_K)
                & (np.abs(np.asarray(t) - self.t0) <= self.d_A)
                & (np.abs(np.asarray(x) - self.x0) <= self.d_N))


@dataclass(frozen=True)
class CompactGFunction:
    """Function on G with a declared Iwasawa support box.

    ``func`` takes a stack of matrices ``(..., 2, 2)`` and returns a complex
    array of shape ``(...)``.  ``x_ball`` optionally records a hyperbolic ball
    ``(disk_center, radius)`` containing the projection of the support to the
    plane; ``b_window`` an arc ``(center, halfwidth)`` containing B_+ of the
    support.
    """

    func: Callable
    box: IwasawaBox
    x_ball: Optional[tuple] = None
    b_window: Optional[tuple] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def on_matrices(self, m):
        m = np.asarray(m, dtype=float)
        beta, t, x = iwasawa_arrays(m)
        inside = self.box.contains(beta, t, x)
        out = np.zeros(m.shape[:-2], dtype=complex)
        if np.any(inside):
            out[inside] = self.func(m[inside])
        return out

    def __call__(self, g):
        if isinstance(g, GroupElement):
            return complex(self.on_matrices(g.matrix[None])[0])
        return self.on_matrices(g)

    def ball(self):
        """(disk center, radius) of a ball containing the projected support."""
        if self.x_ball is not None:
            return self.x_ball
        bx = self.box
        grid = np.linspace(-1, 1, 9)
        B, T, X = np.meshgrid(bx.beta0 + bx.d_K * grid, bx.t0 + bx.d_A * grid,
                              bx.x0 + bx.d_N * grid, indexing="ij")
        w = disk_point_arrays(kan_arrays(B, T, X)).ravel()
        c = disk_point_arrays(kan_arrays(bx.beta0, bx.t0, bx.x0))
        return complex(c), float(np.max(hyperbolic_distance_disk(c, w))) * 1.05 + 1e-3

    def window(self):
        if self.b_window is not None:
            return self.b_window
        return self.box.beta0, min(self.box.d_K, np.pi)

    def scaled(self, factor):
        return CompactGFunction(lambda m: factor * self.func(m), self.box, self.x_ball,
                                self.b_window, self.name, dict(self.params))

    def times(self, other_func: Callable, name="product"):
        """Pointwise product with a function given on matrix stacks (support unchanged)."""
        return CompactGFunction(lambda m: self.func(m) * other_func(m), self.box, self.x_ball,
                                self.b_window, name, dict(self.params))


def iwasawa_bump(beta0=0.0, t0=0.0, x0=0.0, d_K=0.6, d_A=0.8, d_N=0.8, amplitude=1.0):
    """Product of bump profiles in the three Iwasawa coordinates."""
    box = IwasawaBox(beta0, t0, x0, d_K, d_A, d_N)

    def f(m):
        beta, t, x = iwasawa_arrays(m)
        return amplitude * (bump_profile(circular_distance(beta, beta0) / d_K)
                            * bump_profile((t - t0) / d_A) * bump_profile((x - x0) / d_N))

    return CompactGFunction(f, box, name="iwasawa_bump",
                            params=dict(beta0=beta0, t0=t0, x0=x0, d_K=d_K, d_A=d_A, d_N=d_N))


def zero_function(box: Optional[IwasawaBox] = None):
    box = box or IwasawaBox(0.0, 0.0, 0.0, 0.1, 0.1, 0.1)
    return CompactGFunction(lambda m: np.zeros(np.shape(m)[:-2], dtype=complex), box, name="zero")


def chart_point(w, b):
    """Geodesic-chart coordinates (y, t) of F_+^{-1}(w, b) for disk points w."""
    z = inverse_cayley(np.asarray(w, dtype=complex) * np.exp(-1j * np.asarray(b)))
    return z.real, np.log(z.imag)


def f_plus_inverse(w, b):
    """Matrices g with g.o = w and B_+(g) = b."""
    y, t = chart_point(w, b)
    return kna_arrays(b, y, t)


def chart_ranges(f: CompactGFunction, pad=0.0, n=24):
    """Bounds (b-window, y-range, t-range) of supp f in the geodesic chart.

    From the Iwasawa box: k a_t n_x = k n_{x e^t} a_t, so t is the A
    coordinate and y = x e^t.
    """
    bx = f.box
    t = np.linspace(bx.t0 - bx.d_A, bx.t0 + bx.d_A, n)
    x = np.linspace(bx.x0 - bx.d_N, bx.x0 + bx.d_N, n)
    yy = np.outer(x, np.exp(t))
    yr = (float(yy.min()) - pad, float(yy.max()) + pad)
    tr = (bx.t0 - bx.d_A - pad, bx.t0 + bx.d_A + pad)
    if f.x_ball is not None:
        # a ball gives tighter bounds
        c, R = f.x_ball
        th = np.linspace(0, TWO_PI, 256, endpoint=False)
        bc, hw = f.window()
        bs = bc + np.linspace(-hw, hw, n)
        ring = _ball_sample(c, R, th, np.linspace(0, 1, 12))
        ys, ts = chart_point(ring[:, None], bs[None, :])
        yr = (max(yr[0], float(ys.min()) - pad), min(yr[1], float(ys.max()) + pad))
        tr = (max(tr[0], float(ts.min()) - pad), min(tr[1], float(ts.max()) + pad))
    return f.window(), yr, tr


def _ball_sample(center, R, theta, fractions):
    """Disk points at hyperbolic distance fraction*R from center, all directions."""
    rho = np.tanh(0.5 * R * np.asarray(fractions))
    w0 = (rho[:, None] * np.exp(1j * theta[None, :])).ravel()
    c = complex(center)
    return (w0 + c) / (1 + np.conj(c) * w0)


# ---------------------------------------------------------------------------
# intertwining operator


def intertwine_weight(x, s0p):
    """exp(-conj(s0') rho(A(n_x^{-1} w0))) = (1 + x^2)^{-conj(s0')/2}."""
    return np.exp(-0.5 * np.conj(complex(s0p)) * np.log1p(np.asarray(x, dtype=float) ** 2))


def intertwine_weight_generic(x, s0p):
    """Same weight from the matrix path rho(A(n_x^{-1} w0))."""
    x = np.asarray(x, dtype=float)
    w0 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    m = n_plus_arrays(-x) @ w0
    return np.exp(-np.conj(complex(s0p)) * rho_a_arrays(m))


def _n_support(f: CompactGFunction, g: GroupElement):
    """Interval of x with g n_x in the Iwasawa box of f, or None."""
    beta, t, xg = iwasawa_arrays(g.matrix)
    bx = f.box
    if circular_distance(beta, bx.beta0) > bx.d_K or abs(t - bx.t0) > bx.d_A:
        return None
    return bx.x0 - bx.d_N - xg, bx.x0 + bx.d_N - xg


def intertwine(f: CompactGFunction, s0p: complex, g: GroupElement, tol=1e-13):
    """I(f)(g) = int (1 + x^2)^{-conj(s0')/2} f(g n_x) dx / pi.  Returns (value, error)."""
    iv = _n_support(f, g)
    if iv is None:
        return 0.0j, 0.0
    gm = g.matrix

    def integrand(x):
        return intertwine_weight(x, s0p) * f.on_matrices(gm @ n_plus_arrays(x)) / np.pi

    r = abs(complex(s0p).imag)
    pieces = max(1, int(np.ceil((iv[1] - iv[0]) * (1 + r) / 4)))
    val, err = quad_adaptive(integrand, iv[0], iv[1], tol=tol, initial=pieces)
    return complex(val), err


def intertwine_leading(f: CompactGFunction, r: float, g: GroupElement) -> complex:
    """sqrt(2/pi) e^{-i pi/4} r^{-1/2} f(g)."""
    return complex(C_LEADING * r ** -0.5 * f(g))


# ---------------------------------------------------------------------------
# weighted Radon transform


def radon_weight(m, sp: SpectralPair):
    """exp(s0 rho(A(g)) + conj(s0') rho(A(g w0))) on matrix stacks."""
    return np.exp(sp.s0 * rho_a_arrays(m) + np.conj(sp.s0_prime) * rho_a_w0_arrays(m))


def weighted_radon(f: CompactGFunction, sp: SpectralPair, pair, shift=0.0, tol=1e-13):
    """R(f)(b, b') = int e^{s0 rho(A(ga)) + conj(s0') rho(A(g a w0))} f(g a) da.

    ``g`` is ``psi_inverse(b, b') exp(shift X)``; the value does not depend
    on ``shift``.  Returns (value, error); exact 0 on the diagonal.
    """
    b, bp = (float(getattr(p, "angle", p)) for p in pair)
    if circular_distance(b, bp) == 0.0:
        return 0.0j, 0.0
    y = float(pair_to_y(b, bp))
    bx = f.box
    lo, hi = bx.t0 - bx.d_A - shift, bx.t0 + bx.d_A - shift
    if circular_distance(b, bx.beta0) > bx.d_K:
        return 0.0j, 0.0
    g = kna_arrays(b, y, shift)

    def integrand(t):
        m = g @ _exp_x(t)
        return radon_weight(m, sp) * f.on_matrices(m) / SQRT_2PI

    val, err = quad_adaptive(integrand, lo, hi, tol=tol, initial=4)
    return complex(val), err


def _exp_x(t):
    t = np.asarray(t, dtype=float)
    z = np.zeros_like(t)
    return np.stack([np.stack([np.exp(0.5 * t), z], -1), np.stack([z, np.exp(-0.5 * t)], -1)], -2)


# ---------------------------------------------------------------------------
# tensor Gauss-Legendre with refinement


def tensor_gl(func, ranges, n0, tol=1e-10, max_n=None, grow=1.5):
    """Tensor Gauss-Legendre integral over a box, refined until two levels agree.

    ``func(*nodes)`` receives broadcastable node arrays (one axis per
    dimension).  Returns (value, |difference of the last two levels|).
    """
    n = np.asarray(n0, dtype=float)
    max_n = np.asarray(max_n if max_n is not None else 16 * n, dtype=float)

    def level(nn):
        dims = len(ranges)
        grids, weights = [], []
        for k, ((a, b), nk) in enumerate(zip(ranges, nn)):
            x, w = gauss_legendre(a, b, int(nk))
            shape = [1] * dims
            shape[k] = -1
            grids.append(x.reshape(shape))
            weights.append(w.reshape(shape))
        vals = func(*grids)
        for w in weights:
            vals = vals * w
        return complex(np.sum(vals))

    prev = level(n)
    while True:
        n = np.minimum(np.ceil(n * grow), max_n)
        cur = level(n)
        err = abs(cur - prev)
        if err <= tol * max(1.0, abs(cur)):
            return cur, err
        if np.all(n >= max_n):
            raise NonConvergence("tensor_gl: node budget exhausted", value=cur, error=err)
        prev = cur


def radon_pair(T: BoundaryFunction, Tp: BoundaryFunction, sp: SpectralPair, f: CompactGFunction,
               tol=1e-10, n0=(24, 48, 24)):
    """int int T(b) conj(T'(b')) R(f)(b, b') db db'.

    Integrated in the geodesic chart: b' = b + pi + 2 arctan(y) and
    db' = 2 dy / (1 + y^2).
    """
    (bc, hw), yr, tr = chart_ranges(f)
    r = sp.r
    ny = max(n0[1], int(8 + 0.6 * r * (yr[1] - yr[0])))

    def integrand(b, y, t):
        m = kna_arrays(b, y, t)
        bp = b + np.pi + 2.0 * np.arctan(y)
        return (T(b) * np.conj(Tp(bp)) * 2.0 / (1.0 + y * y)
                * radon_weight(m, sp) * f.on_matrices(m) / SQRT_2PI)

    return tensor_gl(integrand, [(bc - hw, bc + hw), yr, tr], (n0[0], ny, n0[2]), tol=tol,
                     max_n=(512, 8 * ny, 512))


# ---------------------------------------------------------------------------
# endpoint cutoff


@dataclass(frozen=True)
class EndpointCutoff:
    """Smooth function of the endpoint separation: 0 below delta_min/2, 1 above delta_min."""

    delta_min: float

    def __call__(self, b, bp):
        sep = circular_distance(b, bp)
        return self.of_separation(sep)

    def of_separation(self, sep):
        h = 0.5 * self.delta_min
        return smooth_step((np.asarray(sep) - h) / h)

    def of_y(self, y):
        """Value on the pair (b, b + pi + 2 arctan y)."""
        delta = np.pi + 2.0 * np.arctan(np.asarray(y, dtype=float))
        return self.of_separation(np.minimum(delta, TWO_PI - delta))

    def y_max(self):
        """|y| beyond which the cutoff vanishes."""
        return 1.0 / np.tan(0.25 * self.delta_min)


def geodesics_through_ball(center, R, n_points=24, n_dirs=48):
    """Matrices g whose geodesic g A passes through the ball (sampled)."""
    th = np.linspace(0, TWO_PI, n_dirs, endpoint=False)
    pts = _ball_sample(center, R, np.linspace(0, TWO_PI, n_points, endpoint=False),
                       np.linspace(0, 1, 6))
    mats = []
    for w in pts:
        z = inverse_cayley(w)
        base = np.array([[np.sqrt(z.imag), z.real / np.sqrt(z.imag)], [0.0, 1.0 / np.sqrt(z.imag)]])
        mats.append(base[None] @ rotation_arrays(th))
    return np.concatenate(mats)


def make_endpoint_cutoff(f: CompactGFunction, safety=0.5) -> EndpointCutoff:
    """Cutoff equal to 1 on every endpoint pair of a geodesic meeting the support of f."""
    center, R = f.ball()
    if not R > 0:
        raise EmptySupport("support radius must be positive")
    g = geodesics_through_ball(center, R)
    sep = circular_distance(boundary_plus_arrays(g), boundary_minus_arrays(g))
    return EndpointCutoff(safety * float(np.min(sep)))


# ---------------------------------------------------------------------------
# J kernel


def j_kernel_factorized(u: CompactGFunction, sp: SpectralPair, pair, cutoff=None,
                        tol=1e-10, n0=(32, 64)):
    """beta(b, b') R(I(u))(b, b'), with I evaluated by a (t, z) tensor rule.

    I(u)(k_b n_y a_t) = int e^{-t}/pi (1 + ((z - y) e^{-t})^2)^{-conj(s0')/2} u(k_b n_z a_t) dz.
    """
    b, bp = (float(getattr(p, "angle", p)) for p in pair)
    if circular_distance(b, bp) < 1e-12:
        return 0.0j, 0.0
    cutoff = cutoff or make_endpoint_cutoff(u)
    beta = float(cutoff(b, bp))
    if beta == 0.0:
        return 0.0j, 0.0
    bc, hw = u.window()
    if circular_distance(b, bc) > hw:
        return 0.0j, 0.0
    y = float(pair_to_y(b, bp))
    _, zr, tr = chart_ranges(u)
    sbar = np.conj(sp.s0_prime)
    nz = max(n0[1], int(16 + 0.5 * sp.r * (zr[1] - zr[0])))

    def integrand(t, z):
        m = kna_arrays(b, z, t)
        x = (z - y) * np.exp(-t)
        kern = np.exp(-t) / np.pi * np.exp(-0.5 * sbar * np.log1p(x * x))
        w = np.exp((sp.q - sp.q_prime) * 0.5 * t + 0.5 * sbar * np.log1p(y * y))
        return w * kern * u.on_matrices(m) / SQRT_2PI

    val, err = tensor_gl(integrand, [tr, zr], (n0[0], nz), tol=tol, max_n=(1024, 16 * nz))
    return beta * val, beta * err


def _polar_ball(center, R, n_rho, n_theta):
    """Disk points and normalized area weights for a hyperbolic ball (GL in rho, trapezoid in theta)."""
    rho, wr = gauss_legendre(0.0, R, n_rho)
    th = TWO_PI * np.arange(n_theta) / n_theta
    pts = _ball_sample(center, 1.0, th, rho)  # fractions of radius 1 = distances
    weights = (np.sinh(rho) * wr)[:, None] * np.full(n_theta, TWO_PI / n_theta)[None, :]
    return pts.reshape(n_rho, n_theta), weights / (np.pi * SQRT_2PI)


def j_kernel_direct(u: CompactGFunction, sp: SpectralPair, pair, tol=1e-10, n0=(48, 64)):
    """int u(F_+^{-1}(x, b)) e^{s0 <x,b> + conj(s0') <x,b'>} dx over the x-support of u.

    dx is the normalized area dn da = area / (pi sqrt(2 pi)).
    """
    b, bp = (float(getattr(p, "angle", p)) for p in pair)
    center, R = u.ball()
    sbar = np.conj(sp.s0_prime)
    n_rho, n_th = n0
    n_rho = max(n_rho, int(16 + 0.5 * sp.r * R))
    n_th = max(n_th, int(16 + 1.2 * sp.r * np.tanh(R)))
    prev = None
    for _ in range(8):
        w, wt = _polar_ball(center, R, n_rho, n_th)
        m = f_plus_inverse(w, b)
        vals = u.on_matrices(m) * np.exp(sp.s0 * bracket_disk(w, b) + sbar * bracket_disk(w, bp))
        cur = complex(np.sum(vals * wt))
        if prev is not None:
            err = abs(cur - prev)
            if err <= tol * max(1.0, abs(cur)):
                return cur, err
        prev = cur
        n_rho, n_th = int(n_rho * 1.5), int(n_th * 1.5)
    raise NonConvergence("j_kernel_direct did not converge", value=cur, error=err)


# ---------------------------------------------------------------------------
# stationary points of Psi = <x, b> + <x, b'>


def _psi(w, b, bp):
    return bracket_disk(w, b) + bracket_disk(w, bp)


def hyperbolic_gradient_norm(func, w, h=1e-5):
    """|grad func|_hyp = (1 - |w|^2)/2 * |euclidean gradient| by central differences."""
    w = np.asarray(w, dtype=complex)
    gx = (func(w + h) - func(w - h)) / (2 * h)
    gy = (func(w + 1j * h) - func(w - 1j * h)) / (2 * h)
    return 0.5 * (1 - np.abs(w) ** 2) * np.hypot(gx, gy)


def geodesic_points(pair, t, offset=0.0):
    """Disk points at signed distance ``offset`` from the geodesic (b, b'), at times t."""
    b, bp = (float(getattr(p, "angle", p)) for p in pair)
    y = float(pair_to_y(b, bp))
    t = np.asarray(t, dtype=float)
    # in the frame of k_b n_y the geodesic is the imaginary axis
    phi = np.pi / 2 - np.arctan(np.sinh(offset))
    z = np.exp(t) * np.exp(1j * phi)
    m = kna_arrays(b, y, 0.0)
    a, bb, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    return cayley((a * z + bb) / (c * z + d))


@dataclass
class StationaryReport:
    on_geodesic_max: float
    off_geodesic_min: float
    psi_spread: float
    offset: float

    def passed(self, on_tol=1e-6, off_margin=0.1, const_tol=1e-8):
        return (self.on_geodesic_max <= on_tol and self.off_geodesic_min >= off_margin
                and self.psi_spread <= const_tol)


def stationary_points_residual(pair, t=None, offset=1.0, h=1e-5) -> StationaryReport:
    b, bp = (float(getattr(p, "angle", p)) for p in pair)
    if circular_distance(b, bp) < 1e-8:
        raise DegeneratePair("stationary_points_residual needs an off-diagonal pair")
    t = np.linspace(-1.5, 1.5, 31) if t is None else np.asarray(t)
    func = lambda w: _psi(w, b, bp)
    on = geodesic_points(pair, t)
    grads_on = hyperbolic_gradient_norm(func, on, h)
    off = np.concatenate([geodesic_points(pair, t, offset), geodesic_points(pair, t, -offset)])
    grads_off = hyperbolic_gradient_norm(func, off, h)
    psi_on = func(on)
    return StationaryReport(float(np.max(grads_on)), float(np.min(grads_off)),
                            float(np.max(psi_on) - np.min(psi_on)), offset)
