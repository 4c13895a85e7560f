"""Hyperbolic cylinder Gamma = <exp(l X)>: cutoffs, Gamma-averaging, cutoff independence.

In the upper half-plane gamma^n acts by z -> e^{n l} z.  Its fixed points
0 and infinity are the boundary angles pi and 0.  Half-plane boundary
coordinates are xi = -cot(beta / 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .boundary import BoundaryFunction, SpectralPair, bump_profile, smooth_step
from .errors import FixedPointSupport, TruncationTooSmall
from .lie_kernel import (
    TWO_PI,
    boundary_minus_arrays,
    boundary_plus_arrays,
    cayley,
    circular_distance,
    halfplane_point_arrays,
    hyperbolic_distance_disk,
    inverse_cayley,
    iwasawa_arrays,
    rotation_arrays,
)
from .pairings import PairingResult, disk_parameter, ps_radon, wigner_via_op
from .quadrature import gauss_legendre
from .transforms import CompactGFunction, IwasawaBox

FIXED_ANGLES = (0.0, np.pi)


def xi_of_angle(beta):
    """Half-plane boundary coordinate of the boundary angle beta (inf at beta = 0)."""
    h = 0.5 * np.asarray(beta, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.cos(h) / np.sin(h)


@dataclass(frozen=True)
class CylinderModel:
    ell: float = 2.0
    N: int = 12

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError("translation length must be positive")

    def gamma(self, n):
        """gamma^n = diag(e^{n l/2}, e^{-n l/2}), stacked over integer arrays n."""
        n = np.asarray(n, dtype=float)
        e = np.exp(0.5 * n * self.ell)
        z = np.zeros_like(e)
        return np.stack([np.stack([e, z], -1), np.stack([z, 1.0 / e], -1)], -2)

    def orbit(self, N=None):
        N = self.N if N is None else N
        return np.arange(-N, N + 1)

    def act_disk(self, n, w):
        """gamma^n applied to disk points."""
        z = inverse_cayley(w)
        return cayley(np.exp(n * self.ell) * z)

    def act_boundary(self, n, beta):
        """Boundary angle of gamma^n . exp(i beta)."""
        return boundary_plus_arrays(self.gamma(n) @ rotation_arrays(beta))

    def boundary_derivative(self, n, beta):
        """|d(gamma^n . beta)/d beta| = 1 / (e^{-nl} sin^2(beta/2) + e^{nl} cos^2(beta/2)).

        This is the Poisson kernel P(gamma^{-n} . o, beta), written in a form
        that stays finite for large |n|.
        """
        nl = np.asarray(n, dtype=float) * self.ell
        h = 0.5 * np.asarray(beta, dtype=float)
        with np.errstate(over="ignore"):  # overflow only sends the derivative to 0
            return 1.0 / (np.exp(-nl) * np.sin(h) ** 2 + np.exp(nl) * np.cos(h) ** 2)

    def in_fundamental_annulus(self, z):
        a = np.abs(z)
        return (a >= 1.0) & (a < np.exp(self.ell))


# ---------------------------------------------------------------------------
# fundamental-domain cutoffs


@dataclass(frozen=True)
class FundamentalCutoff:
    """chi = a f / sum_n f(gamma^n .), a function of the base point x = g.o.

    ``a`` is a plateau in arg z (Gamma-invariant) equal to 1 on
    ``arg_range``; ``f`` is a plateau in u = log|z| equal to 1 on
    ``[shift, shift + l]``.
    """

    model: CylinderModel
    arg_range: tuple
    arg_margin: float
    shift: float
    width: float

    def _a(self, phi):
        lo, hi = self.arg_range
        m = self.arg_margin
        return smooth_step((phi - (lo - m)) / m) * smooth_step(((hi + m) - phi) / m)

    def _f(self, u):
        s, w, ell = self.shift, self.width, self.model.ell
        return smooth_step((u - (s - w)) / w) * smooth_step(((s + ell + w) - u) / w)

    def on_points(self, z):
        """chi at half-plane points z."""
        z = np.asarray(z, dtype=complex)
        u = np.log(np.abs(z))
        phi = np.angle(z)
        # only |n| <= M can move a point of supp f back into supp f
        lo, hi = self.u_range()
        M = min(self.model.N, int(np.ceil((hi - lo) / self.model.ell)) + 1)
        n = self.model.orbit(M)
        out = np.zeros_like(u)
        ok = (u > self.shift - self.width) & (u < self.shift + self.model.ell + self.width)
        ok &= (phi > self.arg_range[0] - self.arg_margin) & (phi < self.arg_range[1] + self.arg_margin)
        uk = u[ok]
        num = self._a(phi[ok]) * self._f(uk)
        denom = np.sum(self._f(uk[:, None] + n * self.model.ell), axis=-1)
        out[ok] = num / denom
        return out

    def __call__(self, m):
        return self.on_points(halfplane_point_arrays(np.asarray(m, dtype=float)))

    def u_range(self):
        return self.shift - self.width, self.shift + self.model.ell + self.width

    def phi_range(self):
        lo, hi = self.arg_range
        return max(lo - self.arg_margin, 1e-6), min(hi + self.arg_margin, np.pi - 1e-6)

    def check_truncation(self):
        lo, hi = self.u_range()
        ell, N = self.model.ell, self.model.N
        # any orbit point that can hit the f-plateau support must have |n| <= N
        need = int(np.ceil((hi - lo) / ell)) + 1
        if need > N:
            raise TruncationTooSmall(f"orbit truncation N={N} below the {need} terms needed")

    def partition_residual(self, z):
        """max |sum_n chi(gamma^n z) - 1| at half-plane points z (on the lifted target)."""
        z = np.asarray(z, dtype=complex)
        n = self.model.orbit()
        vals = self.on_points(z[..., None] * np.exp(n * self.model.ell))
        return float(np.max(np.abs(np.sum(vals, axis=-1) - 1.0)))

    def sample_points(self, n_u=24, n_phi=24):
        """Grid on the lifted target: all log|z| in one period band, arg z on the plateau."""
        lo, hi = self.u_range()
        plo, phi_hi = self.arg_range
        U, P = np.meshgrid(np.linspace(lo, hi, n_u), np.linspace(plo, phi_hi, n_phi))
        return np.exp(U + 1j * P).ravel()

    def apply(self, u_tilde: Callable) -> CompactGFunction:
        """chi * u as a compactly supported function, with a sampled support descriptor."""
        func = lambda m: self(m) * u_tilde(m)
        return compact_from_samples(func, self.sample_points(40, 40))


def make_cutoff(model: CylinderModel, arg_range=(0.6, np.pi - 0.6), arg_margin=0.3,
                shift=0.0, width=0.4) -> FundamentalCutoff:
    chi = FundamentalCutoff(model, tuple(arg_range), arg_margin, shift, width)
    chi.check_truncation()
    return chi


def compact_from_samples(func, z_points, n_dirs=96, pad=0.08) -> CompactGFunction:
    """Support descriptor of ``func`` from samples over base points z and all directions."""
    z = np.asarray(z_points, dtype=complex)
    s = np.sqrt(z.imag)
    base = np.stack([np.stack([s, z.real / s], -1),
                     np.stack([np.zeros_like(s), 1.0 / s], -1)], -2)
    th = TWO_PI * np.arange(n_dirs) / n_dirs
    mats = (base[:, None] @ rotation_arrays(th)[None]).reshape(-1, 2, 2)
    vals = func(mats)
    nz = np.abs(vals) > 0
    if not np.any(nz):
        return CompactGFunction(func, IwasawaBox(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), name="empty")
    mm = mats[nz]
    beta, t, x = iwasawa_arrays(mm)
    bc = float(np.angle(np.mean(np.exp(1j * beta))) % TWO_PI)
    hw = min(float(np.max(circular_distance(beta, bc))) * 1.1 + pad, np.pi)
    box = IwasawaBox(bc, 0.5 * float(t.max() + t.min()), 0.5 * float(x.max() + x.min()), hw,
                     0.5 * float(t.max() - t.min()) * 1.1 + pad,
                     0.5 * float(x.max() - x.min()) * 1.1 + pad)
    w = cayley(z)
    c = complex(np.mean(w))
    R = float(np.max(hyperbolic_distance_disk(c, w))) * 1.05 + 0.01
    return CompactGFunction(func, box, x_ball=(c, R), b_window=(bc, hw), name="cutoff_product")


# ---------------------------------------------------------------------------
# Gamma-invariant symbols and data


def cylinder_symbol(arg_range=(0.5, np.pi - 0.5), log_ratio=1.5, direction=1.0):
    """A Gamma-invariant function on G.

    u(g) = A(arg z) H(xi_+ / |z|) H(-xi_- / |z|) with z = g.i, xi_pm the
    half-plane endpoints of the geodesic of g and H a bump in log of a
    positive ratio.  ``direction`` = +1 selects xi_+ > 0 > xi_-.
    """
    lo, hi = arg_range
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def H(ratio):
        out = np.zeros_like(ratio)
        pos = ratio > 0
        out[pos] = bump_profile(np.log(ratio[pos]) / log_ratio)
        return out

    def u(m):
        z = halfplane_point_arrays(m)
        xp = xi_of_angle(boundary_plus_arrays(m))
        xm = xi_of_angle(boundary_minus_arrays(m))
        r = np.abs(z)
        return (bump_profile((np.angle(z) - mid) / half)
                * H(direction * xp / r) * H(-direction * xm / r)).astype(complex)

    return u


@dataclass(frozen=True)
class GammaAverage:
    """T_Gamma = sum_{|n|<=N} |d gamma^n|^{-(sigma-1)} (gamma^n)^* T with sigma = s0/2."""

    T: BoundaryFunction
    s0: complex
    model: CylinderModel
    N: int

    @property
    def lam(self):
        return disk_parameter(self.s0) - 1.0

    def term(self, n, beta):
        beta = np.asarray(beta, dtype=float)
        jac = self.model.boundary_derivative(n, beta)
        return jac ** (-self.lam) * self.T(self.model.act_boundary(n, beta))

    def __call__(self, beta):
        beta = np.asarray(beta, dtype=float)
        out = np.zeros(beta.shape, dtype=complex)
        for n in range(-self.N, self.N + 1):
            out = out + self.term(n, beta)
        return out

    def as_boundary_function(self) -> BoundaryFunction:
        return BoundaryFunction(self.__call__, name="gamma_average",
                                params=dict(N=self.N, ell=self.model.ell))

    def xi_intervals(self):
        """Support of each term as an interval in the half-plane coordinate xi.

        Term n is supported on gamma^{-n}(supp T) = e^{-n l} * (xi-support of T);
        xi keeps full relative precision near both fixed points.
        """
        c, hw = self.T.support
        lo, hi = np.mod(c - hw, TWO_PI), np.mod(c + hw, TWO_PI)
        x0, x1 = float(xi_of_angle(lo)), float(xi_of_angle(hi))
        return [(n, np.exp(-n * self.model.ell) * x0, np.exp(-n * self.model.ell) * x1)
                for n in range(-self.N, self.N + 1)]

    def poisson(self, w, nodes=96):
        """P_{sigma-1}(T_Gamma) at disk points w, integrating each term over its own interval."""
        w = np.asarray(w, dtype=complex).reshape(-1)
        sig = disk_parameter(self.s0)
        ell = self.model.ell
        total = np.zeros(w.shape, dtype=complex)
        per_term = {}
        log_1mw2 = np.log1p(-np.abs(w) ** 2)
        for n, lo, hi in self.xi_intervals():
            xi, wx = gauss_legendre(lo, hi, nodes)
            e = (xi - 1j) / (xi + 1j)                      # boundary point in the disk
            dbeta = 2.0 / (1.0 + xi * xi)                  # d beta = 2 d xi / (1 + xi^2)
            jac = np.exp(n * ell) * (1 + xi * xi) / (1 + np.exp(2 * n * ell) * xi * xi)
            beta_img = 2.0 * np.arctan2(1.0, -np.exp(n * ell) * xi)   # angle of e^{n l} xi
            term = jac ** (-self.lam) * self.T(beta_img)
            log_pk = log_1mw2[:, None] - np.log(np.abs(w[:, None] - e[None, :]) ** 2)
            val = np.exp(sig * log_pk) @ (term * dbeta * wx)
            per_term[n] = val
            total = total + val
        return total, per_term


def _check_fixed_points(T: BoundaryFunction, margin=1e-3):
    if T.support is not None:
        c, hw = T.support
        for f in FIXED_ANGLES:
            if circular_distance(c, f) <= hw + margin:
                raise FixedPointSupport(f"support arc of T meets the fixed point {f}")
        return
    probe = np.concatenate([f + np.linspace(-0.05, 0.05, 101) for f in FIXED_ANGLES])
    if np.max(np.abs(T(probe))) > 1e-14:
        raise FixedPointSupport("T does not vanish near the fixed points of gamma")


def gamma_average(T: BoundaryFunction, s0: complex, model: CylinderModel, N: Optional[int] = None):
    """Gamma-averaged boundary data (see :class:`GammaAverage`)."""
    N = model.N if N is None else N
    if N == 0:
        return T
    _check_fixed_points(T)
    return GammaAverage(T, complex(s0), model, int(N)).as_boundary_function()


@dataclass
class InvarianceReport:
    residual: float
    tail_bound: float
    N: int


def gamma_invariance_residual(T, s0, model: CylinderModel, points, N=None, nodes=96):
    """max |P(T_Gamma)(gamma x) - P(T_Gamma)(x)| and the size of the boundary orbit terms."""
    N = model.N if N is None else N
    _check_fixed_points(T)
    avg = GammaAverage(T, complex(s0), model, int(N))
    w = np.asarray(points, dtype=complex).reshape(-1)
    gw = model.act_disk(1, w)
    p0, t0 = avg.poisson(w, nodes)
    p1, t1 = avg.poisson(gw, nodes)
    # for the exact average, the two sides differ only by the end terms of the orbit sum
    tail = np.abs(t0[N]) + np.abs(t0[-N]) + np.abs(t1[N]) + np.abs(t1[-N])
    return InvarianceReport(float(np.max(np.abs(p1 - p0))), float(np.max(tail)), int(N))


# ---------------------------------------------------------------------------
# cutoff independence


@dataclass
class IndependenceReport:
    ps_gap: float
    ps_error: float
    wigner_gap: Optional[float]
    wigner_error: Optional[float]
    ps_values: tuple
    wigner_values: Optional[tuple]

    def passed(self):
        ok = self.ps_gap <= self.ps_error
        if self.wigner_gap is not None:
            ok = ok and self.wigner_gap <= self.wigner_error
        return ok


def orbit_poisson(Tp: BoundaryFunction, s0p: complex, model: CylinderModel, N=None,
                  nodes=64, chunk=4096):
    """x -> sum_n P_{sigma'-1} T'(gamma^n x): the Poisson transform of Gamma-averaged T'.

    By equivariance each orbit term equals the Poisson transform at x of one term of
    the Gamma average, which is integrated on its own xi-interval.  Evaluating
    P T' directly at gamma^n x fails for large |n| since those points hug the circle.
    """
    N = model.N if N is None else N
    _check_fixed_points(Tp)
    avg = GammaAverage(Tp, complex(s0p), model, int(N))

    def phi(w):
        w = np.asarray(w, dtype=complex)
        flat = w.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        for i in range(0, flat.size, chunk):
            out[i:i + chunk] = avg.poisson(flat[i:i + chunk], nodes)[0]
        return out.reshape(w.shape)
    return phi


def cutoff_independence(T: BoundaryFunction, Tp: BoundaryFunction, sp: SpectralPair,
                        u_tilde: Callable, chi1: FundamentalCutoff, chi2: FundamentalCutoff,
                        averaged=True, with_wigner=True, res=None) -> IndependenceReport:
    """Gaps |PS(chi1 u) - PS(chi2 u)| and |W(chi1 u) - W(chi2 u)| with their error budgets.

    With ``averaged=False`` the raw data are used (negative control).
    """
    from .pairings import Resolution
    res = res or Resolution()
    model = chi1.model
    if averaged:
        TG = gamma_average(T, sp.s0, model)
        TpG = gamma_average(Tp, sp.s0_prime, model)
    else:
        TG, TpG = T, Tp
    ps = [ps_radon(TG, TpG, sp, None, chi=_Applied(chi, u_tilde), res=res)
          for chi in (chi1, chi2)]
    ps_gap = abs(ps[0].value - ps[1].value)
    ps_err = ps[0].error_estimate + ps[1].error_estimate
    wg = we = wv = None
    if with_wigner:
        phip = orbit_poisson(Tp, sp.s0_prime, model) if averaged else None
        ws = [_wigner_op_cylinder(TG, Tp, sp, chi.apply(u_tilde), phip) for chi in (chi1, chi2)]
        wg = abs(ws[0].value - ws[1].value)
        we = ws[0].error_estimate + ws[1].error_estimate
        wv = (ws[0].value, ws[1].value)
    return IndependenceReport(ps_gap, ps_err, wg, we, (ps[0].value, ps[1].value), wv)


@dataclass(frozen=True)
class _Applied:
    """Adapter so ps_radon's ``chi`` argument can carry a cylinder cutoff."""

    chi: FundamentalCutoff
    u_tilde: Callable

    def apply(self, _u):
        return self.chi.apply(self.u_tilde)


def _wigner_op_cylinder(T, Tp, sp, f: CompactGFunction, phip=None, tol=1e-3, n=(64, 48, 64)):
    """Op-route Wigner pairing; phi' supplied as a callable (orbit sum) when averaged.

    Averaged data pile up thin bumps at the fixed points, so only a relative
    step tolerance near 1e-3 is attainable at moderate cost.
    """
    return wigner_via_op(T, Tp, sp, f, tol=tol, n=n, phi_prime=phip)
