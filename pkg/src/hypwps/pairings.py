"""Wigner and Patterson-Sullivan pairings.

Spectral parameters enter the pairing formulas through the horocycle
bracket exactly as written: ``e^{s0 <x,b> + conj(s0') <x,b'>}``.  Since the
disk Poisson kernel is ``e^{2 <x,b>}``, the Poisson transforms that realize
the same functions use the disk parameter ``sigma = s0 / 2``
(see :func:`disk_parameter`).

All routes return a :class:`PairingResult`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.signal import fftconvolve

from .boundary import BoundaryFunction, SpectralPair, bump_profile, poisson_transform
from .errors import FitFailure, NonConvergence
from .lie_kernel import (
    TWO_PI,
    bracket_disk,
    boundary_plus_arrays,
    circular_distance,
    disk_point_arrays,
    hyperbolic_distance_disk,
    iwasawa_arrays,
    kan_arrays,
    kna_arrays,
    rho_a_arrays,
    rho_a_w0_arrays,
)
from .quadrature import gauss_legendre
from .transforms import (
    C_LEADING,
    SQRT_2PI,
    CompactGFunction,
    EndpointCutoff,
    IwasawaBox,
    _ball_sample,
    _polar_ball,
    chart_point,
    chart_ranges,
    f_plus_inverse,
    make_endpoint_cutoff,
    radon_pair,
)

HAAR_EXPONENT = 1  # dg = e^{t_A} dk da dn in the chart k exp(t_A X) n(x)
PS_NORMALIZATION = TWO_PI  # ps_radon = PS_NORMALIZATION * ps_product


def disk_parameter(s):
    """Poisson parameter of the disk kernel matching bracket exponent ``s``."""
    return 0.5 * complex(s)


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class PairingResult:
    value: complex
    error_estimate: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error estimate must be non-negative")


@dataclass(frozen=True)
class PhaseSpaceTest(CompactGFunction):
    """u(g) = rho(d(g.o, center) / R) * rho(|B_+(g) - b_center| / halfwidth) * extra(g).

    ``rho`` is the bump profile exp(1 - 1/(1 - s^2)).
    """

    @classmethod
    def build(cls, center=0j, radius=1.2, b_center=0.0, b_halfwidth=0.8,
              extra: Optional[Callable] = None, amplitude=1.0, pad=0.02):
        c = complex(center)

        def f(m):
            w = disk_point_arrays(m)
            d = hyperbolic_distance_disk(c, w)
            b = boundary_plus_arrays(m)
            val = amplitude * bump_profile(d / radius) * bump_profile(
                circular_distance(b, b_center) / b_halfwidth)
            if extra is not None:
                val = val * extra(m)
            return val

        box = _sampled_box(c, radius, b_center, b_halfwidth, pad)
        return cls(f, box, x_ball=(c, float(radius)), b_window=(float(b_center), float(b_halfwidth)),
                   name="phase_space_test",
                   params=dict(center=c, radius=radius, b_center=b_center,
                               b_halfwidth=b_halfwidth, amplitude=amplitude))


def _sampled_box(center, R, bc, hw, pad):
    w = _ball_sample(center, R, np.linspace(0, TWO_PI, 128, endpoint=False),
                     np.linspace(0, 1, 9))
    bs = bc + np.linspace(-hw, hw, 33)
    _, t, x = iwasawa_arrays(f_plus_inverse(w[:, None], bs[None, :]))
    return IwasawaBox(float(bc), 0.5 * float(t.max() + t.min()), 0.5 * float(x.max() + x.min()),
                      float(hw) + pad, 0.5 * float(t.max() - t.min()) + pad,
                      0.5 * float(x.max() - x.min()) + pad)


def flowed(u: CompactGFunction, t: float) -> CompactGFunction:
    """u o phi_t, i.e. g -> u(g exp(tX)), with its transported support box."""
    et = np.exp(0.5 * t)
    a_t = np.array([[et, 0.0], [0.0, 1.0 / et]])
    bx = u.box
    # k a_s n_x a_t = k a_{s+t} n_{x e^{-t}}: A-coordinate shifts by -t, N scales by e^t
    box = IwasawaBox(bx.beta0, bx.t0 - t, bx.x0 * np.exp(t), bx.d_K, bx.d_A, bx.d_N * np.exp(t))
    ball = None
    if u.x_ball is not None:
        c, R = u.x_ball
        ball = (c, R + abs(t))
    return CompactGFunction(lambda m: u.func(m @ a_t), box, ball, u.b_window,
                            name=f"{u.name}_flowed", params=dict(u.params, flow_time=t))


# ---------------------------------------------------------------------------
# chart engine: factorized Wigner and Radon PS on one (b, t, y) grid


@dataclass(frozen=True)
class Resolution:
    n_b: int = 48
    n_t: int = 48
    points_per_wavelength: float = 6.0
    h_max: float = 0.02

    def refined(self, factor=1.5):
        return Resolution(int(np.ceil(self.n_b * factor)), int(np.ceil(self.n_t * factor)),
                          self.points_per_wavelength * factor, self.h_max / factor)


def _lattice_step(sp: SpectralPair, t_min: float, res: Resolution):
    # the y-integrand oscillates at most at r (1 + e^{-t}) / 2 rad per unit
    omega = 0.5 * sp.r * (1.0 + np.exp(-t_min)) + 1.0
    return min(res.h_max, TWO_PI / (res.points_per_wavelength * omega))


def chart_pairings(T, Tp, sp: SpectralPair, u: CompactGFunction, cutoff: EndpointCutoff,
                   res: Resolution = Resolution(), want=("wigner", "ps")):
    """Factorized Wigner and Radon PS on a single grid; returns a dict of complex values."""
    (bc, hw), zr, tr = chart_ranges(u)
    bnodes, bw = gauss_legendre(bc - hw, bc + hw, res.n_b)
    tnodes, tw = gauss_legendre(tr[0], tr[1], res.n_t)
    h = _lattice_step(sp, tr[0], res)
    sbar = np.conj(sp.s0_prime)
    wt = tw * np.exp(0.5 * (sp.q - sp.q_prime) * tnodes) / SQRT_2PI

    k_lo, k_hi = int(np.floor(zr[0] / h)), int(np.ceil(zr[1] / h))
    kz = np.arange(k_lo, k_hi + 1)
    z = kz * h
    out = {"wigner": 0j, "ps": 0j}
    if "wigner" in want:
        jmax = int(np.ceil(cutoff.y_max() / h))
        jy = np.arange(-jmax, jmax + 1)
        y = jy * h
        beta_y = cutoff.of_y(y)
        keep = beta_y > 0
        jy, y, beta_y = jy[keep], y[keep], beta_y[keep]
        # kernel K_t(n h) for n in [k_lo - j_max, k_hi - j_min]
        n = np.arange(k_lo - jy[-1], k_hi - jy[0] + 1)
        xs = n[None, :] * h * np.exp(-tnodes)[:, None]
        kern = np.exp(-tnodes)[:, None] / np.pi * np.exp(-0.5 * sbar * np.log1p(xs * xs))
    for ib, b in enumerate(bnodes):
        U = u.on_matrices(kna_arrays(b, z[None, :], tnodes[:, None]))  # (n_t, n_z)
        if not np.any(U):
            continue
        Tb = T(np.array([b]))[0]
        if "ps" in want:
            bp = b + np.pi + 2.0 * np.arctan(z)
            G = 2.0 * np.exp((0.5 * sbar - 1.0) * np.log1p(z * z)) * np.conj(Tp(bp))
            out["ps"] += bw[ib] * Tb * h * np.sum(wt[:, None] * U * G[None, :])
        if "wigner" in want:
            bp = b + np.pi + 2.0 * np.arctan(y)
            G = beta_y * 2.0 * np.exp((0.5 * sbar - 1.0) * np.log1p(y * y)) * np.conj(Tp(bp))
            # sum_j K((k - j) h) G_j: with kern[i] = K((n[0] + i) h) and G[p] at j = jy[0] + p,
            # the full convolution at index m = k - jy[0] - n[0] is exactly that sum
            conv = fftconvolve(kern, G[None, :], mode="full", axes=1)
            corr = conv[:, kz - jy[0] - n[0]]
            out["wigner"] += bw[ib] * Tb * h * h * np.sum(wt[:, None] * U * corr)
    return out


def _effective(u: CompactGFunction, chi):
    """chi * u as a compactly supported function (chi carries the support when given)."""
    if chi is None:
        return u
    return chi.apply(u)


def _engine(T, Tp, sp, u, chi, res, want, cutoff=None):
    f = _effective(u, chi)
    cutoff = cutoff or make_endpoint_cutoff(f)
    coarse = chart_pairings(T, Tp, sp, f, cutoff, res, want)
    fine_res = res.refined()
    fine = chart_pairings(T, Tp, sp, f, cutoff, fine_res, want)
    meta = dict(r=sp.r, n_b=fine_res.n_b, n_t=fine_res.n_t,
                h=_lattice_step(sp, chart_ranges(f)[2][0], fine_res),
                delta_min=cutoff.delta_min)
    return {k: PairingResult(complex(fine[k]), float(abs(fine[k] - coarse[k])), dict(meta))
            for k in want}


def joint_pairings(T, Tp, sp: SpectralPair, u: CompactGFunction, chi=None,
                   res: Resolution = Resolution()):
    """(factorized Wigner, Radon PS) evaluated on one shared grid."""
    out = _engine(T, Tp, sp, u, chi, res, ("wigner", "ps"))
    return (PairingResult(out["wigner"].value, out["wigner"].error_estimate,
                          dict(out["wigner"].metadata, path="factorized")),
            PairingResult(out["ps"].value, out["ps"].error_estimate,
                          dict(out["ps"].metadata, path="radon")))


def wigner(T, Tp, sp: SpectralPair, u: CompactGFunction, chi=None, path="factorized",
           res: Resolution = Resolution(), tol=1e-9, cutoff=None) -> PairingResult:
    """int int T(b) conj(T'(b')) J(b, b') db db'.

    ``path="factorized"`` uses beta R(I(u)) (the default, valid for large r);
    ``path="direct"`` integrates the J kernel over the plane and is meant for
    small r.
    """
    if path == "factorized":
        out = _engine(T, Tp, sp, u, chi, res, ("wigner",), cutoff)["wigner"]
        return PairingResult(out.value, out.error_estimate, dict(out.metadata, path="factorized"))
    if path == "direct":
        return _wigner_direct(T, Tp, sp, _effective(u, chi), tol)
    raise ValueError(f"unknown path {path!r}")


def _wigner_direct(T, Tp, sp, u, tol, n=(24, 32, 48, 64)):
    (bc, hw) = u.window()
    center, R = u.ball()
    sbar = np.conj(sp.s0_prime)
    n_b, n_rho, n_th, n_bp = n
    scale = 1.0 + sp.r / 8.0
    n_rho, n_th, n_bp = int(n_rho * scale), int(n_th * scale), int(n_bp * scale)
    prev = None
    for _ in range(6):
        bnodes, bw = gauss_legendre(bc - hw, bc + hw, n_b)
        bpn = TWO_PI * np.arange(n_bp) / n_bp
        w, wt = _polar_ball(center, R, n_rho, n_th)
        w, wt = w.ravel(), wt.ravel()
        E = np.exp(sbar * bracket_disk(w[:, None], bpn[None, :]))      # (n_x, n_bp)
        Tpc = np.conj(Tp(bpn)) * (TWO_PI / n_bp)
        total = 0j
        for b, wb in zip(bnodes, bw):
            A = u.on_matrices(f_plus_inverse(w, b)) * np.exp(sp.s0 * bracket_disk(w, b)) * wt
            J = A @ E                                                    # J(b, b') at all b'
            total += wb * T(np.array([b]))[0] * np.dot(Tpc, J)
        if prev is not None and abs(total - prev) <= tol * max(1e-300, abs(total)):
            return PairingResult(complex(total), float(abs(total - prev)),
                                 dict(r=sp.r, path="direct", nodes=(n_b, n_rho, n_th, n_bp)))
        prev = total
        n_b, n_rho, n_th, n_bp = (int(v * 1.4) for v in (n_b, n_rho, n_th, n_bp))
    raise NonConvergence("wigner direct route did not converge", value=total,
                         error=abs(total - prev))


def wigner_via_op(T, Tp, sp: SpectralPair, u: CompactGFunction, chi=None, tol=1e-9,
                  n=(32, 24, 32), phi_prime: Optional[Callable] = None) -> PairingResult:
    """<Op(u) phi, phi'> with phi' = P_{sigma'-1} T' and Op(u) phi = P_{sigma-1}(u(x, .) T).

    Here sigma = s0/2 and sigma' = s0'/2 are the disk-kernel parameters.
    ``phi_prime`` overrides phi' (a callable on disk points).
    """
    f = _effective(u, chi)
    (bc, hw) = f.window()
    center, R = f.ball()
    sig, sigp = disk_parameter(sp.s0), disk_parameter(sp.s0_prime)
    n_b, n_rho, n_th = n
    scale = 1.0 + sp.r / 8.0
    n_rho, n_th = int(n_rho * scale), int(n_th * scale)
    prev = None
    for _ in range(6):
        w, wt = _polar_ball(center, R, n_rho, n_th)
        w, wt = w.ravel(), wt.ravel()
        bnodes, bw = gauss_legendre(bc - hw, bc + hw, n_b)
        Tb = T(bnodes)[None, :]
        e = np.exp(1j * bnodes)[None, :]
        op_phi = np.empty(w.shape, dtype=complex)
        step = max(1, 2 ** 18 // n_b)
        for i in range(0, w.size, step):
            wc = w[i:i + step, None]
            # Op(u) phi(x): boundary integral of kernel power times u(F_+^{-1}(x, b)) T(b)
            U = f.on_matrices(f_plus_inverse(wc, bnodes[None, :]))
            pk = (1 - np.abs(wc) ** 2) / np.abs(wc - e) ** 2
            op_phi[i:i + step] = (pk ** sig * U * Tb) @ bw
        if phi_prime is None:
            phip = poisson_transform(Tp, sigp - 1.0, w, tol=1e-12)
        else:
            phip = phi_prime(w)
        total = complex(np.sum(wt * op_phi * np.conj(phip)))
        if prev is not None and abs(total - prev) <= tol * max(1e-300, abs(total)):
            return PairingResult(total, float(abs(total - prev)),
                                 dict(r=sp.r, path="op", nodes=(n_b, n_rho, n_th)))
        prev = total
        n_b, n_rho, n_th = (int(v * 1.4) for v in (n_b, n_rho, n_th))
    raise NonConvergence("wigner_via_op did not converge", value=total, error=abs(total - prev))


def ps_radon(T, Tp, sp: SpectralPair, u: CompactGFunction, chi=None,
             res: Resolution = Resolution(), method="engine", tol=1e-10) -> PairingResult:
    """R'(T x conj T')(chi u): the defining representation of PS."""
    if method == "engine":
        out = _engine(T, Tp, sp, u, chi, res, ("ps",))["ps"]
        return PairingResult(out.value, out.error_estimate, dict(out.metadata, path="radon"))
    val, err = radon_pair(T, Tp, sp, _effective(u, chi), tol=tol)
    return PairingResult(val, err, dict(r=sp.r, path="radon_pair"))


def product_states(T, Tp, sp: SpectralPair):
    """v = Phi_+^{s0-2} T(B_+) and conj(v*) = Phi_-^{conj(s0')-2} conj(T'(B_-)) on matrix stacks.

    Phi_+(g) = e^{rho(A(g))} and Phi_-(g) = e^{rho(A(g w0))} are the bracket
    kernels at the two endpoints; in disk-kernel terms both exponents equal
    sigma - 1 with sigma = s/2.
    """
    from .lie_kernel import boundary_minus_arrays

    def v(m):
        return np.exp((sp.s0 - 2.0) * rho_a_arrays(m)) * T(boundary_plus_arrays(m))

    def v_star_conj(m):
        return (np.exp((np.conj(sp.s0_prime) - 2.0) * rho_a_w0_arrays(m))
                * np.conj(Tp(boundary_minus_arrays(m))))

    return v, v_star_conj


def ps_product(T, Tp, sp: SpectralPair, u: CompactGFunction, chi=None, tol=1e-9,
               n0=(32, 32, 32), haar_exponent=HAAR_EXPONENT) -> PairingResult:
    """int_G v(g) conj(v*(g)) chi u(g) dg, with dg = e^{t} dk da dn in Iwasawa coordinates.

    The result is not rescaled: ps_radon = PS_NORMALIZATION * ps_product.
    """
    from .transforms import tensor_gl
    f = _effective(u, chi)
    v, vsc = product_states(T, Tp, sp)
    bx = f.box
    n_x = int(n0[2] * (1 + sp.r * bx.d_N / 8))

    def integrand(beta, t, x):
        m = kan_arrays(beta, t, x)
        return (v(m) * vsc(m) * f.on_matrices(m) * np.exp(haar_exponent * t)
                / (SQRT_2PI * np.pi))

    val, err = tensor_gl(integrand, [(bx.beta0 - bx.d_K, bx.beta0 + bx.d_K),
                                     (bx.t0 - bx.d_A, bx.t0 + bx.d_A),
                                     (bx.x0 - bx.d_N, bx.x0 + bx.d_N)],
                         (n0[0], n0[1], n_x), tol=tol, max_n=(400, 400, 8 * n_x))
    return PairingResult(val, err, dict(r=sp.r, path="product", haar_exponent=haar_exponent))


@dataclass
class QuasiInvarianceReport:
    t: np.ndarray
    values: np.ndarray
    kappa: float
    kappa_imag: float
    fit_residual: float
    expected_paper: float       # q' - q
    sign_convention: str

    def matches(self, target, rtol=1e-3):
        if target == 0:
            return abs(self.kappa) <= rtol
        return abs(abs(self.kappa) - abs(target)) <= rtol * abs(target)


def quasi_invariance_profile(T, Tp, sp: SpectralPair, u: CompactGFunction, chi=None,
                             t_grid=None, res: Resolution = Resolution()) -> QuasiInvarianceReport:
    """PS(u o phi_t) on a t-grid, fitted to PS(u) e^{kappa t}."""
    t_grid = np.linspace(-1.0, 1.0, 9) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(np.abs(t_grid) > 1.0):
        raise ValueError("t-grid must lie in [-1, 1]")
    f = _effective(u, chi)
    vals = np.array([ps_radon(T, Tp, sp, flowed(f, t), res=res).value for t in t_grid])
    i0 = int(np.argmin(np.abs(t_grid)))
    if abs(vals[i0]) == 0:
        raise FitFailure("PS(u) vanishes; cannot fit a growth rate")
    logs = np.log(vals / vals[i0])
    # least squares for log(f(t)/f(0)) = kappa t (complex kappa)
    A = t_grid[:, None]
    kr = np.linalg.lstsq(A, logs.real, rcond=None)[0][0]
    ki = np.linalg.lstsq(A, np.unwrap(logs.imag), rcond=None)[0][0]
    model = vals[i0] * np.exp((kr + 1j * ki) * t_grid)
    resid = float(np.max(np.abs(model - vals)) / np.max(np.abs(vals)))
    if not np.isfinite(kr):
        raise FitFailure("non-finite growth rate")
    expected = sp.q_prime - sp.q
    conv = "PS(u o phi_t) = e^{kappa t} PS(u)"
    return QuasiInvarianceReport(t_grid, vals, float(kr), float(ki), resid, expected, conv)
