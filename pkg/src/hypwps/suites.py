"""Invariant suites behind the ``selftest`` and ``oracle`` subcommands.

Each check returns a :class:`Check`; suites are plain lists of callables so
the CLI and the tests share them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import (
    SpectralPair,
    calibrate_kernel_exponent,
    compact_bump,
    eigen_residual,
    equivariance_residual,
    fourier,
    vonmises_bump,
)
from .lie_kernel import (
    U_MINUS,
    U_PLUS,
    GroupElement,
    adjoint,
    alpha_A,
    iwasawa,
    kan_arrays,
)
from .quadrature import uniform_oracle


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{tag} {self.name}: {self.value:.3e} vs {self.threshold:.1e}{extra}"


def _below(name, value, threshold, detail=""):
    return Check(name, float(value), float(threshold), bool(value <= threshold), detail)


# ---------------------------------------------------------------------------
# group kernel


def iwasawa_reconstruction(n=10_000, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_alpha = 0.0
    for _ in range(n):
        g = GroupElement.random(rng)
        co = iwasawa(g)
        worst = max(worst, float(np.max(np.abs(co.reconstruct() - g.matrix))))
        worst_alpha = max(worst_alpha, abs(alpha_A(g) - co.t_A))
    return worst, worst_alpha


def adjoint_scaling(ts=None):
    """max relative deviation of Ad(exp tX) U_pm from e^{pm t} U_pm."""
    ts = np.linspace(-10, 10, 201) if ts is None else ts
    worst = 0.0
    for t in ts:
        a = GroupElement.exp_x(float(t))
        for U, sign in ((U_PLUS, 1.0), (U_MINUS, -1.0)):
            got = adjoint(a, U).as_array()
            want = np.exp(sign * t) * U.as_array()
            worst = max(worst, float(np.max(np.abs(got - want)) / np.max(np.abs(want))))
    return worst


def check_iwasawa():
    rec, alpha = iwasawa_reconstruction()
    return [_below("iwasawa reconstruction", rec, 1e-12, "1e4 random elements"),
            _below("alpha_A consistency", alpha, 1e-12)]


def check_adjoint():
    return [_below("adjoint scaling e^{+-t}", adjoint_scaling(), 1e-12, "t in [-10, 10]")]


# ---------------------------------------------------------------------------
# boundary


def eigen_data():
    return [vonmises_bump(0.3, 3.0), fourier([0.2, 0.5j, 1.0, -0.3, 0.1]), compact_bump(2.0, 1.0)]


EIGEN_PARAMS = (0.5 + 5j, 0.25 + 2j, 0.1 + 8j)


def check_eigen():
    rng = np.random.default_rng(3)
    rad = np.sqrt(rng.uniform(0.0, 0.49, 12))
    pts = rad * np.exp(1j * rng.uniform(0.0, 2 * np.pi, 12))
    worst = max(eigen_residual(T, s, pts) for T in eigen_data() for s in EIGEN_PARAMS)
    return [_below("poisson eigenfunction residual", worst, 1e-5, "3 data x 3 parameters")]


def check_kernel_calibration():
    sel, res = calibrate_kernel_exponent()
    ok = sel is not None and all(v > 1e-2 for k, v in res.items() if k != sel)
    detail = ", ".join(f"exp {k}: {v:.1e}" for k, v in sorted(res.items()))
    return [Check("kernel exponent calibration", float(res.get(sel, np.inf)) if sel else np.inf,
                  1e-5, ok, detail)]


def check_equivariance():
    rng = np.random.default_rng(11)
    T = vonmises_bump(1.0, 2.0)
    worst = 0.0
    for _ in range(3):
        g = GroupElement.random(rng, scale=0.6)
        worst = max(worst, equivariance_residual(g, T, -0.3 + 2.0j, rng=rng))
    return [_below("poisson equivariance", worst, 1e-8)]


# ---------------------------------------------------------------------------
# transforms, pairings, cylinder, harness


def check_stationary():
    from .transforms import stationary_points_residual
    rep = stationary_points_residual((0.3, 2.5))
    return [_below("grad Psi on geodesic", rep.on_geodesic_max, 1e-6),
            Check("grad Psi off geodesic", rep.off_geodesic_min, 0.1,
                  rep.off_geodesic_min >= 0.1, "lower bound"),
            _below("Psi constant on geodesic", rep.psi_spread, 1e-8)]


def check_haar():
    from .calibration import calibrate_haar
    h = calibrate_haar()
    detail = ", ".join(f"h={k}: {v:.1e}" for k, v in sorted(h.residuals.items()))
    return [_below("measure identity dx = dn da", h.identity_residual, 1e-8),
            _below("Haar density calibration", h.residuals[h.selected], 1e-8, detail)]


def check_partition():
    from .cylinder import CylinderModel, make_cutoff
    chi = make_cutoff(CylinderModel(2.0, 12))
    res = chi.partition_residual(chi.sample_points())
    return [_below("cutoff partition of unity", res, 1e-10)]


def check_gamma_invariance():
    from .cylinder import CylinderModel, gamma_invariance_residual
    model = CylinderModel(2.0, 12)
    pts = 0.3 * np.exp(1j * np.linspace(0.2, 3.0, 7))
    rep = gamma_invariance_residual(compact_bump(1.5 * np.pi, 1.0), 0.6 + 4j, model, pts)
    return [_below("Gamma-average invariance", rep.residual, max(rep.tail_bound, 1e-12),
                   f"orbit tail {rep.tail_bound:.1e}")]


def check_fit():
    from .harness import SweepRow, fit_remainder
    rows = [SweepRow(r, 0j, 0.0, 1 + 0j, 0.0, 1 + 1 / r + 0j, 0.0, 1 / r)
            for r in np.geomspace(20, 640, 10)]
    fit = fit_remainder(rows)
    return [_below("synthetic r^-1 slope", abs(fit.slope + 1.0), 1e-12)]


SELFTEST = [check_iwasawa, check_adjoint, check_eigen, check_kernel_calibration,
            check_equivariance, check_stationary, check_haar, check_partition,
            check_gamma_invariance, check_fit]


# ---------------------------------------------------------------------------
# small-r oracles


def intertwine_oracle(r=100.0, n=2 ** 22):
    from .transforms import _n_support, intertwine, intertwine_weight, iwasawa_bump
    from .lie_kernel import n_plus_arrays
    f = iwasawa_bump(0.3, 0.1, 0.2, 0.7, 0.9, 1.0)
    g = GroupElement.from_matrix(kan_arrays(0.35, 0.0, 0.1))
    s0p = complex(0.2, -r)
    lo, hi = _n_support(f, g)
    gm = g.matrix
    brute = uniform_oracle(
        lambda x: intertwine_weight(x, s0p) * f.on_matrices(gm @ n_plus_arrays(x)) / np.pi,
        lo, hi, n=n)
    return abs(intertwine(f, s0p, g)[0] - brute)


def _plane_problem():
    from .pairings import PhaseSpaceTest
    u = PhaseSpaceTest.build(0j, 1.2, 0.0, 0.8)
    return vonmises_bump(0.0, 2.0), vonmises_bump(np.pi, 2.0), u


def check_intertwine_oracle():
    return [_below("intertwine vs 2^22-node trapezoid (r=100)", intertwine_oracle(), 1e-8)]


def check_wigner_routes(rs=(4.0, 8.0)):
    from .pairings import wigner, wigner_via_op
    T, Tp, u = _plane_problem()
    out = []
    for r in rs:
        sp = SpectralPair(0.2, 0.1, r)
        a = wigner(T, Tp, sp, u, path="direct").value
        b = wigner_via_op(T, Tp, sp, u).value
        out.append(_below(f"wigner direct vs op (r={r:g})", abs(a / b - 1), 1e-6))
    return out


def check_ps_routes(r=5.0):
    from .pairings import PS_NORMALIZATION, ps_product, ps_radon
    T, Tp, u = _plane_problem()
    sp = SpectralPair(0.2, 0.1, r)
    a = ps_radon(T, Tp, sp, u).value
    b = ps_product(T, Tp, sp, u).value * PS_NORMALIZATION
    return [_below(f"ps_radon vs ps_product (r={r:g})", abs(a / b - 1), 1e-6)]


ORACLE = [check_intertwine_oracle, check_wigner_routes, check_ps_routes]


def run_suite(suite):
    checks = []
    for fn in suite:
        checks.extend(fn())
    return checks
