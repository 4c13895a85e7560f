"""Batch driver: configuration, r-sweeps, the ratio fit and report emission."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import yaml

from .boundary import BoundaryFunction, SpectralPair, from_config
from .calibration import ConstantsRecord, frozen_constants
from .errors import DomainError, InsufficientData, NoiseFloor, NonConvergence
from .pairings import PhaseSpaceTest, Resolution, joint_pairings
from .transforms import C_LEADING

log = logging.getLogger(__name__)

SLOPE_WINDOW = (-1.3, -0.7)
CYLINDER_U = {"arg_range": [1.1, float(np.pi) - 1.1], "log_ratio": 1.0}
NOISE_FACTOR = 3.0


def default_r_grid(r_min=20.0, r_max=640.0, per_decade=6):
    """Geometric grid from r_min to r_max with about ``per_decade`` points per decade."""
    n = int(round(per_decade * math.log10(r_max / r_min))) + 1
    return [float(v) for v in np.geomspace(r_min, r_max, n)]


def _default_boundary_T():
    return {"kind": "vonmises_bump", "center": 0.0, "concentration": 2.0}


def _default_boundary_Tp():
    return {"kind": "vonmises_bump", "center": float(np.pi), "concentration": 2.0}


def _default_u():
    return {"center": [0.0, 0.0], "radius": 1.2, "b_center": 0.0, "b_halfwidth": 0.8}


def _default_resolution():
    return asdict(Resolution())


@dataclass
class ExperimentConfig:
    model: str = "plane"
    ell: float = 2.0
    N: int = 12
    T: dict = field(default_factory=_default_boundary_T)
    T_prime: dict = field(default_factory=_default_boundary_Tp)
    q: float = 0.2
    q_prime: float = 0.1
    strip: float = 2.0
    r_list: list = field(default_factory=default_r_grid)
    u: dict = field(default_factory=_default_u)
    resolution: dict = field(default_factory=_default_resolution)
    rel_tol: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.model not in ("plane", "cylinder"):
            raise DomainError(f"model must be 'plane' or 'cylinder', got {self.model!r}")
        r = [float(v) for v in self.r_list]
        if any(v <= 0 for v in r):
            raise DomainError("r values must be positive")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise DomainError("r_list must be strictly increasing")
        # a slope fit needs four points over at least one decade
        if len(r) >= 4 and r[-1] / r[0] < 10.0 - 1e-12:
            raise DomainError("an r_list used for fitting must span at least one decade")
        for v in (self.q, self.q_prime):
            if not -self.strip < v <= 0.5:
                raise DomainError(f"q = {v} outside the strip (-{self.strip}, 1/2]")
        if self.model == "cylinder" and (self.ell <= 0 or self.N < 1):
            raise DomainError("cylinder needs ell > 0 and N >= 1")
        self.r_list = r

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "ExperimentConfig":
        d = dict(d or {})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def echo(self) -> str:
        """YAML echo with every default materialized."""
        return yaml.safe_dump(_plain(self.to_dict()), sort_keys=True)

    def spectral_pair(self, r) -> SpectralPair:
        return SpectralPair(self.q, self.q_prime, float(r), self.strip)

    def res(self) -> Resolution:
        return Resolution(**self.resolution)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def build_problem(cfg: ExperimentConfig):
    """(T, T', u, chi) ready for the pairing engine."""
    T: BoundaryFunction = from_config(cfg.T)
    Tp: BoundaryFunction = from_config(cfg.T_prime)
    if cfg.model == "plane":
        us = cfg.u
        c = complex(*us["center"]) if isinstance(us["center"], (list, tuple)) else complex(us["center"])
        u = PhaseSpaceTest.build(c, us["radius"], us["b_center"], us["b_halfwidth"])
        return T, Tp, u, None
    from .cylinder import CylinderModel, cylinder_symbol, make_cutoff
    model = CylinderModel(cfg.ell, cfg.N)
    us = cfg.u if "log_ratio" in cfg.u else CYLINDER_U
    u = cylinder_symbol(arg_range=tuple(us["arg_range"]), log_ratio=us["log_ratio"])
    chi = make_cutoff(model, arg_range=(1.0, np.pi - 1.0), arg_margin=0.2)
    return T, Tp, u, chi


@dataclass(frozen=True)
class SweepRow:
    r: float
    W: complex
    W_err: float
    PS: complex
    PS_err: float
    ratio: complex
    ratio_err: float
    deviation: float       # |ratio - 1|

    @property
    def defined(self) -> bool:
        return not math.isnan(self.deviation)


def make_row(r, W, W_err, PS, PS_err) -> SweepRow:
    lead = C_LEADING * r ** -0.5 * PS
    if W == 0 and PS == 0 or lead == 0:
        nan = float("nan")
        return SweepRow(float(r), complex(W), float(W_err), complex(PS), float(PS_err),
                        complex(nan, nan), nan, nan)
    ratio = W / lead
    # first-order propagation of both estimates
    rel = (W_err / abs(W) if W != 0 else math.inf) + PS_err / abs(PS)
    return SweepRow(float(r), complex(W), float(W_err), complex(PS), float(PS_err),
                    complex(ratio), float(abs(ratio) * rel), float(abs(ratio - 1)))


def sweep_point(cfg: ExperimentConfig, r: float) -> SweepRow:
    """Evaluate W and PS at one r.  Resolution is refined until both meet ``cfg.rel_tol``."""
    T, Tp, u, chi = build_problem(cfg)
    sp = cfg.spectral_pair(r)
    if cfg.model == "cylinder":
        from .cylinder import CylinderModel, gamma_average
        model = CylinderModel(cfg.ell, cfg.N)
        T = gamma_average(T, sp.s0, model)
        Tp = gamma_average(Tp, sp.s0_prime, model)
    res = cfg.res()
    for _ in range(3):
        W, PS = joint_pairings(T, Tp, sp, u, chi, res)
        ok = all(p.error_estimate <= cfg.rel_tol * max(abs(p.value), 1e-300) or p.value == 0
                 for p in (W, PS))
        if ok:
            return make_row(r, W.value, W.error_estimate, PS.value, PS.error_estimate)
        res = res.refined()
    raise NonConvergence(f"r = {r}: error estimates above rel_tol = {cfg.rel_tol}",
                         value=(W.value, PS.value), error=(W.error_estimate, PS.error_estimate))


def _point_job(args):
    cfg_dict, r = args
    return sweep_point(ExperimentConfig.from_dict(cfg_dict), r)


class SweepAborted(NonConvergence):
    """Raised by :func:`run_sweep`; carries the rows finished before the failure."""

    def __init__(self, message, rows, cause):
        super().__init__(message, value=getattr(cause, "value", None),
                         error=getattr(cause, "error", None))
        self.rows = rows
        self.cause = cause


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> list:
    """One SweepRow per r, in r order.  Deterministic for a given config."""
    rows = []
    if threads <= 1 or len(cfg.r_list) <= 1:
        for r in cfg.r_list:
            try:
                rows.append(sweep_point(cfg, r))
            except NonConvergence as exc:
                raise SweepAborted(str(exc), rows, exc) from exc
            log.info("r = %g done", r)
        return rows
    jobs = [(cfg.to_dict(), r) for r in cfg.r_list]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_point_job, j) for j in jobs]
        for fut in futures:  # collected in submission order
            try:
                rows.append(fut.result())
            except NonConvergence as exc:
                for other in futures:
                    other.cancel()
                raise SweepAborted(str(exc), rows, exc) from exc
    return rows


# ---------------------------------------------------------------------------
# remainder fit


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    n_used: int
    passed: bool
    vacuous: bool = False
    window: tuple = SLOPE_WINDOW

    def verdict(self) -> str:
        if self.vacuous:
            return "PASS (vacuous: all points at the noise floor)"
        return "PASS" if self.passed else "FAIL"


def fit_remainder(rows, noise_factor=NOISE_FACTOR, window=SLOPE_WINDOW) -> FitResult:
    """Weighted least squares of log|rho - 1| against log r.

    Points with ``|rho - 1| <= noise_factor * ratio_err`` are dropped.  Weights
    are the inverse log-uncertainties ``|rho - 1| / ratio_err``; with all
    uncertainties zero the fit is unweighted.
    """
    rows = [row for row in rows if row.defined]
    if len(rows) < 4:
        raise InsufficientData(f"need at least 4 defined rows, got {len(rows)}")
    used = [row for row in rows if row.deviation > noise_factor * row.ratio_err]
    if not used:
        raise NoiseFloor("all points are consistent with |rho - 1| = 0")
    if len(used) < 4:
        raise InsufficientData(f"only {len(used)} rows above the noise floor")
    x = np.log([row.r for row in used])
    y = np.log([row.deviation for row in used])
    sig = np.array([row.ratio_err / row.deviation for row in used])
    w = None if np.all(sig == 0) else 1.0 / np.maximum(sig, 1e-300)
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, w=w, full=True)
    resid = float(np.sqrt(res[0] / len(used))) if len(res) else 0.0
    passed = window[0] <= slope <= window[1]
    return FitResult(float(slope), float(intercept), resid, len(used), bool(passed), False, window)


def fit_or_vacuous(rows) -> FitResult:
    try:
        return fit_remainder(rows)
    except NoiseFloor as exc:
        warnings.warn(str(exc))
        return FitResult(float("nan"), float("nan"), float("nan"), 0, True, True)


# ---------------------------------------------------------------------------
# emission

CSV_COLUMNS = [
    ("r", "spectral parameter r (s0 = q + i r)"),
    ("W_re", "real part of the Wigner pairing"),
    ("W_im", "imaginary part of the Wigner pairing"),
    ("W_err", "error estimate of W (|fine - coarse|)"),
    ("PS_re", "real part of the Patterson-Sullivan pairing"),
    ("PS_im", "imaginary part of the Patterson-Sullivan pairing"),
    ("PS_err", "error estimate of PS"),
    ("ratio_re", "real part of rho = W / (c r^{-1/2} PS)"),
    ("ratio_im", "imaginary part of rho"),
    ("ratio_err", "propagated uncertainty of rho"),
    ("deviation", "|rho - 1| (nan when rho is undefined)"),
]


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.12e}"


def rows_csv(rows) -> str:
    buf = io.StringIO()
    for name, desc in CSV_COLUMNS:
        buf.write(f"# {name}: {desc}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow([c for c, _ in CSV_COLUMNS])
    for row in rows:
        wr.writerow([_fmt(v) for v in (row.r, row.W.real, row.W.imag, row.W_err, row.PS.real,
                                       row.PS.imag, row.PS_err, row.ratio.real, row.ratio.imag,
                                       row.ratio_err, row.deviation)])
    return buf.getvalue()


def report_text(rows, fit: Optional[FitResult], cfg: ExperimentConfig,
                constants: ConstantsRecord, status: str = "complete") -> str:
    c = complex(C_LEADING)
    out = [
        "[run]",
        f"status = {status}",
        f"rows = {len(rows)}",
        f"c = {abs(c):.12f} * exp(-i pi / 4) = {c.real:.12f} {c.imag:+.12f}j",
        "",
        "[fit]",
    ]
    if fit is None:
        out.append("verdict = not run")
    else:
        out += [f"slope = {_fmt(fit.slope)}", f"intercept = {_fmt(fit.intercept)}",
                f"residual = {_fmt(fit.residual)}", f"points_used = {fit.n_used}",
                f"window = [{fit.window[0]}, {fit.window[1]}]",
                f"verdict = {fit.verdict()}"]
    out += ["", "[rows]", rows_csv(rows).rstrip("\n"), "", "[constants]",
            constants.to_text().rstrip("\n"), "", "[config]", cfg.echo().rstrip("\n")]
    return "\n".join(out) + "\n"


def emit(rows, fit: Optional[FitResult], out_dir, cfg: ExperimentConfig,
         constants: Optional[ConstantsRecord] = None, status="complete") -> dict:
    """Write rows.csv, report.txt and constants.txt; returns the paths."""
    constants = constants or frozen_constants()
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name) for name in ("rows.csv", "report.txt", "constants.txt")}
    texts = {"rows.csv": rows_csv(rows),
             "report.txt": report_text(rows, fit, cfg, constants, status),
             "constants.txt": constants.to_text()}
    for name, text in texts.items():
        with open(paths[name], "w", newline="\n") as fh:
            fh.write(text)
    return paths
