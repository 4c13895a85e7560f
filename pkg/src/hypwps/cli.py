"""Command line entry point: ``hypwps {sweep,calibrate,selftest,oracle}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import FitFailure, InsufficientData, NonConvergence

EXIT_OK, EXIT_FAIL, EXIT_NONCONVERGENCE = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="hypwps", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment config")
    common.add_argument("--out", default="hypwps_out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--tol", type=float, default=None,
                        help="relative tolerance for pairing error estimates")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="r-sweep of W / (c r^-1/2 PS) with slope fit")
    sub.add_parser("calibrate", parents=[common], help="kernel power and Haar density; writes constants.txt")
    sub.add_parser("selftest", parents=[common], help="module invariant suites")
    sub.add_parser("oracle", parents=[common], help="small-r cross-checks")
    return p


def _config(args):
    from .harness import ExperimentConfig
    cfg = ExperimentConfig.from_yaml(args.config) if args.config else ExperimentConfig()
    if args.tol is not None:
        cfg.rel_tol = args.tol
    return cfg


def cmd_sweep(args) -> int:
    from .harness import SweepAborted, emit, fit_or_vacuous, run_sweep
    cfg = _config(args)
    try:
        rows = run_sweep(cfg, threads=args.threads)
    except SweepAborted as exc:
        emit(exc.rows, None, args.out, cfg, status=f"aborted: {exc}")
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    fit = None
    code = EXIT_OK
    if len(rows) >= 4:
        try:
            fit = fit_or_vacuous(rows)
            code = EXIT_OK if fit.passed else EXIT_FAIL
        except InsufficientData as exc:
            print(f"fit skipped: {exc}", file=sys.stderr)
            code = EXIT_FAIL
    paths = emit(rows, fit, args.out, cfg)
    for row in rows:
        print(f"r = {row.r:10.4f}  |rho - 1| = {row.deviation:.3e}  +- {row.ratio_err:.1e}")
    if fit is not None:
        print(f"slope = {fit.slope:.4f}  verdict = {fit.verdict()}")
    print(f"wrote {paths['report.txt']}")
    return code


def cmd_calibrate(args) -> int:
    from .calibration import calibrate
    try:
        rec = calibrate()
    except FitFailure as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "constants.txt")
    with open(path, "w") as fh:
        fh.write(rec.to_text())
    print(rec.to_text(), end="")
    return EXIT_OK


def _run_checks(suite) -> int:
    from .suites import run_suite
    try:
        checks = run_suite(suite)
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_selftest(args) -> int:
    from .suites import SELFTEST
    return _run_checks(SELFTEST)


def cmd_oracle(args) -> int:
    from .suites import ORACLE
    return _run_checks(ORACLE)


COMMANDS = {"sweep": cmd_sweep, "calibrate": cmd_calibrate,
            "selftest": cmd_selftest, "oracle": cmd_oracle}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads > 1:
        os.environ.setdefault("OMP_NUM_THREADS", "1")
    try:
        return COMMANDS[args.command](args)
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
