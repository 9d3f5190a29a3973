"""Command-line entry points.

Subcommands: simulate, sweep-error, check-contraction, recover,
xray-forward, fbp. Global flags: --config PATH, --out DIR, --workers K,
--seed S. Environment overrides: HONLS_OUT (output directory),
HONLS_WORKERS (worker count).

Exit codes: 0 success, 2 validation failure, 3 numerical-domain failure,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .config import ExperimentConfig
from .errors import HonlsError, exit_code_for
from . import experiments

logger = logging.getLogger("honls")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="honls",
        description="Spectral lab for localized higher-order NLS: packet "
                    "probes, scaling studies, coefficient recovery.")
    parser.add_argument("--config", required=True, help="INI or JSON experiment config")
    parser.add_argument("--out", default=None, help="output directory (or HONLS_OUT)")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel workers for independent legs (or HONLS_WORKERS)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for any randomized diagnostics")
    parser.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", help="solve once from packet initial data")
    sub.add_parser("sweep-error", help="approximation-error scaling over the eps ladder")
    sub.add_parser("check-contraction", help="fixed-point contraction diagnostics")
    sub.add_parser("recover", help="phase-based coefficient recovery")
    fwd = sub.add_parser("xray-forward", help="forward-oracle sinogram (d = 2)")
    fwd.add_argument("--directions", type=int, default=None)
    fbp = sub.add_parser("fbp", help="forward sinogram + filtered backprojection (d = 2)")
    fbp.add_argument("--directions", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s [%(levelname)s] %(message)s")
    np.random.default_rng(args.seed)  # seed hook for randomized diagnostics

    out_dir = args.out or os.environ.get("HONLS_OUT")
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("HONLS_WORKERS", "1"))

    try:
        config = ExperimentConfig.from_file(args.config)
        if out_dir is None:
            out_dir = config.out_dir
        if args.command == "simulate":
            summary = experiments.run_simulate(config, out_dir)
            print(f"simulate: mass drift {summary['mass_drift']:.3e}, "
                  f"sup fl1 {summary['sup_fl1']:.6g}")
        elif args.command == "sweep-error":
            report = experiments.run_error_sweep(config, out_dir, workers=workers)
            print(f"sweep-error: slope {report.error_fit.slope:.3f} "
                  f"(predicted {report.predicted_exponent:.3f}, "
                  f"R2 {report.error_fit.r_squared:.5f}) "
                  f"{'PASS' if report.passed else 'FAIL'}")
        elif args.command == "check-contraction":
            payload = experiments.run_contraction_check(config, out_dir)
            for run in payload["runs"]:
                print(f"fraction {run['fraction']}: {run['iterations']} iterations, "
                      f"ratios < 1: {run['all_ratios_below_one']}, "
                      f"bound holds: {run['bound_holds']}")
        elif args.command == "recover":
            payload = experiments.run_recover(config, out_dir, workers=workers)
            if config.d == 1:
                for row in payload["recovery"]:
                    print(f"eps {row['eps']}: recovered {row['recovered']:.6g} "
                          f"(oracle {row['oracle']:.6g}, rel {row['rel_error']:.3e})")
            else:
                print(f"fbp rel L2 error {payload['fbp_rel_l2_error']:.4f}")
        elif args.command == "xray-forward":
            experiments.run_xray_forward(config, out_dir, n_dir=args.directions)
            print("forward sinogram written")
        elif args.command == "fbp":
            sino = experiments.run_xray_forward(config, out_dir, n_dir=args.directions)
            payload = experiments.run_fbp(config, sino, out_dir)
            print(f"fbp rel L2 error {payload['fbp_rel_l2_error']:.4f}")
    except HonlsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
