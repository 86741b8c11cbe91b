"""Command-line interface.

Subcommands:

* ``sweep <config>``            -- run the averaging sweep, write CSV + summary
* ``diag <config> <name>``      -- run one diagnostic suite
* ``lift <config>``             -- dump one mixed-lift sample as a binary file
* ``drift <config> --x <file>`` -- Monte Carlo averaged-drift estimate at x

Environment overrides: ``ROUGHAVG_OUTPUT_DIR`` (output directory),
``ROUGHAVG_WORKERS`` (worker processes).  Exit codes: 0 every suite passed,
1 suite failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .averaging import averaged_drift, ergodicity_decay
from .config import load_config, resolve_output_dir
from .errors import ConfigurationError, InvalidInputError, RoughAvgError
from .roughpath import join_mixed, save_roughpath
from .spectral import make_grid
from .sweep import DIAG_NAMES, _lift_pair, run_diag, run_sweep

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    report = run_sweep(cfg)
    for row in report.rows:
        print(f"eps={row.epsilon:<10g} delta={row.delta:<12g} "
              f"mean_sq={row.mean_sq:.6e} stderr={row.stderr:.3e} "
              f"blowups={row.blowups}")
    for msg in report.messages:
        print(msg)
    print(f"sweep: {'PASS' if report.passed else 'FAIL'} ({report.csv_path})")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_diag(args) -> int:
    cfg = load_config(args.config)
    try:
        report = run_diag(cfg, args.name)
    except InvalidInputError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for line in report.lines:
        print(line)
    print(f"diag {report.name}: {'PASS' if report.passed else 'FAIL'} "
          f"({report.csv_path})")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_lift(args) -> int:
    cfg = load_config(args.config)
    out_dir = resolve_output_dir(cfg)
    os.makedirs(out_dir, exist_ok=True)
    gen = cfg.build_generator()
    c = cfg.build_coefficients(gen)
    grid = make_grid(cfg.horizon, cfg.grid_n)
    b, bf, w, wf = _lift_pair(cfg, grid, c, sample_index=0)
    xi = join_mixed(b, w, bf, wf)
    target = os.path.join(out_dir, "xi_sample0.rpth")
    save_roughpath(xi, target)
    print(f"wrote mixed lift (dim {xi.dim}, {xi.n_intervals} intervals) to {target}")
    return EXIT_PASS


def _cmd_drift(args) -> int:
    cfg = load_config(args.config)
    gen = cfg.build_generator()
    c = cfg.build_coefficients(gen)
    try:
        tokens = open(args.x, "r", encoding="utf-8").read().replace(",", " ").split()
        x = np.array([float(tok) for tok in tokens])
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read state vector from {args.x!r}: {exc}") \
            from None
    if x.size != cfg.n_modes:
        raise ConfigurationError(
            f"state vector has {x.size} entries, expected {cfg.n_modes}")
    fit = ergodicity_decay(x, np.eye(cfg.n_modes)[0], np.zeros(cfg.n_modes), c, gen,
                           horizon=6.0, n_steps=600, n_samples=64,
                           master_seed=cfg.master_seed)
    t_star = math.log(1e3) / (-fit.slope) * 1.05
    est = averaged_drift(x, c, gen, t_star, cfg.frozen_samples, h=0.01,
                         master_seed=cfg.master_seed, decay_slope=fit.slope)
    print(f"averaged drift estimate ({c.name}, {est.samples} samples, "
          f"burn-in {est.burn_in:.6g}):")
    print("value  = [" + ", ".join(f"{v:.17g}" for v in est.value) + "]")
    print(f"stderr = {est.stderr:.17g}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughavg",
        description="Slow-fast rough PDE averaging experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the averaging sweep")
    p.add_argument("config")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("diag", help="run one diagnostic suite")
    p.add_argument("config")
    p.add_argument("name", help=f"one of: {', '.join(DIAG_NAMES)}")
    p.set_defaults(func=_cmd_diag)

    p = sub.add_parser("lift", help="dump a mixed rough-path lift (binary)")
    p.add_argument("config")
    p.set_defaults(func=_cmd_lift)

    p = sub.add_parser("drift", help="Monte Carlo averaged-drift estimate")
    p.add_argument("config")
    p.add_argument("--x", required=True, help="text file with the slow state")
    p.set_defaults(func=_cmd_drift)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoughAvgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
