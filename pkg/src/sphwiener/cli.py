"""Command-line interface.

Verbs: ``denoise`` (single run with map artifacts), ``sweep`` (output-SNR
table), ``bank-info`` (tiling values and admissibility deviation),
``validate`` (invariant battery), ``import-grid`` (map CSV to coefficient
CSV). Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bank import build_bank, check_admissibility
from .errors import ConfigError, SphWienerError
from .harness import (
    ExperimentConfig,
    load_config,
    run_fig1,
    run_fig2,
    run_validation,
)
from .harmonic import forward_sht
from .io import read_map_csv, write_coeffs_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphwiener",
        description="Minimum-MSE wavelet-domain denoising of bandlimited spherical signals",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("denoise", help="single denoising run with map artifacts")
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--snr-in-db", type=float, default=None, help="override input SNR")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--out", default=None, help="override output directory")

    p = sub.add_parser("sweep", help="output SNR vs input SNR sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bank-info", help="print tiling values and admissibility")
    p.add_argument("--config", default=None)
    p.add_argument("--bandlimit", type=int, default=64)
    p.add_argument("--dilation", type=float, default=2.0)
    p.add_argument("--min-scale", type=int, default=0)

    sub.add_parser("validate", help="run the invariant battery")

    p = sub.add_parser("import-grid", help="forward-transform a map CSV to coefficients")
    p.add_argument("--input", required=True, help="map CSV (theta,phi,re,im)")
    p.add_argument("--output", required=True, help="coefficient CSV to write")
    p.add_argument("--bandlimit", type=int, default=None, help="default: ring count")

    return parser


def _cmd_denoise(args) -> int:
    config = load_config(args.config)
    updates = {}
    if args.snr_in_db is not None:
        updates["snr_in_db"] = [args.snr_in_db]
    elif len(config.snr_in_db) > 1:
        updates["snr_in_db"] = config.snr_in_db[:1]
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = args.out
    if updates:
        from dataclasses import replace

        config = replace(config, **updates)
    result = run_fig1(config)
    print(
        f"snr_in={result['snr_in_realized_db']:.3f} dB  "
        f"snr_out={result['snr_out_db']:.3f} dB  "
        f"gain={result['gain_db']:.3f} dB"
    )
    print(f"artifacts in {config.out_dir}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.out is not None:
        from dataclasses import replace

        config = replace(config, out_dir=args.out)
    rows = run_fig2(config)
    for target, method, param, mean, std in rows:
        print(f"snr_in={target:+7.3f}  {method:<9s} {param:>8s}  "
              f"snr_out={mean:+8.3f} dB (std {std:.3f})")
    print(f"table written to {config.out_dir}/sweep.csv")
    return 0


def _cmd_bank_info(args) -> int:
    if args.config:
        config = load_config(args.config)
        L, lam, j1 = config.bandlimit, config.dilation, config.min_scale
    else:
        L, lam, j1 = args.bandlimit, args.dilation, args.min_scale
    bank = build_bank(L, lam, j1)
    print(f"bandlimit L = {L}, dilation = {lam:g}, scales j = {bank.j1}..{bank.j2}")
    print(f"admissibility deviation = {check_admissibility(bank):.3e}")
    header = "   l   eta " + " ".join(f"kappa_{j}" for j in bank.scales)
    print(header)
    for l in range(L):
        cells = " ".join(f"{bank.kappa[j - bank.j1, l]:7.4f}" for j in bank.scales)
        print(f"{l:4d} {bank.eta[l]:5.3f} {cells}")
    return 0


def _cmd_validate(_args) -> int:
    return 0 if run_validation(verbose=True) else 3


def _cmd_import_grid(args) -> int:
    smap = read_map_csv(args.input)
    L = args.bandlimit if args.bandlimit is not None else smap.grid.n_theta
    coeffs = forward_sht(smap, L)
    write_coeffs_csv(coeffs, args.output)
    print(f"wrote {L * L} coefficients (L={L}) to {args.output}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "denoise": _cmd_denoise,
        "sweep": _cmd_sweep,
        "bank-info": _cmd_bank_info,
        "validate": _cmd_validate,
        "import-grid": _cmd_import_grid,
    }
    try:
        return handlers[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except (SphWienerError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
