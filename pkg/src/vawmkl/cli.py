"""Command-line entry point.

    vawmkl run CONFIG [overrides]     run a benchmark, write CSVs to the output dir
    vawmkl ar4 --out PATH             write an AR(4) stream as CSV
    vawmkl dictionary --print         list the kernel dictionary

Exit codes: 0 ok, 1 config error, 2 data error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .data import Ar4Config, generate_ar4, normalize
from .errors import ConfigError, InputError, InvariantError, ProtocolError
from .experiment import atomic_write_text, load_config, override, run_experiment
from .rff import FeatureVariant, build_dictionary

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
OUTPUT_ENV = "VAWMKL_OUTPUT_DIR"

log = logging.getLogger("vawmkl")


def _cmd_run(args) -> int:
    config = load_config(args.config)
    config = override(
        config,
        num_runs=args.num_runs,
        master_seed=args.master_seed,
        m=args.m,
        lam=args.lam,
        lam_meta=args.lam_meta,
        feature_variant=FeatureVariant(args.feature_variant) if args.feature_variant else None,
        interval=tuple(args.interval) if args.interval else None,
        workers=args.workers,
    )
    out = args.output_dir or os.environ.get(OUTPUT_ENV) or "results"
    result = run_experiment(config, out)
    print(result.table.format())
    print(f"\nMSE x 1e3, mean over {config.num_runs} runs; outputs in {out}")
    for name, msg in result.errors.items():
        print(f"error: dataset {name}: {msg}", file=sys.stderr)
    return EXIT_DATA if result.errors else EXIT_OK


def _cmd_ar4(args) -> int:
    ds = generate_ar4(Ar4Config(horizon=args.horizon, seed=args.seed, lags=args.lags))
    if args.normalize:
        ds = normalize(ds)
    buf = io.StringIO()
    header = [f"x{i}" for i in range(ds.dim)] + ["y"]
    buf.write(",".join(header) + "\n")
    np.savetxt(buf, np.column_stack([ds.features, ds.labels]), delimiter=",", fmt="%.17g")
    atomic_write_text(args.out, buf.getvalue())
    print(f"wrote {len(ds)} rows to {args.out}")
    return EXIT_OK


def _cmd_dictionary(args) -> int:
    for j, spec in enumerate(build_dictionary()):
        param = "sigma^2" if spec.family.value == "gaussian" else "sigma"
        print(f"{j:3d}  {spec.family.value:<9}  {param}={spec.bandwidth!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="vawmkl", description="Online multi-kernel regression benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a benchmark config")
    run.add_argument("config", type=Path)
    run.add_argument("--output-dir", type=Path, help=f"default: ${OUTPUT_ENV} or ./results")
    run.add_argument("--num-runs", type=int)
    run.add_argument("--master-seed", type=int)
    run.add_argument("--m", type=int, help="random frequencies per kernel")
    run.add_argument("--lambda", dest="lam", type=float)
    run.add_argument("--lambda-meta", dest="lam_meta", type=float)
    run.add_argument("--feature-variant", choices=[v.value for v in FeatureVariant])
    run.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"))
    run.add_argument("--workers", type=int)
    run.set_defaults(func=_cmd_run)

    ar4 = sub.add_parser("ar4", parents=[common], help="generate an AR(4) stream")
    ar4.add_argument("--horizon", type=int, default=5000)
    ar4.add_argument("--seed", type=int, default=0)
    ar4.add_argument("--lags", type=int, default=1)
    ar4.add_argument("--normalize", action="store_true")
    ar4.add_argument("--out", type=Path, required=True)
    ar4.set_defaults(func=_cmd_ar4)

    dic = sub.add_parser("dictionary", parents=[common], help="show the kernel dictionary")
    dic.add_argument("--print", action="store_true", default=True)
    dic.set_defaults(func=_cmd_dictionary)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvariantError, ProtocolError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
