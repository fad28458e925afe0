"""Run the full benchmark and print the MSE x 1e3 table.

    python scripts/run_table2.py [--config configs/table2.yaml] [--output-dir results/table2]

Datasets missing from data/ are reported and skipped; the rest still run.
"""

import argparse
import logging
import sys
from pathlib import Path

from vawmkl.experiment import load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "table2.yaml")
    ap.add_argument("--output-dir", type=Path, default=ROOT / "results" / "table2")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    config = load_config(args.config)
    result = run_experiment(config, args.output_dir)
    print(result.table.format())
    for name in config.datasets:
        if name.name in result.errors:
            print(f"skipped {name.name}: {result.errors[name.name]}", file=sys.stderr)
    total = sum(c["seconds"] for c in result.timing["cells"])
    print(f"\n{config.num_runs} runs, {total:.0f}s of compute; outputs in {args.output_dir}")
    return 1 if result.errors else 0


if __name__ == "__main__":
    sys.exit(main())
