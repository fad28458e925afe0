"""Convert raw UCI downloads into the numeric CSV layout read by ``vawmkl run``.

Usage:
    python scripts/prepare_uci.py airfoil airfoil_self_noise.dat --out data/airfoil.csv
    python scripts/prepare_uci.py concrete Concrete_Data.csv --out data/concrete.csv
    python scripts/prepare_uci.py naval data.txt --out data/naval.csv
    python scripts/prepare_uci.py bias Bias_correction_ucl.csv --out data/bias.csv

Every output has one header line and the label in the last column.
The concrete data ships as a spreadsheet; export it to CSV first.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

EXPECTED = {"airfoil": (1503, 5), "concrete": (1030, 8), "naval": (11934, 15), "bias": (7750, 21)}


def _whitespace_table(path):
    return np.loadtxt(path, dtype=np.float64)


def _csv_rows(path):
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        return header, [row for row in reader if any(c.strip() for c in row)]


def airfoil(path):
    t = _whitespace_table(path)
    return t[:, :-1], t[:, -1]


def concrete(path):
    if Path(path).suffix.lower() in (".xls", ".xlsx"):
        sys.exit("concrete: export the spreadsheet to CSV first")
    _, rows = _csv_rows(path)
    t = np.array([[float(c) for c in row] for row in rows])
    return t[:, :-1], t[:, -1]


def naval(path):
    t = _whitespace_table(path)
    y = t[:, 0]  # lever position
    x = t[:, 1:]
    keep = x.max(axis=0) > x.min(axis=0)
    return x[:, keep], y


def bias(path):
    header, rows = _csv_rows(path)
    drop = {"station", "Date", "Next_Tmax", "Next_Tmin"}
    cols = [i for i, h in enumerate(header) if h not in drop]
    label = header.index("Next_Tmin")

    def num(cell):
        cell = cell.strip()
        return float(cell) if cell else np.nan

    t = np.array([[num(row[i]) for i in cols + [label]] for row in rows])
    t = t[~np.isnan(t[:, -1])]
    # remaining gaps are feature readings; fill with the column mean
    x = t[:, :-1]
    gaps = np.isnan(x)
    if gaps.any():
        x[gaps] = np.take(np.nanmean(x, axis=0), np.nonzero(gaps)[1])
    return x, t[:, -1]


READERS = {"airfoil": airfoil, "concrete": concrete, "naval": naval, "bias": bias}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dataset", choices=sorted(READERS))
    ap.add_argument("raw", type=Path)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args(argv)
    x, y = READERS[args.dataset](args.raw)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join([f"x{i}" for i in range(x.shape[1])] + ["y"])
    np.savetxt(args.out, np.column_stack([x, y]), delimiter=",", fmt="%.17g", header=header, comments="")
    shape = x.shape
    note = "" if shape == EXPECTED[args.dataset] else f" (expected {EXPECTED[args.dataset]})"
    print(f"{args.dataset}: wrote {shape[0]} rows x {shape[1]} features to {args.out}{note}")


if __name__ == "__main__":
    main()
