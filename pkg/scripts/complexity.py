"""Per-round cost of the two-level model and the concatenated model as N grows.

    python scripts/complexity.py [--m 50] [--sizes 4 8 16 32]
"""

import argparse
import time

import numpy as np

from vawmkl.meta import VawMeta
from vawmkl.pipeline import ConcatVawModel, MklModel, sample_feature_maps
from vawmkl.rff import build_dictionary


def per_round(make, n, m, rounds=50, reps=5, d=4):
    maps = sample_feature_maps(build_dictionary()[:n], m, d, seed=0)
    rng = np.random.default_rng(0)
    xs = rng.uniform(-1, 1, size=(rounds * (reps + 1), d))
    ys = rng.uniform(size=len(xs))
    model = make(maps, n)
    times = []
    for r in range(reps + 1):
        start = time.perf_counter()
        for i in range(r * rounds, (r + 1) * rounds):
            model.round(xs[i], ys[i])
        times.append((time.perf_counter() - start) / rounds)
    return float(np.median(times[1:]))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=50)
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32])
    args = ap.parse_args(argv)
    models = {
        "two-level": lambda maps, n: MklModel(maps, VawMeta(n)),
        "concat": lambda maps, n: ConcatVawModel(maps),
    }
    print(f"{'N':>4} " + " ".join(f"{k:>14}" for k in models) + "   (ms per round)")
    prev = None
    for n in args.sizes:
        row = {k: per_round(f, n, args.m) for k, f in models.items()}
        ratios = "" if prev is None else "   ratios " + " ".join(f"{row[k] / prev[k]:.2f}" for k in models)
        print(f"{n:>4} " + " ".join(f"{1e3 * v:14.3f}" for v in row.values()) + ratios)
        prev = row


if __name__ == "__main__":
    main()
