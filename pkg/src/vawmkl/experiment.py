"""Multi-run benchmark harness: config, execution, and CSV outputs.

Output layout under the output directory::

    results.csv                               one row per (dataset, algorithm)
    trajectories/<dataset>__<algorithm>__run<i>.csv
    weights/<dataset>__<algorithm>__run<i>.csv
    timing.json                               wall-clock only; not deterministic

Everything except ``timing.json`` is a deterministic function of the config.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .data import Ar4Config, Dataset, generate_ar4, load_csv, master_seed_split, normalize
from .errors import ConfigError, InputError
from .pipeline import MetaKind, MetaSetup, Trajectory, run_shared, sample_feature_maps
from .rff import DEFAULT_GRID, Family, FeatureVariant, GridAxis, KernelSpec, build_dictionary

log = logging.getLogger(__name__)

MSE_SCALE = 1e3


@dataclass(frozen=True)
class AlgorithmConfig:
    name: str
    meta: MetaKind
    truncate: bool = False


DEFAULT_ALGORITHMS = (
    AlgorithmConfig("vaw2", MetaKind.VAW, False),
    AlgorithmConfig("vaw2-trunc", MetaKind.VAW, True),
    AlgorithmConfig("vaw-aggr", MetaKind.AGGREGATING, True),
    AlgorithmConfig("vaw-ewa", MetaKind.EWA, True),
)


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    path: str | None = None
    label_column: int = -1
    ar4: Ar4Config | None = None
    #: pin the AR(4) series; by default every run draws its own
    ar4_fixed_seed: bool = False

    def __post_init__(self):
        if (self.path is None) == (self.ar4 is None):
            raise ConfigError(f"dataset {self.name!r}: give exactly one of 'path' or 'ar4'")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetConfig, ...]
    algorithms: tuple[AlgorithmConfig, ...] = DEFAULT_ALGORITHMS
    num_runs: int = 5
    master_seed: int = 0
    m: int = 50
    lam: float = 1.0
    lam_meta: float | None = None
    feature_variant: FeatureVariant = FeatureVariant.COS_SIN
    dictionary: tuple[GridAxis, ...] = DEFAULT_GRID
    interval: tuple[float, float] = (0.0, 1.0)
    workers: int = 1
    write_trajectories: bool = True
    write_weights: bool = True

    def __post_init__(self):
        if self.num_runs < 1:
            raise ConfigError("num_runs must be >= 1")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if not self.lam > 0 or (self.lam_meta is not None and not self.lam_meta > 0):
            raise ConfigError("lambda must be positive")
        if not self.interval[0] < self.interval[1]:
            raise ConfigError(f"interval must satisfy lo < hi, got {self.interval}")
        if not self.datasets:
            raise ConfigError("no datasets configured")
        if not self.algorithms:
            raise ConfigError("no algorithms configured")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ConfigError("algorithm names must be unique")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names must be unique")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def kernels(self) -> list[KernelSpec]:
        try:
            return build_dictionary(self.dictionary)
        except InputError as exc:
            raise ConfigError(str(exc)) from exc

    def setups(self) -> dict[str, MetaSetup]:
        lam_meta = self.lam if self.lam_meta is None else self.lam_meta
        return {a.name: MetaSetup(a.meta, a.truncate, lam_meta) for a in self.algorithms}


# -- config parsing ---------------------------------------------------------

_TOP_KEYS = {
    "datasets", "algorithms", "num_runs", "master_seed", "m", "lambda", "lambda_meta",
    "feature_variant", "dictionary", "interval", "workers", "write_trajectories", "write_weights",
}


def _parse_dataset(raw: dict, base: Path) -> DatasetConfig:
    if not isinstance(raw, dict) or "name" not in raw:
        raise ConfigError(f"dataset entries need a 'name': {raw!r}")
    unknown = set(raw) - {"name", "path", "label_column", "ar4"}
    if unknown:
        raise ConfigError(f"dataset {raw['name']!r}: unknown keys {sorted(unknown)}")
    ar4 = None
    fixed = False
    if "ar4" in raw:
        opts = raw["ar4"] or {}
        unknown = set(opts) - {"horizon", "seed", "lags", "noise_std", "coefficients"}
        if unknown:
            raise ConfigError(f"ar4 options: unknown keys {sorted(unknown)}")
        fixed = "seed" in opts
        if "coefficients" in opts:
            opts = {**opts, "coefficients": tuple(float(c) for c in opts["coefficients"])}
        try:
            ar4 = Ar4Config(**opts)
        except (InputError, TypeError) as exc:
            raise ConfigError(f"dataset {raw['name']!r}: {exc}") from exc
    path = raw.get("path")
    if path is not None:
        path = str((base / path) if not Path(path).is_absolute() else Path(path))
    return DatasetConfig(str(raw["name"]), path, int(raw.get("label_column", -1)), ar4, fixed)


def _parse_dictionary(raw) -> tuple[GridAxis, ...]:
    if raw in (None, "default"):
        return DEFAULT_GRID
    if not isinstance(raw, list):
        raise ConfigError("dictionary must be 'default' or a list of grid axes")
    axes = []
    for entry in raw:
        try:
            axes.append(GridAxis(Family(entry["family"]), int(entry["count"]), float(entry.get("start", -2.0)),
                                 int(entry.get("numerator", 1)), int(entry.get("denominator", 1))))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad dictionary axis {entry!r}: {exc}") from exc
    return tuple(axes)


def _parse_algorithms(raw) -> tuple[AlgorithmConfig, ...]:
    if raw is None:
        return DEFAULT_ALGORITHMS
    out = []
    for entry in raw:
        try:
            meta = MetaKind(entry["meta"])
            trunc = bool(entry.get("truncate", False))
            name = entry.get("name") or f"{meta.value}{'-trunc' if trunc else ''}"
            out.append(AlgorithmConfig(str(name), meta, trunc))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad algorithm entry {entry!r}: {exc}") from exc
    return tuple(out)


def config_from_dict(raw: dict, base_dir: Path | str = ".") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = Path(base_dir)
    try:
        kwargs: dict[str, Any] = {
            "datasets": tuple(_parse_dataset(d, base) for d in raw.get("datasets") or ()),
            "algorithms": _parse_algorithms(raw.get("algorithms")),
            "dictionary": _parse_dictionary(raw.get("dictionary")),
        }
        for key, attr, cast in [
            ("num_runs", "num_runs", int), ("master_seed", "master_seed", int), ("m", "m", int),
            ("lambda", "lam", float), ("workers", "workers", int),
            ("write_trajectories", "write_trajectories", bool), ("write_weights", "write_weights", bool),
        ]:
            if key in raw:
                kwargs[attr] = cast(raw[key])
        if raw.get("lambda_meta") is not None:
            kwargs["lam_meta"] = float(raw["lambda_meta"])
        if "feature_variant" in raw:
            kwargs["feature_variant"] = FeatureVariant(raw["feature_variant"])
        if "interval" in raw:
            lo, hi = raw["interval"]
            kwargs["interval"] = (float(lo), float(hi))
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return config_from_dict(raw, path.parent)


# -- outputs ----------------------------------------------------------------

def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_trajectory(trajectory: Trajectory, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "algorithm", "run", "cumulative_mse"])
    for t, value in enumerate(trajectory.cumulative_mse, start=1):
        writer.writerow([t, trajectory.algorithm, trajectory.run, _fmt(value)])
    atomic_write_text(path, buf.getvalue())


def read_trajectory(path) -> list[tuple[int, str, int, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "algorithm", "run", "cumulative_mse"]:
            raise InputError(f"{path}: unexpected header {header}")
        return [(int(t), alg, int(run), float(v)) for t, alg, run, v in reader]


def emit_weights(specs: Sequence[KernelSpec], weights, path) -> None:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(specs),):
        raise InputError(f"need one weight per kernel: {len(specs)} kernels, {weights.shape} weights")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kernel_index", "family", "bandwidth", "weight"])
    for j, (spec, w) in enumerate(zip(specs, weights)):
        writer.writerow([j, spec.family.value, _fmt(spec.bandwidth), _fmt(w)])
    atomic_write_text(path, buf.getvalue())


def read_weights(path) -> list[tuple[int, str, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [(int(j), fam, float(bw), float(w)) for j, fam, bw, w in reader]


@dataclass
class ResultTable:
    """Final cumulative MSE per (dataset, algorithm), one value per run."""

    runs: dict[tuple[str, str], list[float]] = field(default_factory=dict)

    def add(self, dataset: str, algorithm: str, run: int, final_mse: float) -> None:
        values = self.runs.setdefault((dataset, algorithm), [])
        while len(values) <= run:
            values.append(math.nan)
        values[run] = final_mse

    def mean(self, dataset: str, algorithm: str, scaled: bool = True) -> float:
        v = float(np.mean(self.runs[(dataset, algorithm)]))
        return v * MSE_SCALE if scaled else v

    def std(self, dataset: str, algorithm: str, scaled: bool = True) -> float:
        vals = self.runs[(dataset, algorithm)]
        v = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        return v * MSE_SCALE if scaled else v

    def to_csv(self) -> str:
        n_runs = max((len(v) for v in self.runs.values()), default=0)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dataset", "algorithm", "mean_mse_x1e3", "std_mse_x1e3"]
                        + [f"run{i}_mse_x1e3" for i in range(n_runs)])
        for (ds, alg), vals in self.runs.items():
            writer.writerow([ds, alg, _fmt(self.mean(ds, alg)), _fmt(self.std(ds, alg))]
                            + [_fmt(v * MSE_SCALE) for v in vals])
        return buf.getvalue()

    def format(self) -> str:
        datasets = list(dict.fromkeys(ds for ds, _ in self.runs))
        algorithms = list(dict.fromkeys(alg for _, alg in self.runs))
        width = max(12, *(len(a) for a in algorithms))
        lines = [" " * width + "".join(f"{d:>12}" for d in datasets)]
        for alg in algorithms:
            cells = [f"{self.mean(d, alg):12.2f}" if (d, alg) in self.runs else " " * 12 for d in datasets]
            lines.append(f"{alg:<{width}}" + "".join(cells))
        return "\n".join(lines)


# -- execution --------------------------------------------------------------

def dataset_for_run(cfg: DatasetConfig, master_seed: int, run: int) -> Dataset:
    """Normalized data stream for one run; AR(4) series are redrawn per run unless pinned."""
    if cfg.ar4 is not None:
        ar4 = cfg.ar4
        if not cfg.ar4_fixed_seed:
            ar4 = replace(ar4, seed=master_seed_split(master_seed, "ar4", run))
        ds = generate_ar4(ar4)
    else:
        ds = load_csv(cfg.path, cfg.label_column)
    return normalize(replace(ds, name=cfg.name))


@dataclass
class CellResult:
    dataset: str
    run: int
    trajectories: dict[str, Trajectory]
    weights: dict[str, np.ndarray]
    seconds: float
    rounds: int


def run_cell(config: ExperimentConfig, dataset_index: int, run: int) -> CellResult:
    """All algorithms for one (dataset, run): fresh maps from the run seed, one shared expert pool."""
    dcfg = config.datasets[dataset_index]
    ds = dataset_for_run(dcfg, config.master_seed, run)
    start = time.perf_counter()
    run_seed = master_seed_split(config.master_seed, "run", run)
    maps = sample_feature_maps(config.kernels(), config.m, ds.dim, config.feature_variant, run_seed)
    trajectories, weights = run_shared(
        maps, config.setups(), ds, lam=config.lam, interval=config.interval, run=run
    )
    return CellResult(dcfg.name, run, trajectories, weights, time.perf_counter() - start, len(ds))


def _run_cell_safe(args):
    config, di, run = args
    try:
        return run_cell(config, di, run)
    except InputError as exc:
        return exc


@dataclass
class ExperimentResult:
    table: ResultTable
    errors: dict[str, str]
    timing: dict[str, Any]


def run_experiment(config: ExperimentConfig, output_dir) -> ExperimentResult:
    """Run every (dataset, run) cell, write outputs, and return the table.

    A dataset that fails to load is reported in ``errors``; the others still run.
    """
    output_dir = Path(output_dir)
    specs = config.kernels()
    cells = [(config, di, run) for di in range(len(config.datasets)) for run in range(config.num_runs)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_cell_safe, cells))
    else:
        results = [_run_cell_safe(c) for c in cells]

    table = ResultTable()
    errors: dict[str, str] = {}
    timing: dict[str, Any] = {"cells": []}
    for (_, di, run), res in zip(cells, results):
        name = config.datasets[di].name
        if isinstance(res, Exception):
            if name not in errors:
                errors[name] = str(res)
                log.error("dataset %s: %s", name, res)
            continue
        for alg in config.algorithms:
            traj = res.trajectories[alg.name]
            table.add(name, alg.name, run, traj.final_mse)
            stem = f"{name}__{alg.name}__run{run}.csv"
            if config.write_trajectories:
                emit_trajectory(traj, output_dir / "trajectories" / stem)
            if config.write_weights:
                emit_weights(specs, res.weights[alg.name], output_dir / "weights" / stem)
        timing["cells"].append({
            "dataset": name, "run": run, "seconds": res.seconds, "rounds": res.rounds,
            "seconds_per_round": res.seconds / res.rounds,
        })
        log.info("dataset %s run %d: %.1fs", name, run, res.seconds)
    # rows in config order, independent of completion order
    ordered = ResultTable()
    for d in config.datasets:
        for a in config.algorithms:
            if (d.name, a.name) in table.runs:
                ordered.runs[(d.name, a.name)] = table.runs[(d.name, a.name)]
    atomic_write_text(output_dir / "results.csv", ordered.to_csv())
    atomic_write_text(output_dir / "timing.json", json.dumps(timing, indent=2))
    errors_path = output_dir / "errors.json"
    if errors:
        atomic_write_text(errors_path, json.dumps(errors, indent=2, sort_keys=True))
    elif errors_path.exists():
        errors_path.unlink()
    return ExperimentResult(ordered, errors, timing)


def override(config: ExperimentConfig, **changes) -> ExperimentConfig:
    """Return ``config`` with the non-None ``changes`` applied."""
    valid = {f.name for f in fields(ExperimentConfig)}
    changes = {k: v for k, v in changes.items() if v is not None}
    bad = set(changes) - valid
    if bad:
        raise ConfigError(f"unknown overrides: {sorted(bad)}")
    return replace(config, **changes)
