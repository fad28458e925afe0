"""Datasets: CSV loading, offline normalization, the AR(4) stream, seed derivation."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.float64).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise InputError(f"features {x.shape} and labels {y.shape} do not line up")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def _parse_row(cells: list[str]) -> list[float] | None:
    try:
        return [float(c) for c in cells]
    except ValueError:
        return None


def load_csv(path, label_column: int = -1, name: str | None = None) -> Dataset:
    """Read a comma-separated numeric table; one optional header line is skipped.

    Errors name 1-based line numbers and columns.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: no such file")
    rows: list[list[float]] = []
    width = None
    with path.open(newline="") as fh:
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in cells]
            if not cells or cells == [""]:
                continue
            values = _parse_row(cells)
            if values is None:
                if lineno == 1:
                    continue  # header
                for col, cell in enumerate(cells, start=1):
                    if _parse_row([cell]) is None:
                        raise InputError(f"{path}: line {lineno}, column {col}: not a number: {cell!r}")
            if width is None:
                width = len(values)
                if width < 2:
                    raise InputError(f"{path}: need at least 2 columns, line {lineno} has {width}")
            elif len(values) != width:
                raise InputError(f"{path}: line {lineno} has {len(values)} columns, expected {width}")
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    table = np.asarray(rows)
    label_column = label_column % width
    labels = table[:, label_column]
    features = np.delete(table, label_column, axis=1)
    return Dataset(name or path.stem, features, labels)


def normalize(dataset: Dataset) -> Dataset:
    """Min-max scale labels to [0, 1] and divide every row by the largest row norm.

    Statistics come from the whole dataset, before any streaming. A dataset
    already marked normalized is returned unchanged.
    """
    if dataset.normalized:
        return dataset
    if len(dataset) < 1:
        raise InputError("cannot normalize an empty dataset")
    y = dataset.labels
    y_min, y_max = y.min(), y.max()
    if y_max > y_min:
        labels = (y - y_min) / (y_max - y_min)
    else:
        labels = np.zeros_like(y)
    x = dataset.features
    max_norm = np.sqrt((x * x).sum(axis=1)).max() if x.shape[1] else 0.0
    features = x / max_norm if max_norm > 0 else x
    return replace(dataset, features=features, labels=labels, normalized=True)


@dataclass(frozen=True)
class Ar4Config:
    """``x_t = c0 x_{t-4} + c1 x_{t-3} + c2 x_{t-2} + c3 x_{t-1} + noise``, zero start.

    ``lags`` is the number of most recent values used as features; 1 means
    the feature is ``x_t`` alone.
    """

    coefficients: tuple[float, float, float, float] = (0.5, -0.3, 0.2, 0.1)
    noise_std: float = 1.0
    horizon: int = 5000
    seed: int = 0
    lags: int = 1

    def __post_init__(self):
        if len(self.coefficients) != 4:
            raise InputError("AR(4) needs exactly 4 coefficients")
        if self.horizon < 5:
            raise InputError(f"horizon must be >= 5, got {self.horizon}")
        if self.noise_std < 0:
            raise InputError("noise_std must be nonnegative")
        if not 1 <= self.lags <= 4:
            raise InputError(f"lags must be in 1..4, got {self.lags}")


def ar4_series(config: Ar4Config) -> np.ndarray:
    """``x_{-3}, ..., x_{T+1}`` as one array (first four entries are the zero start)."""
    c0, c1, c2, c3 = config.coefficients
    eps = np.random.default_rng(config.seed).standard_normal(config.horizon + 1) * config.noise_std
    x = np.zeros(config.horizon + 5)
    for t in range(4, x.shape[0]):
        x[t] = c0 * x[t - 4] + c1 * x[t - 3] + c2 * x[t - 2] + c3 * x[t - 1] + eps[t - 4]
    return x


def generate_ar4(config: Ar4Config = Ar4Config()) -> Dataset:
    """Sample ``t = 1..T`` has features ``(x_{t-lags+1}, ..., x_t)`` and label ``x_{t+1}``.

    The result is not normalized.
    """
    x = ar4_series(config)
    horizon, lags = config.horizon, config.lags
    # x[k + 3] holds x_k
    windows = np.lib.stride_tricks.sliding_window_view(x[4 - lags + 1 : horizon + 4], lags)
    labels = x[5 : horizon + 5]
    return Dataset("ar4", windows.copy(), labels.copy())


def master_seed_split(master: int, purpose: str, index: int) -> int:
    """Derive a 63-bit sub-seed from ``(master, purpose, index)``."""
    digest = hashlib.blake2b(f"{int(master)}\x1f{purpose}\x1f{int(index)}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1
