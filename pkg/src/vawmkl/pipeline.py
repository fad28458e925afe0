"""Two-level multi-kernel learners and the streaming loop.

``MklModel`` runs one VAW expert per kernel on that kernel's random
features and combines the expert predictions with a meta-learner.
``ConcatVawModel`` instead runs a single VAW on the concatenation of all
kernels' features; it is quadratically more expensive in the number of
kernels and is meant for small dictionaries.

Within a round the order is fixed: experts see features and predict, the
prediction vector is (optionally) truncated, the meta predicts, and only
then is the label handed to the meta and to the experts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .data import Dataset, master_seed_split
from .errors import InputError
from .meta import AggregatingState, EwaState, TruncationPolicy, VawMeta, truncate
from .rff import FeatureBank, FeatureMap, FeatureVariant, KernelSpec, sample_feature_map
from .vaw import VawState


class MetaKind(str, enum.Enum):
    VAW = "vaw"
    EWA = "ewa"
    AGGREGATING = "aggregating"


def make_meta(kind, n: int, lam: float = 1.0, lo: float = 0.0, hi: float = 1.0, eta: float | None = None):
    kind = MetaKind(kind)
    if kind is MetaKind.VAW:
        return VawMeta(n, lam)
    if kind is MetaKind.EWA:
        return EwaState(n, eta=eta, lo=lo, hi=hi)
    return AggregatingState(n, lo=lo, hi=hi, eta=eta)


def sample_feature_maps(
    specs: Sequence[KernelSpec],
    m: int,
    d: int,
    variant=FeatureVariant.COS_SIN,
    seed: int = 0,
) -> list[FeatureMap]:
    """One map per kernel; kernel ``j`` draws from its own stream derived from ``(seed, j)``."""
    return [
        sample_feature_map(spec, m, d, variant, rng=master_seed_split(seed, "kernel", j))
        for j, spec in enumerate(specs)
    ]


@dataclass
class RoundRecord:
    t: int
    prediction: float
    label: float
    squared_loss: float
    expert_predictions: np.ndarray | None = None


class ExpertPool:
    """Per-kernel VAW experts over their own random features."""

    def __init__(self, feature_maps: Sequence[FeatureMap], lam: float = 1.0):
        if not feature_maps:
            raise InputError("need at least one feature map")
        self.feature_maps = list(feature_maps)
        self.experts = [VawState(fm.output_dim, lam) for fm in self.feature_maps]
        try:
            self._bank = FeatureBank(self.feature_maps)
        except InputError:
            self._bank = None

    def __len__(self):
        return len(self.experts)

    def featurize(self, x) -> list[np.ndarray]:
        if self._bank is not None:
            return list(self._bank(x))
        return [fm(x) for fm in self.feature_maps]

    def predict(self, phis: Sequence[np.ndarray]) -> np.ndarray:
        return np.array([e.absorb_features(p) for e, p in zip(self.experts, phis)])

    def update(self, phis: Sequence[np.ndarray], y: float) -> None:
        for e, p in zip(self.experts, phis):
            e.absorb_label(p, y)


class MklModel:
    """Experts + one meta-learner (VAW^2, VAW-EWA, VAW-Aggregating)."""

    def __init__(self, feature_maps: Sequence[FeatureMap], meta, lam: float = 1.0,
                 truncation: TruncationPolicy = TruncationPolicy()):
        self.pool = ExpertPool(feature_maps, lam)
        if meta.n != len(self.pool):
            raise InputError(f"meta expects {meta.n} experts, pool has {len(self.pool)}")
        self.meta = meta
        self.truncation = truncation
        self._t = 0

    @property
    def feature_maps(self) -> list[FeatureMap]:
        return self.pool.feature_maps

    @property
    def experts(self) -> list[VawState]:
        return self.pool.experts

    def round(self, x, y: float, record_experts: bool = False) -> RoundRecord:
        self._t += 1
        phis = self.pool.featurize(x)
        z = self.pool.predict(phis)
        z_in = truncate(z, self.truncation)
        pred = self.meta.predict(z_in)
        y = float(y)
        record = RoundRecord(self._t, pred, y, (pred - y) ** 2, z.copy() if record_experts else None)
        self.meta.update(z_in, y)
        self.pool.update(phis, y)
        return record

    def final_weights(self) -> np.ndarray:
        return self.meta.final_weights()


class ConcatVawModel:
    """A single VAW learner on the concatenated features of every kernel."""

    def __init__(self, feature_maps: Sequence[FeatureMap], lam: float = 1.0):
        if not feature_maps:
            raise InputError("need at least one feature map")
        self.feature_maps = list(feature_maps)
        self.learner = VawState(sum(fm.output_dim for fm in self.feature_maps), lam)
        try:
            self._bank = FeatureBank(self.feature_maps)
        except InputError:
            self._bank = None
        self._t = 0

    def featurize(self, x) -> np.ndarray:
        if self._bank is not None:
            return self._bank(x).reshape(-1)
        return np.concatenate([fm(x) for fm in self.feature_maps])

    def round(self, x, y: float, record_experts: bool = False) -> RoundRecord:
        self._t += 1
        y = float(y)
        pred = self.learner.step(self.featurize(x), y)
        return RoundRecord(self._t, pred, y, (pred - y) ** 2)


@dataclass
class Trajectory:
    algorithm: str
    run: int
    predictions: np.ndarray
    labels: np.ndarray
    expert_predictions: np.ndarray | None = None

    def __len__(self):
        return self.predictions.shape[0]

    @property
    def squared_losses(self) -> np.ndarray:
        return (self.predictions - self.labels) ** 2

    @property
    def cumulative_mse(self) -> np.ndarray:
        return np.cumsum(self.squared_losses) / np.arange(1, len(self) + 1)

    @property
    def final_mse(self) -> float:
        return float(self.cumulative_mse[-1])

    def records(self) -> Iterator[RoundRecord]:
        for i in range(len(self)):
            z = None if self.expert_predictions is None else self.expert_predictions[i]
            p, y = float(self.predictions[i]), float(self.labels[i])
            yield RoundRecord(i + 1, p, y, (p - y) ** 2, z)


def run_stream(model, dataset: Dataset, record_experts: bool = False,
               algorithm: str = "", run: int = 0) -> Trajectory:
    if len(dataset) == 0:
        raise InputError("dataset is empty")
    preds = np.empty(len(dataset))
    zs = []
    for i, (x, y) in enumerate(zip(dataset.features, dataset.labels)):
        rec = model.round(x, y, record_experts=record_experts)
        preds[i] = rec.prediction
        if record_experts and rec.expert_predictions is not None:
            zs.append(rec.expert_predictions)
    return Trajectory(algorithm, run, preds, dataset.labels.copy(), np.array(zs) if zs else None)


@dataclass(frozen=True)
class MetaSetup:
    """How to combine experts: meta kind, truncation, and meta hyperparameters."""

    kind: MetaKind
    truncate: bool = False
    lam: float = 1.0
    eta: float | None = None


def run_shared(
    feature_maps: Sequence[FeatureMap],
    setups: Mapping[str, MetaSetup],
    dataset: Dataset,
    lam: float = 1.0,
    interval: tuple[float, float] = (0.0, 1.0),
    run: int = 0,
) -> tuple[dict[str, Trajectory], dict[str, np.ndarray]]:
    """Run several meta-learners over one shared expert pool.

    Expert predictions do not depend on the meta, so this is equivalent to
    running one ``MklModel`` per setup with the same maps, at the cost of a
    single pool. Returns per-setup trajectories and final meta weights.
    """
    if len(dataset) == 0:
        raise InputError("dataset is empty")
    lo, hi = interval
    pool = ExpertPool(feature_maps, lam)
    metas = {name: make_meta(s.kind, len(pool), s.lam, lo, hi, s.eta) for name, s in setups.items()}
    policies = {name: TruncationPolicy(s.truncate, lo, hi) for name, s in setups.items()}
    preds = {name: np.empty(len(dataset)) for name in setups}
    for i, (x, y) in enumerate(zip(dataset.features, dataset.labels)):
        y = float(y)
        phis = pool.featurize(x)
        z = pool.predict(phis)
        for name, meta in metas.items():
            z_in = truncate(z, policies[name])
            preds[name][i] = meta.predict(z_in)
            meta.update(z_in, y)
        pool.update(phis, y)
    trajectories = {name: Trajectory(name, run, preds[name], dataset.labels.copy()) for name in setups}
    weights = {name: meta.final_weights() for name, meta in metas.items()}
    return trajectories, weights
