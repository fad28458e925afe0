"""Second-level combiners over a vector of expert predictions.

All combiners share a two-call round: ``predict(z)`` before the label is
known, then ``update(z, y)``. Label intervals are ``[lo, hi]``; constants
stated for ``[-Y, Y]`` carry over with ``Y = (hi - lo) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import InputError, InvariantError
from .vaw import VawState


@dataclass(frozen=True)
class TruncationPolicy:
    enabled: bool = False
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.enabled and not self.lo < self.hi:
            raise InputError(f"truncation needs lo < hi, got [{self.lo}, {self.hi}]")


def truncate(z, policy: TruncationPolicy) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if not policy.enabled:
        return z
    return np.clip(z, policy.lo, policy.hi)


def default_eta_ewa(lo: float, hi: float) -> float:
    """Largest rate for which the squared loss is exp-concave on ``[lo, hi]``."""
    if not lo < hi:
        raise InputError(f"need lo < hi, got [{lo}, {hi}]")
    return 1.0 / (2.0 * (hi - lo) ** 2)


def default_eta_aggregating(lo: float, hi: float) -> float:
    """Mixability constant of the squared loss on ``[lo, hi]`` (2 on [0, 1])."""
    if not lo < hi:
        raise InputError(f"need lo < hi, got [{lo}, {hi}]")
    return 2.0 / (hi - lo) ** 2


def ewa_meta_regret_bound(n: int, width: float) -> float:
    """``4 Y^2 ln n`` with ``Y = width / 2``: bound on the halved-loss regret of EWA."""
    if n < 1:
        raise InputError(f"need n >= 1, got {n}")
    half = width / 2.0
    return 4.0 * half * half * math.log(n)


class _ExponentialWeights:
    """Weights ``w_j`` proportional to ``exp(-eta * cumulative squared loss_j)``, kept as logs."""

    def __init__(self, n: int, eta: float):
        if n < 1:
            raise InputError(f"need at least one expert, got {n}")
        if not eta > 0:
            raise InputError(f"eta must be positive, got {eta}")
        self.n = int(n)
        self.eta = float(eta)
        self.log_weights = np.full(self.n, -math.log(self.n))

    @property
    def weights(self) -> np.ndarray:
        w = np.exp(self.log_weights - self.log_weights.max())
        return w / w.sum()

    @weights.setter
    def weights(self, value):
        value = np.asarray(value, dtype=np.float64)
        if value.shape != (self.n,) or np.any(value < 0) or not value.sum() > 0:
            raise InputError("weights must be a nonnegative, nonzero vector of length n")
        with np.errstate(divide="ignore"):
            self.log_weights = np.log(value / value.sum())

    def _check(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64).reshape(-1)
        if z.shape[0] != self.n:
            raise InputError(f"expected {self.n} expert predictions, got {z.shape[0]}")
        return z

    def update(self, z, y: float) -> None:
        z = self._check(z)
        logw = self.log_weights - self.eta * (z - y) ** 2
        logw -= logsumexp(logw)
        if np.isnan(logw).any() or not np.isfinite(logw).any():
            raise InvariantError("exponential weights degenerated")
        self.log_weights = logw

    def final_weights(self) -> np.ndarray:
        return self.weights


class EwaState(_ExponentialWeights):
    """Exponentially weighted average forecaster: predicts ``<w, z>``."""

    def __init__(self, n: int, eta: float | None = None, lo: float = 0.0, hi: float = 1.0):
        super().__init__(n, default_eta_ewa(lo, hi) if eta is None else eta)

    def predict(self, z) -> float:
        return float(self.weights @ self._check(z))


class AggregatingState(_ExponentialWeights):
    """Vovk's aggregating algorithm for the squared loss on ``[lo, hi]``.

    The prediction is the substitution point ``g`` that equalises the mixed
    losses at the two interval ends::

        g = (lo + hi) / 2 + ln(G(hi) / G(lo)) / (2 eta (hi - lo)),
        G(v) = sum_j w_j exp(-eta (v - z_j)^2)
    """

    def __init__(self, n: int, lo: float = 0.0, hi: float = 1.0, eta: float | None = None):
        super().__init__(n, default_eta_aggregating(lo, hi) if eta is None else eta)
        self.lo = float(lo)
        self.hi = float(hi)

    def predict(self, z) -> float:
        z = self._check(z)
        lo, hi = self.lo, self.hi
        if np.any(z < lo) or np.any(z > hi):
            raise InputError(f"aggregating forecaster needs predictions in [{lo}, {hi}]")
        log_g_hi = logsumexp(self.log_weights - self.eta * (hi - z) ** 2)
        log_g_lo = logsumexp(self.log_weights - self.eta * (lo - z) ** 2)
        g = 0.5 * (lo + hi) + (log_g_hi - log_g_lo) / (2.0 * self.eta * (hi - lo))
        return float(min(hi, max(lo, g)))


class VawMeta:
    """VAW run on the expert-prediction vector; weights are unconstrained."""

    def __init__(self, n: int, lam: float = 1.0):
        self.n = int(n)
        self.learner = VawState(n, lam)

    def predict(self, z) -> float:
        return self.learner.absorb_features(z)

    def update(self, z, y: float) -> None:
        self.learner.absorb_label(z, y)

    def final_weights(self) -> np.ndarray:
        return self.learner.weights
