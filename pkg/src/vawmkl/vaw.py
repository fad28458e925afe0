"""Vovk-Azoury-Warmuth online ridge forecaster.

At round t the learner sees ``phi_t`` first and predicts with

    w_t = S_t^{-1} b_{t-1},   S_t = lam I + sum_{i<=t} phi_i phi_i^T,
    b_{t-1} = sum_{i<t} y_i phi_i,

i.e. the current features already enter the regularizer. ``S_t^{-1}`` is
kept up to date with rank-one Sherman-Morrison steps, so a round costs
O(dim^2).
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy.linalg.blas import dger

from .errors import InputError, InvariantError, ProtocolError

SYMMETRIZE_EVERY = 64


class Phase(str, enum.Enum):
    AWAITING_FEATURES = "awaiting_features"
    AWAITING_LABEL = "awaiting_label"


class VawState:
    """Online state of one VAW learner over ``dim``-dimensional features."""

    def __init__(self, dim: int, lam: float = 1.0):
        dim = int(dim)
        lam = float(lam)
        if dim < 1:
            raise InputError(f"dim must be >= 1, got {dim}")
        if not lam > 0:
            raise InputError(f"lambda must be positive, got {lam}")
        self.dim = dim
        self.lam = lam
        # Fortran order so dger can update in place
        self.inv_matrix = np.asfortranarray(np.eye(dim) / lam)
        self.accumulator = np.zeros(dim)
        self.rounds_seen = 0
        self.phase = Phase.AWAITING_FEATURES
        self._updates = 0
        self._pending: np.ndarray | None = None

    def _check_phi(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=np.float64).reshape(-1)
        if phi.shape[0] != self.dim:
            raise InputError(f"expected {self.dim} features, got {phi.shape[0]}")
        return phi

    def absorb_features(self, phi) -> float:
        """Fold ``phi`` into ``S^{-1}`` and return the prediction for its label."""
        if self.phase is not Phase.AWAITING_FEATURES:
            raise ProtocolError("absorb_features called while a label is pending")
        phi = self._check_phi(phi)
        p_phi = self.inv_matrix @ phi
        denom = 1.0 + phi @ p_phi
        if not denom >= 1.0 - 1e-12:
            raise InvariantError(f"Sherman-Morrison denominator {denom} < 1; inverse is corrupted")
        self.inv_matrix = dger(-1.0 / denom, p_phi, p_phi, a=self.inv_matrix, overwrite_a=True)
        self._updates += 1
        if self._updates % SYMMETRIZE_EVERY == 0:
            self.inv_matrix = np.asfortranarray(0.5 * (self.inv_matrix + self.inv_matrix.T))
        self._pending = phi.copy()
        self.phase = Phase.AWAITING_LABEL
        # S_t^{-1} phi = S_{t-1}^{-1} phi / denom
        return float(p_phi @ self.accumulator) / denom

    def absorb_label(self, phi, y: float) -> None:
        if self.phase is not Phase.AWAITING_LABEL:
            raise ProtocolError("absorb_label called before absorb_features")
        phi = self._check_phi(phi)
        if not np.array_equal(phi, self._pending):
            raise ProtocolError("label must be absorbed with the features just predicted on")
        self.accumulator += float(y) * phi
        self.rounds_seen += 1
        self._pending = None
        self.phase = Phase.AWAITING_FEATURES

    def step(self, phi, y: float) -> float:
        """One full round; returns the prediction made before ``y`` was seen."""
        pred = self.absorb_features(phi)
        self.absorb_label(phi, y)
        return pred

    @property
    def weights(self) -> np.ndarray:
        """Current linear coefficients ``S^{-1} b``."""
        return self.inv_matrix @ self.accumulator

    def to_dict(self) -> dict:
        if self.phase is not Phase.AWAITING_FEATURES:
            raise ProtocolError("snapshot only between rounds")
        return {
            "dim": self.dim,
            "lambda": self.lam,
            "inv_matrix": self.inv_matrix.tolist(),
            "accumulator": self.accumulator.tolist(),
            "rounds_seen": self.rounds_seen,
            "updates": self._updates,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VawState":
        state = cls(data["dim"], data["lambda"])
        inv = np.asarray(data["inv_matrix"], dtype=np.float64)
        acc = np.asarray(data["accumulator"], dtype=np.float64)
        if inv.shape != (state.dim, state.dim) or acc.shape != (state.dim,):
            raise InputError("snapshot arrays do not match its dimension")
        state.inv_matrix = np.asfortranarray(inv)
        state.accumulator = acc
        state.rounds_seen = int(data["rounds_seen"])
        state._updates = int(data.get("updates", state.rounds_seen))
        return state


def vaw_regret_bound(
    lam: float,
    dim: int,
    label_bound: float,
    feature_norm_bound: float,
    horizon: int,
    comparator_norm: float,
) -> float:
    """Upper bound on ``1/2 sum (pred - y)^2 - 1/2 sum (<phi, w> - y)^2``.

    Holds for every comparator with ``||w|| = comparator_norm`` whenever
    ``|y_t| <= label_bound`` and ``||phi_t|| <= feature_norm_bound``.
    """
    rho2 = feature_norm_bound ** 2
    return 0.5 * lam * comparator_norm ** 2 + 0.5 * dim * label_bound ** 2 * math.log1p(
        rho2 * horizon / (lam * dim)
    )

