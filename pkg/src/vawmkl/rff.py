"""Translation-invariant kernels and their random Fourier feature maps.

Two kernel families are supported, each identified by a single bandwidth:

* Gaussian, ``k(x, y) = exp(-||x - y||_2^2 / (2 s))`` where ``s = sigma^2``.
  Frequencies are drawn from ``N(0, I / s)``.
* Laplacian, ``k(x, y) = exp(-||x - y||_1 / sigma)``. Each frequency
  coordinate is Cauchy with scale ``1 / sigma``.

A :class:`FeatureMap` turns an input ``x`` into a vector ``phi(x)`` with
``<phi(x), phi(y)> / m ~= k(x, y)`` where ``m`` is the number of sampled
frequencies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError

TWO_PI = 2.0 * np.pi


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"


class FeatureVariant(str, enum.Enum):
    #: m features sqrt(2) cos(<w_k, x> + b_k)
    PHASE_SHIFT = "phaseshift"
    #: 2m features, interleaved (cos <w_k, x>, sin <w_k, x>)
    COS_SIN = "cossin"


@dataclass(frozen=True)
class KernelSpec:
    """One dictionary entry.

    ``bandwidth`` is sigma^2 for the Gaussian family and sigma for the
    Laplacian family.
    """

    family: Family
    bandwidth: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        if not self.bandwidth > 0:
            raise InputError(f"bandwidth must be positive, got {self.bandwidth}")

    def __call__(self, x, y) -> float:
        return eval_kernel(self, x, y)


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return x, y


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Exact kernel value ``k(x, y)``, in (0, 1]."""
    x, y = _pair(x, y)
    diff = x - y
    if spec.family is Family.GAUSSIAN:
        return float(np.exp(-(diff @ diff) / (2.0 * spec.bandwidth)))
    return float(np.exp(-np.abs(diff).sum() / spec.bandwidth))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_frequencies(spec: KernelSpec, m: int, d: int, rng) -> np.ndarray:
    """Draw an ``(m, d)`` matrix of i.i.d. frequencies from the spectral density."""
    rng = _as_generator(rng)
    if spec.family is Family.GAUSSIAN:
        return rng.standard_normal((m, d)) / np.sqrt(spec.bandwidth)
    # inverse-CDF Cauchy; extreme draws are kept as is
    u = rng.random((m, d))
    return np.tan(np.pi * (u - 0.5)) / spec.bandwidth


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Sampled random Fourier features for one kernel. Immutable."""

    spec: KernelSpec
    variant: FeatureVariant
    frequencies: np.ndarray
    phases: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "variant", FeatureVariant(self.variant))
        freqs = np.array(self.frequencies, dtype=np.float64, copy=True)
        if freqs.ndim != 2 or freqs.shape[0] < 1 or freqs.shape[1] < 1:
            raise InputError(f"frequencies must be a nonempty (m, d) matrix, got {freqs.shape}")
        freqs.flags.writeable = False
        object.__setattr__(self, "frequencies", freqs)
        if self.variant is FeatureVariant.PHASE_SHIFT:
            if self.phases is None:
                raise InputError("phase-shift features need phases")
            phases = np.array(self.phases, dtype=np.float64, copy=True).reshape(-1)
            if phases.shape[0] != freqs.shape[0]:
                raise InputError("need one phase per frequency")
            if np.any(phases < 0) or np.any(phases >= TWO_PI):
                raise InputError("phases must lie in [0, 2pi)")
            phases.flags.writeable = False
            object.__setattr__(self, "phases", phases)
        elif self.phases is not None:
            raise InputError("cos/sin features take no phases")

    @property
    def m(self) -> int:
        return self.frequencies.shape[0]

    @property
    def input_dim(self) -> int:
        return self.frequencies.shape[1]

    @property
    def output_dim(self) -> int:
        return self.m if self.variant is FeatureVariant.PHASE_SHIFT else 2 * self.m

    def __call__(self, x) -> np.ndarray:
        """Map one input ``(d,)`` to ``(output_dim,)``, or a batch ``(T, d)`` to ``(T, output_dim)``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (self.input_dim,) or x.ndim > 2:
            raise InputError(f"expected inputs of dimension {self.input_dim}, got shape {x.shape}")
        proj = x @ self.frequencies.T
        if self.variant is FeatureVariant.PHASE_SHIFT:
            return np.sqrt(2.0) * np.cos(proj + self.phases)
        out = np.empty(proj.shape[:-1] + (2 * self.m,))
        out[..., 0::2] = np.cos(proj)
        out[..., 1::2] = np.sin(proj)
        return out

    def __eq__(self, other):
        if not isinstance(other, FeatureMap):
            return NotImplemented
        same_phases = (self.phases is None and other.phases is None) or (
            self.phases is not None
            and other.phases is not None
            and np.array_equal(self.phases, other.phases)
        )
        return (
            self.spec == other.spec
            and self.variant is other.variant
            and np.array_equal(self.frequencies, other.frequencies)
            and same_phases
        )

    __hash__ = None


def sample_feature_map(
    spec: KernelSpec,
    m: int,
    d: int,
    variant: FeatureVariant = FeatureVariant.COS_SIN,
    rng=None,
) -> FeatureMap:
    """Sample a feature map. ``rng`` is a ``numpy.random.Generator`` or a seed."""
    if m < 1 or d < 1:
        raise InputError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    rng = _as_generator(rng)
    variant = FeatureVariant(variant)
    freqs = sample_frequencies(spec, m, d, rng)
    phases = None
    if variant is FeatureVariant.PHASE_SHIFT:
        phases = np.mod(rng.random(m) * TWO_PI, TWO_PI)
    return FeatureMap(spec, variant, freqs, phases)


def features(fmap: FeatureMap, x) -> np.ndarray:
    return fmap(x)


class FeatureBank:
    """Evaluates many feature maps of the same variant in one projection.

    ``bank(x)`` returns an ``(N, D)`` array whose row ``j`` equals
    ``maps[j](x)``.
    """

    def __init__(self, maps: Sequence[FeatureMap]):
        if not maps:
            raise InputError("need at least one feature map")
        variants = {fm.variant for fm in maps}
        shapes = {fm.frequencies.shape for fm in maps}
        if len(variants) != 1 or len(shapes) != 1:
            raise InputError("all maps in a bank must share variant and (m, d)")
        self.maps = list(maps)
        self.variant = maps[0].variant
        self.n = len(maps)
        self.m, self.input_dim = maps[0].frequencies.shape
        self.output_dim = maps[0].output_dim
        self._freqs = np.concatenate([fm.frequencies for fm in maps], axis=0)
        if self.variant is FeatureVariant.PHASE_SHIFT:
            self._phases = np.concatenate([fm.phases for fm in maps]).reshape(self.n, self.m)

    def __len__(self):
        return self.n

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.input_dim:
            raise InputError(f"expected input dimension {self.input_dim}, got {x.shape[0]}")
        proj = (self._freqs @ x).reshape(self.n, self.m)
        if self.variant is FeatureVariant.PHASE_SHIFT:
            return np.sqrt(2.0) * np.cos(proj + self._phases)
        out = np.empty((self.n, 2 * self.m))
        out[:, 0::2] = np.cos(proj)
        out[:, 1::2] = np.sin(proj)
        return out


@dataclass(frozen=True)
class GridAxis:
    """Log-spaced bandwidths ``10 ** (start + numerator * i / denominator)``, i < count.

    Keeping the step as a fraction makes grid points like ``10 ** 2`` exact.
    """

    family: Family
    count: int
    start: float = -2.0
    numerator: int = 1
    denominator: int = 1

    def values(self) -> list[float]:
        return [10.0 ** (self.start + self.numerator * i / self.denominator) for i in range(self.count)]


#: 51 Gaussian (sigma^2 from 1e-2 to 1e2) then 25 Laplacian (sigma from 1e-2 to 1e2)
DEFAULT_GRID: tuple[GridAxis, ...] = (
    GridAxis(Family.GAUSSIAN, count=51, start=-2, numerator=2, denominator=25),
    GridAxis(Family.LAPLACIAN, count=25, start=-2, numerator=1, denominator=6),
)


def build_dictionary(grid: Sequence[GridAxis] = DEFAULT_GRID) -> list[KernelSpec]:
    specs = [KernelSpec(axis.family, value) for axis in grid for value in axis.values()]
    if not specs:
        raise InputError("kernel dictionary is empty")
    return specs
