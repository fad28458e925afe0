"""Online multi-kernel regression: random Fourier feature experts driven by
Vovk-Azoury-Warmuth forecasters, combined by VAW, EWA or the aggregating
algorithm."""

from .data import Ar4Config, Dataset, generate_ar4, load_csv, master_seed_split, normalize
from .errors import ConfigError, InputError, InvariantError, ProtocolError
from .meta import (
    AggregatingState,
    EwaState,
    TruncationPolicy,
    VawMeta,
    default_eta_aggregating,
    default_eta_ewa,
    ewa_meta_regret_bound,
    truncate,
)
from .pipeline import (
    ConcatVawModel,
    MetaKind,
    MetaSetup,
    MklModel,
    RoundRecord,
    Trajectory,
    make_meta,
    run_shared,
    run_stream,
    sample_feature_maps,
)
from .rff import (
    DEFAULT_GRID,
    Family,
    FeatureMap,
    FeatureVariant,
    GridAxis,
    KernelSpec,
    build_dictionary,
    eval_kernel,
    features,
    sample_feature_map,
)
from .vaw import VawState, vaw_regret_bound

__version__ = "0.1.0"
