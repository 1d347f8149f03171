"""Capability-scored node-pool selection with a deterministic simulator.

The package covers the full pipeline: synthetic labeled datasets over a
nine-feature node model, a small trainable scorer network, ranked pool
selection with super and random nodes, and a round-based simulator that
compares the pool protocol against simplified pow / pos / dpos
baselines. Every operation is reproducible from explicit seeds.
"""

from poai.dataset import Dataset, generate_dataset, load_dataset, save_dataset
from poai.errors import (
    ConfigurationError,
    DatasetFormatError,
    ModelFormatError,
    PoaiError,
    SimulationError,
    TrainingDivergedError,
    ValidationError,
)
from poai.features import (
    FeatureRanges,
    NodeFeatures,
    RangeSpec,
    default_ranges,
    normalize_features,
)
from poai.metrics import Metrics, compute_metrics, gini, shannon_entropy_bits, spearman
from poai.oracle import oracle_atn, oracle_mean
from poai.pool import (
    InjectedDraws,
    NodeClass,
    NodePool,
    SelectionConfig,
    classify,
    pool_from_json,
    pool_to_json,
    rank_nodes,
    select_pool,
)
from poai.scorer.backend import active_backend
from poai.scorer.model import (
    ScorerModel,
    gradient_check,
    init_model,
    load_model,
    loss,
    predict,
    predict_batch,
    save_model,
)
from poai.scorer.train import TrainConfig, TrainReport, train
from poai.simulate import (
    BlockRecord,
    Protocol,
    SimConfig,
    SimResult,
    next_producer,
    run_baseline,
    run_protocol,
    run_simulation,
    score_nodes,
)

__version__ = "0.1.0"

__all__ = [
    "BlockRecord",
    "ConfigurationError",
    "Dataset",
    "DatasetFormatError",
    "FeatureRanges",
    "InjectedDraws",
    "Metrics",
    "ModelFormatError",
    "NodeClass",
    "NodeFeatures",
    "NodePool",
    "PoaiError",
    "Protocol",
    "RangeSpec",
    "ScorerModel",
    "SelectionConfig",
    "SimConfig",
    "SimResult",
    "SimulationError",
    "TrainConfig",
    "TrainReport",
    "TrainingDivergedError",
    "ValidationError",
    "active_backend",
    "classify",
    "compute_metrics",
    "default_ranges",
    "generate_dataset",
    "gini",
    "gradient_check",
    "init_model",
    "load_dataset",
    "load_model",
    "loss",
    "next_producer",
    "normalize_features",
    "oracle_atn",
    "oracle_mean",
    "pool_from_json",
    "pool_to_json",
    "predict",
    "predict_batch",
    "rank_nodes",
    "run_baseline",
    "run_protocol",
    "run_simulation",
    "save_dataset",
    "save_model",
    "score_nodes",
    "select_pool",
    "shannon_entropy_bits",
    "spearman",
    "train",
]
