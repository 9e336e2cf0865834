"""polyvote: three-class text classification with voting ensembles.

Load labeled text datasets, train hashed-feature linear classifiers with
mini-batch AdamW, exchange per-model predictions through a JSON-lines wire
format, combine them by hard or weighted voting, and score everything with
macro F1.
"""

__version__ = "0.1.0"

from .corpus import (
    DatasetSplit,
    Example,
    Label,
    LoadSchema,
    SplitStats,
    compute_stats,
    load_split,
    normalize_text,
    save_split,
    stratified_subsample,
)
from .ensemble import (
    EnsembleConfig,
    WeightSearchResult,
    WeightVector,
    agreement_matrix,
    ensemble_predict,
    hard_vote,
    search_weights,
    subset_ensembles,
    weighted_vote,
)
from .featurizer import FeatureVector, FeaturizerConfig, featurize
from .metrics import EvalReport, bootstrap_ci, evaluate
from .predictions import (
    PredictionMatrix,
    PredictionRecord,
    assemble_matrix,
    export_predictions,
    import_predictions,
)
from .trainer import (
    ModelParams,
    OptimizerState,
    TrainConfig,
    TrainingLog,
    adamw_step,
    adamw_step_array,
    cross_entropy,
    load_model,
    predict,
    save_model,
    softmax,
    train,
)

__all__ = [
    "DatasetSplit",
    "Example",
    "Label",
    "LoadSchema",
    "SplitStats",
    "compute_stats",
    "load_split",
    "normalize_text",
    "save_split",
    "stratified_subsample",
    "FeatureVector",
    "FeaturizerConfig",
    "featurize",
    "ModelParams",
    "OptimizerState",
    "TrainConfig",
    "TrainingLog",
    "adamw_step",
    "adamw_step_array",
    "cross_entropy",
    "load_model",
    "predict",
    "save_model",
    "softmax",
    "train",
    "PredictionMatrix",
    "PredictionRecord",
    "assemble_matrix",
    "export_predictions",
    "import_predictions",
    "EnsembleConfig",
    "WeightSearchResult",
    "WeightVector",
    "agreement_matrix",
    "ensemble_predict",
    "hard_vote",
    "search_weights",
    "subset_ensembles",
    "weighted_vote",
    "EvalReport",
    "bootstrap_ci",
    "evaluate",
]
