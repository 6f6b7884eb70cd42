"""Interpretable classifiers, evaluation, and the cross-validation protocol."""

from navsift.ml.models import (
    ALGORITHMS,
    CLASSES_BY_MODE,
    ModelConfig,
    TrainedModel,
    gini_importance,
    load_model,
    positive_class_for_mode,
    save_model,
    train,
    training_targets,
)
from navsift.ml.evaluate import (
    Metrics,
    MonthMetrics,
    cross_validate,
    evaluate,
    metrics_rows,
    stratified_folds,
)

__all__ = [
    "ALGORITHMS",
    "CLASSES_BY_MODE",
    "ModelConfig",
    "TrainedModel",
    "train",
    "training_targets",
    "save_model",
    "load_model",
    "gini_importance",
    "positive_class_for_mode",
    "Metrics",
    "MonthMetrics",
    "evaluate",
    "metrics_rows",
    "stratified_folds",
    "cross_validate",
]
