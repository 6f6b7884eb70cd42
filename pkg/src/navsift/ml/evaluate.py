"""Metrics and the temporally shifted cross-validation protocol.

Domains are split once into stratified folds; each fold's model trains
on the train month's feature rows and is then scored on the held-out
domains in every month's matrix, so the same 20% of domains is tracked
across time. Precision is reported absent (None), never 0, when a fold
makes no positive prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from navsift.features import FeatureMatrix
from navsift.ml.models import CLASSES_BY_MODE, ModelConfig, TrainedModel, positive_class_for_mode, train


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float | None
    recall: float
    positive_class: str
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class MonthMetrics:
    """Fold-averaged metrics for one month."""

    accuracy: float
    precision: float | None
    recall: float
    positive_class: str
    n_folds: int


def evaluate(y_true, y_pred, positive_class: str) -> Metrics:
    """Accuracy plus precision/recall of the designated positive class."""
    y_true = list(y_true)
    y_pred = list(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if not y_true:
        raise ValueError("cannot evaluate zero predictions")
    tp = fp = fn = tn = 0
    correct = 0
    for t, p in zip(y_true, y_pred):
        if t == p:
            correct += 1
        if p == positive_class:
            if t == positive_class:
                tp += 1
            else:
                fp += 1
        elif t == positive_class:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    return Metrics(
        accuracy=correct / len(y_true),
        precision=precision,
        recall=recall,
        positive_class=positive_class,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )


def stratified_folds(y, n_folds: int, seed: int) -> np.ndarray:
    """Assign each index a fold id, stratified by class, seeded.

    Indices of each class are shuffled once and dealt round-robin, so
    every class spreads as evenly as possible across folds.
    """
    y = list(y)
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    rng = np.random.default_rng(seed)
    folds = np.zeros(len(y), dtype=np.intp)
    for cls in sorted(set(y)):
        idx = np.array([i for i, v in enumerate(y) if v == cls])
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            folds[i] = pos % n_folds
    return folds


def cross_validate(
    config: ModelConfig,
    features_by_month: dict[str, FeatureMatrix],
    y,
    train_month: str,
    n_folds: int = 5,
) -> dict[str, MonthMetrics]:
    """Run the shifted-evaluation protocol and average metrics per month.

    Every month's matrix must cover the same domains in the same order
    (absent domains should have been given zero-traffic rows upstream).
    `y` maps domain -> class name, or aligns with the matrix rows.
    """
    if train_month not in features_by_month:
        raise ValueError(f"train month {train_month!r} not in matrices: {sorted(features_by_month)}")
    months = sorted(features_by_month)
    base = features_by_month[train_month]
    for month in months:
        if features_by_month[month].domains != base.domains:
            raise ValueError(f"month {month} covers different domains than {train_month}")
        if features_by_month[month].schema != base.schema:
            raise ValueError(f"month {month} has different schema than {train_month}")
    if isinstance(y, dict):
        missing = [d for d in base.domains if d not in y]
        if missing:
            raise ValueError(f"no label for domains {missing[:5]}")
        labels = [y[d] for d in base.domains]
    else:
        labels = list(y)
        if len(labels) != len(base.domains):
            raise ValueError(f"{len(labels)} labels for {len(base.domains)} rows")

    folds = stratified_folds(labels, n_folds, config.seed)
    positive = positive_class_for_mode(config.mode)
    per_month: dict[str, list[Metrics]] = {month: [] for month in months}
    labels_arr = np.array(labels)
    for fold in range(n_folds):
        test_mask = folds == fold
        train_idx = np.nonzero(~test_mask)[0]
        test_idx = np.nonzero(test_mask)[0]
        if test_idx.size == 0:
            continue
        train_matrix = FeatureMatrix(
            mode=base.mode,
            schema=base.schema,
            feature_names=base.feature_names,
            domains=[base.domains[i] for i in train_idx],
            X=base.X[train_idx],
        )
        model = train(config, train_matrix, labels_arr[train_idx].tolist())
        for month in months:
            proba = model.predict_proba(features_by_month[month].X[test_idx])
            pred = [model.classes[i] for i in np.argmax(proba, axis=1)]
            per_month[month].append(evaluate(labels_arr[test_idx].tolist(), pred, positive))

    out: dict[str, MonthMetrics] = {}
    for month in months:
        ms = per_month[month]
        precisions = [m.precision for m in ms if m.precision is not None]
        out[month] = MonthMetrics(
            accuracy=float(np.mean([m.accuracy for m in ms])),
            precision=float(np.mean(precisions)) if precisions else None,
            recall=float(np.mean([m.recall for m in ms])),
            positive_class=positive,
            n_folds=len(ms),
        )
    return out


def metrics_rows(results: dict[str, dict[str, MonthMetrics]]) -> list[list[str]]:
    """Flatten algorithm -> month -> metrics into CSV rows."""
    rows = [["model", "month", "accuracy", "precision", "recall"]]
    for algorithm in sorted(results):
        for month in sorted(results[algorithm]):
            m = results[algorithm][month]
            rows.append(
                [
                    algorithm,
                    month,
                    f"{m.accuracy:.6f}",
                    "" if m.precision is None else f"{m.precision:.6f}",
                    f"{m.recall:.6f}",
                ]
            )
    return rows
