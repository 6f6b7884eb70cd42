"""Classifier training, prediction, importance, and persistence.

Four algorithms over a shared contract: k-nearest-neighbors, L2 logistic
regression (one-vs-rest for multi-class), a Gini random forest, and
gradient boosted trees with a logistic/softmax link. All are trained on
z-scored or raw features per algorithm, canonicalize row order before
fitting so nothing depends on input ordering, and serialize to a single
self-describing JSON file. predict_proba rows always sum to 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any

import numpy as np
from scipy.optimize import minimize

from navsift.errors import SchemaMismatchError
from navsift.features import FeatureMatrix
from navsift.ml import trees

MODEL_FORMAT = "navsift-model-v1"

ALGORITHMS = ("knn", "logreg", "random_forest", "gbt")
MODES = ("binary", "multiclass")
CLASSES_BY_MODE = {
    "binary": ("authoritative", "misinformation"),
    "multiclass": ("authoritative", "misinformation", "propaganda"),
}


def positive_class_for_mode(mode: str) -> str:
    return "propaganda" if mode == "multiclass" else "misinformation"


def training_targets(store, mode: str) -> dict[str, str]:
    """Map labeled domains to their training class for the given mode.

    Binary keeps the stored two-way class; multiclass promotes the
    propaganda flag to its own class.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    out: dict[str, str] = {}
    for domain in store.labeled_domains():
        label = store.get(domain)
        if mode == "multiclass" and label.propaganda:
            out[domain] = "propaganda"
        else:
            out[domain] = label.class_
    return out


@dataclass
class ModelConfig:
    """Hyperparameters for one training run."""

    algorithm: str
    mode: str = "binary"
    seed: int = 0
    knn_k: int = 5
    logreg_c: float = 1.0
    rf_n_trees: int = 100
    rf_max_depth: int = 20
    gbt_rounds: int = 200
    gbt_max_depth: int = 6
    gbt_learning_rate: float = 0.1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.knn_k < 1 or self.knn_k % 2 == 0:
            raise ValueError(f"knn_k must be a positive odd number, got {self.knn_k}")
        if self.logreg_c <= 0:
            raise ValueError(f"logreg_c must be > 0, got {self.logreg_c}")
        for name in ("rf_n_trees", "rf_max_depth", "gbt_rounds", "gbt_max_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0 < self.gbt_learning_rate <= 1:
            raise ValueError(f"gbt_learning_rate must be in (0, 1], got {self.gbt_learning_rate}")


@dataclass
class TrainedModel:
    algorithm: str
    mode: str
    classes: list[str]
    schema: str
    feature_names: list[str]
    config: ModelConfig
    params: dict[str, Any] = field(repr=False, default_factory=dict)

    def _matrix_values(self, X) -> np.ndarray:
        if isinstance(X, FeatureMatrix):
            if X.schema != self.schema:
                raise SchemaMismatchError(
                    f"model expects schema {self.schema!r}, matrix has {X.schema!r}"
                )
            return X.X
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise SchemaMismatchError(
                f"expected {len(self.feature_names)} feature columns, got shape {X.shape}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        """Class probability rows in `self.classes` order, each summing to 1."""
        values = self._matrix_values(X)
        if self.algorithm == "knn":
            return _knn_predict(self.params, values)
        if self.algorithm == "logreg":
            return _logreg_predict(self.params, values)
        if self.algorithm == "random_forest":
            return _forest_predict(self.params, values)
        return _gbt_predict(self.params, values, len(self.classes))

    def predict(self, X) -> list[str]:
        proba = self.predict_proba(X)
        return [self.classes[i] for i in np.argmax(proba, axis=1)]

    def confidence(self, X, target_class: str) -> np.ndarray:
        if target_class not in self.classes:
            raise ValueError(f"{target_class!r} not among model classes {self.classes}")
        return self.predict_proba(X)[:, self.classes.index(target_class)]


# -- shared fitting helpers --------------------------------------------------


def canonical_order(X: np.ndarray, y_codes: np.ndarray) -> np.ndarray:
    """Sort rows by feature values then label so row order never matters."""
    keys = [y_codes] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def _fit_scaler(X: np.ndarray) -> dict[str, list[float]]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return {"mean": mean.tolist(), "std": std.tolist()}


def _apply_scaler(scaler: dict, X: np.ndarray) -> np.ndarray:
    return (X - np.asarray(scaler["mean"])) / np.asarray(scaler["std"])


# -- knn ---------------------------------------------------------------------


def knn_proba(
    train_X: np.ndarray,
    train_y: np.ndarray,
    n_classes: int,
    k: int,
    queries: np.ndarray,
) -> np.ndarray:
    """Neighbor vote fractions; neighbors are every point whose squared
    distance ties the k-th smallest, so results never depend on row order."""
    out = np.zeros((len(queries), n_classes))
    k_eff = min(k, len(train_y))
    for i, q in enumerate(queries):
        d2 = np.sum((train_X - q) ** 2, axis=1)
        kth = np.partition(d2, k_eff - 1)[k_eff - 1]
        members = d2 <= kth
        votes = np.bincount(train_y[members], minlength=n_classes)
        out[i] = votes / votes.sum()
    return out


def _fit_knn(config: ModelConfig, X: np.ndarray, y: np.ndarray, n_classes: int) -> dict:
    scaler = _fit_scaler(X)
    return {
        "scaler": scaler,
        "k": config.knn_k,
        "X": _apply_scaler(scaler, X).tolist(),
        "y": y.tolist(),
        "n_classes": n_classes,
    }


def _knn_predict(params: dict, X: np.ndarray) -> np.ndarray:
    return knn_proba(
        np.asarray(params["X"]),
        np.asarray(params["y"], dtype=np.intp),
        params["n_classes"],
        params["k"],
        _apply_scaler(params["scaler"], X),
    )


# -- logistic regression -----------------------------------------------------


def logreg_loss_grad(w_ext: np.ndarray, X: np.ndarray, y01: np.ndarray, c: float):
    """L2-regularized binary cross-entropy and its exact gradient.

    `w_ext` is the weight vector with the intercept appended; the
    intercept is not penalized. Regularization strength is 1/c.
    """
    w = w_ext[:-1]
    b = w_ext[-1]
    z = X @ w + b
    # log(1 + exp(z)) - y*z, computed stably
    loss = float(np.sum(np.logaddexp(0.0, z) - y01 * z) + 0.5 / c * np.dot(w, w))
    p = 1.0 / (1.0 + np.exp(-z))
    resid = p - y01
    grad = np.concatenate([X.T @ resid + w / c, [np.sum(resid)]])
    return loss, grad


def _fit_binary_logreg(X: np.ndarray, y01: np.ndarray, c: float) -> np.ndarray:
    w0 = np.zeros(X.shape[1] + 1)
    result = minimize(
        logreg_loss_grad,
        w0,
        args=(X, y01, c),
        jac=True,
        method="L-BFGS-B",
        options={"gtol": 1e-6, "maxiter": 10000},
    )
    return result.x


def _fit_logreg(config: ModelConfig, X: np.ndarray, y: np.ndarray, n_classes: int) -> dict:
    scaler = _fit_scaler(X)
    Xs = _apply_scaler(scaler, X)
    if n_classes == 2:
        weights = [_fit_binary_logreg(Xs, (y == 1).astype(np.float64), config.logreg_c).tolist()]
    else:
        # one-vs-rest: one binary problem per class
        weights = [
            _fit_binary_logreg(Xs, (y == cls).astype(np.float64), config.logreg_c).tolist()
            for cls in range(n_classes)
        ]
    return {"scaler": scaler, "weights": weights, "n_classes": n_classes, "c": config.logreg_c}


def _logreg_predict(params: dict, X: np.ndarray) -> np.ndarray:
    Xs = _apply_scaler(params["scaler"], X)
    weights = [np.asarray(w) for w in params["weights"]]
    if params["n_classes"] == 2:
        z = Xs @ weights[0][:-1] + weights[0][-1]
        p = 1.0 / (1.0 + np.exp(-z))
        return np.column_stack([1.0 - p, p])
    scores = np.column_stack(
        [1.0 / (1.0 + np.exp(-(Xs @ w[:-1] + w[-1]))) for w in weights]
    )
    return scores / scores.sum(axis=1, keepdims=True)


# -- random forest -----------------------------------------------------------


def _fit_forest(config: ModelConfig, X: np.ndarray, y: np.ndarray, n_classes: int) -> dict:
    n = len(y)
    n_candidates = max(1, int(np.sqrt(X.shape[1])))
    seeds = np.random.SeedSequence(config.seed).spawn(config.rf_n_trees)
    forest = []
    for seq in seeds:
        rng = np.random.default_rng(seq)
        sample = rng.integers(0, n, size=n)  # bootstrap
        tree = trees.build_classification_tree(
            X[sample],
            y[sample],
            n_classes,
            max_depth=config.rf_max_depth,
            rng=rng,
            n_candidate_features=n_candidates,
        )
        forest.append(tree)
    return {"trees": forest, "n_classes": n_classes}


def _forest_predict(params: dict, X: np.ndarray) -> np.ndarray:
    total = np.zeros((len(X), params["n_classes"]))
    for tree in params["trees"]:
        total += trees.predict_tree(tree, X)
    return total / len(params["trees"])


# -- gradient boosted trees ----------------------------------------------------


def _gbt_leaf_value(residuals: np.ndarray, n_classes: int):
    """Newton-step leaf value for the logistic / softmax deviance."""
    scale = 1.0 if n_classes == 2 else (n_classes - 1.0) / n_classes

    def value(idx: np.ndarray) -> float:
        r = residuals[idx]
        denom = float(np.sum(np.abs(r) * (1.0 - np.abs(r))))
        if denom < 1e-12:
            return 0.0
        return scale * float(np.sum(r)) / denom

    return value


def _fit_gbt(config: ModelConfig, X: np.ndarray, y: np.ndarray, n_classes: int) -> dict:
    n = len(y)
    lr = config.gbt_learning_rate
    if n_classes == 2:
        y1 = (y == 1).astype(np.float64)
        p0 = float(np.clip(y1.mean(), 1e-6, 1 - 1e-6))
        init = [float(np.log(p0 / (1.0 - p0)))]
        raw = np.full(n, init[0])
        rounds = []
        for _ in range(config.gbt_rounds):
            p = 1.0 / (1.0 + np.exp(-raw))
            resid = y1 - p
            tree = trees.build_regression_tree(
                X, resid, config.gbt_max_depth, _gbt_leaf_value(resid, 2)
            )
            raw += lr * trees.predict_tree(tree, X)
            rounds.append([tree])
    else:
        onehot = np.eye(n_classes)[y]
        prior = np.clip(onehot.mean(axis=0), 1e-6, None)
        init = np.log(prior).tolist()
        raw = np.tile(init, (n, 1))
        rounds = []
        for _ in range(config.gbt_rounds):
            exp = np.exp(raw - raw.max(axis=1, keepdims=True))
            p = exp / exp.sum(axis=1, keepdims=True)
            resid = onehot - p
            round_trees = []
            for cls in range(n_classes):
                tree = trees.build_regression_tree(
                    X, resid[:, cls], config.gbt_max_depth, _gbt_leaf_value(resid[:, cls], n_classes)
                )
                raw[:, cls] += lr * trees.predict_tree(tree, X)
                round_trees.append(tree)
            rounds.append(round_trees)
    return {"init": init, "rounds": rounds, "n_classes": n_classes, "learning_rate": lr}


def _gbt_predict(params: dict, X: np.ndarray, n_classes: int) -> np.ndarray:
    lr = params["learning_rate"]
    if params["n_classes"] == 2:
        raw = np.full(len(X), params["init"][0])
        for round_trees in params["rounds"]:
            raw += lr * trees.predict_tree(round_trees[0], X)
        p = 1.0 / (1.0 + np.exp(-raw))
        return np.column_stack([1.0 - p, p])
    raw = np.tile(params["init"], (len(X), 1))
    for round_trees in params["rounds"]:
        for cls, tree in enumerate(round_trees):
            raw[:, cls] += lr * trees.predict_tree(tree, X)
    exp = np.exp(raw - raw.max(axis=1, keepdims=True))
    return exp / exp.sum(axis=1, keepdims=True)


# -- training entry point ------------------------------------------------------


_FITTERS = {
    "knn": _fit_knn,
    "logreg": _fit_logreg,
    "random_forest": _fit_forest,
    "gbt": _fit_gbt,
}


def train(config: ModelConfig, matrix: FeatureMatrix, y) -> TrainedModel:
    """Fit one model on a feature matrix.

    `y` is a class-name sequence aligned with `matrix.domains` or a
    mapping domain -> class name. Classes must belong to the config's
    mode and at least two must be present.
    """
    classes = list(CLASSES_BY_MODE[config.mode])
    if isinstance(y, dict):
        missing = [d for d in matrix.domains if d not in y]
        if missing:
            raise ValueError(f"no label for domains {missing[:5]}")
        y = [y[d] for d in matrix.domains]
    y = list(y)
    if len(y) != len(matrix.domains):
        raise ValueError(f"{len(y)} labels for {len(matrix.domains)} rows")
    unknown = sorted(set(y) - set(classes))
    if unknown:
        raise ValueError(f"labels {unknown} not valid for mode {config.mode!r}")
    if len(set(y)) < 2:
        raise ValueError("training labels are a single class")
    if len(y) < len(classes):
        raise ValueError(f"need at least {len(classes)} rows, got {len(y)}")
    codes = np.array([classes.index(c) for c in y], dtype=np.intp)
    X = np.asarray(matrix.X, dtype=np.float64)
    order = canonical_order(X, codes)
    params = _FITTERS[config.algorithm](config, X[order], codes[order], len(classes))
    return TrainedModel(
        algorithm=config.algorithm,
        mode=config.mode,
        classes=classes,
        schema=matrix.schema,
        feature_names=list(matrix.feature_names),
        config=config,
        params=params,
    )


def gini_importance(model: TrainedModel) -> list[tuple[str, float]]:
    """Mean decrease in Gini impurity per feature, normalized to sum 1.

    Only defined for random forests. Ranking ties break by feature
    schema order.
    """
    if model.algorithm != "random_forest":
        raise ValueError(f"gini importance needs a random_forest model, got {model.algorithm!r}")
    n_features = len(model.feature_names)
    total = np.zeros(n_features)
    for tree in model.params["trees"]:
        contrib = np.zeros(n_features)
        root_n = tree["n"]
        for node in trees.iter_split_nodes(tree):
            left, right = node["left"], node["right"]
            drop = node["impurity"] - (
                left["n"] / node["n"] * _node_impurity(left)
                + right["n"] / node["n"] * _node_impurity(right)
            )
            contrib[node["feature"]] += node["n"] / root_n * drop
        s = contrib.sum()
        if s > 0:
            total += contrib / s
    grand = total.sum()
    if grand > 0:
        total = total / grand
    ranked = sorted(range(n_features), key=lambda i: (-total[i], i))
    return [(model.feature_names[i], float(total[i])) for i in ranked]


def _node_impurity(node: dict) -> float:
    if "impurity" in node:
        return node["impurity"]
    value = np.asarray(node["value"])
    return float(1.0 - np.sum(value * value))


# -- persistence ---------------------------------------------------------------


def save_model(model: TrainedModel, path: str | Path) -> None:
    """Write a self-describing single-file JSON model."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "format": MODEL_FORMAT,
        "algorithm": model.algorithm,
        "mode": model.mode,
        "classes": model.classes,
        "schema": model.schema,
        "feature_names": model.feature_names,
        "config": asdict(model.config),
        "params": model.params,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: unknown model format {doc.get('format')!r}")
    return TrainedModel(
        algorithm=doc["algorithm"],
        mode=doc["mode"],
        classes=list(doc["classes"]),
        schema=doc["schema"],
        feature_names=list(doc["feature_names"]),
        config=ModelConfig(**doc["config"]),
        params=doc["params"],
    )
