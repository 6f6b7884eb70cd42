"""Decision tree primitives shared by the forest and boosting models.

Trees are plain nested dicts so they serialize to JSON directly. Split
candidates are midpoints between consecutive distinct sorted values;
ties on gain break by lower feature index, then lower threshold, so a
fitted tree is a pure function of (X, y, seed).
"""

from __future__ import annotations

import numpy as np


def gini_from_counts(counts: np.ndarray, n: int) -> float:
    if n <= 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def best_split_classification(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    feature_ids,
) -> tuple[int, float, float] | None:
    """Exhaustive best (feature, threshold, gini gain) over candidate features.

    Rows with value <= threshold go left. Returns None when no split
    separates the data with positive gain.
    """
    n = len(y)
    if n < 2:
        return None
    parent_counts = np.bincount(y, minlength=n_classes)
    parent_gini = gini_from_counts(parent_counts, n)
    class_ids = np.arange(n_classes)
    best: tuple[float, int, float] | None = None  # (gain, feature, threshold)
    for f in feature_ids:
        x = X[:, f]
        order = np.argsort(x, kind="mergesort")
        xs = x[order]
        ys = y[order]
        boundary = np.nonzero(xs[:-1] < xs[1:])[0]
        if boundary.size == 0:
            continue
        prefix = np.cumsum(ys[:, None] == class_ids[None, :], axis=0)
        left_n = boundary + 1
        right_n = n - left_n
        left_counts = prefix[boundary]
        right_counts = parent_counts[None, :] - left_counts
        gini_left = 1.0 - np.sum((left_counts / left_n[:, None]) ** 2, axis=1)
        gini_right = 1.0 - np.sum((right_counts / right_n[:, None]) ** 2, axis=1)
        weighted = (left_n / n) * gini_left + (right_n / n) * gini_right
        gains = parent_gini - weighted
        j = int(np.argmax(gains))  # thresholds ascend, so first max wins ties
        gain = float(gains[j])
        if gain <= 0.0:
            continue
        threshold = float((xs[boundary[j]] + xs[boundary[j] + 1]) / 2.0)
        if best is None or gain > best[0]:
            best = (gain, int(f), threshold)
    if best is None:
        return None
    return best[1], best[2], best[0]


def best_split_regression(X: np.ndarray, y: np.ndarray, feature_ids) -> tuple[int, float, float] | None:
    """Best (feature, threshold, sse gain) split for a regression target."""
    n = len(y)
    if n < 2:
        return None
    total = float(np.sum(y))
    parent_sse = float(np.sum(y * y)) - total * total / n
    best: tuple[float, int, float] | None = None
    for f in feature_ids:
        x = X[:, f]
        order = np.argsort(x, kind="mergesort")
        xs = x[order]
        ys = y[order]
        boundary = np.nonzero(xs[:-1] < xs[1:])[0]
        if boundary.size == 0:
            continue
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        left_n = boundary + 1
        right_n = n - left_n
        left_sum = csum[boundary]
        left_sq = csq[boundary]
        sse_left = left_sq - left_sum * left_sum / left_n
        right_sum = total - left_sum
        right_sq = csq[-1] - left_sq
        sse_right = right_sq - right_sum * right_sum / right_n
        gains = parent_sse - (sse_left + sse_right)
        j = int(np.argmax(gains))
        gain = float(gains[j])
        if gain <= 1e-12:
            continue
        threshold = float((xs[boundary[j]] + xs[boundary[j] + 1]) / 2.0)
        if best is None or gain > best[0]:
            best = (gain, int(f), threshold)
    if best is None:
        return None
    return best[1], best[2], best[0]


def build_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int,
    rng: np.random.Generator | None = None,
    n_candidate_features: int | None = None,
) -> dict:
    """Grow a Gini tree to at most `max_depth` levels below the root.

    When `n_candidate_features` is set, each split considers a fresh
    random feature subset drawn from `rng` (preorder, left child first),
    which is what the forest uses.
    """
    n_features = X.shape[1]

    def make_node(idx: np.ndarray, depth: int) -> dict:
        counts = np.bincount(y[idx], minlength=n_classes)
        n = len(idx)
        impurity = gini_from_counts(counts, n)
        leaf = {"n": int(n), "value": (counts / n).tolist()}
        if depth >= max_depth or impurity == 0.0 or n < 2:
            return leaf
        if n_candidate_features is not None and rng is not None:
            feats = np.sort(rng.choice(n_features, size=n_candidate_features, replace=False))
        else:
            feats = np.arange(n_features)
        split = best_split_classification(X[idx], y[idx], n_classes, feats)
        if split is None:
            return leaf
        f, thr, gain = split
        mask = X[idx, f] <= thr
        left_idx = idx[mask]
        right_idx = idx[~mask]
        return {
            "n": int(n),
            "impurity": impurity,
            "feature": f,
            "threshold": thr,
            "gain": gain,
            "left": make_node(left_idx, depth + 1),
            "right": make_node(right_idx, depth + 1),
        }

    return make_node(np.arange(len(y)), 0)


def build_regression_tree(
    X: np.ndarray,
    target: np.ndarray,
    max_depth: int,
    leaf_value,
) -> dict:
    """Grow an SSE regression tree; `leaf_value(idx)` sets leaf outputs."""

    def make_node(idx: np.ndarray, depth: int) -> dict:
        n = len(idx)
        leaf = {"n": int(n), "value": float(leaf_value(idx))}
        if depth >= max_depth or n < 2:
            return leaf
        split = best_split_regression(X[idx], target[idx], np.arange(X.shape[1]))
        if split is None:
            return leaf
        f, thr, _ = split
        mask = X[idx, f] <= thr
        return {
            "n": int(n),
            "feature": f,
            "threshold": thr,
            "left": make_node(idx[mask], depth + 1),
            "right": make_node(idx[~mask], depth + 1),
        }

    return make_node(np.arange(len(target)), 0)


def predict_tree(node: dict, X: np.ndarray) -> np.ndarray:
    """Vectorized prediction: leaf value rows for every row of X."""
    first = node
    while "feature" in first:
        first = first["left"]
    width = len(first["value"]) if isinstance(first["value"], list) else 0
    out = np.zeros((len(X), width)) if width else np.zeros(len(X))

    def walk(nd: dict, idx: np.ndarray) -> None:
        if idx.size == 0:
            return
        if "feature" not in nd:
            out[idx] = nd["value"]
            return
        mask = X[idx, nd["feature"]] <= nd["threshold"]
        walk(nd["left"], idx[mask])
        walk(nd["right"], idx[~mask])

    walk(node, np.arange(len(X)))
    return out


def tree_depth(node: dict) -> int:
    """Edges from the root to the deepest leaf."""
    if "feature" not in node:
        return 0
    return 1 + max(tree_depth(node["left"]), tree_depth(node["right"]))


def iter_split_nodes(node: dict):
    if "feature" in node:
        yield node
        yield from iter_split_nodes(node["left"])
        yield from iter_split_nodes(node["right"])
