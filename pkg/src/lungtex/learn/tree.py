"""Greedy CART classification trees with entropy or Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .pca import _as_table

CRITERIA = ("entropy", "gini")
_EPS = 1e-12


def entropy_impurity(class_counts) -> float:
    """Shannon entropy in bits of a class-count vector."""
    c = np.asarray(class_counts, dtype=np.float64)
    n = c.sum()
    if n <= 0:
        raise DataError("entropy of an empty node (all counts zero)")
    p = c[c > 0] / n
    return float(-(p * np.log2(p)).sum()) + 0.0


def gini_impurity(class_counts) -> float:
    c = np.asarray(class_counts, dtype=np.float64)
    n = c.sum()
    if n <= 0:
        raise DataError("gini of an empty node (all counts zero)")
    p = c / n
    return float(1.0 - (p * p).sum())


def _impurity_rows(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Row-wise impurity of an (m, C) count matrix; rows must be nonempty."""
    n = counts.sum(axis=1, keepdims=True)
    p = counts / n
    if criterion == "entropy":
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return -(p * logs).sum(axis=1)
    return 1.0 - (p * p).sum(axis=1)


@dataclass(frozen=True)
class Node:
    """Internal nodes have ``feature >= 0``; leaves have ``feature == -1``."""

    counts: tuple[int, ...]
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True, eq=False)
class TreeModel:
    classes: tuple
    nodes: tuple[Node, ...]
    n_features: int
    criterion: str = "entropy"
    max_depth: int | None = None
    min_samples_leaf: int = 1

    @property
    def depth(self) -> int:
        def walk(i):
            nd = self.nodes[i]
            return 0 if nd.is_leaf else 1 + max(walk(nd.left), walk(nd.right))
        return walk(0)

    @property
    def n_leaves(self) -> int:
        return sum(nd.is_leaf for nd in self.nodes)


def _best_split(X, yi, n_classes, min_leaf, criterion, parent_imp):
    n, d = X.shape
    best = None  # (gain, feature, threshold)
    onehot = np.eye(n_classes, dtype=np.int64)[yi]
    total = onehot.sum(axis=0)
    for f in range(d):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum = np.cumsum(onehot[order], axis=0)
        # split after position i: left = [0..i], right = [i+1..n-1]
        pos = np.arange(min_leaf - 1, n - min_leaf)
        if pos.size == 0:
            continue
        pos = pos[xs[pos] < xs[pos + 1]]
        if pos.size == 0:
            continue
        left = cum[pos]
        right = total - left
        nl = (pos + 1).astype(np.float64)
        weighted = (nl * _impurity_rows(left, criterion)
                    + (n - nl) * _impurity_rows(right, criterion)) / n
        gain = parent_imp - weighted
        top = gain.max()
        i = int(np.flatnonzero(gain >= top - _EPS)[0])
        lo, hi = xs[pos[i]], xs[pos[i] + 1]
        thr = 0.5 * (lo + hi)
        if not lo <= thr < hi:
            thr = lo
        if best is None or top > best[0] + _EPS:
            best = (float(gain[i]), f, float(thr))
    return best


def tree_fit(X, y, criterion: str = "entropy", max_depth: int | None = None,
             min_samples_leaf: int = 1) -> TreeModel:
    """Grow a CART tree depth-first.

    Every node scans all features and all midpoints between consecutive
    distinct values and takes the largest impurity decrease; ties go to the
    lower feature index, then the lower threshold. An impure node is split
    even when the best decrease is zero (as in XOR), so that deeper trees can
    still separate the classes. Growth stops at ``max_depth``, at pure nodes,
    or when no split leaves ``min_samples_leaf`` rows on both sides.
    """
    X = _as_table(X)
    y = np.asarray(y)
    if X.shape[0] == 0 or y.shape[0] == 0:
        raise DataError("empty data")
    if X.shape[0] != y.shape[0]:
        raise DataError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
    if criterion not in CRITERIA:
        raise DataError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    if min_samples_leaf < 1:
        raise DataError("min_samples_leaf must be >= 1")
    classes, yi = np.unique(y, return_inverse=True)
    nc = len(classes)
    nodes: list[dict] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        counts = np.bincount(yi[idx], minlength=nc)
        me = len(nodes)
        nodes.append({"counts": tuple(int(c) for c in counts)})
        if (np.count_nonzero(counts) <= 1
                or (max_depth is not None and depth >= max_depth)
                or idx.size < 2 * min_samples_leaf):
            return me
        parent = float(_impurity_rows(counts[None, :], criterion)[0])
        split = _best_split(X[idx], yi[idx], nc, min_samples_leaf, criterion, parent)
        if split is None:
            return me
        _, f, thr = split
        go_left = X[idx, f] <= thr
        nodes[me].update(feature=f, threshold=thr)
        nodes[me]["left"] = grow(idx[go_left], depth + 1)
        nodes[me]["right"] = grow(idx[~go_left], depth + 1)
        return me

    grow(np.arange(X.shape[0]), 0)
    return TreeModel(tuple(classes.tolist()), tuple(Node(**nd) for nd in nodes),
                     X.shape[1], criterion, max_depth, min_samples_leaf)


def _leaves(model: TreeModel, X) -> np.ndarray:
    X = _as_table(X)
    if X.shape[1] != model.n_features:
        raise DataError(f"width mismatch: tree expects {model.n_features} features, got {X.shape[1]}")
    out = np.empty(X.shape[0], dtype=np.int64)
    for r, row in enumerate(X):
        i = 0
        nd = model.nodes[0]
        while not nd.is_leaf:
            i = nd.left if row[nd.feature] <= nd.threshold else nd.right
            nd = model.nodes[i]
        out[r] = i
    return out


def tree_predict_proba(model: TreeModel, X) -> np.ndarray:
    """Leaf class distributions, columns ordered as ``model.classes``."""
    counts = np.array([model.nodes[i].counts for i in _leaves(model, X)], dtype=np.float64)
    return counts / counts.sum(axis=1, keepdims=True)


def tree_predict(model: TreeModel, X) -> np.ndarray:
    """Majority label of each row's leaf; ties go to the smallest label."""
    leaves = _leaves(model, X)
    # classes are sorted, so argmax's first-hit rule picks the smallest label
    idx = [int(np.argmax(model.nodes[i].counts)) for i in leaves]
    return np.array([model.classes[j] for j in idx])
