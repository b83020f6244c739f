"""Stratified k-fold splitting, the scaled PCA+tree classifier and grid search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DataError
from .pca import PcaModel, Standardizer, pca_fit, pca_transform
from .tree import CRITERIA, TreeModel, tree_fit, tree_predict, tree_predict_proba


def stratified_kfold(y, k: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shuffle each class with a seeded RNG, then deal its members round-robin.

    The dealing position carries over from one class to the next, so fold
    sizes stay balanced as well as per-class counts (which differ by at most
    one between folds).
    """
    y = np.asarray(y)
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    fold = np.empty(y.shape[0], dtype=np.int64)
    offset = 0
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if members.size < k:
            raise DataError(f"class {c!r} has {members.size} members, fewer than k={k}")
        members = rng.permutation(members)
        fold[members] = (offset + np.arange(members.size)) % k
        offset += members.size
    everything = np.arange(y.shape[0])
    return [(everything[fold != i], everything[fold == i]) for i in range(k)]


def format_pm(mean: float, std: float) -> str:
    return f"{mean:.2f} ± {std:.3f}"


@dataclass(frozen=True)
class CvCell:
    criterion: str
    max_depth: int
    fold_scores: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_scores))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_scores))


@dataclass(frozen=True)
class CvReport:
    """Fold accuracies of the winning grid cell; std is the population std."""

    fold_scores: tuple[float, ...]
    mean: float
    std: float
    min: float
    max: float
    best_params: dict
    cells: tuple[CvCell, ...] = field(default=(), repr=False)

    @property
    def summary(self) -> str:
        return format_pm(self.mean, self.std)

    @property
    def score_line(self) -> str:
        return f"min {self.min:.2f}, max {self.max:.2f}, mean {self.mean:.2f}"

    def to_dict(self) -> dict:
        return {
            "fold_scores": list(self.fold_scores),
            "mean": self.mean, "std": self.std, "min": self.min, "max": self.max,
            "summary": self.summary, "score_line": self.score_line,
            "best_params": dict(self.best_params),
            "cells": [{"criterion": c.criterion, "max_depth": c.max_depth,
                       "fold_scores": list(c.fold_scores), "mean": c.mean, "std": c.std}
                      for c in self.cells],
        }


@dataclass(frozen=True, eq=False)
class Classifier:
    """z-scoring, optional PCA projection, then a decision tree."""

    scaler: Standardizer
    pca: PcaModel | None
    tree: TreeModel

    def features(self, X) -> np.ndarray:
        Z = self.scaler.transform(X)
        return pca_transform(self.pca, Z) if self.pca is not None else Z

    def predict(self, X) -> np.ndarray:
        return tree_predict(self.tree, self.features(X))

    def predict_proba(self, X) -> np.ndarray:
        return tree_predict_proba(self.tree, self.features(X))

    @property
    def classes(self) -> tuple:
        return self.tree.classes


def fit_classifier(X, y, criterion: str = "entropy", max_depth: int | None = None,
                   n_components: int | None = 3, min_samples_leaf: int = 1) -> Classifier:
    scaler = Standardizer.fit(X)
    Z = scaler.transform(X)
    pca = None
    if n_components:
        pca = pca_fit(Z, min(n_components, Z.shape[0] - 1, Z.shape[1]))
        Z = pca_transform(pca, Z)
    tree = tree_fit(Z, y, criterion, max_depth, min_samples_leaf)
    return Classifier(scaler, pca, tree)


def accuracy(y_true, y_pred) -> float:
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


def grid_search(X, y, depth_grid: Sequence[int], criterion_grid: Sequence[str] = CRITERIA,
                cv_k: int = 3, seed: int = 0, n_components: int | None = 3,
                min_samples_leaf: int = 1) -> tuple[CvReport, Classifier]:
    """Score every (criterion, depth) cell by stratified k-fold accuracy.

    All cells share one set of folds. Scaling and PCA are refit inside each
    training fold. The best cell has the highest mean accuracy; ties go to
    the smaller depth, then entropy before gini. The returned classifier is
    refit on all rows with the winning parameters.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if not len(depth_grid) or not len(criterion_grid):
        raise DataError("grid_search needs nonempty depth and criterion grids")
    for c in criterion_grid:
        if c not in CRITERIA:
            raise DataError(f"unknown criterion {c!r}")
    folds = stratified_kfold(y, cv_k, seed)
    crits = sorted(set(criterion_grid), key=CRITERIA.index)
    cells = []
    for depth in sorted(set(depth_grid)):
        for crit in crits:
            scores = []
            for train, test in folds:
                model = fit_classifier(X[train], y[train], crit, depth, n_components,
                                       min_samples_leaf)
                scores.append(accuracy(y[test], model.predict(X[test])))
            cells.append(CvCell(crit, int(depth), tuple(scores)))
    best = cells[0]
    for cell in cells[1:]:
        if cell.mean > best.mean + 1e-12:
            best = cell
    params = {"criterion": best.criterion, "max_depth": best.max_depth,
              "n_components": n_components, "min_samples_leaf": min_samples_leaf}
    report = CvReport(best.fold_scores, best.mean, best.std, min(best.fold_scores),
                      max(best.fold_scores), params, tuple(cells))
    final = fit_classifier(X, y, best.criterion, best.max_depth, n_components, min_samples_leaf)
    return report, final
