"""Column standardization and principal component analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError


def _as_table(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"expected a 2-D feature table, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("feature table contains non-finite values")
    return X


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = _as_table(X)
        sd = X.std(axis=0)
        # constant columns pass through centered, not divided by zero
        sd = np.where(sd > 0, sd, 1.0)
        return cls(X.mean(axis=0), sd)

    def transform(self, X) -> np.ndarray:
        X = _as_table(X)
        if X.shape[1] != self.mean.shape[0]:
            raise DataError(f"width mismatch: model has {self.mean.shape[0]} columns, got {X.shape[1]}")
        return (X - self.mean) / self.scale


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (n_components, D), orthonormal rows
    explained_variance: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def pca_fit(X, n_components: int) -> PcaModel:
    """Fit PCA by SVD of the mean-centered table.

    Variances are squared singular values over ``N - 1``. Each component is
    signed so that its largest-magnitude entry is positive.
    """
    X = _as_table(X)
    n, d = X.shape
    if n < 2:
        raise DataError("too few samples: PCA needs at least 2 rows")
    if not 1 <= n_components <= min(n - 1, d):
        raise DataError(f"n_components must be in [1, {min(n - 1, d)}], got {n_components}")
    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    comps = vt[:n_components].copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    var = s[:n_components] ** 2 / (n - 1)
    return PcaModel(mean, comps, var)


def pca_transform(model: PcaModel, X) -> np.ndarray:
    X = _as_table(X)
    if X.shape[1] != model.mean.shape[0]:
        raise DataError(f"width mismatch: model has {model.mean.shape[0]} columns, got {X.shape[1]}")
    return (X - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, Z) -> np.ndarray:
    return np.asarray(Z) @ model.components + model.mean
