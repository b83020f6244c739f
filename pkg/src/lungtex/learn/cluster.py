"""k-means, spherical-Gaussian BIC and X-means model selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from .pca import _as_table


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _sqdist(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


@dataclass(frozen=True, eq=False)
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    n_iter: int


def kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _update(X: np.ndarray, labels: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Recompute means; refill each empty cluster with the worst-fit point."""
    k = C.shape[0]
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        resid = ((X - C[labels]) ** 2).sum(axis=1)
        resid[counts[labels] <= 1] = -1.0
        far = int(np.argmax(resid))
        counts[labels[far]] -= 1
        labels[far] = j
        counts[j] = 1
        C = C.copy()
        C[j] = X[far]
    sums = np.zeros_like(C)
    np.add.at(sums, labels, X)
    return sums / counts[:, None]


def lloyd(X: np.ndarray, centroids: np.ndarray, max_iter: int = 300,
          debug: bool = False) -> KMeansResult:
    """Lloyd iterations from given centroids until the assignment is a fixpoint."""
    C = np.array(centroids, dtype=np.float64)
    labels = np.argmin(_sqdist(X, C), axis=1)
    prev = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        C = _update(X, labels, C)
        d = _sqdist(X, C)
        new = np.argmin(d, axis=1)
        if debug:
            inertia = float(d[np.arange(len(X)), new].sum())
            assert inertia <= prev + 1e-9 * max(1.0, abs(prev)), "k-means inertia increased"
            prev = inertia
        if np.array_equal(new, labels):
            break
        labels = new
    inertia = float(((X - C[labels]) ** 2).sum())
    return KMeansResult(C, labels, inertia, it)


def kmeans(X, k: int, seed=0, max_iter: int = 300, debug: bool = False) -> KMeansResult:
    X = _as_table(X)
    if k < 1 or k > X.shape[0]:
        raise DataError(f"k must be in [1, N={X.shape[0]}], got {k}")
    init = kmeans_pp_init(X, k, _rng(seed))
    return lloyd(X, init, max_iter, debug)


def bic_score(X, centroids, assignments) -> float:
    """Pelleg-Moore BIC of a hard clustering under identical spherical Gaussians.

    Log-likelihood uses the pooled MLE variance ``SSE / (N * D)`` and mixing
    weights ``n_j / N``. Free parameters: ``k - 1`` mixing weights, ``k * D``
    centroid coordinates and one shared variance, i.e. ``k * (D + 1)``.
    Returns ``+inf`` when the pooled variance is zero (every point sits on
    its centroid); callers treat that as an unbeatable fit.
    """
    X = _as_table(X)
    C = np.asarray(centroids, dtype=np.float64)
    labels = np.asarray(assignments)
    n, d = X.shape
    k = C.shape[0]
    sse = float(((X - C[labels]) ** 2).sum())
    var = sse / (n * d)
    if var <= 0:
        return math.inf
    sizes = np.bincount(labels, minlength=k)
    sizes = sizes[sizes > 0]
    loglik = (float((sizes * np.log(sizes)).sum()) - n * math.log(n)
              - 0.5 * n * d * math.log(2 * math.pi * var) - 0.5 * n * d)
    params = k * (d + 1)
    return loglik - 0.5 * params * math.log(n)


@dataclass(frozen=True)
class SplitTrial:
    k: int
    cluster: int
    size: int
    parent_bic: float
    children_bic: float
    accepted: bool


@dataclass(frozen=True, eq=False)
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    bic_trace: tuple[tuple[int, float], ...]
    seed: int | None
    splits: tuple[SplitTrial, ...] = field(default=())

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def xmeans(X, k_min: int = 1, k_max: int = 10, seed: int = 0,
           max_iter: int = 300) -> ClusterModel:
    """X-means: grow k by local BIC-tested 2-way splits, keep the best global BIC.

    Each round refines all centroids with Lloyd iterations, scores the whole
    clustering, then trial-splits every cluster with 2-means on its members.
    A split is accepted when the two-child BIC beats the one-parent BIC on
    those members; when more splits are accepted than ``k_max`` allows, the
    largest BIC gains win. The search ends when nothing splits or ``k_max`` is
    reached, and the configuration with the highest global BIC is returned.
    """
    X = _as_table(X)
    n = X.shape[0]
    if not 1 <= k_min <= k_max <= n:
        raise DataError(f"need 1 <= k_min <= k_max <= N; got k_min={k_min}, k_max={k_max}, N={n}")
    rng = np.random.default_rng(seed)
    C = kmeans_pp_init(X, k_min, rng)
    trace, splits, candidates = [], [], []
    while True:
        res = lloyd(X, C, max_iter)
        C, labels = res.centroids, res.assignments
        k = C.shape[0]
        score = bic_score(X, C, labels)
        trace.append((k, score))
        candidates.append((score, C, labels))
        if k >= k_max:
            break
        proposals, trials = [], []
        for j in range(k):
            members = X[labels == j]
            if members.shape[0] < 2:
                continue
            child = kmeans(members, 2, rng, max_iter)
            parent = bic_score(members, members.mean(axis=0, keepdims=True),
                               np.zeros(members.shape[0], dtype=np.int64))
            children = bic_score(members, child.centroids, child.assignments)
            trials.append((j, members.shape[0], parent, children))
            if children > parent:
                gain = children - parent if math.isfinite(children - parent) else math.inf
                proposals.append((gain, j, child.centroids))
        proposals.sort(key=lambda t: (-t[0], t[1]))
        accepted = {j: cc for _, j, cc in proposals[: k_max - k]}
        splits += [SplitTrial(k, j, sz, p, c, j in accepted) for j, sz, p, c in trials]
        if not accepted:
            break
        rows = []
        for j in range(k):
            rows.extend(accepted[j] if j in accepted else [C[j]])
        C = np.array(rows)
    best = max(range(len(candidates)), key=lambda i: (candidates[i][0], -i))
    score, C, labels = candidates[best]
    return ClusterModel(C.shape[0], C, labels, tuple(trace), seed, tuple(splits))


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected agreement between two partitions of the same items."""
    a = np.unique(np.asarray(a), return_inverse=True)[1]
    b = np.unique(np.asarray(b), return_inverse=True)[1]
    if a.shape != b.shape:
        raise DataError("partitions differ in length")
    n = a.size
    table = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(table, (a, b), 1)

    def pairs(x):
        return (x * (x - 1) // 2).sum()

    index = pairs(table)
    ra, rb = pairs(table.sum(axis=1)), pairs(table.sum(axis=0))
    total = n * (n - 1) // 2
    expected = ra * rb / total if total else 0.0
    top = 0.5 * (ra + rb)
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))
