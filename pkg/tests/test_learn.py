import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from lungtex.errors import DataError
from lungtex.learn import (Standardizer, adjusted_rand_index, bic_score, entropy_impurity,
                           fit_classifier, format_pm, gini_impurity, grid_search, kmeans, lloyd,
                           pca_fit, pca_inverse, pca_transform, stratified_kfold, tree_fit,
                           tree_predict, tree_predict_proba, xmeans)
from lungtex.learn.cluster import kmeans_pp_init

from oracles import bic_by_hand, pca_eigh


# --- PCA ------------------------------------------------------------------

def test_pca_rank_one_line():
    t = np.linspace(-3, 3, 25)
    X = np.column_stack([t, 2 * t])
    m = pca_fit(X, 2)
    assert np.allclose(m.components[0], np.array([1, 2]) / math.sqrt(5), atol=1e-12)
    assert abs(m.explained_variance[1]) <= 1e-12


def test_pca_identical_rows():
    m = pca_fit(np.tile([1.0, 2.0, 3.0], (6, 1)), 2)
    assert np.all(m.explained_variance == 0)
    assert np.allclose(m.components @ m.components.T, np.eye(2), atol=1e-10)


def test_pca_matches_eigh_50x5():
    X = np.random.default_rng(7).normal(size=(50, 5)) * [5, 3, 2, 1, 0.5]
    m = pca_fit(X, 5)
    comps, var = pca_eigh(X, 5)
    assert np.allclose(m.components, comps, atol=1e-8)
    assert np.allclose(m.explained_variance, var, atol=1e-8)


def test_pca_transform_mean_and_inverse():
    X = np.random.default_rng(8).normal(size=(40, 6))
    m = pca_fit(X, 6)
    assert np.allclose(pca_transform(m, X.mean(axis=0, keepdims=True)), 0, atol=1e-12)
    assert np.allclose(m.components @ m.components.T, np.eye(6), atol=1e-10)
    assert np.allclose(pca_inverse(m, pca_transform(m, X)), X, atol=1e-8)


def test_pca_too_few_samples():
    with pytest.raises(DataError, match="too few samples"):
        pca_fit(np.ones((1, 3)), 1)


def test_standardizer_constant_column():
    X = np.array([[1.0, 5.0], [3.0, 5.0]])
    Z = Standardizer.fit(X).transform(X)
    assert np.allclose(Z[:, 0], [-1, 1]) and np.all(Z[:, 1] == 0)


# --- k-means / X-means ------------------------------------------------------

def _blobs(seed, n=100, d=2, sigma=0.5, sep=10.0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0, 0], [sep, 0], [0, sep]], dtype=float)
    centers = np.hstack([centers, np.zeros((3, d - 2))])
    X = np.vstack([c + sigma * rng.normal(size=(n, d)) for c in centers])
    return X, np.repeat(np.arange(3), n)


def test_kmeans_trivial_cases():
    r = kmeans(np.tile([2.0, -1.0], (5, 1)), 1)
    assert np.allclose(r.centroids, [[2, -1]]) and r.inertia == 0
    r = kmeans(np.array([[0.0, 0.0], [4.0, 4.0]]), 2)
    assert sorted(map(tuple, r.centroids)) == [(0, 0), (4, 4)] and r.inertia == 0


def test_kmeans_blobs_ari():
    X, y = _blobs(0)
    r = kmeans(X, 3, seed=0)
    assert adjusted_rand_index(y, r.assignments) >= 0.99


def test_lloyd_inertia_monotone_debug():
    X = np.random.default_rng(3).normal(size=(300, 4))
    C = kmeans_pp_init(X, 6, np.random.default_rng(0))
    lloyd(X, C, debug=True)  # asserts internally


def test_bic_matches_hand_formula():
    X, y = _blobs(2, d=3)
    C = np.array([X[y == k].mean(axis=0) for k in range(3)])
    assert math.isclose(bic_score(X, C, y), bic_by_hand(X, y), rel_tol=1e-12)


def test_bic_zero_variance_sentinel():
    X = np.ones((4, 2))
    assert bic_score(X, X[:1], np.zeros(4, dtype=int)) == math.inf


def test_xmeans_identical_points():
    m = xmeans(np.ones((20, 3)), 1, 10, seed=0)
    assert m.k == 1


def test_xmeans_deterministic_and_bounded():
    X, _ = _blobs(4, d=5)
    a = xmeans(X, 2, 4, seed=11)
    b = xmeans(X, 2, 4, seed=11)
    assert 2 <= a.k <= 4
    assert np.array_equal(a.centroids, b.centroids) and np.array_equal(a.assignments, b.assignments)
    assert a.bic_trace == b.bic_trace


def test_ari_matches_sklearn():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.integers(0, 4, 50), rng.integers(0, 3, 50)
        assert math.isclose(adjusted_rand_index(a, b), adjusted_rand_score(a, b), abs_tol=1e-12)


# --- trees ----------------------------------------------------------------------

def test_impurities():
    assert entropy_impurity((10, 0)) == 0
    assert entropy_impurity((5, 5)) == 1.0
    assert math.isclose(entropy_impurity((1, 1, 2)), 1.5, abs_tol=1e-15)
    assert math.isclose(gini_impurity((5, 5)), 0.5)
    with pytest.raises(DataError):
        entropy_impurity((0, 0))


def test_single_class_single_leaf():
    X = np.random.default_rng(0).normal(size=(10, 3))
    m = tree_fit(X, ["k"] * 10)
    assert m.n_leaves == 1 and list(tree_predict(m, X)) == ["k"] * 10


def test_forced_midpoint():
    m = tree_fit(np.array([[0.0], [1.0], [2.0], [3.0]]), ["A", "A", "B", "B"])
    assert m.nodes[0].threshold == 1.5 and m.depth == 1


def test_xor_and_depth_one():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([0, 1, 1, 0])
    assert list(tree_predict(tree_fit(X, y, max_depth=2), X)) == [0, 1, 1, 0]
    stump = tree_fit(X, y, max_depth=1)
    assert stump.depth <= 1


def test_pure_tree_reproduces_training_labels():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(80, 3))
    y = rng.integers(0, 4, 80)
    m = tree_fit(X, y, "gini")
    assert np.array_equal(tree_predict(m, X), y)
    p = tree_predict_proba(m, X)
    assert np.allclose(p.sum(axis=1), 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["entropy", "gini"]))
def test_splits_never_increase_impurity(seed, crit):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, size=(50, 3)).astype(float)
    y = rng.integers(0, 3, 50)
    m = tree_fit(X, y, crit, 6)
    imp = entropy_impurity if crit == "entropy" else gini_impurity
    for nd in m.nodes:
        if nd.is_leaf:
            continue
        l, r = m.nodes[nd.left].counts, m.nodes[nd.right].counts
        n, nl, nr = sum(nd.counts), sum(l), sum(r)
        assert nl >= 1 and nr >= 1
        children = nl / n * imp(l) + nr / n * imp(r)
        assert children <= imp(nd.counts) + 1e-12
        assert imp(nd.counts) > 0


def test_width_mismatch():
    m = tree_fit(np.zeros((3, 2)) + np.arange(3)[:, None], [0, 1, 1])
    with pytest.raises(DataError):
        tree_predict(m, np.zeros((2, 3)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_training_accuracy_monotone_in_depth(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 3, 60)
    accs = [np.mean(tree_predict(tree_fit(X, y, "gini", d), X) == y) for d in range(1, 9)]
    assert all(b >= a - 1e-12 for a, b in zip(accs, accs[1:]))


# --- validation ----------------------------------------------------------------

def test_stratified_3x3():
    y = np.repeat(["a", "b", "c"], 3)
    for _, test in stratified_kfold(y, 3, seed=5):
        assert sorted(y[test]) == ["a", "b", "c"]


def test_stratified_two_to_one():
    # 18:9 splits exactly 2:1 into three folds of 6:3
    y = np.array([0] * 18 + [1] * 9)
    for _, test in stratified_kfold(y, 3, seed=0):
        assert (y[test] == 0).sum() == 6 and (y[test] == 1).sum() == 3


def test_stratified_partition_and_errors():
    y = np.array([0] * 20 + [1] * 10)
    folds = stratified_kfold(y, 3, seed=1)
    tests = np.concatenate([t for _, t in folds])
    assert sorted(tests) == list(range(30))
    for train, test in folds:
        assert not set(train) & set(test)
    with pytest.raises(DataError):
        stratified_kfold([0, 0, 1], 3)


def test_grid_search_separable():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(-3, 1, (30, 4)), rng.normal(3, 1, (30, 4))])
    y = np.repeat(["neg", "pos"], 30)
    report, clf = grid_search(X, y, range(1, 5), ("entropy", "gini"), 3, seed=0)
    assert report.mean == 1.0 and report.best_params["max_depth"] >= 1
    assert report.summary == "1.00 ± 0.000"
    assert np.array_equal(clf.predict(X), y)


def test_grid_search_tie_break_and_format():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(45, 3))
    y = np.repeat([0, 1, 2], 15)
    report, _ = grid_search(X, y, (3, 1, 2), ("gini", "entropy"), 3, seed=2)
    best = max(c.mean for c in report.cells)
    winners = [c for c in report.cells if c.mean >= best - 1e-12]
    first = min(winners, key=lambda c: (c.max_depth, c.criterion != "entropy"))
    assert (report.best_params["max_depth"], report.best_params["criterion"]) == \
        (first.max_depth, first.criterion)
    assert report.std == float(np.std(report.fold_scores))
    assert format_pm(0.93, 0.0514) == "0.93 ± 0.051"


def test_fit_classifier_without_pca():
    X = np.random.default_rng(2).normal(size=(30, 4))
    y = (X[:, 2] > 0).astype(int)
    clf = fit_classifier(X, y, "entropy", None, n_components=None)
    assert clf.pca is None and np.array_equal(clf.predict(X), y)
