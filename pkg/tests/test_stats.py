import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from lungtex.errors import DataError
from lungtex.stats import (anova_oneway, shapiro_wilk, studentized_range_cdf,
                           studentized_range_ppf, tukey_kramer)


def test_shapiro_matches_scipy():
    rng = np.random.default_rng(0)
    for n in (3, 4, 7, 11, 12, 50, 400, 2000):
        x = rng.gamma(2.0, size=n)
        ours = shapiro_wilk(x)
        ref = sps.shapiro(x)
        assert abs(ours.w - ref.statistic) <= 1e-6
        assert abs(ours.p - ref.pvalue) <= 1e-4 * max(ref.pvalue, 1e-12) + 1e-12


def test_shapiro_errors_and_subsampling():
    with pytest.raises(DataError, match="too few observations"):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(DataError):
        shapiro_wilk([3.0, 3.0, 3.0, 3.0])
    big = np.random.default_rng(1).normal(size=12_000)
    a, b = shapiro_wilk(big, seed=4), shapiro_wilk(big, seed=4)
    assert a.n == 5000 and a.subsample_seed == 4 and a == b


def test_anova_identical_groups():
    vals = [1.0, 2.0, 4.0, 7.0]
    r = anova_oneway({"a": vals, "b": vals, "c": vals})
    assert r.f == 0 and r.p == 1


def test_anova_shifted_group():
    rng = np.random.default_rng(2)
    g = {"a": rng.normal(0, 1, 30), "b": rng.normal(0, 1, 30), "c": rng.normal(10, 1, 30)}
    assert anova_oneway(g).p < 1e-10


def test_anova_textbook():
    g = {"a": [6, 8, 4, 5, 3, 4], "b": [8, 12, 9, 11, 6, 8], "c": [13, 9, 11, 8, 7, 12]}
    # SSB = 84, SSW = 68, F = (84/2)/(68/15)
    r = anova_oneway(g)
    assert abs(r.f - (84 / 2) / (68 / 15)) <= 1e-6 * r.f
    assert (r.df_between, r.df_within) == (2, 15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(-100, 100), st.floats(0.01, 100))
def test_anova_affine_invariance(seed, shift, scale):
    rng = np.random.default_rng(seed)
    g = {k: rng.normal(i, 1, 12) for i, k in enumerate("abc")}
    f0 = anova_oneway(g).f
    f1 = anova_oneway({k: v + shift for k, v in g.items()}).f
    f2 = anova_oneway({k: v * scale for k, v in g.items()}).f
    assert abs(f1 - f0) <= 1e-9 * max(1, f0)
    assert abs(f2 - f0) <= 1e-9 * max(1, f0)


def test_studentized_range_vs_scipy():
    for k, df in ((2, 5), (3, 20), (4, 117), (6, 400), (10, 3)):
        for q in (0.5, 2.0, 3.5, 6.0):
            ref = sps.studentized_range.cdf(q, k, df)
            assert abs(studentized_range_cdf(q, k, df) - ref) <= 1e-7
        ref_q = sps.studentized_range.ppf(0.95, k, df)
        assert abs(studentized_range_ppf(0.95, k, df) - ref_q) <= 1e-6 * ref_q


def test_tukey_examples():
    rng = np.random.default_rng(3)
    same = rng.normal(size=15)
    rows = tukey_kramer({"x": same, "y": same.copy()})
    assert rows[0].mean_difference == 0 and not rows[0].significant
    assert rows[0].significance == "Not significant"

    rows = tukey_kramer({"lo": rng.normal(0, 1, 20), "hi": rng.normal(100, 1, 20)})
    assert rows[0].significant and rows[0].significance == "Significant"
    assert rows[0].pair == "lo x hi" or rows[0].pair == "hi x lo"


def test_tukey_matches_scipy_pvalues():
    rng = np.random.default_rng(4)
    g = {"a": rng.normal(0, 1, 12), "b": rng.normal(0.8, 1, 20), "c": rng.normal(1.5, 1, 9),
         "d": rng.normal(0.2, 1, 15)}
    ref = sps.tukey_hsd(*g.values())
    names = list(g)
    for row in tukey_kramer(g):
        i, j = names.index(row.group_a), names.index(row.group_b)
        assert abs(row.p - ref.pvalue[i, j]) <= 1e-6
        assert abs(row.mean_difference - (g[row.group_b].mean() - g[row.group_a].mean())) <= 1e-12


def test_tukey_permutation_invariant():
    rng = np.random.default_rng(5)
    g = {k: rng.normal(m, 1, 10) for k, m in zip("abcd", (0, 0.5, 1.5, 3))}
    fwd = {r.pair: r.significant for r in tukey_kramer(g)}
    rev = {}
    for r in tukey_kramer(dict(reversed(list(g.items())))):
        a, b = r.pair.split(" x ")
        rev[f"{a} x {b}"] = r.significant
        rev[f"{b} x {a}"] = r.significant
    for pair, sig in fwd.items():
        assert rev[pair] == sig


def test_tukey_p_monotone_in_separation():
    rng = np.random.default_rng(6)
    base = {k: rng.normal(0, 1, 10) for k in "abc"}
    direction = np.sign(base["c"].mean() - base["a"].mean())
    ps = []
    for shift in (0.0, 0.5, 1.0, 2.0, 4.0):
        g = dict(base)
        g["c"] = base["c"] + direction * shift
        row = next(r for r in tukey_kramer(g) if {r.group_a, r.group_b} == {"a", "c"})
        assert 0 <= row.p <= 1
        ps.append(row.p)
    assert all(b <= a + 1e-12 for a, b in zip(ps, ps[1:]))
