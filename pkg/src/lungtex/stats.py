"""Normality and group-difference tests: Shapiro-Wilk, one-way ANOVA, Tukey-Kramer."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize, special

from .errors import DataError

SHAPIRO_MAX_N = 5000


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston 1995, algorithm AS R94)
# ---------------------------------------------------------------------------

_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coef: Sequence[float], x: float) -> float:
    return sum(c * x ** i for i, c in enumerate(coef))


@lru_cache(maxsize=32)
def _sw_coefficients(n: int) -> np.ndarray:
    """Half vector of Shapiro-Wilk weights, largest first (for x_(n) - x_(1))."""
    half = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = special.ndtri((np.arange(1, half + 1) - 0.375) / (n + 0.25))  # negative
    summ2 = 2.0 * float((m * m).sum())
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
        a = -m / fac
        a[0], a[1] = a1, a2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
        a = -m / fac
        a[0] = a1
    return a


@dataclass(frozen=True)
class ShapiroResult:
    w: float
    p: float
    n: int
    subsample_seed: int | None = None


def shapiro_wilk(x, seed: int = 0) -> ShapiroResult:
    """Shapiro-Wilk W and its p-value via Royston's normalizing transform.

    Samples larger than 5000 are subsampled without replacement using
    ``seed``, which is recorded in the result.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < 3:
        raise DataError("too few observations: Shapiro-Wilk needs n >= 3")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite observation")
    used_seed = None
    if x.size > SHAPIRO_MAX_N:
        x = np.random.default_rng(seed).choice(x, SHAPIRO_MAX_N, replace=False)
        used_seed = seed
    n = x.size
    x = np.sort(x)
    if x[-1] - x[0] <= 1e-19 * max(1.0, abs(x[-1])):
        raise DataError("zero-variance sample")
    a = _sw_coefficients(n)
    half = a.size
    num = float(a @ (x[::-1][:half] - x[:half])) ** 2
    den = float(((x - x.mean()) ** 2).sum())
    w = min(1.0, num / den)

    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return ShapiroResult(w, min(1.0, max(0.0, p)), n, used_seed)
    w1 = math.log(1.0 - w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if w1 >= gamma:
            return ShapiroResult(w, 1e-99, n, used_seed)
        y = -math.log(gamma - w1)
        mu = _poly(_C3, n)
        s = math.exp(_poly(_C4, n))
    else:
        y = w1
        ln = math.log(n)
        mu = _poly(_C5, ln)
        s = math.exp(_poly(_C6, ln))
    p = float(special.ndtr(-(y - mu) / s))
    return ShapiroResult(w, p, n, used_seed)


# ---------------------------------------------------------------------------
# One-way ANOVA
# ---------------------------------------------------------------------------

def _groups(g: Mapping[str, Sequence[float]]) -> list[tuple[str, np.ndarray]]:
    out = []
    for name, vals in g.items():
        v = np.asarray(vals, dtype=np.float64).ravel()
        if v.size < 2:
            raise DataError(f"group {name!r} has {v.size} observations; need >= 2")
        if not np.all(np.isfinite(v)):
            raise DataError(f"group {name!r} has non-finite values")
        out.append((str(name), v))
    if len(out) < 2:
        raise DataError("need at least 2 groups")
    return out


@dataclass(frozen=True)
class AnovaResult:
    f: float
    p: float
    df_between: int
    df_within: int
    ms_within: float


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail of the F distribution via the regularized incomplete beta."""
    if f <= 0:
        return 1.0
    return float(special.betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)))


def anova_oneway(g: Mapping[str, Sequence[float]]) -> AnovaResult:
    groups = _groups(g)
    allv = np.concatenate([v for _, v in groups])
    grand = allv.mean()
    ss_between = sum(v.size * (v.mean() - grand) ** 2 for _, v in groups)
    ss_within = sum(((v - v.mean()) ** 2).sum() for _, v in groups)
    dfb = len(groups) - 1
    dfw = allv.size - len(groups)
    scale = max(1.0, float((allv - grand) @ (allv - grand)))
    if ss_within <= 1e-15 * scale:
        raise DataError("zero within-group variance in every group")
    msw = ss_within / dfw
    f = (ss_between / dfb) / msw
    # identical group means give a between-SS of pure rounding noise
    if ss_between <= 1e-13 * scale:
        f = 0.0
    return AnovaResult(float(f), f_sf(f, dfb, dfw), dfb, dfw, float(msw))


# ---------------------------------------------------------------------------
# Studentized range distribution
# ---------------------------------------------------------------------------

def _gauss_legendre(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


_Z_NODES, _Z_WEIGHTS = _gauss_legendre(-8.5, 8.5, 24, 20)
_PHI_Z = np.exp(-0.5 * _Z_NODES ** 2) / math.sqrt(2 * math.pi)
_CDF_Z = special.ndtr(_Z_NODES)


def _range_cdf(w: np.ndarray, k: int) -> np.ndarray:
    """P(range of k iid standard normals <= w), vectorized over ``w``."""
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    inner = _CDF_Z[None, :] - special.ndtr(_Z_NODES[None, :] - w[:, None])
    vals = k * (np.clip(inner, 0.0, 1.0) ** (k - 1) * _PHI_Z[None, :]) @ _Z_WEIGHTS
    return np.clip(np.where(w > 0, vals, 0.0), 0.0, 1.0)


def studentized_range_cdf(q: float, k: int, df: float) -> float:
    """CDF of the studentized range for ``k`` means and ``df`` error d.o.f.

    Integrates the range distribution against the density of
    ``s = sqrt(chi2_df / df)`` with composite Gauss-Legendre rules.
    """
    if k < 2:
        raise DataError("studentized range needs k >= 2")
    if q <= 0:
        return 0.0
    if not math.isfinite(df) or df > 1e7:
        return float(_range_cdf(np.array([q]), k)[0])
    tail = 1e-16
    s_lo = math.sqrt(special.chdtri(df, 1.0 - tail) / df)
    s_hi = math.sqrt(special.chdtri(df, tail) / df)
    s, ws = _gauss_legendre(s_lo, s_hi, 64, 16)
    log_f = (math.log(2.0) + (df / 2.0) * math.log(df / 2.0) - special.gammaln(df / 2.0)
             + (df - 1.0) * np.log(s) - df * s * s / 2.0)
    val = float((np.exp(log_f) * _range_cdf(q * s, k)) @ ws)
    return min(1.0, max(0.0, val))


@lru_cache(maxsize=256)
def studentized_range_ppf(prob: float, k: int, df: float) -> float:
    if not 0.0 < prob < 1.0:
        raise DataError("probability must lie in (0, 1)")
    hi = 10.0
    while studentized_range_cdf(hi, k, df) < prob:
        hi *= 2.0
    return float(optimize.brentq(lambda q: studentized_range_cdf(q, k, df) - prob,
                                 1e-9, hi, xtol=1e-12, rtol=1e-13))


# ---------------------------------------------------------------------------
# Tukey-Kramer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TukeyRow:
    group_a: str
    group_b: str
    mean_difference: float  # mean(B) - mean(A)
    q: float
    p: float
    significant: bool

    @property
    def pair(self) -> str:
        return f"{self.group_a} x {self.group_b}"

    @property
    def significance(self) -> str:
        return "Significant" if self.significant else "Not significant"


def tukey_kramer(g: Mapping[str, Sequence[float]], alpha: float = 0.05) -> list[TukeyRow]:
    """All-pairs comparison with the Tukey-Kramer correction for unequal sizes."""
    if not 0.0 < alpha < 1.0:
        raise DataError("alpha must lie in (0, 1)")
    groups = _groups(g)
    aov = anova_oneway(g)
    k = len(groups)
    q_crit = studentized_range_ppf(1.0 - alpha, k, aov.df_within)
    rows = []
    for (na, va), (nb, vb) in combinations(groups, 2):
        diff = float(vb.mean() - va.mean())
        se = math.sqrt(aov.ms_within / 2.0 * (1.0 / va.size + 1.0 / vb.size))
        q = abs(diff) / se
        p = 1.0 - studentized_range_cdf(q, k, aov.df_within)
        rows.append(TukeyRow(na, nb, diff, q, min(1.0, max(0.0, p)), q > q_crit))
    return rows
