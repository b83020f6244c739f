"""Slow, obviously-correct reference implementations used as test oracles."""

from collections import deque
import math

import numpy as np


def naive_dft2(x):
    """O(N^4) 2-D DFT with 1/(M*N) normalization."""
    x = np.asarray(x, dtype=np.float64)
    m, n = x.shape
    out = np.zeros((m, n), dtype=complex)
    for u in range(m):
        for v in range(n):
            s = 0j
            for y in range(m):
                for xx in range(n):
                    s += x[y, xx] * np.exp(-2j * np.pi * (u * y / m + v * xx / n))
            out[u, v] = s / (m * n)
    return out


def brute_glcm(bins, valid, dx, dy, levels, symmetric):
    """Integer pair counts by enumerating every pixel. (dx, dy) in screen coords."""
    h, w = bins.shape
    c = np.zeros((levels, levels), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            y2, x2 = y + dy, x + dx
            if not (0 <= y2 < h and 0 <= x2 < w):
                continue
            if not (valid[y, x] and valid[y2, x2]):
                continue
            c[bins[y, x], bins[y2, x2]] += 1
            if symmetric:
                c[bins[y2, x2], bins[y, x]] += 1
    return c


def haralick_direct(p):
    """Seven Haralick features by explicit double loops over the matrix."""
    L = p.shape[0]
    px = [sum(p[i, j] for j in range(L)) for i in range(L)]
    py = [sum(p[i, j] for i in range(L)) for j in range(L)]
    mx = sum(i * px[i] for i in range(L))
    my = sum(j * py[j] for j in range(L))
    vx = sum((i - mx) ** 2 * px[i] for i in range(L))
    vy = sum((j - my) ** 2 * py[j] for j in range(L))
    out = dict(contrast=0.0, energy=0.0, entropy=0.0, homogeneity=0.0, dissimilarity=0.0)
    cov = 0.0
    for i in range(L):
        for j in range(L):
            v = p[i, j]
            out["contrast"] += (i - j) ** 2 * v
            out["energy"] += v * v
            if v > 0:
                out["entropy"] -= v * math.log2(v)
            out["homogeneity"] += v / (1 + (i - j) ** 2)
            out["dissimilarity"] += abs(i - j) * v
            cov += (i - mx) * (j - my) * v
    out["variance"] = vx
    out["correlation"] = cov / math.sqrt(vx * vy) if vx * vy > 0 else 0.0
    return out


def bfs_components(bits):
    """4-connected components by breadth-first search, as a list of pixel sets."""
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    comps = []
    for y in range(h):
        for x in range(w):
            if not bits[y, x] or seen[y, x]:
                continue
            comp, q = set(), deque([(y, x)])
            seen[y, x] = True
            while q:
                cy, cx = q.popleft()
                comp.add((cy, cx))
                for ny, nx in ((cy + 1, cx), (cy - 1, cx), (cy, cx + 1), (cy, cx - 1)):
                    if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        q.append((ny, nx))
            comps.append(comp)
    return comps


def pca_eigh(X, n_components):
    """Components and variances from the eigendecomposition of the sample covariance."""
    X = np.asarray(X, dtype=np.float64)
    cov = np.cov(X, rowvar=False, ddof=1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:n_components]
    comps = vecs[:, order].T
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    return comps, np.clip(vals[order], 0.0, None)


def bic_by_hand(X, labels):
    """Spherical-Gaussian BIC written out term by term."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    ks = sorted(set(labels.tolist()))
    sse = 0.0
    ll = 0.0
    for k in ks:
        pts = X[labels == k]
        sse += ((pts - pts.mean(axis=0)) ** 2).sum()
    var = sse / (n * d)
    for k in ks:
        nk = (labels == k).sum()
        ll += nk * math.log(nk / n)
    ll += -n * d / 2 * math.log(2 * math.pi * var) - n * d / 2
    return ll - len(ks) * (d + 1) / 2 * math.log(n)
