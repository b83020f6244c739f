"""Gray-level co-occurrence matrices and Haralick descriptors over lung ROIs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError
from .imaging import QuantizedImage
from .segmentation import LungMask, split_lungs

CANONICAL_ANGLES = (0.0, 45.0, 90.0, 135.0)
HARALICK_NAMES = ("contrast", "energy", "entropy", "variance", "homogeneity",
                  "dissimilarity", "correlation")


@dataclass(frozen=True)
class GlcmOffset:
    """Pixel offset in screen coordinates (y grows downward).

    0 deg points right, 90 deg points up, so 45 deg is ``(+d, -d)``: the
    distance is measured in the chessboard (max-norm) metric, as in the
    classic Haralick setup. Other angles are accepted and rounded to the
    pixel grid on the same square of radius ``d``.
    """

    distance: int
    angle: float = 0.0

    def __post_init__(self):
        if self.distance < 1:
            raise DataError(f"GLCM distance must be >= 1, got {self.distance}")
        if self.delta == (0, 0):
            raise DataError(f"offset ({self.distance}, {self.angle} deg) rounds to zero")

    @property
    def delta(self) -> tuple[int, int]:
        t = math.radians(self.angle)
        c, s = math.cos(t), math.sin(t)
        r = self.distance / max(abs(c), abs(s))
        return int(round(r * c)), -int(round(r * s))


@dataclass(frozen=True, eq=False)
class GLCM:
    levels: int
    p: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class HaralickVector:
    contrast: float
    energy: float
    entropy: float
    variance: float
    homogeneity: float
    dissimilarity: float
    correlation: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in HARALICK_NAMES])


@dataclass(frozen=True, eq=False)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")

    def __add__(self, other: "FeatureVector") -> "FeatureVector":
        return FeatureVector(self.names + other.names,
                             np.concatenate([self.values, other.values]))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, map(float, self.values)))


def glcm_counts(bins: np.ndarray, valid: np.ndarray, offset: GlcmOffset, levels: int,
                symmetric: bool = True) -> np.ndarray:
    """Integer pair counts ``C[i, j]`` for pixel pairs with both ends in ``valid``."""
    bins = np.asarray(bins)
    valid = np.asarray(valid, dtype=bool)
    h, w = bins.shape
    dx, dy = offset.delta
    y0, y1 = max(0, -dy), h - max(0, dy)
    x0, x1 = max(0, -dx), w - max(0, dx)
    counts = np.zeros((levels, levels), dtype=np.int64)
    if y1 <= y0 or x1 <= x0:
        return counts
    ref = bins[y0:y1, x0:x1]
    nbr = bins[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
    ok = valid[y0:y1, x0:x1] & valid[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
    flat = ref[ok] * levels + nbr[ok]
    counts += np.bincount(flat, minlength=levels * levels).reshape(levels, levels)
    if symmetric:
        counts = counts + counts.T
    return counts


def glcm(qimg: QuantizedImage, mask: LungMask | None, offset: GlcmOffset,
         levels: int | None = None, symmetric: bool = True) -> GLCM:
    levels = levels or qimg.levels
    if qimg.bins.max() >= levels:
        raise DataError(f"image has bins >= levels ({levels})")
    valid = np.ones(qimg.shape, dtype=bool) if mask is None else mask.bits
    if valid.shape != qimg.shape:
        raise DataError(f"mask dimension mismatch: image {qimg.shape}, mask {valid.shape}")
    counts = glcm_counts(qimg.bins, valid, offset, levels, symmetric)
    total = counts.sum()
    if total == 0:
        raise DataError(f"no valid pixel pairs at offset d={offset.distance}, "
                        f"angle={offset.angle} (ROI too thin)")
    return GLCM(levels, counts / total, counts)


def haralick_features(g: GLCM) -> HaralickVector:
    p = g.p
    idx = np.arange(g.levels, dtype=np.float64)
    i, j = idx[:, None], idx[None, :]
    px, py = p.sum(axis=1), p.sum(axis=0)
    mu_x, mu_y = idx @ px, idx @ py
    var_x = ((idx - mu_x) ** 2) @ px
    var_y = ((idx - mu_y) ** 2) @ py
    diff = i - j
    nz = p[p > 0]
    sd = math.sqrt(var_x * var_y)
    if sd > 0:
        corr = float((((i - mu_x) * (j - mu_y)) * p).sum() / sd)
        corr = min(1.0, max(-1.0, corr))
    else:
        corr = 0.0
    return HaralickVector(
        contrast=float((diff ** 2 * p).sum()),
        energy=float((p ** 2).sum()),
        entropy=float(-(nz * np.log2(nz)).sum()) + 0.0,
        variance=float(var_x),
        homogeneity=float((p / (1.0 + diff ** 2)).sum()),
        dissimilarity=float((np.abs(diff) * p).sum()),
        correlation=corr,
    )


def roi_signature(qimg: QuantizedImage, mask: LungMask, side: str,
                  distances: Sequence[int], angles: Sequence[float] = CANONICAL_ANGLES,
                  symmetric: bool = True) -> FeatureVector:
    """Haralick features for one region, averaged over angles at each distance."""
    names, values = [], []
    for d in distances:
        per_angle = np.array([
            haralick_features(glcm(qimg, mask, GlcmOffset(d, a), symmetric=symmetric)).as_array()
            for a in angles
        ])
        mean = per_angle.mean(axis=0)
        for name, v in zip(HARALICK_NAMES, mean):
            names.append(f"{side}.d{d}.{name}")
            values.append(v)
    return FeatureVector(tuple(names), np.array(values))


def texture_signature(qimg: QuantizedImage, mask: LungMask,
                      distances: Sequence[int] = (1, 2, 4),
                      angles: Sequence[float] = CANONICAL_ANGLES,
                      symmetric: bool = True, split: bool = True) -> FeatureVector:
    """Concatenated per-side texture features named ``side.dN.feature``.

    With ``split`` the mask is divided into left/right lungs (a single
    connected blob yields one ``whole`` side); otherwise the whole mask is
    one region.
    """
    if not distances or not angles:
        raise DataError("texture config needs at least one distance and one angle")
    regions = split_lungs(mask) if split else [("whole", mask)]
    out = FeatureVector((), np.empty(0))
    for side, m in regions:
        out = out + roi_signature(qimg, m, side, distances, angles, symmetric)
    return out
