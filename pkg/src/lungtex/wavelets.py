"""Dyadic 2-D discrete wavelet transform and sub-band statistics.

Each level filters rows, then columns, of the running LL band with an
orthonormal two-channel filter bank that wraps around periodically. Level-l
bands have ``ceil(n / 2**l)`` samples per axis: an odd-length axis is first
lifted to even length by an isometric extension that appends one sample
equal to the (rescaled) mean. Every per-axis step is therefore an isometry
``T`` with ``T.T @ T = I``, so the transform conserves energy and
reconstruction by the transpose is exact, for odd sizes too. Constant
signals stay constant under the extension and produce zero detail bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError
from .imaging import GrayImage
from .segmentation import LungMask, bounding_box
from .texture import FeatureVector

_S3 = math.sqrt(3.0)
FILTERS = {
    "haar": np.array([1.0, 1.0]) / math.sqrt(2.0),
    # 4-tap Daubechies (two vanishing moments)
    "db4": np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * math.sqrt(2.0)),
}
DETAIL_BANDS = ("LH", "HL", "HH")


def _lowpass(wavelet: str) -> np.ndarray:
    try:
        return FILTERS[wavelet]
    except KeyError:
        raise DataError(f"unknown wavelet {wavelet!r}; choose from {sorted(FILTERS)}") from None


@lru_cache(maxsize=64)
def _filter_bank(wavelet: str, n: int) -> np.ndarray:
    """Orthogonal ``n x n`` periodized bank (n even): lowpass rows on top."""
    h = _lowpass(wavelet)
    taps = len(h)
    g = np.array([(-1) ** k * h[taps - 1 - k] for k in range(taps)])
    half = n // 2
    m = np.zeros((n, n))
    for k in range(half):
        for t in range(taps):
            col = (2 * k + t) % n
            m[k, col] += h[t]
            m[half + k, col] += g[t]
    return m


def _odd_extension(n: int) -> np.ndarray:
    """Isometry R^n -> R^(n+1) mapping constants to constants.

    ``x -> [x - mean, 0] + mean * sqrt(n / (n + 1))``: the zero-mean part is
    zero-padded and the mean direction is mapped onto the constant vector.
    """
    e = np.zeros((n + 1, n))
    e[:n, :] = np.eye(n) - 1.0 / n
    e += math.sqrt(n / (n + 1.0)) / n
    return e


@lru_cache(maxsize=128)
def analysis_matrix(wavelet: str, n: int) -> np.ndarray:
    """One-level analysis operator for length ``n``: shape ``(even(n), n)``.

    Columns are orthonormal; the synthesis operator is its transpose.
    """
    if n < 2:
        raise ValueError(f"analysis length must be >= 2, got {n}")
    if n % 2:
        m = _filter_bank(wavelet, n + 1) @ _odd_extension(n)
    else:
        m = _filter_bank(wavelet, n).copy()
    m.setflags(write=False)
    return m


def _even(n: int) -> int:
    return n + (n % 2)


@dataclass(frozen=True, eq=False)
class WaveletPyramid:
    """``details[l]`` holds (LH, HL, HH) of level ``l + 1``; ``approx`` is the last LL.

    ``shapes[l]`` is the shape of the signal that level ``l + 1`` decomposed.
    """

    wavelet: str
    shapes: tuple[tuple[int, int], ...]
    details: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]
    approx: np.ndarray

    @property
    def levels(self) -> int:
        return len(self.details)

    def bands(self):
        """Yield ``(level, name, coefficients)`` for every sub-band."""
        for lvl, trio in enumerate(self.details, start=1):
            for name, c in zip(DETAIL_BANDS, trio):
                yield lvl, name, c
        yield self.levels, "LL", self.approx

    def coefficient_energy(self) -> float:
        return float(sum((c ** 2).sum() for _, _, c in self.bands()))


def dwt2(img: GrayImage | np.ndarray, wavelet: str = "haar", levels: int = 3) -> WaveletPyramid:
    x = np.asarray(img.pixels if isinstance(img, GrayImage) else img, dtype=np.float64)
    if x.ndim != 2:
        raise DataError("dwt2 expects a 2-D array")
    if levels < 1:
        raise DataError(f"levels must be >= 1, got {levels}")
    if min(x.shape) < 2 ** levels:
        raise DataError(f"image {x.shape} too small for {levels} levels "
                        f"(needs min dimension >= {2 ** levels})")
    _lowpass(wavelet)
    shapes, details = [], []
    for _ in range(levels):
        shapes.append(x.shape)
        rows = analysis_matrix(wavelet, x.shape[0])
        cols = analysis_matrix(wavelet, x.shape[1])
        c = rows @ x @ cols.T
        hh, hw = c.shape[0] // 2, c.shape[1] // 2
        # first letter: horizontal (x) filter, second: vertical (y) filter
        ll, hl = c[:hh, :hw], c[:hh, hw:]
        lh, hhb = c[hh:, :hw], c[hh:, hw:]
        details.append((lh.copy(), hl.copy(), hhb.copy()))
        x = ll.copy()
    return WaveletPyramid(wavelet, tuple(shapes), tuple(details), x)


def idwt2(pyr: WaveletPyramid) -> np.ndarray:
    if pyr.levels < 1 or len(pyr.shapes) != pyr.levels:
        raise DataError("malformed pyramid: level count mismatch")
    x = np.asarray(pyr.approx, dtype=np.float64)
    for lvl in range(pyr.levels - 1, -1, -1):
        shape = pyr.shapes[lvl]
        half = (_even(shape[0]) // 2, _even(shape[1]) // 2)
        lh, hl, hh = pyr.details[lvl]
        if any(np.shape(b) != half for b in (x, lh, hl, hh)):
            raise DataError(f"malformed pyramid: level {lvl + 1} bands do not match {half}")
        c = np.block([[x, hl], [lh, hh]])
        rows = analysis_matrix(pyr.wavelet, shape[0])
        cols = analysis_matrix(pyr.wavelet, shape[1])
        x = rows.T @ c @ cols
    return x


@dataclass(frozen=True)
class BandStats:
    energy: float
    significant_fraction: float


@dataclass(frozen=True)
class SubbandFeatures:
    bands: tuple[tuple[str, BandStats], ...]

    def vector(self, prefix: str = "") -> FeatureVector:
        names, values = [], []
        for key, st in self.bands:
            names += [f"{prefix}{key}.energy", f"{prefix}{key}.sigfrac"]
            values += [st.energy, st.significant_fraction]
        return FeatureVector(tuple(names), np.array(values))


def band_stats(c: np.ndarray, k_sigma: float) -> BandStats:
    c = np.asarray(c, dtype=np.float64)
    sigma = float(c.std())
    frac = float((np.abs(c) > k_sigma * sigma).mean()) if sigma > 0 else 0.0
    return BandStats(float((c ** 2).sum()), frac)


def wavelet_features(pyr: WaveletPyramid, k_sigma: float = 3.0) -> SubbandFeatures:
    if k_sigma <= 0:
        raise DataError(f"k_sigma must be > 0, got {k_sigma}")
    return SubbandFeatures(tuple(
        (f"wav.L{lvl}.{name}", band_stats(c, k_sigma)) for lvl, name, c in pyr.bands()
    ))


def roi_patch(img: GrayImage, mask: LungMask) -> np.ndarray:
    """Bounding-box crop of the ROI with background filled by the ROI mean."""
    if img.shape != mask.shape:
        raise DataError(f"mask dimension mismatch: image {img.shape}, mask {mask.shape}")
    x0, y0, x1, y1 = bounding_box(mask.bits)
    patch = img.pixels[y0:y1 + 1, x0:x1 + 1].copy()
    inside = mask.bits[y0:y1 + 1, x0:x1 + 1]
    patch[~inside] = patch[inside].mean()
    return patch


def roi_wavelet_signature(img: GrayImage, mask: LungMask, side: str, wavelet: str = "haar",
                          levels: int = 3, k_sigma: float = 3.0) -> FeatureVector:
    pyr = dwt2(roi_patch(img, mask), wavelet, levels)
    return wavelet_features(pyr, k_sigma).vector(prefix=f"{side}.")
