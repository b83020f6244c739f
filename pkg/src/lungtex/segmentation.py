"""Lung mask ingestion and left/right region splitting.

Masks come from an external segmenter. Sides are named by position in image
coordinates: ``left`` is the component whose centroid has the smaller x,
which on a standard PA radiograph is the patient's right lung.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import DataError, SegmentationError
from .imaging import GrayImage, QuantizedImage, _decode

SIDES = ("left", "right")

# 4-connectivity
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class LungMask:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=bool)
        if b.ndim != 2:
            raise DataError("mask must be 2-D")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    @property
    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True, eq=False)
class RoiPixels:
    bins: np.ndarray
    bbox: tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive
    side: str


def decode_mask(data: bytes, expected_dims: tuple[int, int] | None = None) -> LungMask:
    mask = LungMask(_decode(data) > 0)
    if expected_dims is not None and tuple(expected_dims) != mask.shape:
        raise DataError(f"mask dimension mismatch: expected {tuple(expected_dims)}, got {mask.shape}")
    if mask.count == 0:
        raise SegmentationError("empty mask")
    return mask


def load_mask(path: str | Path, expected_dims: tuple[int, int] | None = None) -> LungMask:
    """Read a PNG/PGM mask (nonzero = lung). ``expected_dims`` is (height, width)."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    return decode_mask(p.read_bytes(), expected_dims)


def components(bits: np.ndarray) -> list[np.ndarray]:
    """4-connected components, largest first (raster order breaks ties)."""
    labels, n = ndimage.label(bits, structure=_CROSS)
    if n == 0:
        return []
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    order = sorted(range(n), key=lambda i: (-sizes[i], i))
    return [labels == (i + 1) for i in order]


def split_lungs(mask: LungMask) -> list[tuple[str, LungMask]]:
    """Return ``[("left", m), ("right", m)]``, or ``[("whole", mask)]`` for a single blob.

    Only the two largest components are kept; smaller ones are discarded.
    """
    comps = components(mask.bits)
    if not comps:
        raise SegmentationError("empty mask")
    if len(comps) == 1:
        return [("whole", mask)]
    a, b = comps[0], comps[1]
    cx_a = np.nonzero(a)[1].mean()
    cx_b = np.nonzero(b)[1].mean()
    if cx_b < cx_a:
        a, b = b, a
    return [("left", LungMask(a)), ("right", LungMask(b))]


def bounding_box(bits: np.ndarray) -> tuple[int, int, int, int]:
    ys, xs = np.nonzero(bits)
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


def extract_roi(qimg: QuantizedImage, mask: LungMask, side: str = "whole") -> RoiPixels:
    if qimg.shape != mask.shape:
        raise DataError(f"mask dimension mismatch: image {qimg.shape}, mask {mask.shape}")
    if mask.count == 0:
        raise SegmentationError("empty selection")
    return RoiPixels(qimg.bins[mask.bits], bounding_box(mask.bits), side)


def otsu_threshold(pixels: np.ndarray, nbins: int = 256) -> float:
    """Threshold maximizing between-class variance of the intensity histogram."""
    hist, edges = np.histogram(pixels, bins=nbins, range=(0.0, 1.0))
    centers = 0.5 * (edges[:-1] + edges[1:])
    w0 = np.cumsum(hist).astype(np.float64)
    w1 = w0[-1] - w0
    s0 = np.cumsum(hist * centers)
    m0 = np.divide(s0, w0, out=np.zeros_like(s0), where=w0 > 0)
    m1 = np.divide(s0[-1] - s0, w1, out=np.zeros_like(s0), where=w1 > 0)
    between = w0 * w1 * (m0 - m1) ** 2
    return float(edges[int(np.argmax(between)) + 1])


def fallback_mask(img: GrayImage) -> LungMask:
    """Mask-free heuristic: dark regions below Otsu, not touching the border.

    The image is Gaussian-smoothed first so fine texture does not fragment
    the regions, and holes are filled. Keeps the two largest components.
    Crude, but enough for demo runs where no external segmentation exists.
    """
    sigma = max(1.0, min(img.shape) / 64.0)
    smooth = ndimage.gaussian_filter(img.pixels, sigma, mode="nearest")
    dark = smooth < otsu_threshold(smooth)
    kept = []
    for comp in components(dark):
        if comp[0, :].any() or comp[-1, :].any() or comp[:, 0].any() or comp[:, -1].any():
            continue
        kept.append(comp)
        if len(kept) == 2:
            break
    if not kept:
        raise SegmentationError("fallback segmentation found no lung region")
    bits = kept[0] if len(kept) == 1 else kept[0] | kept[1]
    return LungMask(ndimage.binary_fill_holes(bits, structure=_CROSS))
