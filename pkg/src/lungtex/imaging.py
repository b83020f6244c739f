"""Radiograph loading, gray-level quantization and High-Frequency Emphasis.

Images are held as immutable float64 arrays in [0, 1], row-major with
``pixels[y, x]``.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import fft as sfft

from .errors import DataError

EQUALIZE_BINS = 256

_PGM_HEADER = re.compile(rb"\AP5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GrayImage:
    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise DataError(f"zero-dimension or non-2-D image: shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise DataError("image contains non-finite intensities")
        if px.min() < 0.0 or px.max() > 1.0:
            raise DataError("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", _frozen(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


@dataclass(frozen=True, eq=False)
class QuantizedImage:
    bins: np.ndarray
    levels: int

    def __post_init__(self):
        if self.levels < 2:
            raise DataError(f"levels must be >= 2, got {self.levels}")
        b = np.asarray(self.bins)
        if b.ndim != 2 or b.size == 0:
            raise DataError("quantized image must be a non-empty 2-D grid")
        if b.min() < 0 or b.max() >= self.levels:
            raise DataError("bin outside [0, levels)")
        object.__setattr__(self, "bins", _frozen(b.astype(np.int64)))

    @property
    def width(self) -> int:
        return self.bins.shape[1]

    @property
    def height(self) -> int:
        return self.bins.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bins.shape


@dataclass(frozen=True)
class HefParams:
    """Gaussian high-frequency-emphasis filter ``H = a + b * highpass``.

    ``d0`` is the Gaussian cutoff in cycles per sample, measured radially
    from DC, so it is independent of the image size.
    """

    a: float = 0.5
    b: float = 2.0
    d0: float = 0.05
    equalize: bool = True

    def __post_init__(self):
        if self.b < 0:
            raise DataError(f"HEF gain b must be >= 0, got {self.b}")
        if self.d0 <= 0:
            raise DataError(f"HEF cutoff d0 must be > 0, got {self.d0}")


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def read_pgm(data: bytes) -> tuple[np.ndarray, int]:
    """Decode a binary (P5) PGM into ``(values, maxval)``."""
    m = _PGM_HEADER.match(data)
    if m is None:
        raise DataError("unsupported format: not a binary P5 PGM")
    width, height, maxval = (int(g) for g in m.groups())
    if width == 0 or height == 0:
        raise DataError("zero-dimension image")
    if not 0 < maxval < 65536:
        raise DataError(f"invalid PGM maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    body = data[m.end():]
    need = width * height * dtype.itemsize
    if len(body) < need:
        raise DataError("truncated PGM payload")
    arr = np.frombuffer(body[:need], dtype=dtype).reshape(height, width)
    return arr.astype(np.int64), maxval


def write_pgm(path: str | Path, values: np.ndarray, maxval: int = 255) -> None:
    values = np.asarray(values)
    h, w = values.shape
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + values.astype(dtype).tobytes())


def _decode(data: bytes) -> np.ndarray:
    """Bytes of a PNG/PGM file -> float intensities in [0, 1]."""
    if data[:2] == b"P5":
        arr, maxval = read_pgm(data)
        return arr / float(maxval)
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        raise DataError(f"unsupported format: {exc}") from None
    if im.format not in ("PNG", "PPM"):
        raise DataError(f"unsupported format: {im.format}")
    if im.width == 0 or im.height == 0:
        raise DataError("zero-dimension image")
    if im.mode in ("I;16", "I;16B", "I;16L", "I"):
        return np.asarray(im, dtype=np.float64) / 65535.0
    if im.mode != "L":
        # ITU-R 601 luma
        im = im.convert("L")
    return np.asarray(im, dtype=np.float64) / 255.0


def decode_image(data: bytes) -> GrayImage:
    if not data:
        raise DataError("unsupported format: empty file")
    return GrayImage(np.clip(_decode(data), 0.0, 1.0))


def load_image(path: str | Path) -> GrayImage:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    return decode_image(p.read_bytes())


def save_png(path: str | Path, pixels: np.ndarray) -> None:
    """Write intensities in [0, 1] as an 8-bit grayscale PNG."""
    arr = np.round(np.clip(pixels, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


# ---------------------------------------------------------------------------
# Quantization and enhancement
# ---------------------------------------------------------------------------

def quantize(img: GrayImage, levels: int) -> QuantizedImage:
    if levels < 2:
        raise DataError(f"levels must be >= 2, got {levels}")
    bins = np.floor(img.pixels * levels).astype(np.int64)
    return QuantizedImage(np.minimum(bins, levels - 1), levels)


def minmax(x: np.ndarray) -> np.ndarray:
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi <= lo:
        return np.zeros_like(x, dtype=np.float64)
    return (x - lo) / (hi - lo)


def _padded_shape(shape: tuple[int, int]) -> tuple[int, int]:
    return tuple(sfft.next_fast_len(n, real=True) for n in shape)


def forward_dft(pixels: np.ndarray) -> np.ndarray:
    """Forward 2-D DFT (``1/N`` normalized) on the efficient padded grid.

    Non-efficient sizes are padded by mirror extension; use
    :func:`inverse_dft` with the original shape to crop back.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    ph, pw = _padded_shape(pixels.shape)
    h, w = pixels.shape
    if (ph, pw) != (h, w):
        pixels = np.pad(pixels, ((0, ph - h), (0, pw - w)), mode="symmetric")
    return sfft.fft2(pixels, norm="forward")


def inverse_dft(spectrum: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    out = sfft.ifft2(spectrum, norm="forward").real
    return out[: shape[0], : shape[1]]


def hef_transfer(shape: tuple[int, int], params: HefParams) -> np.ndarray:
    """Transfer function on an unshifted DFT grid of the given shape."""
    fy = sfft.fftfreq(shape[0])[:, None]
    fx = sfft.fftfreq(shape[1])[None, :]
    d2 = fy * fy + fx * fx
    return params.a + params.b * (1.0 - np.exp(-d2 / (2.0 * params.d0 ** 2)))


def filtered_spectrum(img: GrayImage, params: HefParams) -> np.ndarray:
    spec = forward_dft(img.pixels)
    return spec * hef_transfer(spec.shape, params)


def hef_response(img: GrayImage, params: HefParams) -> np.ndarray:
    """Filtered image before renormalization (may leave [0, 1])."""
    return inverse_dft(filtered_spectrum(img, params), img.shape)


def hef_filter(img: GrayImage, params: HefParams | None = None) -> GrayImage:
    params = params or HefParams()
    out = minmax(hef_response(img, params))
    out = GrayImage(np.clip(out, 0.0, 1.0))
    if params.equalize:
        out = equalize_hist(out)
    return out


def equalize_hist(img: GrayImage) -> GrayImage:
    """Map each pixel to the cumulative share of pixels in its bin or below."""
    bins = np.minimum(np.floor(img.pixels * EQUALIZE_BINS).astype(np.int64), EQUALIZE_BINS - 1)
    counts = np.bincount(bins.ravel(), minlength=EQUALIZE_BINS)
    cdf = np.cumsum(counts) / bins.size
    return GrayImage(cdf[bins])
