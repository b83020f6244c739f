"""Per-image feature extraction and the CSV feature table."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, LungtexError, SegmentationError
from ..imaging import GrayImage, decode_image, hef_filter, load_image, quantize
from ..segmentation import LungMask, decode_mask, fallback_mask, load_mask, split_lungs
from ..texture import FeatureVector, HARALICK_NAMES, roi_signature
from ..wavelets import roi_wavelet_signature
from .config import PipelineConfig
from .manifest import Manifest

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    ids: tuple[str, ...]
    names: tuple[str, ...]
    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(len(self.ids), len(self.names))
        if not np.all(np.isfinite(v)):
            raise DataError("feature table contains non-finite values")
        if self.labels is not None and len(self.labels) != len(self.ids):
            raise DataError("labels and ids differ in length")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def y(self) -> np.ndarray:
        if self.labels is None:
            raise DataError("feature table has no labels")
        return np.array(self.labels)


@dataclass(frozen=True)
class RowError:
    id: str
    stage: str
    message: str


def feature_width(config: PipelineConfig) -> int:
    sides = 2 if config.split_sides else 1
    bands = 3 * config.wavelet_levels + 1
    return sides * (len(config.distances) * len(HARALICK_NAMES) + 2 * bands)


def image_features(img: GrayImage, mask: LungMask | None, config: PipelineConfig) -> FeatureVector:
    """HEF -> quantize -> lung split -> Haralick + wavelet features per side."""
    if mask is None:
        if not config.fallback_segmenter:
            raise SegmentationError("no mask supplied and fallback segmenter disabled")
        mask = fallback_mask(img)
    if mask.shape != img.shape:
        raise DataError(f"mask dimension mismatch: image {img.shape}, mask {mask.shape}")
    enhanced = hef_filter(img, config.hef)
    q = quantize(enhanced, config.levels)
    if config.split_sides:
        regions = split_lungs(mask)
        if regions[0][0] == "whole":
            raise SegmentationError("expected two lung regions, found one connected blob")
    else:
        regions = [("whole", mask)]
    out = FeatureVector((), np.empty(0))
    for side, m in regions:
        out = out + roi_signature(q, m, side, config.distances, config.angles, config.symmetric)
        out = out + roi_wavelet_signature(enhanced, m, side, config.wavelet,
                                          config.wavelet_levels, config.k_sigma)
    return out


def features_from_bytes(image: bytes, mask: bytes | None, config: PipelineConfig) -> FeatureVector:
    img = decode_image(image)
    m = decode_mask(mask, img.shape) if mask else None
    return image_features(img, m, config)


def _row(row, config):
    try:
        img = load_image(row.image)
        mask = load_mask(row.mask, img.shape) if row.mask is not None else None
        return image_features(img, mask, config), None
    except LungtexError as exc:
        return None, RowError(row.id, "extract", str(exc))
    except Exception as exc:  # noqa: BLE001 - a bad image must not end the batch
        log.exception("unexpected failure on %s", row.id)
        return None, RowError(row.id, "extract", f"{type(exc).__name__}: {exc}")


def extract_features(manifest: Manifest, config: PipelineConfig,
                     workers: int = 1) -> tuple[FeatureTable, list[RowError]]:
    """Extract one row per manifest entry, in manifest order.

    Failures are collected as :class:`RowError` records and the batch carries
    on; rows whose feature names differ from the expected layout are also
    reported as errors.
    """
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda r: _row(r, config), manifest.rows))
    else:
        results = [_row(r, config) for r in manifest.rows]
    ids, labels, values, errors = [], [], [], []
    names = None
    for row, (fv, err) in zip(manifest.rows, results):
        if err is not None:
            errors.append(err)
            continue
        if names is None:
            names = fv.names
        elif fv.names != names:
            errors.append(RowError(row.id, "extract", "feature layout differs from first row"))
            continue
        ids.append(row.id)
        labels.append(row.label)
        values.append(fv.values)
    if names is None:
        names = ()
    table = FeatureTable(tuple(ids), names, np.array(values).reshape(len(ids), len(names)),
                         tuple(labels))
    return table, errors


def write_features_csv(path: str | Path, table: FeatureTable) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "label") + table.names)
        labels = table.labels or ("",) * len(table)
        for rid, lab, vals in zip(table.ids, labels, table.values):
            w.writerow([rid, lab] + [repr(float(v)) for v in vals])


def read_features_csv(path: str | Path) -> FeatureTable:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    with p.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0][:2]) != ("id", "label"):
        raise DataError(f"{p}: feature CSV must start with columns id,label")
    names = tuple(rows[0][2:])
    ids, labels, values = [], [], []
    for r in rows[1:]:
        if len(r) != len(names) + 2:
            raise DataError(f"{p}: row {r[:1]} has {len(r)} cells, expected {len(names) + 2}")
        ids.append(r[0])
        labels.append(r[1])
        try:
            values.append([float(x) for x in r[2:]])
        except ValueError as exc:
            raise DataError(f"{p}: {exc}") from None
    has_labels = any(labels)
    return FeatureTable(tuple(ids), names, np.array(values).reshape(len(ids), len(names)),
                        tuple(labels) if has_labels else None)


def write_errors_csv(path: str | Path, errors: list[RowError]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "stage", "message"))
        for e in errors:
            w.writerow((e.id, e.stage, e.message))
