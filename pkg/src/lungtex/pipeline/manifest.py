"""Dataset manifests: CSV with header ``id,image,label,mask``."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..errors import DataError

HEADER = ("id", "image", "label", "mask")


@dataclass(frozen=True)
class ManifestRow:
    id: str
    image: Path
    label: str
    mask: Path | None

    @property
    def needs_fallback(self) -> bool:
        return self.mask is None


@dataclass(frozen=True)
class Manifest:
    rows: tuple[ManifestRow, ...]
    path: Path | None = None

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.rows]


def ingest(path: str | Path, label_set: Iterable[str] | None = None) -> Manifest:
    """Read and validate a manifest. Relative paths resolve against its folder.

    A blank ``mask`` cell, or one naming a file that does not exist, leaves
    the row with ``mask=None`` so extraction falls back to the built-in
    segmenter.
    """
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    closed = set(label_set) if label_set else None
    base = p.parent
    try:
        with p.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames[:4]) != HEADER:
                raise DataError(f"manifest header must be {','.join(HEADER)}, got {reader.fieldnames}")
            records = list(reader)
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"unreadable manifest {p}: {exc}") from None
    seen: set[str] = set()
    rows = []
    for lineno, rec in enumerate(records, start=2):
        rid = (rec["id"] or "").strip()
        if not rid:
            raise DataError(f"line {lineno}: empty id")
        if rid in seen:
            raise DataError(f"duplicate id {rid!r} (line {lineno})")
        seen.add(rid)
        label = (rec["label"] or "").strip()
        if not label:
            raise DataError(f"line {lineno}: empty label for id {rid!r}")
        if closed is not None and label not in closed:
            raise DataError(f"unknown label {label!r} for id {rid!r}; allowed: {sorted(closed)}")
        image = base / (rec["image"] or "").strip()
        if not image.is_file():
            raise DataError(f"file not found: image {image} for id {rid!r}")
        mask_cell = (rec["mask"] or "").strip()
        mask = base / mask_cell if mask_cell else None
        if mask is not None and not mask.is_file():
            mask = None
        rows.append(ManifestRow(rid, image, label, mask))
    return Manifest(tuple(rows), p)


def write_manifest(path: str | Path, rows: Iterable[tuple[str, str, str, str]]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)
