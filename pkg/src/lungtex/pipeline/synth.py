"""Deterministic synthetic chest-radiograph-like texture dataset.

Each image is a dark field, a bright elliptical "body" and two darker
elliptical "lungs". Lung interiors carry the class texture:

- ``normal``: smooth tissue, low noise
- ``type1``: grating varying along x (vertical bands)
- ``type2``: grating varying along y (horizontal bands)
- ``type3``: finer diagonal grating under heavy, ground-glass-like noise

Frequency, orientation, phase and amplitude are jittered per image.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..imaging import save_png
from .config import DEFAULT_LABELS, stage_seed
from .manifest import write_manifest

# period (px), orientation (deg, direction of intensity change), amplitude, noise sd
CLASS_TEXTURE = {
    "normal": (None, 0.0, 0.0, 0.02),
    "type1": (5.0, 0.0, 0.12, 0.05),
    "type2": (5.0, 90.0, 0.12, 0.05),
    "type3": (3.5, 45.0, 0.08, 0.09),
}


def lung_ellipses(size: int) -> list[tuple[float, float, float, float]]:
    """(cx, cy, rx, ry) of the two lung lobes."""
    return [(0.31 * size, 0.5 * size, 0.15 * size, 0.33 * size),
            (0.69 * size, 0.5 * size, 0.15 * size, 0.33 * size)]


def _ellipse(size: int, cx, cy, rx, ry) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def lung_mask(size: int) -> np.ndarray:
    m = np.zeros((size, size), dtype=bool)
    for e in lung_ellipses(size):
        m |= _ellipse(size, *e)
    return m


def render(label: str, size: int, rng: np.random.Generator) -> np.ndarray:
    period, angle, amp, noise = CLASS_TEXTURE[label]
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.full((size, size), 0.06)
    body = _ellipse(size, 0.5 * size, 0.52 * size, 0.47 * size, 0.47 * size)
    img[body] = 0.62 + 0.08 * (yy[body] / size)
    lungs = lung_mask(size)
    tissue = 0.33 + rng.normal(0.0, noise, (size, size))
    if period is not None:
        p = period * rng.uniform(0.92, 1.08)
        t = math.radians(angle + rng.uniform(-4.0, 4.0))
        a = amp * rng.uniform(0.85, 1.15)
        phase = rng.uniform(0.0, 2 * math.pi)
        # screen coords: y grows downward, so the angle is measured against -y
        proj = xx * math.cos(t) - yy * math.sin(t)
        tissue += a * np.sin(2 * math.pi * proj / p + phase)
    img[lungs] = tissue[lungs]
    return np.clip(img, 0.0, 1.0)


def class_counts(n_per_class: int, labels=DEFAULT_LABELS, imbalance: float = 1.0) -> dict[str, int]:
    """``imbalance > 1`` shrinks each successive class by that factor."""
    return {lab: max(1, int(round(n_per_class / imbalance ** i))) for i, lab in enumerate(labels)}


def make_synthetic_dataset(n_per_class: int, seed: int, out_dir: str | Path, size: int = 128,
                           imbalance: float = 1.0) -> Path:
    """Write images/, masks/ and manifest.csv under ``out_dir``; return the manifest path."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(stage_seed(seed, "synth"))
    mask = lung_mask(size).astype(np.float64)
    save_png(out / "masks" / "lungs.png", mask)
    rows = []
    for label, count in class_counts(n_per_class, imbalance=imbalance).items():
        for i in range(count):
            rid = f"{label}-{i:04d}"
            save_png(out / "images" / f"{rid}.png", render(label, size, rng))
            rows.append((rid, f"images/{rid}.png", label, "masks/lungs.png"))
    manifest = out / "manifest.csv"
    write_manifest(manifest, rows)
    return manifest
