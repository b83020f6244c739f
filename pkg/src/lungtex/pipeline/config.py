"""Pipeline configuration: one INI-style key/value file, commented on dump."""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..imaging import HefParams
from ..texture import CANONICAL_ANGLES

DEFAULT_LABELS = ("normal", "type1", "type2", "type3")

# stage order is part of the seeding contract; append only
STAGES = ("synth", "cluster", "cv", "stats")


def stage_seed(master: int, stage: str) -> int:
    """Seed for one stage: first word of ``SeedSequence([master, stage_index])``."""
    return int(np.random.SeedSequence([master, STAGES.index(stage)]).generate_state(1)[0])


# (section, key, attribute, help)
_LAYOUT = (
    ("imaging", "levels", "levels", "gray levels L used for GLCM quantization"),
    ("imaging", "hef_a", "hef_a", "HEF offset gain a (low-frequency retention)"),
    ("imaging", "hef_b", "hef_b", "HEF high-frequency gain b (>= 0)"),
    ("imaging", "hef_d0", "hef_d0", "HEF Gaussian cutoff, cycles/sample (> 0)"),
    ("imaging", "equalize", "equalize", "histogram-equalize after HEF"),
    ("texture", "distances", "distances", "GLCM pixel distances"),
    ("texture", "angles", "angles", "GLCM angles in degrees (screen coords, y down)"),
    ("texture", "symmetric", "symmetric", "count each pair in both directions"),
    ("texture", "split_sides", "split_sides", "split mask into left/right lungs"),
    ("wavelets", "wavelet", "wavelet", "haar or db4 (4-tap Daubechies)"),
    ("wavelets", "levels", "wavelet_levels", "dyadic decomposition levels"),
    ("wavelets", "k_sigma", "k_sigma", "significance threshold in band std units"),
    ("learn", "pca_components", "pca_components", "PCA components before clustering/tree (0 = off)"),
    ("learn", "k_min", "k_min", "X-means smallest cluster count"),
    ("learn", "k_max", "k_max", "X-means largest cluster count"),
    ("learn", "depth_grid", "depth_grid", "tree depths searched"),
    ("learn", "criteria", "criteria", "tree criteria searched"),
    ("learn", "cv_folds", "cv_folds", "stratified folds"),
    ("learn", "min_samples_leaf", "min_samples_leaf", "smallest leaf"),
    ("stats", "alpha", "alpha", "family-wise error rate for Tukey-Kramer"),
    ("run", "seed", "seed", "master seed; stages derive their own seeds from it"),
    ("run", "labels", "labels", "closed label set for ingest ([] = any label)"),
    ("run", "fallback_segmenter", "fallback_segmenter", "Otsu fallback when a row has no mask"),
)
FEATURE_SECTIONS = ("imaging", "texture", "wavelets")


@dataclass(frozen=True)
class PipelineConfig:
    levels: int = 100
    hef_a: float = 0.5
    hef_b: float = 2.0
    hef_d0: float = 0.05
    equalize: bool = True
    distances: tuple[int, ...] = (1, 2, 4)
    angles: tuple[float, ...] = CANONICAL_ANGLES
    symmetric: bool = True
    split_sides: bool = True
    wavelet: str = "haar"
    wavelet_levels: int = 3
    k_sigma: float = 3.0
    pca_components: int = 3
    k_min: int = 1
    k_max: int = 10
    depth_grid: tuple[int, ...] = tuple(range(1, 21))
    criteria: tuple[str, ...] = ("entropy", "gini")
    cv_folds: int = 3
    min_samples_leaf: int = 1
    alpha: float = 0.05
    seed: int = 0
    labels: tuple[str, ...] = DEFAULT_LABELS
    fallback_segmenter: bool = True

    def __post_init__(self):
        object.__setattr__(self, "distances", tuple(int(d) for d in self.distances))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "depth_grid", tuple(int(d) for d in self.depth_grid))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        problems = []
        if self.levels < 2:
            problems.append("levels >= 2")
        if not self.distances or min(self.distances) < 1:
            problems.append("distances nonempty and >= 1")
        if not self.angles:
            problems.append("angles nonempty")
        if self.wavelet_levels < 1:
            problems.append("wavelet levels >= 1")
        if self.k_sigma <= 0:
            problems.append("k_sigma > 0")
        if not 1 <= self.k_min <= self.k_max:
            problems.append("1 <= k_min <= k_max")
        if not self.depth_grid or min(self.depth_grid) < 1:
            problems.append("depth_grid nonempty and >= 1")
        if not self.criteria or set(self.criteria) - {"entropy", "gini"}:
            problems.append("criteria subset of entropy/gini")
        if self.cv_folds < 2:
            problems.append("cv_folds >= 2")
        if self.pca_components < 0:
            problems.append("pca_components >= 0")
        if not 0 < self.alpha < 1:
            problems.append("0 < alpha < 1")
        if problems:
            raise DataError("invalid config: need " + "; ".join(problems))
        self.hef  # validates a/b/d0

    @property
    def hef(self) -> HefParams:
        return HefParams(self.hef_a, self.hef_b, self.hef_d0, self.equalize)

    def with_seed(self, seed: int | None) -> "PipelineConfig":
        return self if seed is None else replace(self, seed=int(seed))

    def section(self, name: str) -> dict:
        d = asdict(self)
        return {key: _plain(d[attr]) for sec, key, attr, _ in _LAYOUT if sec == name}

    def feature_config(self) -> dict:
        return {s: self.section(s) for s in FEATURE_SECTIONS}

    def feature_hash(self) -> str:
        blob = json.dumps(self.feature_config(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def dumps(self) -> str:
        lines = ["# lungtex pipeline configuration. Values are JSON literals.", ""]
        d = asdict(self)
        current = None
        for sec, key, attr, help_ in _LAYOUT:
            if sec != current:
                if current is not None:
                    lines.append("")
                lines.append(f"[{sec}]")
                current = sec
            lines.append(f"# {help_}")
            lines.append(f"{key} = {json.dumps(_plain(d[attr]))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PipelineConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise DataError(f"config parse error: {exc}") from None
        known = {(sec, key): attr for sec, key, attr, _ in _LAYOUT}
        kinds = {f.name: f for f in fields(cls)}
        values = {}
        for sec in cp.sections():
            for key, raw in cp.items(sec):
                attr = known.get((sec, key))
                if attr is None:
                    raise DataError(f"unknown config key [{sec}] {key}")
                try:
                    val = json.loads(raw)
                except json.JSONDecodeError:
                    raise DataError(f"config value for [{sec}] {key} is not a JSON literal: {raw!r}") from None
                if isinstance(val, list):
                    val = tuple(val)
                if kinds[attr].type.startswith("float") and isinstance(val, int):
                    val = float(val)
                values[attr] = val
        return cls(**values)


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    return PipelineConfig.loads(p.read_text())
