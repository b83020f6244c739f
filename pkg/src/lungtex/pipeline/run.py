"""Stage runners: clustering, training, statistics, inference and the full run."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, ModelError
from ..learn import Standardizer, adjusted_rand_index, grid_search, pca_fit, pca_transform, xmeans
from ..learn.validation import CvReport, Classifier
from ..stats import anova_oneway, shapiro_wilk, tukey_kramer
from .config import PipelineConfig, stage_seed
from .features import (FeatureTable, extract_features, features_from_bytes, write_errors_csv,
                       write_features_csv)
from .manifest import ingest
from .persist import SavedModel, load_model, save_model

log = logging.getLogger(__name__)

TUKEY_COLUMNS = ("feature", "pair", "mean difference", "significance")
SUMMARY_COLUMNS = ("feature", "shapiro_w", "shapiro_p", "anova_f", "anova_p",
                   "significant_pairs", "status")


def _dump_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# clustering
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClusterReport:
    k: int
    sizes: tuple[int, ...]
    bic_trace: tuple[tuple[int, float], ...]
    seed: int
    ari: float | None
    ids: tuple[str, ...]
    scatter: np.ndarray  # (N, 2) first two principal components
    assignments: np.ndarray
    explained_variance: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"k": self.k, "sizes": list(self.sizes),
                "bic_trace": [{"k": k, "bic": b} for k, b in self.bic_trace],
                "seed": self.seed, "ari_vs_labels": self.ari,
                "explained_variance": list(self.explained_variance), "n": len(self.ids)}

    def write_scatter(self, path: str | Path, labels=None) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("id", "label", "pc1", "pc2", "cluster"))
            labels = labels if labels is not None else ("",) * len(self.ids)
            for rid, lab, (x, y), c in zip(self.ids, labels, self.scatter, self.assignments):
                w.writerow((rid, lab, repr(float(x)), repr(float(y)), int(c)))


def run_cluster(table: FeatureTable, config: PipelineConfig) -> ClusterReport:
    """z-score -> PCA -> X-means; the first two components give the scatter."""
    n = len(table)
    if n < 2:
        raise DataError(f"too few samples: clustering needs at least 2 rows, got {n}")
    Z = Standardizer.fit(table.values).transform(table.values)
    ncomp = min(max(2, config.pca_components), n - 1, Z.shape[1])
    pca = pca_fit(Z, ncomp)
    P = pca_transform(pca, Z)
    space = P[:, : config.pca_components] if config.pca_components else Z
    seed = stage_seed(config.seed, "cluster")
    model = xmeans(space, config.k_min, min(config.k_max, n), seed)
    scatter = np.zeros((n, 2))
    scatter[:, : min(2, P.shape[1])] = P[:, :2]
    ari = adjusted_rand_index(table.labels, model.assignments) if table.labels else None
    return ClusterReport(model.k, tuple(int(s) for s in model.sizes), model.bic_trace, seed, ari,
                         table.ids, scatter, model.assignments,
                         tuple(float(v) for v in pca.explained_variance))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def run_train(table: FeatureTable, config: PipelineConfig) -> tuple[CvReport, Classifier]:
    y = table.y
    if len(table) < config.cv_folds:
        raise DataError(f"too few samples: {len(table)} rows for {config.cv_folds}-fold CV")
    return grid_search(table.values, y, config.depth_grid, config.criteria, config.cv_folds,
                       stage_seed(config.seed, "cv"), config.pca_components or None,
                       config.min_samples_leaf)


def save_trained(path: str | Path, table: FeatureTable, clf: Classifier, report: CvReport,
                 config: PipelineConfig) -> str:
    return save_model(path, clf, table.names, config.feature_config(), config.feature_hash(),
                      config.seed, report.to_dict())


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureStats:
    feature: str
    status: str
    shapiro_w: float | None = None
    shapiro_p: float | None = None
    anova_f: float | None = None
    anova_p: float | None = None
    tukey: tuple = ()


def run_stats(table: FeatureTable, alpha: float = 0.05, seed: int = 0) -> list[FeatureStats]:
    """Shapiro-Wilk on the pooled feature, ANOVA and Tukey-Kramer across labels.

    Features with no spread (overall or inside every group) cannot be tested
    and are reported with a ``skipped`` status.
    """
    y = table.y
    classes = sorted(set(y))
    if len(classes) < 2:
        raise DataError("statistics need at least two label groups")
    out = []
    for j, name in enumerate(table.names):
        col = table.values[:, j]
        groups = {c: col[y == c] for c in classes}
        try:
            sw = shapiro_wilk(col, seed)
            an = anova_oneway(groups)
            rows = tuple(tukey_kramer(groups, alpha))
        except DataError as exc:
            out.append(FeatureStats(name, f"skipped: {exc}"))
            continue
        out.append(FeatureStats(name, "ok", sw.w, sw.p, an.f, an.p, rows))
    return out


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def write_stats(results: list[FeatureStats], tukey_path: str | Path, summary_path: str | Path) -> None:
    with Path(tukey_path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TUKEY_COLUMNS)
        for r in results:
            for t in r.tukey:
                w.writerow((r.feature, t.pair, f"{t.mean_difference:.6g}", t.significance))
    with Path(summary_path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in results:
            w.writerow((r.feature, _num(r.shapiro_w), _num(r.shapiro_p), _num(r.anova_f),
                        _num(r.anova_p), sum(t.significant for t in r.tukey), r.status))


# ---------------------------------------------------------------------------
# inference
# ---------------------------------------------------------------------------

def check_compatible(saved: SavedModel, config: PipelineConfig) -> None:
    if saved.feature_hash != config.feature_hash():
        raise ModelError("config mismatch: the model was trained with a different feature "
                         f"configuration (model {saved.feature_hash[:12]}, "
                         f"config {config.feature_hash()[:12]})")


def classify_bytes(image: bytes, mask: bytes | None, saved: SavedModel,
                   config: PipelineConfig) -> dict:
    """Single-image inference shared by the CLI and the HTTP service."""
    check_compatible(saved, config)
    fv = features_from_bytes(image, mask, config)
    if fv.names != saved.feature_names:
        raise ModelError("feature layout differs from the one the model was trained on")
    proba = saved.classifier.predict_proba(fv.values[None, :])[0]
    classes = saved.classifier.classes
    best = int(np.argmax(proba))  # first maximum: classes are sorted
    return {"label": str(classes[best]),
            "scores": {str(c): float(p) for c, p in zip(classes, proba)},
            "model_hash": saved.model_hash}


def classify(image_path: str | Path, mask_path: str | Path | None, model_path: str | Path,
             config: PipelineConfig) -> dict:
    img = Path(image_path)
    if not img.is_file():
        raise DataError(f"file not found: {img}")
    mask = None
    if mask_path is not None:
        mp = Path(mask_path)
        if not mp.is_file():
            raise DataError(f"file not found: {mp}")
        mask = mp.read_bytes()
    return classify_bytes(img.read_bytes(), mask, load_model(model_path), config)


# ---------------------------------------------------------------------------
# full run
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunArtifacts:
    out_dir: Path
    features: Path
    errors: Path
    model: Path
    cluster_report: Path
    scatter: Path
    cv_report: Path
    stats_tukey: Path
    stats_summary: Path
    config_snapshot: Path
    index: Path
    hashes: dict
    content_hash: str


ARTIFACT_FILES = {
    "features": "features.csv",
    "errors": "errors.csv",
    "model": "model.json",
    "cluster_report": "cluster_report.json",
    "scatter": "scatter.csv",
    "cv_report": "cv_report.json",
    "stats_tukey": "stats_tukey.csv",
    "stats_summary": "stats_summary.csv",
    "config_snapshot": "config.ini",
}


def content_hash(hashes: dict) -> str:
    blob = "".join(f"{name}\t{hashes[name]}\n" for name in sorted(hashes))
    return hashlib.sha256(blob.encode()).hexdigest()


def run_all(manifest_path: str | Path, config: PipelineConfig, out_dir: str | Path,
            workers: int = 1) -> RunArtifacts:
    """ingest -> extract -> cluster -> train -> stats, writing every artifact.

    Artifacts carry no timestamps or absolute paths, so the same inputs,
    config and seed give byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / v for k, v in ARTIFACT_FILES.items()}
    paths["config_snapshot"].write_text(config.dumps())

    manifest = ingest(manifest_path, config.labels or None)
    table, errors = extract_features(manifest, config, workers)
    write_features_csv(paths["features"], table)
    write_errors_csv(paths["errors"], errors)
    if errors:
        log.warning("%d of %d rows failed extraction", len(errors), len(manifest))

    cl = run_cluster(table, config)
    _dump_json(paths["cluster_report"], cl.to_dict())
    cl.write_scatter(paths["scatter"], table.labels)

    report, clf = run_train(table, config)
    _dump_json(paths["cv_report"], report.to_dict())
    save_trained(paths["model"], table, clf, report, config)

    stats = run_stats(table, config.alpha, stage_seed(config.seed, "stats"))
    write_stats(stats, paths["stats_tukey"], paths["stats_summary"])

    hashes = {ARTIFACT_FILES[k]: sha256_file(p) for k, p in paths.items()}
    chash = content_hash(hashes)
    index = out / "artifacts.json"
    _dump_json(index, {"files": hashes, "content_hash": chash})
    return RunArtifacts(out, index=index, hashes=hashes, content_hash=chash, **paths)
