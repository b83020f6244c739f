"""JSON persistence of trained classifiers."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ModelError
from ..learn.pca import PcaModel, Standardizer
from ..learn.tree import Node, TreeModel
from ..learn.validation import Classifier

FORMAT_VERSION = "1"
KIND = "lungtex-classifier"


@dataclass(frozen=True, eq=False)
class SavedModel:
    classifier: Classifier
    feature_names: tuple[str, ...]
    feature_config: dict
    feature_hash: str
    seed: int
    model_hash: str


def _arr(a) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def model_to_json(clf: Classifier, feature_names, feature_config: dict, feature_hash: str,
                  seed: int, cv: dict | None = None) -> str:
    tree = clf.tree
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": KIND,
        "seed": seed,
        "feature_names": list(feature_names),
        "feature_config": feature_config,
        "feature_config_hash": feature_hash,
        "scaler": {"mean": _arr(clf.scaler.mean), "scale": _arr(clf.scaler.scale)},
        "pca": None if clf.pca is None else {
            "mean": _arr(clf.pca.mean),
            "components": _arr(clf.pca.components),
            "explained_variance": _arr(clf.pca.explained_variance),
        },
        "tree": {
            "classes": list(tree.classes),
            "criterion": tree.criterion,
            "max_depth": tree.max_depth,
            "min_samples_leaf": tree.min_samples_leaf,
            "n_features": tree.n_features,
            "nodes": [{"counts": list(n.counts), "feature": n.feature, "threshold": n.threshold,
                       "left": n.left, "right": n.right} for n in tree.nodes],
        },
        "cv": cv,
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def save_model(path: str | Path, *args, **kwargs) -> str:
    """Write the model JSON and return its sha256 hex digest."""
    text = model_to_json(*args, **kwargs)
    data = text.encode()
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def parse_model(data: bytes) -> SavedModel:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelError(f"model parse: {exc}") from None
    if not isinstance(doc, dict) or doc.get("kind") != KIND:
        raise ModelError("model parse: not a lungtex classifier document")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"model version mismatch: file has {doc.get('format_version')!r}, "
                         f"reader supports {FORMAT_VERSION!r}")
    try:
        sc = doc["scaler"]
        scaler = Standardizer(np.array(sc["mean"], dtype=np.float64),
                              np.array(sc["scale"], dtype=np.float64))
        pca = None
        if doc["pca"] is not None:
            p = doc["pca"]
            pca = PcaModel(np.array(p["mean"], dtype=np.float64),
                           np.array(p["components"], dtype=np.float64),
                           np.array(p["explained_variance"], dtype=np.float64))
        t = doc["tree"]
        nodes = tuple(Node(tuple(int(c) for c in n["counts"]), int(n["feature"]),
                           float(n["threshold"]), int(n["left"]), int(n["right"]))
                      for n in t["nodes"])
        tree = TreeModel(tuple(t["classes"]), nodes, int(t["n_features"]), t["criterion"],
                         t["max_depth"], int(t["min_samples_leaf"]))
        names = tuple(doc["feature_names"])
        if scaler.mean.shape != (len(names),):
            raise ModelError("model parse: scaler width does not match feature names")
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"model parse: {type(exc).__name__}: {exc}") from None
    return SavedModel(Classifier(scaler, pca, tree), names, doc["feature_config"],
                      doc["feature_config_hash"], int(doc["seed"]),
                      hashlib.sha256(data).hexdigest())


def load_model(path: str | Path) -> SavedModel:
    p = Path(path)
    if not p.is_file():
        raise ModelError(f"model parse: file not found: {p}")
    return parse_model(p.read_bytes())
