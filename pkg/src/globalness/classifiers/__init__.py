"""Uniform train/predict/evaluate contract over the in-repo classifiers."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ConfigError, EvaluationError, ShapeError, TrainingError, VersionError
from .models import ESTIMATORS, AdaBoostSAMME, GaussianNaiveBayes, RandomForest, estimator_for
from .tree import DecisionTree, fit_tree

MODEL_FORMAT = "globalness-model"
MODEL_VERSION = 1

__all__ = [
    "TrainConfig", "ClassifierModel", "train", "train_arrays", "predict", "predict_many",
    "evaluate", "precision_recall", "save_model", "load_model",
    "DecisionTree", "fit_tree", "GaussianNaiveBayes", "RandomForest", "AdaBoostSAMME",
]


@dataclass(frozen=True)
class TrainConfig:
    kind: str = "random_forest"
    trees: int = 100
    max_depth: int = 12
    min_leaf: int = 1
    features_per_split: int | str = "sqrt"
    rounds: int = 100
    variance_floor: float = 1e-6
    bootstrap: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ESTIMATORS:
            raise ConfigError(f"unknown classifier kind {self.kind!r}")
        for name in ("trees", "max_depth", "min_leaf", "rounds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.variance_floor > 0:
            raise ConfigError("variance_floor must be > 0")
        fps = self.features_per_split
        if isinstance(fps, str):
            if fps not in ("sqrt", "all"):
                raise ConfigError(f"features_per_split must be an int, 'sqrt' or 'all', got {fps!r}")
        elif fps < 1:
            raise ConfigError("features_per_split must be >= 1")

    def max_features(self, width: int) -> int:
        fps = self.features_per_split
        if fps == "sqrt":
            return max(1, int(math.sqrt(width)))
        if fps == "all":
            return width
        return min(int(fps), width)


@dataclass
class ClassifierModel:
    kind: str
    classes: tuple[str, ...]
    n_features: int
    config: TrainConfig
    estimator: object = field(repr=False)

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ShapeError(f"row width {X.shape[1]} != trained width {self.n_features}")
        return self.estimator.predict_proba(X)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind,
            "classes": list(self.classes),
            "n_features": self.n_features,
            "config": asdict(self.config),
            "params": self.estimator.params(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierModel":
        if d.get("format") != MODEL_FORMAT:
            raise VersionError(f"not a model document (format={d.get('format')!r})")
        if d.get("version") != MODEL_VERSION:
            raise VersionError(f"model version {d.get('version')} unsupported (expected {MODEL_VERSION})")
        classes = tuple(d["classes"])
        est = estimator_for(d["kind"]).from_params(len(classes), d["params"])
        return cls(d["kind"], classes, d["n_features"], TrainConfig(**d["config"]), est)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=False)


def save_model(model: ClassifierModel, path: str | Path) -> None:
    Path(path).write_text(model.dumps(), encoding="utf-8")


def load_model(path: str | Path) -> ClassifierModel:
    return ClassifierModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _build(cfg: TrainConfig, n_classes: int, width: int):
    if cfg.kind == "naive_bayes":
        return GaussianNaiveBayes(n_classes, cfg.variance_floor)
    if cfg.kind == "random_forest":
        return RandomForest(n_classes, cfg.trees, cfg.max_depth, cfg.min_leaf,
                            cfg.max_features(width), cfg.bootstrap, cfg.rng_seed)
    return AdaBoostSAMME(n_classes, cfg.rounds, cfg.rng_seed)


def train_arrays(X, y: Sequence[str], classes: Sequence[str], cfg: TrainConfig,
                 threads: int = 1) -> ClassifierModel:
    """Fit on a feature matrix and string labels; ``classes`` fixes output order."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ShapeError(f"X has shape {X.shape} but {len(y)} labels were given")
    if not np.isfinite(X).all():
        raise TrainingError("training data contains non-finite features")
    classes = tuple(classes)
    pos = {c: i for i, c in enumerate(classes)}
    try:
        codes = np.array([pos[v] for v in y], dtype=np.int64)
    except KeyError as e:
        raise TrainingError(f"label {e.args[0]!r} not among classes {classes}") from None
    if len(np.unique(codes)) < 2:
        raise TrainingError("training data holds fewer than 2 classes")
    est = _build(cfg, len(classes), X.shape[1]).fit(X, codes, threads=threads)
    return ClassifierModel(cfg.kind, classes, X.shape[1], cfg, est)


def train(data, cfg: TrainConfig, threads: int = 1) -> ClassifierModel:
    """Fit on a TrainingSet. Rows are put in node-id order first, so the model does
    not depend on how the set was assembled."""
    order = sorted(range(len(data.node_ids)), key=lambda i: data.node_ids[i])
    X = np.asarray(data.X, dtype=np.float64)[order]
    y = [data.y[i] for i in order]
    return train_arrays(X, y, data.classes, cfg, threads=threads)


def predict_many(model: ClassifierModel, X) -> list[str]:
    # np.argmax keeps the first maximum: ties go to the earlier class
    idx = np.argmax(model.predict_proba(X), axis=1)
    return [model.classes[i] for i in idx]


def predict(model: ClassifierModel, row) -> str:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ShapeError("predict takes a single feature row")
    return predict_many(model, row[None, :])[0]


def precision_recall(y_true: Sequence[str], y_pred: Sequence[str], classes: Sequence[str] | None = None) -> dict:
    """One-vs-rest precision and recall per class plus unweighted macro means.

    A zero denominator scores 0 and is listed under ``undefined``.
    """
    if len(y_true) == 0:
        raise EvaluationError("no rows to evaluate")
    if len(y_true) != len(y_pred):
        raise EvaluationError("prediction and truth lengths differ")
    if classes is None:
        classes = sorted(set(y_true) | set(y_pred))
    per_class, undefined = {}, []
    for c in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        flagged = sum(1 for p in y_pred if p == c)
        actual = sum(1 for t in y_true if t == c)
        if flagged == 0:
            undefined.append(f"precision:{c}")
        if actual == 0:
            undefined.append(f"recall:{c}")
        per_class[c] = {
            "precision": tp / flagged if flagged else 0.0,
            "recall": tp / actual if actual else 0.0,
            "support": actual,
        }
    k = len(classes)
    return {
        "per_class": per_class,
        "macro_precision": sum(v["precision"] for v in per_class.values()) / k,
        "macro_recall": sum(v["recall"] for v in per_class.values()) / k,
        "undefined": undefined,
    }


def evaluate(model: ClassifierModel, X, y: Sequence[str]) -> dict:
    if len(y) == 0:
        raise EvaluationError("no rows to evaluate")
    return precision_recall(list(y), predict_many(model, X), model.classes)
