"""End-to-end detection flow and the classifier-free definition oracle."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classifiers import ClassifierModel, TrainConfig, predict_many, train
from .errors import ConfigError, GlobalnessError, ParseError, VersionError
from .features import AnchorSet, FeatureMatrix, build_features, compute_sdv
from .graph import DEFAULT_CAP, UNREACHED, DirectedGraph, LabelTable
from .sampler import OT, SamplingPolicy, TrainingSet, select_biased

log = logging.getLogger(__name__)

REPORT_SCHEMA = "globalness-report"
REPORT_VERSION = 1


@dataclass(frozen=True)
class Hypothesis:
    """Which classes are "A" (in scope), the anchors, and how to train."""

    scope_name: str
    target_classes: tuple[str, ...]
    anchors: AnchorSet
    sampling: SamplingPolicy
    classifier: TrainConfig = TrainConfig()
    other_label: str = OT
    cap: int = DEFAULT_CAP
    surrogate: int | None = None

    def validate(self, labels: LabelTable) -> None:
        if not self.target_classes:
            raise ConfigError("hypothesis has no target classes")
        missing = [c for c in self.target_classes if c not in labels.class_names]
        if missing:
            raise ConfigError(f"target classes not in labels: {missing}")
        covered = {labels.class_names[c] for c in self.anchors.classes}
        uncovered = [c for c in self.target_classes if c not in covered]
        if uncovered:
            raise ConfigError(f"target classes without an anchor: {uncovered}")
        if tuple(self.sampling.target_classes) != tuple(self.target_classes):
            raise ConfigError("sampling policy targets differ from hypothesis targets")
        if self.sampling.other_label != self.other_label:
            raise ConfigError("sampling policy uses a different other-label")


@dataclass
class DetectionReport:
    scope_name: str
    target_classes: tuple[str, ...]
    other_label: str
    node_ids: tuple[str, ...]
    labels: tuple[str, ...]
    predicted: tuple[str, ...]
    mhop: tuple[int, ...]
    metadata: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    model: ClassifierModel | None = field(default=None, repr=False)
    training: TrainingSet | None = field(default=None, repr=False)
    features: FeatureMatrix | None = field(default=None, repr=False)

    @property
    def is_global(self) -> tuple[bool, ...]:
        targets = set(self.target_classes)
        return tuple(p == self.other_label and lab in targets for p, lab in zip(self.predicted, self.labels))

    def global_nodes(self) -> set[str]:
        return {n for n, g in zip(self.node_ids, self.is_global) if g}

    def aggregates(self) -> dict[str, dict]:
        out = {c: {"labeled": 0, "global": 0} for c in self.target_classes}
        for lab, g in zip(self.labels, self.is_global):
            if lab in out:
                out[lab]["labeled"] += 1
                out[lab]["global"] += int(g)
        for row in out.values():
            row["fraction"] = row["global"] / row["labeled"] if row["labeled"] else 0.0
        return out

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "schema_version": REPORT_VERSION,
            "scope_name": self.scope_name,
            "target_classes": list(self.target_classes),
            "other_label": self.other_label,
            "metadata": self.metadata,
            "aggregates": self.aggregates(),
            "nodes": [
                {"node_id": n, "label": lab, "predicted": p, "mhop": int(m), "is_global": g}
                for n, lab, p, m, g in zip(self.node_ids, self.labels, self.predicted, self.mhop, self.is_global)
            ],
        }

    def to_json(self) -> str:
        # timings are left out so identical runs serialise identically
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionReport":
        if d.get("schema") != REPORT_SCHEMA:
            raise VersionError(f"not a detection report (schema={d.get('schema')!r})")
        if d.get("schema_version") != REPORT_VERSION:
            raise VersionError(
                f"report schema_version {d.get('schema_version')} unsupported (expected {REPORT_VERSION})"
            )
        nodes = d["nodes"]
        return cls(
            scope_name=d["scope_name"],
            target_classes=tuple(d["target_classes"]),
            other_label=d["other_label"],
            node_ids=tuple(x["node_id"] for x in nodes),
            labels=tuple(x["label"] for x in nodes),
            predicted=tuple(x["predicted"] for x in nodes),
            mhop=tuple(int(x["mhop"]) for x in nodes),
            metadata=d.get("metadata", {}),
        )

    def write(self, out_dir: str | Path, stem: str = "report") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jpath, cpath = out / f"{stem}.json", out / f"{stem}_nodes.csv"
        jpath.write_text(self.to_json(), encoding="utf-8")
        write_node_csv(self, cpath)
        return jpath, cpath


def write_node_csv(report: DetectionReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "label", "predicted", "mhop", "is_global"])
        for n, lab, p, m, g in zip(report.node_ids, report.labels, report.predicted, report.mhop, report.is_global):
            w.writerow([n, lab, p, int(m), int(g)])


def load_report(path: str | Path) -> DetectionReport:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON ({e})") from None
    return DetectionReport.from_dict(d)


def run_detection(
    g: DirectedGraph,
    labels: LabelTable,
    hyp: Hypothesis,
    threads: int = 1,
    metadata: dict | None = None,
) -> DetectionReport:
    """Features, biased sampling, training, then scoring of every labeled in-scope node.

    Errors raised inside a stage come out with ``.stage`` set to that stage.
    """
    timings: dict[str, float] = {}
    stage = "validate"

    def tick(name, t0):
        timings[name] = round(time.perf_counter() - t0, 6)

    try:
        hyp.validate(labels)
        stage = "features"
        t0 = time.perf_counter()
        fm = build_features(g, labels, hyp.anchors, hyp.target_classes, cap=hyp.cap,
                            surrogate=hyp.surrogate, threads=threads)
        tick(stage, t0)

        stage = "sampling"
        t0 = time.perf_counter()
        ts = select_biased(fm, labels, hyp.sampling)
        tick(stage, t0)
        log.info("training set: %s", ts.counts())

        stage = "training"
        t0 = time.perf_counter()
        model = train(ts, hyp.classifier, threads=threads)
        tick(stage, t0)

        stage = "scoring"
        t0 = time.perf_counter()
        targets = set(hyp.target_classes)
        names = [labels.label_of(n) for n in fm.node_ids]
        rows = [i for i, lab in enumerate(names) if lab in targets]
        predicted = predict_many(model, fm.X[rows]) if rows else []
        tick(stage, t0)
    except GlobalnessError as e:
        if e.stage is None:
            e.stage = stage
        raise

    meta = dict(metadata or {})
    meta.setdefault("training_counts", ts.counts())
    meta.setdefault("classes", list(model.classes))
    meta.setdefault("feature_columns", list(fm.columns))
    return DetectionReport(
        scope_name=hyp.scope_name,
        target_classes=tuple(hyp.target_classes),
        other_label=hyp.other_label,
        node_ids=tuple(fm.node_ids[i] for i in rows),
        labels=tuple(names[i] for i in rows),
        predicted=tuple(predicted),
        mhop=tuple(int(fm.mhop[i]) for i in rows),
        metadata=meta,
        timings=timings,
        model=model,
        training=ts,
        features=fm,
    )


@dataclass(frozen=True)
class DefinitionParams:
    """Knobs of the set-builder definition of a global node.

    ``k_balance`` is the number of near-optimal classes a node must have; ``None``
    means every anchored class.
    """

    weights: dict[str, float] = field(default_factory=dict)
    epsilon: float = 0.0
    k_balance: int | None = None
    distance: str = "anchor_hop"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.k_balance is not None and self.k_balance < 2:
            raise ConfigError("k_balance must be >= 2")
        if any(w <= 0 for w in self.weights.values()):
            raise ConfigError("class weights must be > 0")
        if self.distance != "anchor_hop":
            raise ConfigError(f"unsupported class distance {self.distance!r}")


def class_distances(g: DirectedGraph, anchors: AnchorSet, cap: int = DEFAULT_CAP,
                    surrogate: int | None = None) -> tuple[list[int], np.ndarray]:
    """Per node, the hop distance to the nearest anchor of each anchored class.

    Returns ``(class ids, D)`` with ``D[node, j]`` for class ``class_ids[j]``;
    unreachable pairs take the surrogate.
    """
    sdv = compute_sdv(g, anchors, cap=cap, surrogate=surrogate)
    both = np.minimum(sdv.ihop, sdv.ohop)
    cids = sorted(anchors.covered)
    D = np.empty((g.node_count, len(cids)), dtype=np.int64)
    cls = np.asarray(anchors.classes)
    for j, c in enumerate(cids):
        D[:, j] = both[:, cls == c].min(axis=1)
    return cids, D


def balance_indicators(D: np.ndarray, weights: np.ndarray, epsilon: float) -> np.ndarray:
    """delta[p, k] = 1 iff the weighted error of labelling p as k is within epsilon
    of the best class, where that error sums w_c * D[p, c] over every c != k."""
    n, k = D.shape
    err = np.zeros((n, k))
    for kk in range(k):
        for c in range(k):
            if c != kk:
                err[:, kk] += weights[c] * D[:, c]
    return err <= err.min(axis=1, keepdims=True) + epsilon


def definition_oracle(
    g: DirectedGraph,
    labels: LabelTable,
    anchors: AnchorSet,
    params: DefinitionParams = DefinitionParams(),
    target_classes: Iterable[str] | None = None,
    cap: int = DEFAULT_CAP,
    surrogate: int | None = None,
) -> set[str]:
    """Global nodes by the formula, no classifier involved.

    Candidates are labeled nodes whose class is in ``target_classes`` (default:
    every anchored class). Weights default to 1 per class.
    """
    cids, D = class_distances(g, anchors, cap, surrogate)
    if not cids:
        raise ConfigError("no anchored classes")
    names = [labels.class_names[c] for c in cids]
    targets = set(names if target_classes is None else target_classes)
    unanchored = sorted(targets - set(names))
    if unanchored:
        raise ConfigError(f"classes without an anchor: {unanchored}")
    unknown = sorted(set(params.weights) - set(labels.class_names))
    if unknown:
        raise ConfigError(f"weights for unknown classes: {unknown}")
    k_balance = len(cids) if params.k_balance is None else params.k_balance
    w = np.array([float(params.weights.get(n, 1.0)) for n in names])

    delta = balance_indicators(D, w, params.epsilon)
    hits = delta.sum(axis=1) >= k_balance
    node_class = labels.aligned(g)
    tids = {labels.class_id(t) for t in targets}
    return {g.ids[i] for i in range(g.node_count) if hits[i] and node_class[i] in tids}


def set_agreement(a: set, b: set) -> dict:
    """Jaccard and overlap coefficient; two empty sets agree perfectly."""
    inter = len(a & b)
    union = len(a | b)
    small = min(len(a), len(b))
    return {
        "size_a": len(a),
        "size_b": len(b),
        "intersection": inter,
        "jaccard": inter / union if union else 1.0,
        "overlap_coefficient": inter / small if small else (1.0 if not union else 0.0),
    }


def compare_detectors(report: DetectionReport, oracle_set: set[str]) -> dict:
    universe = set(report.node_ids)
    return set_agreement(report.global_nodes(), set(oracle_set) & universe)
