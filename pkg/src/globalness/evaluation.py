"""Scoring reports against planted truth, per-class tables and anchor-set stability."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

from .classifiers import precision_recall
from .errors import ConfigError, ConsistencyError, ParseError
from .pipeline import DetectionReport, set_agreement
from .synthgen import PlantedTruth


def _truth_index(report: DetectionReport, truth: PlantedTruth) -> dict:
    info = truth.as_dict()
    missing = [n for n in report.node_ids if n not in info]
    if missing:
        raise ConsistencyError(f"{len(missing)} report nodes absent from truth, e.g. {missing[:3]}")
    return info


def score_against_truth(report: DetectionReport, truth: PlantedTruth) -> dict:
    """Precision and recall of the flagged set for the planted-global class.

    Planted globals of in-scope regions that the report never scored (e.g.
    isolated in the graph) count as misses.
    """
    info = _truth_index(report, truth)
    targets = set(report.target_classes)
    flagged = report.global_nodes()
    planted = {n for n, (region, g, _) in info.items() if g and region in targets}
    hit = len(flagged & planted)
    undefined = []
    if not flagged:
        undefined.append("precision")
    if not planted:
        undefined.append("recall")
    return {
        "precision": hit / len(flagged) if flagged else 0.0,
        "recall": hit / len(planted) if planted else 0.0,
        "flagged": len(flagged),
        "planted": len(planted),
        "correct": hit,
        "undefined": undefined,
    }


def classification_against_truth(report: DetectionReport, truth: PlantedTruth) -> dict:
    """Macro precision/recall over the in-scope classes plus the other class, with
    planted globals expected as the other class and everyone else as their region."""
    info = _truth_index(report, truth)
    y_true = [report.other_label if info[n][1] else lab for n, lab in zip(report.node_ids, report.labels)]
    return precision_recall(y_true, list(report.predicted), list(report.target_classes) + [report.other_label])


def global_percentage(report: DetectionReport) -> dict:
    """Per in-scope class: labeled count, flagged count and percentage, sorted by
    percentage (descending, then class name); ``mean`` is the unweighted average."""
    rows = [
        {"class": c, "labeled": a["labeled"], "global": a["global"], "percentage": 100.0 * a["fraction"]}
        for c, a in report.aggregates().items()
        if a["labeled"] > 0
    ]
    rows.sort(key=lambda r: (-r["percentage"], r["class"]))
    mean = sum(r["percentage"] for r in rows) / len(rows) if rows else 0.0
    return {"rows": rows, "mean": mean}


@dataclass(frozen=True)
class DensityTable:
    density: dict[str, float]

    def __post_init__(self):
        bad = {k: v for k, v in self.density.items() if not v > 0}
        if bad:
            raise ConfigError(f"densities must be > 0: {bad}")


def load_density_csv(path: str | Path) -> DensityTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["class", "density"]:
            raise ParseError(f"{path}: header must be 'class,density'")
        out = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                out[row["class"].strip()] = float(row["density"])
            except (TypeError, ValueError):
                raise ParseError(f"{path}: bad density value", line=lineno) from None
    return DensityTable(out)


def density_ratio(report: DetectionReport, density: DensityTable | Mapping[str, float]) -> list[dict]:
    """Global count divided by population density, ranked high to low (ties by name)."""
    table = density.density if isinstance(density, DensityTable) else dict(density)
    aggs = report.aggregates()
    missing = sorted(c for c in aggs if c not in table)
    if missing:
        raise ConfigError(f"no density for classes: {missing}")
    rows = [{"class": c, "global": a["global"], "density": table[c], "ratio": a["global"] / table[c]}
            for c, a in aggs.items()]
    rows.sort(key=lambda r: (-r["ratio"], r["class"]))
    for rank, r in enumerate(rows, start=1):
        r["rank"] = rank
    return rows


@dataclass(frozen=True)
class StabilityResult:
    set_a_size: int
    set_b_size: int
    intersection: int
    jaccard: float
    overlap_coefficient: float

    def to_dict(self) -> dict:
        return asdict(self)


def stability_overlap(run_a: DetectionReport, run_b: DetectionReport) -> StabilityResult:
    if set(run_a.node_ids) != set(run_b.node_ids):
        raise ConsistencyError("the two runs scored different node sets")
    s = set_agreement(run_a.global_nodes(), run_b.global_nodes())
    return StabilityResult(s["size_a"], s["size_b"], s["intersection"], s["jaccard"], s["overlap_coefficient"])


def rows_to_csv(rows: list[dict], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
