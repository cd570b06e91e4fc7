"""Planted-partition directed graphs with planted global nodes and local anchor hubs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError
from .features import AnchorSet, make_anchor_set
from .graph import DirectedGraph, LabelTable
from .seeding import substream


@dataclass(frozen=True)
class SynthConfig:
    regions: int = 3
    nodes_per_region: int = 200
    p_in: float = 0.05
    p_out: float = 0.002
    global_fraction: float = 0.05
    global_spread: float = 0.02
    anchor_degree: int = 10
    anchor_families: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.regions < 2:
            raise ConfigError("regions must be >= 2")
        if self.nodes_per_region < 1:
            raise ConfigError("nodes_per_region must be >= 1")
        if not 0.0 <= self.p_out < self.p_in <= 1.0 and not (self.p_in == self.p_out == 0.0):
            raise ConfigError(f"need 0 <= p_out < p_in <= 1, got p_in={self.p_in}, p_out={self.p_out}")
        if not 0.0 <= self.global_fraction < 1.0:
            raise ConfigError("global_fraction must lie in [0, 1)")
        if not 0.0 <= self.global_spread <= 1.0:
            raise ConfigError("global_spread must lie in [0, 1]")
        if self.anchor_degree < 1 or self.anchor_families < 1:
            raise ConfigError("anchor_degree and anchor_families must be >= 1")
        if self.anchor_degree > self.nodes_per_region - self.globals_per_region:
            raise ConfigError("anchor_degree exceeds the number of non-global nodes per region")

    @property
    def globals_per_region(self) -> int:
        # guard against 0.05 * 200 landing a hair under 10
        return int(math.floor(self.global_fraction * self.nodes_per_region + 1e-9))

    def region_names(self) -> list[str]:
        width = len(str(self.regions - 1))
        return [f"R{r:0{width}d}" for r in range(self.regions)]


@dataclass(frozen=True)
class PlantedTruth:
    node_ids: tuple[str, ...]
    region: tuple[str, ...]
    planted_global: np.ndarray
    is_anchor: np.ndarray

    def globals_(self) -> set[str]:
        return {n for n, g in zip(self.node_ids, self.planted_global) if g}

    def as_dict(self) -> dict[str, tuple[str, bool, bool]]:
        return {n: (r, bool(g), bool(a)) for n, r, g, a in
                zip(self.node_ids, self.region, self.planted_global, self.is_anchor)}


@dataclass(frozen=True)
class SynthGraph:
    config: SynthConfig
    graph: DirectedGraph
    labels: LabelTable
    truth: PlantedTruth
    anchor_pairs: tuple[tuple[tuple[str, str], ...], ...]  # one tuple of (node, region) per family

    def anchors(self, family: int = 0, classes=None) -> AnchorSet:
        return make_anchor_set(self.graph, self.labels, self.anchor_pairs[family], classes)


def _anchor_id(region: str, family: int) -> str:
    return f"{region}-a{family}"


def generate(cfg: SynthConfig) -> SynthGraph:
    """Sample a directed block graph.

    Every ordered member pair ``(u, v)`` gets an edge independently with
    probability ``global_spread`` if either end is a planted global, else
    ``p_in`` within a region and ``p_out`` across. Each anchor family adds one hub
    per region, linked both ways to ``anchor_degree`` random non-global members of
    that region and to nothing else.
    """
    names = cfg.region_names()
    R, n = cfg.regions, cfg.nodes_per_region
    width = len(str(n - 1))
    member_ids = [f"{names[r]}-{i:0{width}d}" for r in range(R) for i in range(n)]
    region_of = np.repeat(np.arange(R), n)

    rng = substream(cfg.rng_seed, "synth")
    k = cfg.globals_per_region
    is_global = np.zeros(R * n, dtype=bool)
    for r in range(R):
        is_global[r * n + rng.choice(n, size=k, replace=False)] = True

    same = region_of[:, None] == region_of[None, :]
    prob = np.where(same, cfg.p_in, cfg.p_out)
    prob[is_global, :] = cfg.global_spread
    prob[:, is_global] = cfg.global_spread
    np.fill_diagonal(prob, 0.0)
    adj = rng.random((R * n, R * n)) < prob
    src, dst = np.nonzero(adj)
    edges = [(member_ids[u], member_ids[v]) for u, v in zip(src.tolist(), dst.tolist())]

    families = []
    anchor_ids = []
    for f in range(cfg.anchor_families):
        arng = substream(cfg.rng_seed, "anchors", f)
        fam = []
        for r in range(R):
            pool = np.flatnonzero((region_of == r) & ~is_global)
            chosen = np.sort(arng.choice(pool, size=cfg.anchor_degree, replace=False))
            hub = _anchor_id(names[r], f)
            for m in chosen.tolist():
                edges.append((hub, member_ids[m]))
                edges.append((member_ids[m], hub))
            fam.append((hub, names[r]))
            anchor_ids.append((hub, names[r]))
        families.append(tuple(fam))

    g = DirectedGraph.from_edges(edges)
    assignments = {m: names[r] for m, r in zip(member_ids, region_of.tolist())}
    assignments.update({a: r for a, r in anchor_ids})
    labels = LabelTable.from_mapping(assignments)

    all_ids = member_ids + [a for a, _ in anchor_ids]
    truth = PlantedTruth(
        node_ids=tuple(all_ids),
        region=tuple(assignments[x] for x in all_ids),
        planted_global=np.concatenate([is_global, np.zeros(len(anchor_ids), dtype=bool)]),
        is_anchor=np.concatenate([np.zeros(R * n, dtype=bool), np.ones(len(anchor_ids), dtype=bool)]),
    )
    return SynthGraph(cfg, g, labels, truth, tuple(families))


def anchors_filename(family: int) -> str:
    return "anchors.tsv" if family == 0 else f"anchors_{family}.tsv"


def write_synth(sg: SynthGraph, out_dir: str | Path) -> dict[str, Path]:
    """Write edges, labels, per-family anchors and truth in the loader formats."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"edges": out / "edges.tsv", "labels": out / "labels.tsv", "truth": out / "truth.csv"}
    with open(paths["edges"], "w", encoding="utf-8", newline="\n") as fh:
        for u, v in sg.graph.edges():
            fh.write(f"{u}\t{v}\n")
    with open(paths["labels"], "w", encoding="utf-8", newline="\n") as fh:
        for nid, region in zip(sg.truth.node_ids, sg.truth.region):
            fh.write(f"{nid}\t{region}\n")
    for f, fam in enumerate(sg.anchor_pairs):
        p = out / anchors_filename(f)
        paths[f"anchors_{f}"] = p
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            for hub, region in fam:
                fh.write(f"{hub}\t{region}\n")
    write_truth(sg.truth, paths["truth"])
    return paths


def write_truth(truth: PlantedTruth, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "region", "planted_global", "is_anchor"])
        for nid, r, g, a in zip(truth.node_ids, truth.region, truth.planted_global, truth.is_anchor):
            w.writerow([nid, r, int(g), int(a)])


def read_truth(path: str | Path) -> PlantedTruth:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(rows[0]) != {"node_id", "region", "planted_global", "is_anchor"}:
        raise ParseError(f"{path}: unexpected truth header {list(rows[0])}")
    return PlantedTruth(
        node_ids=tuple(r["node_id"] for r in rows),
        region=tuple(r["region"] for r in rows),
        planted_global=np.array([r["planted_global"] == "1" for r in rows], dtype=bool),
        is_anchor=np.array([r["is_anchor"] == "1" for r in rows], dtype=bool),
    )
