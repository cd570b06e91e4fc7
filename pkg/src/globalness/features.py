"""Anchor distance vectors, neighborhood location probabilities, feature matrix."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ConsistencyError, ParseError
from .graph import DEFAULT_CAP, INWARD, OUTWARD, UNREACHED, DirectedGraph, LabelTable, bfs_hops, _split2, _tsv_lines

OTHER_REGION = "OTHER"


@dataclass(frozen=True)
class AnchorSet:
    """Anchor nodes with their owning class, in canonical (class id, node id) order."""

    nodes: tuple[int, ...]
    node_ids: tuple[str, ...]
    classes: tuple[int, ...]
    class_names: tuple[str, ...]

    def __len__(self):
        return len(self.nodes)

    @property
    def covered(self) -> set[int]:
        return set(self.classes)

    def for_class(self, c: int) -> list[int]:
        return [n for n, k in zip(self.nodes, self.classes) if k == c]


def load_anchors(path: str | Path) -> list[tuple[str, str]]:
    """Read ``node_id<TAB>class`` lines."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"anchors file not found: {path}")
    pairs = [_split2(line, n) for n, line in _tsv_lines(path)]
    if not pairs:
        raise ParseError(f"{path}: no anchors")
    return pairs


def make_anchor_set(
    g: DirectedGraph,
    labels: LabelTable,
    pairs: Iterable[tuple[str, str]],
    classes: Iterable[str] | None = None,
) -> AnchorSet:
    """Validate ``(node_id, class_name)`` pairs against the graph and sort them.

    ``classes`` restricts the set to anchors owned by those classes; each listed
    class must keep at least one anchor.
    """
    pairs = list(pairs)
    missing = sorted({n for n, _ in pairs if n not in g.index})
    if missing:
        raise ConfigError(f"anchors missing from graph: {', '.join(missing)}")
    unknown = sorted({c for _, c in pairs if c not in labels.class_names})
    if unknown:
        raise ConfigError(f"anchor classes not in label table: {', '.join(unknown)}")
    if classes is not None:
        keep = set(classes)
        pairs = [(n, c) for n, c in pairs if c in keep]
        uncovered = sorted(keep - {c for _, c in pairs})
        if uncovered:
            raise ConfigError(f"classes without an anchor: {', '.join(uncovered)}")
    rows = sorted({(labels.class_id(c), n) for n, c in pairs})
    if len({n for _, n in rows}) != len(rows):
        raise ConfigError("an anchor node is assigned to more than one class")
    return AnchorSet(
        nodes=tuple(g.index[n] for _, n in rows),
        node_ids=tuple(n for _, n in rows),
        classes=tuple(c for c, _ in rows),
        class_names=labels.class_names,
    )


def compute_mhop(ihop, ohop, surrogate: int) -> np.ndarray | int:
    """Minimum finite hop across both directions and all anchors.

    Works on a single SDV (1-D inputs) or a table (rows = nodes). Returns
    ``surrogate`` where no entry is finite.
    """
    ih = np.asarray(ihop, dtype=np.int64)
    oh = np.asarray(ohop, dtype=np.int64)
    both = np.concatenate([ih, oh], axis=-1)
    finite = np.where(both == UNREACHED, np.iinfo(np.int64).max, both)
    m = finite.min(axis=-1) if both.shape[-1] else np.full(both.shape[:-1], np.iinfo(np.int64).max)
    m = np.where(m == np.iinfo(np.int64).max, surrogate, m)
    return int(m) if np.ndim(m) == 0 else m


@dataclass(frozen=True)
class SDVTable:
    """Raw hop distances (``UNREACHED`` kept) to every anchor, both directions."""

    node_ids: tuple[str, ...]
    anchors: AnchorSet
    ihop_raw: np.ndarray
    ohop_raw: np.ndarray
    mhop: np.ndarray
    cap: int
    surrogate: int

    @property
    def ihop(self) -> np.ndarray:
        return np.where(self.ihop_raw == UNREACHED, self.surrogate, self.ihop_raw)

    @property
    def ohop(self) -> np.ndarray:
        return np.where(self.ohop_raw == UNREACHED, self.surrogate, self.ohop_raw)


def compute_sdv(
    g: DirectedGraph,
    anchors: AnchorSet,
    cap: int = DEFAULT_CAP,
    surrogate: int | None = None,
    threads: int = 1,
) -> SDVTable:
    surrogate = cap + 1 if surrogate is None else surrogate
    if surrogate <= cap:
        raise ConfigError(f"surrogate ({surrogate}) must exceed cap ({cap})")
    bad = [a for a in anchors.nodes if not 0 <= a < g.node_count]
    if bad:
        raise ConfigError(f"anchor indices not in graph: {bad}")
    stale = [n for a, n in zip(anchors.nodes, anchors.node_ids) if g.ids[a] != n]
    if stale:
        raise ConsistencyError(f"anchor set was built for a different graph (e.g. {stale[0]})")

    jobs = [(a, d) for d in (INWARD, OUTWARD) for a in anchors.nodes]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            maps = list(pool.map(lambda job: bfs_hops(g, job[0], job[1], cap), jobs))
    else:
        maps = [bfs_hops(g, a, d, cap) for a, d in jobs]

    k = len(anchors)
    n = g.node_count
    ihop = np.empty((n, k), dtype=np.int64)
    ohop = np.empty((n, k), dtype=np.int64)
    for j, hm in enumerate(maps):
        target = ihop if j < k else ohop
        target[:, j % k] = hm.hops
    mhop = compute_mhop(ihop, ohop, surrogate) if k else np.full(n, surrogate, dtype=np.int64)
    return SDVTable(g.ids, anchors, ihop, ohop, np.asarray(mhop, dtype=np.int64), cap, surrogate)


@dataclass(frozen=True)
class SNPTable:
    """Per-node share of labeled in/out neighbours falling in each region."""

    node_ids: tuple[str, ...]
    regions: tuple[str, ...]
    inp: np.ndarray
    onp: np.ndarray
    in_labeled: np.ndarray
    out_labeled: np.ndarray


def region_index(labels: LabelTable, regions: Sequence[str], other_bucket: str | None) -> np.ndarray:
    """Map class id -> region column (or -1 when the class is not counted)."""
    cols = {name: i for i, name in enumerate(regions)}
    fallback = len(regions) if other_bucket is not None else -1
    return np.array([cols.get(name, fallback) for name in labels.class_names], dtype=np.int64)


def compute_snp(
    g: DirectedGraph,
    labels: LabelTable,
    regions: Sequence[str],
    other_bucket: str | None = OTHER_REGION,
) -> SNPTable:
    """Neighbour-region histograms normalised per direction.

    Classes outside ``regions`` are pooled into ``other_bucket`` (appended as the
    last column) or ignored when it is ``None``. The bucket is only added when
    such classes exist. Unlabeled and excluded
    neighbours count toward neither numerator nor denominator.
    """
    if not regions:
        raise ConfigError("region list is empty")
    regions = tuple(regions)
    unknown = [r for r in regions if r not in labels.class_names]
    if unknown:
        raise ConfigError(f"regions not in label table: {unknown}")
    if other_bucket is not None and set(labels.class_names) <= set(regions):
        other_bucket = None
    if other_bucket is not None:
        if other_bucket in regions:
            raise ConfigError(f"catch-all region {other_bucket!r} collides with a class name")
        regions = regions + (other_bucket,)

    col_of_class = region_index(labels, regions[: len(regions) - (other_bucket is not None)], other_bucket)
    node_class = labels.aligned(g)
    node_col = np.where(node_class >= 0, col_of_class[np.maximum(node_class, 0)], -1)

    n, r = g.node_count, len(regions)
    src = np.fromiter((u for u, nb in enumerate(g.out_adj) for _ in nb), dtype=np.int64, count=g.edge_count)
    dst = np.fromiter((v for nb in g.out_adj for v in nb), dtype=np.int64, count=g.edge_count)

    ie = np.zeros((n, r))
    oe = np.zeros((n, r))
    # inward edge u->v contributes to v by the region of u; outward mirrors it
    m = node_col[src] >= 0
    np.add.at(ie, (dst[m], node_col[src[m]]), 1.0)
    m = node_col[dst] >= 0
    np.add.at(oe, (src[m], node_col[dst[m]]), 1.0)

    in_tot = ie.sum(axis=1)
    out_tot = oe.sum(axis=1)
    inp = np.divide(ie, in_tot[:, None], out=np.zeros_like(ie), where=in_tot[:, None] > 0)
    onp = np.divide(oe, out_tot[:, None], out=np.zeros_like(oe), where=out_tot[:, None] > 0)
    return SNPTable(g.ids, regions, inp, onp, in_tot.astype(np.int64), out_tot.astype(np.int64))


@dataclass(frozen=True)
class FeatureMatrix:
    """Classifier input in canonical node order (sorted external id).

    ``X`` columns: all ihop, all ohop (anchor order), all inp, all onp (region
    order). ``mhop`` rides alongside for sampling and is not a column of ``X``.
    """

    node_ids: tuple[str, ...]
    columns: tuple[str, ...]
    X: np.ndarray
    mhop: np.ndarray

    @property
    def width(self) -> int:
        return self.X.shape[1]

    def row_of(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.node_ids)}

    def row(self, node_id: str) -> np.ndarray:
        return self.X[self.node_ids.index(node_id)]

    def subset(self, node_ids: Sequence[str]) -> "FeatureMatrix":
        pos = self.row_of()
        idx = np.array([pos[n] for n in node_ids], dtype=np.int64)
        return FeatureMatrix(tuple(node_ids), self.columns, self.X[idx], self.mhop[idx])

    def equals(self, other: "FeatureMatrix") -> bool:
        return (
            self.node_ids == other.node_ids
            and self.columns == other.columns
            and self.X.shape == other.X.shape
            and self.X.tobytes() == other.X.tobytes()
            and np.array_equal(self.mhop, other.mhop)
        )


def assemble_features(sdv: SDVTable, snp: SNPTable) -> FeatureMatrix:
    if set(sdv.node_ids) != set(snp.node_ids) or len(sdv.node_ids) != len(snp.node_ids):
        raise ConsistencyError("distance and neighbourhood tables cover different node sets")
    order_sdv = np.argsort(np.array(sdv.node_ids, dtype=object), kind="stable")
    pos_snp = {n: i for i, n in enumerate(snp.node_ids)}
    node_ids = tuple(sdv.node_ids[i] for i in order_sdv)
    order_snp = np.array([pos_snp[n] for n in node_ids], dtype=np.int64)

    X = np.hstack([
        sdv.ihop[order_sdv].astype(np.float64),
        sdv.ohop[order_sdv].astype(np.float64),
        snp.inp[order_snp],
        snp.onp[order_snp],
    ])
    a = sdv.anchors.node_ids
    columns = (
        tuple(f"ihop_{x}" for x in a)
        + tuple(f"ohop_{x}" for x in a)
        + tuple(f"inp_{r}" for r in snp.regions)
        + tuple(f"onp_{r}" for r in snp.regions)
    )
    return FeatureMatrix(node_ids, columns, X, sdv.mhop[order_sdv].copy())


def build_features(
    g: DirectedGraph,
    labels: LabelTable,
    anchors: AnchorSet,
    regions: Sequence[str],
    cap: int = DEFAULT_CAP,
    surrogate: int | None = None,
    threads: int = 1,
) -> FeatureMatrix:
    sdv = compute_sdv(g, anchors, cap=cap, surrogate=surrogate, threads=threads)
    snp = compute_snp(g, labels, regions)
    return assemble_features(sdv, snp)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_feature_csv(fm: FeatureMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("node_id",) + fm.columns + ("mhop",))
        for nid, row, m in zip(fm.node_ids, fm.X, fm.mhop):
            w.writerow([nid, *map(_fmt, row), int(m)])


def read_feature_csv(path: str | Path) -> FeatureMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if not header or header[0] != "node_id" or header[-1] != "mhop":
            raise ParseError(f"{path}: bad feature header")
        ids, rows, mh = [], [], []
        for lineno, rec in enumerate(r, start=2):
            if len(rec) != len(header):
                raise ParseError(f"{path}: expected {len(header)} fields", line=lineno)
            ids.append(rec[0])
            rows.append([float(x) for x in rec[1:-1]])
            mh.append(int(rec[-1]))
    X = np.array(rows, dtype=np.float64).reshape(len(ids), len(header) - 2)
    return FeatureMatrix(tuple(ids), tuple(header[1:-1]), X, np.array(mh, dtype=np.int64))
