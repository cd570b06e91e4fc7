"""Directed graph storage, label ingestion and directional BFS."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from .errors import ConfigError, EmptyGraphError, ParseError

log = logging.getLogger(__name__)

UNREACHED = -1
INWARD = "inward"
OUTWARD = "outward"
Direction = Literal["inward", "outward"]
DEFAULT_CAP = 15


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable directed graph over dense integer node indices.

    ``ids[i]`` is the external string id of node ``i``; ``index`` is the inverse.
    Both adjacency directions are stored so inward BFS costs the same as outward.
    """

    ids: tuple[str, ...]
    out_adj: tuple[tuple[int, ...], ...]
    in_adj: tuple[tuple[int, ...], ...]
    index: dict[str, int] = field(repr=False, compare=False)
    dropped_duplicates: int = 0
    dropped_self_loops: int = 0

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.out_adj)

    def edges(self) -> list[tuple[str, str]]:
        return [(self.ids[u], self.ids[v]) for u, nbrs in enumerate(self.out_adj) for v in nbrs]

    def node(self, node_id: str) -> int:
        try:
            return self.index[node_id]
        except KeyError:
            raise KeyError(f"unknown node id {node_id!r}") from None

    def neighbors(self, u: int, direction: Direction) -> tuple[int, ...]:
        return self.out_adj[u] if direction == OUTWARD else self.in_adj[u]

    def reverse(self) -> "DirectedGraph":
        return DirectedGraph(self.ids, self.in_adj, self.out_adj, self.index)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> "DirectedGraph":
        """Build a graph from ``(src, dst)`` id pairs.

        Node indices follow first appearance (``nodes`` first, then edge order).
        Self-loops are dropped and duplicate edges collapsed.
        """
        index: dict[str, int] = {}
        ids: list[str] = []

        def intern(name: str) -> int:
            i = index.get(name)
            if i is None:
                i = index[name] = len(ids)
                ids.append(name)
            return i

        for name in nodes:
            intern(name)
        seen: set[tuple[int, int]] = set()
        dup = loops = 0
        pairs: list[tuple[int, int]] = []
        for src, dst in edges:
            u, v = intern(src), intern(dst)
            if u == v:
                loops += 1
                continue
            if (u, v) in seen:
                dup += 1
                continue
            seen.add((u, v))
            pairs.append((u, v))

        out: list[list[int]] = [[] for _ in ids]
        inc: list[list[int]] = [[] for _ in ids]
        for u, v in pairs:
            out[u].append(v)
            inc[v].append(u)
        return cls(
            ids=tuple(ids),
            out_adj=tuple(tuple(sorted(a)) for a in out),
            in_adj=tuple(tuple(sorted(a)) for a in inc),
            index=index,
            dropped_duplicates=dup,
            dropped_self_loops=loops,
        )


def _tsv_lines(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def _split2(line: str, lineno: int) -> tuple[str, str]:
    parts = line.split("\t")
    if len(parts) != 2:
        raise ParseError(f"expected 2 tab-separated fields, got {len(parts)}", line=lineno)
    a, b = parts[0].strip(), parts[1].strip()
    if not a or not b:
        raise ParseError("empty field", line=lineno)
    return a, b


def load_edges(path: str | Path) -> DirectedGraph:
    path = Path(path)
    edges = [_split2(line, n) for n, line in _tsv_lines(path)]
    if not edges:
        raise EmptyGraphError(f"{path}: no edges")
    g = DirectedGraph.from_edges(edges)
    log.info(
        "loaded %s: %d nodes, %d edges (%d duplicates, %d self-loops dropped)",
        path, g.node_count, g.edge_count, g.dropped_duplicates, g.dropped_self_loops,
    )
    return g


@dataclass(frozen=True)
class LabelTable:
    """Ground-truth class per external node id.

    A node is either in ``labels``, in ``excluded`` (ambiguous location), or absent
    (unlabeled).
    """

    labels: dict[str, int]
    class_names: tuple[str, ...]
    excluded: frozenset[str] = frozenset()

    def __post_init__(self):
        k = len(self.class_names)
        bad = [n for n, c in self.labels.items() if not 0 <= c < k]
        if bad:
            raise ConfigError(f"class ids out of range for nodes {bad[:5]}")
        both = self.excluded.intersection(self.labels)
        if both:
            raise ConfigError(f"nodes both labeled and excluded: {sorted(both)[:5]}")

    def class_id(self, name: str) -> int:
        try:
            return self.class_names.index(name)
        except ValueError:
            raise ConfigError(f"unknown class {name!r}") from None

    def label_of(self, node_id: str) -> str | None:
        c = self.labels.get(node_id)
        return None if c is None else self.class_names[c]

    def aligned(self, g: DirectedGraph) -> np.ndarray:
        """Per dense index class id; -1 for unlabeled or excluded nodes."""
        out = np.full(g.node_count, -1, dtype=np.int64)
        for name, c in self.labels.items():
            i = g.index.get(name)
            if i is not None:
                out[i] = c
        return out

    def histogram(self) -> dict[str, int]:
        counts = dict.fromkeys(self.class_names, 0)
        for c in self.labels.values():
            counts[self.class_names[c]] += 1
        return counts

    @classmethod
    def from_mapping(cls, assignments: dict[str, str], excluded: Iterable[str] = ()) -> "LabelTable":
        names = tuple(sorted(set(assignments.values())))
        pos = {n: i for i, n in enumerate(names)}
        return cls({k: pos[v] for k, v in assignments.items()}, names, frozenset(excluded))


def _resolve(location: str, mapping: dict[str, set[str]]) -> set[str]:
    """Follow mapping chains to terminal classes. ``x -> x`` entries are terminal."""
    out: set[str] = set()
    stack = [(location, (location,))]
    while stack:
        loc, path = stack.pop()
        targets = mapping.get(loc)
        if targets is None or targets == {loc}:
            out.add(loc)
            continue
        for t in targets:
            if t == loc:
                out.add(t)
            elif t in path:
                raise ConfigError(f"mapping cycle: {' -> '.join(path + (t,))}")
            else:
                stack.append((t, path + (t,)))
    return out


def load_labels(path: str | Path, mapping: str | Path | None = None) -> LabelTable:
    """Read ``node_id<TAB>location`` lines, optionally mapping locations to classes.

    With a mapping, locations that resolve to more than one class put the node in
    ``excluded``; locations missing from the mapping leave the node unlabeled.
    """
    raw: dict[str, set[str]] = {}
    for lineno, line in _tsv_lines(Path(path)):
        node, loc = _split2(line, lineno)
        raw.setdefault(node, set()).add(loc)

    table: dict[str, set[str]] | None = None
    if mapping is not None:
        table = {}
        for lineno, line in _tsv_lines(Path(mapping)):
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{mapping}: expected 2 tab-separated fields", line=lineno)
            loc, cls_name = parts[0].strip(), parts[1].strip()
            if not cls_name:
                raise ConfigError(f"{mapping}: empty class name at line {lineno}")
            if not loc:
                raise ParseError(f"{mapping}: empty location", line=lineno)
            table.setdefault(loc, set()).add(cls_name)

    assigned: dict[str, str] = {}
    excluded: set[str] = set()
    unmapped = 0
    for node, locs in raw.items():
        classes: set[str] = set()
        for loc in locs:
            if table is None:
                classes.add(loc)
            elif loc in table:
                classes |= _resolve(loc, table)
        if not classes:
            unmapped += 1
        elif len(classes) > 1:
            excluded.add(node)
        else:
            assigned[node] = classes.pop()
    if unmapped:
        log.info("%d nodes left unlabeled (location not in mapping)", unmapped)
    if excluded:
        log.info("%d nodes excluded for ambiguous mapping", len(excluded))
    return LabelTable.from_mapping(assigned, excluded)


@dataclass(frozen=True)
class HopMap:
    source: int
    direction: str
    hops: np.ndarray
    cap: int

    def __getitem__(self, v: int) -> int:
        return int(self.hops[v])


def bfs_hops(g: DirectedGraph, source: int | str, direction: Direction = OUTWARD, cap: int = DEFAULT_CAP) -> HopMap:
    """Unit-weight shortest path lengths from ``source``.

    ``outward`` follows edges forward, ``inward`` follows them backward. Nodes
    farther than ``cap`` or unreachable get ``UNREACHED``.
    """
    if isinstance(source, str):
        source = g.node(source)
    if not 0 <= source < g.node_count:
        raise KeyError(f"unknown node index {source}")
    if cap < 1:
        raise ConfigError("cap must be >= 1")
    if direction not in (INWARD, OUTWARD):
        raise ConfigError(f"direction must be inward or outward, got {direction!r}")
    adj = g.out_adj if direction == OUTWARD else g.in_adj
    # plain list: numpy scalar indexing is slow inside the inner loop
    hops = [UNREACHED] * g.node_count
    hops[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        h = hops[u] + 1
        if h > cap:
            continue
        for v in adj[u]:
            if hops[v] == UNREACHED:
                hops[v] = h
                queue.append(v)
    return HopMap(source, direction, np.asarray(hops, dtype=np.int64), cap)
