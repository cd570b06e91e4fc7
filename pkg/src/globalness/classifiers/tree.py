"""CART classification tree with Gini impurity, stored as flat arrays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class DecisionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, n_classes) class distribution at each node

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row (``x <= threshold`` goes left)."""
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] != LEAF
        rows = np.arange(len(X))
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax picks the lowest class index on ties
        return np.argmax(self.predict_proba(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64).reshape(len(d["feature"]), -1),
        )


def _best_split_on(x, W, min_leaf):
    """Best threshold for one feature. Returns (weighted gini, threshold) or None."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    m = len(xs)
    if xs[0] == xs[-1]:
        return None
    cum = np.cumsum(W[order], axis=0)
    left = cum[:-1]
    right = cum[-1] - left
    wl = left.sum(axis=1)
    wr = right.sum(axis=1)
    pos = np.arange(1, m)
    valid = (xs[:-1] < xs[1:]) & (pos >= min_leaf) & (m - pos >= min_leaf) & (wl > 0) & (wr > 0)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        imp = wl - (left**2).sum(axis=1) / wl + wr - (right**2).sum(axis=1) / wr
    imp = np.where(valid, imp, np.inf)
    i = int(np.argmin(imp))
    return float(imp[i]), float((xs[i] + xs[i + 1]) / 2.0)


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
    sample_weight: np.ndarray | None = None,
    max_depth: int = 12,
    min_leaf: int = 1,
    max_features: int | None = None,
) -> DecisionTree:
    """Grow a tree depth-first.

    At each node features are visited in a fresh random order and the first
    ``max_features`` non-constant ones are scored; the lowest weighted Gini wins,
    earlier features winning exact ties. A split must strictly lower impurity.
    """
    n, d = X.shape
    max_features = d if max_features is None else max(1, min(max_features, d))
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    W = np.zeros((n, n_classes))
    W[np.arange(n), y] = w

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        counts = W[idx].sum(axis=0)
        tot = counts.sum()
        value.append(counts / tot if tot > 0 else np.full(n_classes, 1.0 / n_classes))
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = W[idx].sum(axis=0)
        tot = counts.sum()
        if depth >= max_depth or len(idx) < 2 * min_leaf or np.count_nonzero(counts) <= 1:
            continue
        parent_imp = tot - (counts**2).sum() / tot
        best = None
        scored = 0
        for f in rng.permutation(d):
            if scored >= max_features:
                break
            res = _best_split_on(X[idx, f], W[idx], min_leaf)
            if res is None:
                continue
            scored += 1
            if best is None or res[0] < best[0]:
                best = (res[0], res[1], int(f))
        if best is None or best[0] >= parent_imp - 1e-12 * max(tot, 1.0):
            continue
        _, thr, f = best
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return DecisionTree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.vstack(value),
    )
