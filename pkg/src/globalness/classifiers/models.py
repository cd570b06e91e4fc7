"""Gaussian naive Bayes, random forest and SAMME AdaBoost over a shared interface."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import TrainingError
from ..seeding import substream
from .tree import DecisionTree, fit_tree


def _one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((len(labels), k))
    out[np.arange(len(labels)), labels] = 1.0
    return out


class GaussianNaiveBayes:
    kind = "naive_bayes"

    def __init__(self, n_classes: int, variance_floor: float = 1e-6):
        self.n_classes = n_classes
        self.variance_floor = variance_floor
        self.means = None
        self.variances = None
        self.log_priors = None

    def fit(self, X, y, rng=None, threads=1):
        k, d = self.n_classes, X.shape[1]
        self.means = np.zeros((k, d))
        self.variances = np.ones((k, d))
        self.log_priors = np.full(k, -np.inf)
        for c in range(k):
            rows = X[y == c]
            if len(rows) == 0:
                continue
            self.means[c] = rows.mean(axis=0)
            self.variances[c] = np.maximum(rows.var(axis=0), self.variance_floor)
            self.log_priors[c] = math.log(len(rows) / len(X))
        return self

    def joint_log_likelihood(self, X):
        # (n, k): log prior + sum over features of log N(x | mean, var)
        diff = X[:, None, :] - self.means[None, :, :]
        ll = -0.5 * (np.log(2.0 * np.pi * self.variances)[None] + diff**2 / self.variances[None]).sum(axis=2)
        return ll + self.log_priors[None, :]

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(X)
        top = jll.max(axis=1, keepdims=True)
        p = np.exp(jll - top)
        return p / p.sum(axis=1, keepdims=True)

    def params(self):
        return {
            "variance_floor": self.variance_floor,
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_priors": [None if math.isinf(v) else v for v in self.log_priors.tolist()],
        }

    @classmethod
    def from_params(cls, n_classes, p):
        m = cls(n_classes, p["variance_floor"])
        m.means = np.asarray(p["means"], dtype=np.float64)
        m.variances = np.asarray(p["variances"], dtype=np.float64)
        m.log_priors = np.array([-np.inf if v is None else v for v in p["log_priors"]], dtype=np.float64)
        return m


class RandomForest:
    """Bagged Gini trees; ``predict_proba`` is the fraction of trees voting each class."""

    kind = "random_forest"

    def __init__(self, n_classes, trees=100, max_depth=12, min_leaf=1, max_features=None,
                 bootstrap=True, seed=0):
        self.n_classes = n_classes
        self.n_trees = trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees: list[DecisionTree] = []

    def _grow(self, X, y, t):
        # each tree owns its stream so the forest is independent of thread count
        rng = substream(self.seed, "tree", t)
        idx = rng.integers(0, len(X), size=len(X)) if self.bootstrap else np.arange(len(X))
        return fit_tree(X[idx], y[idx], self.n_classes, rng, max_depth=self.max_depth,
                        min_leaf=self.min_leaf, max_features=self.max_features)

    def fit(self, X, y, rng=None, threads=1):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                self.trees = list(pool.map(lambda t: self._grow(X, y, t), range(self.n_trees)))
        else:
            self.trees = [self._grow(X, y, t) for t in range(self.n_trees)]
        return self

    def tree_votes(self, X):
        return np.stack([t.predict(X) for t in self.trees], axis=1)

    def predict_proba(self, X):
        votes = self.tree_votes(X)
        counts = np.zeros((len(X), self.n_classes))
        for j in range(votes.shape[1]):
            counts[np.arange(len(X)), votes[:, j]] += 1.0
        return counts / votes.shape[1]

    def params(self):
        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_params(cls, n_classes, p):
        m = cls(n_classes, len(p["trees"]), p["max_depth"], p["min_leaf"], p["max_features"],
                p["bootstrap"], p["seed"])
        m.trees = [DecisionTree.from_dict(t) for t in p["trees"]]
        return m


class AdaBoostSAMME:
    """Multi-class stagewise boosting of depth-1 Gini trees.

    ``predict_proba`` is the alpha-weighted share of stump votes per class, so
    its argmax is the SAMME decision.
    """

    kind = "adaboost"
    _EPS = 1e-10

    def __init__(self, n_classes, rounds=100, seed=0):
        self.n_classes = n_classes
        self.rounds = rounds
        self.seed = seed
        self.stumps: list[DecisionTree] = []
        self.alphas: list[float] = []
        self.prior = np.full(n_classes, 1.0 / n_classes)

    def fit(self, X, y, rng=None, threads=1):
        k, n = self.n_classes, len(X)
        counts = np.bincount(y, minlength=k).astype(np.float64)
        self.prior = counts / counts.sum()
        w = np.full(n, 1.0 / n)
        self.stumps, self.alphas = [], []
        for m in range(self.rounds):
            stump = fit_tree(X, y, k, substream(self.seed, "stump", m), sample_weight=w, max_depth=1)
            miss = stump.predict(X) != y
            err = float(w[miss].sum() / w.sum())
            if err >= 1.0 - 1.0 / k:
                break
            err = max(err, self._EPS)
            alpha = math.log((1.0 - err) / err) + math.log(k - 1)
            self.stumps.append(stump)
            self.alphas.append(alpha)
            if err <= self._EPS:
                break
            w = w * np.exp(alpha * miss)
            w /= w.sum()
        return self

    def predict_proba(self, X):
        if not self.stumps:
            return np.tile(self.prior, (len(X), 1))
        score = np.zeros((len(X), self.n_classes))
        for a, s in zip(self.alphas, self.stumps):
            score += a * _one_hot(s.predict(X), self.n_classes)
        return score / score.sum(axis=1, keepdims=True)

    def params(self):
        return {
            "rounds": self.rounds,
            "seed": self.seed,
            "prior": self.prior.tolist(),
            "alphas": list(self.alphas),
            "stumps": [s.to_dict() for s in self.stumps],
        }

    @classmethod
    def from_params(cls, n_classes, p):
        m = cls(n_classes, p["rounds"], p["seed"])
        m.prior = np.asarray(p["prior"], dtype=np.float64)
        m.alphas = list(p["alphas"])
        m.stumps = [DecisionTree.from_dict(s) for s in p["stumps"]]
        return m


ESTIMATORS = {c.kind: c for c in (GaussianNaiveBayes, RandomForest, AdaBoostSAMME)}


def estimator_for(kind):
    try:
        return ESTIMATORS[kind]
    except KeyError:
        raise TrainingError(f"unknown classifier kind {kind!r}; choose from {sorted(ESTIMATORS)}") from None
