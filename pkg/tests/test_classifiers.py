import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from globalness.classifiers import (
    ClassifierModel, TrainConfig, evaluate, fit_tree, load_model, predict, predict_many,
    precision_recall, save_model, train, train_arrays,
)
from globalness.classifiers.models import AdaBoostSAMME
from globalness.errors import ConfigError, EvaluationError, ShapeError, TrainingError, VersionError
from globalness.sampler import TrainingSet
from globalness.seeding import substream

KINDS = ("random_forest", "adaboost", "naive_bayes")


def blobs(seed=0, n=50, d=4, classes=("A", "B")):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(6.0 * i, 1.0, size=(n, d)) for i in range(len(classes))])
    y = [c for c in classes for _ in range(n)]
    return X, y


def cfg(kind, **kw):
    kw.setdefault("trees", 25)
    kw.setdefault("rounds", 25)
    return TrainConfig(kind=kind, **kw)


@pytest.mark.parametrize("kind", KINDS)
def test_blobs_training_accuracy(kind):
    X, y = blobs()
    m = train_arrays(X, y, ("A", "B"), cfg(kind))
    assert predict_many(m, X) == y
    r = evaluate(m, X, y)
    assert r["macro_precision"] == r["macro_recall"] == 1.0


@pytest.mark.parametrize("kind", KINDS)
def test_same_seed_gives_identical_serialisation(kind):
    X, y = blobs(1, classes=("A", "B", "C"))
    a = train_arrays(X, y, ("A", "B", "C"), cfg(kind, rng_seed=5))
    b = train_arrays(X, y, ("A", "B", "C"), cfg(kind, rng_seed=5))
    assert a.dumps() == b.dumps()


def test_forest_threads_do_not_change_model():
    X, y = blobs(2, classes=("A", "B", "C"))
    a = train_arrays(X, y, ("A", "B", "C"), cfg("random_forest"), threads=1)
    b = train_arrays(X, y, ("A", "B", "C"), cfg("random_forest"), threads=4)
    assert a.dumps() == b.dumps()


def test_train_is_independent_of_row_order():
    X, y = blobs(3)
    ids = tuple(f"n{i:03d}" for i in range(len(y)))
    ts = TrainingSet(ids, X, tuple(y), ("local",) * len(y), ("A", "B"))
    perm = np.random.default_rng(0).permutation(len(y))
    ts2 = TrainingSet(tuple(ids[i] for i in perm), X[perm], tuple(y[i] for i in perm), ts.rule, ("A", "B"))
    assert train(ts, cfg("random_forest")).dumps() == train(ts2, cfg("random_forest")).dumps()


def test_memorises_separable_training_rows():
    rng = np.random.default_rng(4)
    X = rng.permutation(60).reshape(30, 2).astype(float)
    y = [("A", "B", "C")[i % 3] for i in range(30)]
    m = train_arrays(X, y, ("A", "B", "C"), TrainConfig(trees=1, bootstrap=False, features_per_split="all",
                                                        max_depth=30))
    assert all(predict(m, X[i]) == y[i] for i in range(30))


class _Uniform:
    def predict_proba(self, X):
        return np.full((len(X), 3), 1 / 3)


def test_uniform_probabilities_pick_first_class():
    m = ClassifierModel("random_forest", ("B", "A", "C"), 2, TrainConfig(), _Uniform())
    assert predict(m, [0.0, 0.0]) == "B"


def test_forest_is_majority_vote_of_its_trees():
    X, y = blobs(5, classes=("A", "B", "C"))
    X = X + np.random.default_rng(9).normal(0, 4, size=X.shape)
    m = train_arrays(X, y, ("A", "B", "C"), cfg("random_forest", trees=15, max_depth=3))
    probe = np.random.default_rng(6).normal(6, 6, size=(200, X.shape[1]))
    votes = np.stack([t.predict(probe) for t in m.estimator.trees], axis=1)
    expected = []
    for row in votes:
        counts = np.bincount(row, minlength=3)
        expected.append(m.classes[int(np.flatnonzero(counts == counts.max())[0])])
    assert predict_many(m, probe) == expected


def test_single_tree_forest_equals_plain_tree():
    X, y = blobs(7, classes=("A", "B", "C"))
    X = X + np.random.default_rng(1).normal(0, 5, size=X.shape)
    codes = np.array([("A", "B", "C").index(v) for v in y])
    m = train_arrays(X, y, ("A", "B", "C"), TrainConfig(trees=1, bootstrap=False, features_per_split="all",
                                                        max_depth=4, rng_seed=3))
    tree = fit_tree(X, codes, 3, substream(3, "tree", 0), max_depth=4, max_features=X.shape[1])
    assert np.array_equal(m.estimator.trees[0].predict(X), tree.predict(X))


def test_tree_split_rule_and_depth():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    t = fit_tree(X, np.array([0, 0, 1, 1]), 2, np.random.default_rng(0))
    assert t.depth == 1 and t.threshold[0] == 1.5
    assert list(t.predict(np.array([[1.5], [1.6]]))) == [0, 1]


def _samme_oracle(X, y, k, rounds, seed):
    # independent re-derivation of the weight updates from the same stumps
    w = np.full(len(X), 1 / len(X))
    alphas = []
    for m in range(rounds):
        s = fit_tree(X, y, k, substream(seed, "stump", m), sample_weight=w, max_depth=1)
        miss = s.predict(X) != y
        err = w[miss].sum() / w.sum()
        if err >= 1 - 1 / k:
            break
        err = max(err, 1e-10)
        alphas.append(math.log((1 - err) / err) + math.log(k - 1))
        if err <= 1e-10:
            break
        w = w * np.exp(alphas[-1] * miss)
        w = w / w.sum()
    return alphas


def test_adaboost_alphas_match_samme_recurrence():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(90, 3))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int) + (X[:, 2] > 1).astype(int)
    m = AdaBoostSAMME(3, rounds=12, seed=2).fit(X, y)
    assert np.allclose(m.alphas, _samme_oracle(X, y, 3, 12, 2))
    assert all(a > 0 for a in m.alphas)


def test_naive_bayes_absent_class_never_predicted():
    X, y = blobs(2)
    m = train_arrays(X, y, ("A", "B", "C"), cfg("naive_bayes"))
    assert np.all(m.predict_proba(X)[:, 2] == 0)


@pytest.mark.parametrize("kind", KINDS)
def test_probabilities_normalised(kind):
    X, y = blobs(3, classes=("A", "B", "C"))
    m = train_arrays(X, y, ("A", "B", "C"), cfg(kind))
    P = m.predict_proba(np.random.default_rng(0).uniform(-20, 30, size=(2000, X.shape[1])))
    assert np.all(P >= 0) and np.allclose(P.sum(axis=1), 1.0, atol=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_save_load_preserves_predictions(tmp_path, kind):
    X, y = blobs(4, classes=("A", "B", "C"))
    m = train_arrays(X, y, ("A", "B", "C"), cfg(kind))
    save_model(m, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    probe = np.random.default_rng(1).uniform(-5, 15, size=(300, X.shape[1]))
    assert np.array_equal(back.predict_proba(probe), m.predict_proba(probe))


def test_model_version_checked(tmp_path):
    X, y = blobs()
    d = train_arrays(X, y, ("A", "B"), cfg("naive_bayes")).to_dict()
    d["version"] = 99
    (tmp_path / "m.json").write_text(json.dumps(d))
    with pytest.raises(VersionError):
        load_model(tmp_path / "m.json")


def test_width_mismatch_is_shape_error():
    X, y = blobs()
    m = train_arrays(X, y, ("A", "B"), cfg("naive_bayes"))
    with pytest.raises(ShapeError):
        m.predict_proba(np.zeros((2, 3)))


def test_training_errors():
    X, y = blobs()
    with pytest.raises(TrainingError):
        train_arrays(X, ["A"] * len(y), ("A", "B"), cfg("naive_bayes"))
    X2 = X.copy()
    X2[0, 0] = np.nan
    with pytest.raises(TrainingError):
        train_arrays(X2, y, ("A", "B"), cfg("naive_bayes"))
    with pytest.raises(ConfigError):
        TrainConfig(kind="svm")


def test_output_classes_are_targets_plus_other():
    classes = tuple(f"S{i:02d}" for i in range(50)) + ("OT",)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(len(classes) * 4, 3))
    y = [c for c in classes for _ in range(4)]
    m = train_arrays(X, y, classes, cfg("random_forest", trees=3))
    assert len(m.classes) == 51 and m.predict_proba(X).shape[1] == 51


def test_confusion_example():
    r = precision_recall(["A", "A", "A", "B", "B", "B"], ["A", "A", "B", "B", "B", "B"], ["A", "B"])
    assert r["per_class"]["A"]["precision"] == 1.0
    assert r["per_class"]["A"]["recall"] == pytest.approx(2 / 3)
    assert r["per_class"]["B"]["precision"] == 0.75


def test_all_correct_and_empty():
    r = precision_recall(["A", "B"], ["A", "B"])
    assert r["macro_precision"] == r["macro_recall"] == 1.0
    with pytest.raises(EvaluationError):
        precision_recall([], [])


def test_zero_denominators_listed():
    r = precision_recall(["A", "A"], ["A", "A"], ["A", "B"])
    assert set(r["undefined"]) == {"precision:B", "recall:B"}


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from("ABC"), min_size=1, max_size=40), st.integers(0, 1000))
def test_precision_recall_against_counting_oracle(truth, seed):
    pred = list(np.random.default_rng(seed).choice(list("ABC"), size=len(truth)))
    r = precision_recall(truth, pred, list("ABC"))
    for c in "ABC":
        tp = sum(t == p == c for t, p in zip(truth, pred))
        fp = sum(p == c and t != c for t, p in zip(truth, pred))
        fn = sum(t == c and p != c for t, p in zip(truth, pred))
        assert r["per_class"][c]["precision"] == (tp / (tp + fp) if tp + fp else 0.0)
        assert r["per_class"][c]["recall"] == (tp / (tp + fn) if tp + fn else 0.0)
