import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from globalness.errors import ConfigError, SamplingError
from globalness.features import FeatureMatrix
from globalness.graph import LabelTable
from globalness.sampler import GLOBAL_RULE, LOCAL_RULE, OT, SamplingPolicy, select_biased


def _fixture(mhops, labs):
    ids = tuple(f"n{i:02d}" for i in range(len(mhops)))
    X = np.arange(len(mhops) * 2, dtype=float).reshape(-1, 2)
    fm = FeatureMatrix(ids, ("f0", "f1"), X, np.asarray(mhops, dtype=np.int64))
    labels = LabelTable.from_mapping({n: lab for n, lab in zip(ids, labs) if lab is not None})
    return fm, labels


def random_fixture(rng, n=60, classes=("IL", "IN", "MO", "XX")):
    mh = rng.integers(0, 8, size=n)
    labs = [classes[i] for i in rng.integers(0, len(classes), size=n)]
    labs[: len(classes)] = classes
    labs = [None if rng.random() < 0.1 and i >= len(classes) else lab for i, lab in enumerate(labs)]
    mh[0], mh[3] = 0, 7
    return _fixture(mh, labs)


def test_statewise_local_admitted():
    fm, labels = _fixture([1, 4], ["IL", "MO"])
    ts = select_biased(fm, labels, SamplingPolicy(("IL",), 1, 3))
    assert ts.node_ids == ("n00", "n01")
    assert ts.y == ("IL", OT) and ts.rule == (LOCAL_RULE, GLOBAL_RULE)


def test_countrywise_mhop_four_rejected():
    fm, labels = _fixture([0, 4, 5], ["US", "CA", "MX"])
    ts = select_biased(fm, labels, SamplingPolicy(("US",), 2, 5))
    assert "n01" not in ts.node_ids and "n02" in ts.node_ids


def test_policy_validation():
    with pytest.raises(ConfigError):
        SamplingPolicy(("A",), 3, 3)
    with pytest.raises(ConfigError):
        SamplingPolicy(("A",), -1, 3)
    with pytest.raises(ConfigError):
        SamplingPolicy(())
    with pytest.raises(ConfigError):
        SamplingPolicy(("OT",))


def test_empty_partitions_named():
    fm, labels = _fixture([5, 5], ["A", "B"])
    with pytest.raises(SamplingError, match="local"):
        select_biased(fm, labels, SamplingPolicy(("A",), 1, 3))
    fm, labels = _fixture([0, 1], ["A", "B"])
    with pytest.raises(SamplingError, match="OT"):
        select_biased(fm, labels, SamplingPolicy(("A",), 1, 3))


def test_matches_filter_comprehension_oracle(rng):
    fm, labels = random_fixture(rng)
    pol = SamplingPolicy(("IL", "IN"), 1, 4)
    ts = select_biased(fm, labels, pol)
    expect = {}
    for n, m in zip(fm.node_ids, fm.mhop):
        lab = labels.label_of(n)
        if lab in pol.target_classes and m <= 1:
            expect[n] = lab
        elif lab is not None and lab not in pol.target_classes and m >= 4:
            expect[n] = OT
    assert dict(zip(ts.node_ids, ts.y)) == expect
    assert ts.classes == ("IL", "IN", OT)
    assert sum(ts.counts().values()) == len(ts)
    rows = fm.row_of()
    assert all(np.array_equal(ts.X[i], fm.X[rows[n]]) for i, n in enumerate(ts.node_ids))


def test_cap_is_seeded_and_respected(rng):
    fm, labels = random_fixture(rng, n=200)
    pol = SamplingPolicy(("IL",), 2, 4, max_per_class=5, rng_seed=7)
    a, b = select_biased(fm, labels, pol), select_biased(fm, labels, pol)
    assert a.node_ids == b.node_ids
    assert all(v <= 5 for v in a.counts().values())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 2), st.integers(5, 7))
def test_threshold_monotonicity(seed, lo, hi):
    rng = np.random.default_rng(seed)
    fm, labels = random_fixture(rng)
    base = select_biased(fm, labels, SamplingPolicy(("IL",), lo, hi))
    looser = select_biased(fm, labels, SamplingPolicy(("IL",), lo + 1, hi))
    wider = select_biased(fm, labels, SamplingPolicy(("IL",), lo, hi - 1))
    local = lambda ts: {n for n, r in zip(ts.node_ids, ts.rule) if r == LOCAL_RULE}
    glob = lambda ts: {n for n, r in zip(ts.node_ids, ts.rule) if r == GLOBAL_RULE}
    assert local(base) <= local(looser)
    assert glob(base) <= glob(wider)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_rule_invariants(seed):
    rng = np.random.default_rng(seed)
    fm, labels = random_fixture(rng)
    pol = SamplingPolicy(("IL", "MO"), 2, 5)
    ts = select_biased(fm, labels, pol)
    mh = dict(zip(fm.node_ids, fm.mhop))
    for n, y, r in zip(ts.node_ids, ts.y, ts.rule):
        if r == LOCAL_RULE:
            assert mh[n] <= 2 and labels.label_of(n) in pol.target_classes and y == labels.label_of(n)
        else:
            assert mh[n] >= 5 and labels.label_of(n) not in pol.target_classes and y == OT
