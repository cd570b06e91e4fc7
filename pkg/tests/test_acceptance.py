"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line with the
measured value next to its tolerance (also repeated in the session summary)."""

import json
import time

import numpy as np
import pytest

import conftest
from conftest import floyd_warshall, random_graph, random_labels
from test_pipeline import _random_case, literal_oracle
from test_sampler import random_fixture
from globalness.classifiers import TrainConfig, load_model, save_model, train_arrays
from globalness.cli import main
from globalness.experiments import (
    COUNTRYWISE, COUNTRYWISE_IN_SCOPE, COUNTRYWISE_SEEDS, COUNTRYWISE_THRESHOLDS, countrywise_summary,
    stability_run, statewise_run,
)
from globalness.features import compute_mhop, compute_sdv, compute_snp, make_anchor_set
from globalness.graph import DirectedGraph
from globalness.pipeline import DefinitionParams, definition_oracle
from globalness.sampler import GLOBAL_RULE, LOCAL_RULE, SamplingPolicy, select_biased


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_1_bfs_oracle_equivalence():
    t0 = time.perf_counter()
    mismatches = checked = 0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(5, 61))
        g = random_graph(rng, n, int(rng.integers(n, 4 * n)))
        labels = random_labels(rng, g, ["A", "B", "C"])
        picks = rng.choice(g.node_count, size=min(4, n), replace=False)
        anchors = make_anchor_set(g, labels, [(g.ids[i], labels.label_of(g.ids[i])) for i in picks])
        sdv = compute_sdv(g, anchors)
        d = floyd_warshall(g)
        for j, a in enumerate(anchors.nodes):
            exp_out = np.where(d[a] <= 15, d[a], 16)
            exp_in = np.where(d[:, a] <= 15, d[:, a], 16)
            mismatches += int((sdv.ohop[:, j] != exp_out).sum() + (sdv.ihop[:, j] != exp_in).sum())
            checked += 2 * n
    dt = time.perf_counter() - t0
    record(1, "SDV equals all-pairs oracle", mismatches == 0 and dt < 5,
           f"{mismatches} mismatches in {checked} entries (need 0); {dt:.2f}s (limit 5s)")


def test_2_snp_normalisation():
    bad = zero_mismatch = nodes = 0
    seed = 0
    while nodes < 1000:
        rng = np.random.default_rng(2000 + seed)
        seed += 1
        g = random_graph(rng, 50, int(rng.integers(20, 150)))
        labels = random_labels(rng, g, ["A", "B", "C", "D"], unlabeled=0.25)
        snp = compute_snp(g, labels, ["A", "B"])
        for v in range(g.node_count):
            if labels.label_of(g.ids[v]) is None:
                continue
            nodes += 1
            for mat, adj in ((snp.inp, g.in_adj), (snp.onp, g.out_adj)):
                labeled_deg = sum(labels.label_of(g.ids[u]) is not None for u in adj[v])
                s = mat[v].sum()
                if not (abs(s - 1) <= 1e-9 or np.all(mat[v] == 0)):
                    bad += 1
                if (np.all(mat[v] == 0)) != (labeled_deg == 0):
                    zero_mismatch += 1
    record(2, "SNP rows sum to 1 or are all-zero", bad == 0 and zero_mismatch == 0,
           f"{nodes} labeled nodes; {bad} bad sums (tol 1e-9), {zero_mismatch} zero/degree mismatches (need 0)")


def test_3_definition_oracle_equivalence():
    diffs = 0
    for seed in range(20):
        g, labels, anchors, rng = _random_case(3000 + seed)
        w = {c: float(rng.uniform(0.5, 2.0)) for c in "ABC"}
        eps = float(rng.choice([0.0, 1.0]))
        k = int(rng.choice([2, 3]))
        got = definition_oracle(g, labels, anchors, DefinitionParams(weights=w, epsilon=eps, k_balance=k))
        diffs += got != literal_oracle(g, labels, anchors, w, eps, k)
    record(3, "definition oracle equals literal transcription", diffs == 0,
           f"{diffs}/20 graphs with differing sets (need exact equality)")


def test_4_statewise_planted_truth():
    t0 = time.perf_counter()
    res = statewise_run(42)
    dt = time.perf_counter() - t0
    p, r = res["precision"], res["recall"]
    record(4, "state-wise precision/recall on planted globals", p >= 0.90 and r >= 0.85 and dt < 60,
           f"precision {p:.3f} (>= 0.90), recall {r:.3f} (>= 0.85), "
           f"{len(res['flagged'])} flagged / {len(res['planted'])} planted; {dt:.1f}s (limit 60s)")


@pytest.fixture(scope="module")
def countrywise():
    t0 = time.perf_counter()
    s = countrywise_summary()
    return s, time.perf_counter() - t0


def test_5_countrywise_planted_truth(countrywise):
    s, dt = countrywise
    p, r = s["macro_precision"], s["macro_recall"]
    record(5, "country-wise macro precision/recall, 3 seeds", p >= 0.85 and r >= 0.80 and dt < 180,
           f"macro precision {p:.3f} (>= 0.85), macro recall {r:.3f} (>= 0.80) over "
           f"{COUNTRYWISE_IN_SCOPE} in-scope classes + OT; global-class P {s['global_precision']:.3f} "
           f"R {s['global_recall']:.3f} (diagnostic); {dt:.1f}s (limit 180s)")


def _sampler_violations(trials=100):
    bad = 0
    local = lambda ts: {n for n, x in zip(ts.node_ids, ts.rule) if x == LOCAL_RULE}
    glob = lambda ts: {n for n, x in zip(ts.node_ids, ts.rule) if x == GLOBAL_RULE}
    for t in range(trials):
        rng = np.random.default_rng(6000 + t)
        fm, labels = random_fixture(rng)
        lo, hi = int(rng.integers(0, 3)), int(rng.integers(5, 8))
        base = select_biased(fm, labels, SamplingPolicy(("IL",), lo, hi))
        bad += not local(base) <= local(select_biased(fm, labels, SamplingPolicy(("IL",), lo + 1, hi)))
        bad += not glob(base) <= glob(select_biased(fm, labels, SamplingPolicy(("IL",), lo, hi - 1)))
    return bad


def _oracle_violations(trials=100):
    bad = 0
    for t in range(trials):
        g, labels, anchors, rng = _random_case(7000 + t)
        e1, e2 = sorted(rng.uniform(0, 4, size=2))
        a = definition_oracle(g, labels, anchors, DefinitionParams(epsilon=e1, k_balance=2))
        b = definition_oracle(g, labels, anchors, DefinitionParams(epsilon=e2, k_balance=2))
        c = definition_oracle(g, labels, anchors, DefinitionParams(epsilon=e1, k_balance=3))
        bad += (not a <= b) + (not c <= a)
    return bad


def _mhop_violations(trials=100):
    bad = 0
    for t in range(trials):
        rng = np.random.default_rng(8000 + t)
        g = random_graph(rng, 40, int(rng.integers(30, 100)))
        labels = random_labels(rng, g, ["A", "B"])
        anchors = make_anchor_set(g, labels, [(g.ids[0], labels.label_of(g.ids[0])),
                                              (g.ids[1], labels.label_of(g.ids[1]))])
        before = compute_sdv(g, anchors).mhop
        extra = [(g.ids[u], g.ids[v]) for u, v in rng.integers(0, 40, size=(5, 2))]
        g2 = DirectedGraph.from_edges(g.edges() + extra, nodes=g.ids)
        after = compute_sdv(g2, make_anchor_set(g2, labels, zip(anchors.node_ids,
                                                                [labels.class_names[c] for c in anchors.classes])))
        bad += int((after.mhop > before).sum())
        bad += int(np.any(after.mhop != compute_mhop(after.ihop_raw, after.ohop_raw, after.surrogate)))
    return bad


def test_6_monotonicity_suite():
    s, o, m = _sampler_violations(), _oracle_violations(), _mhop_violations()
    record(6, "monotonicity (sampler thresholds, oracle eps/k, MHOP under edge addition)", s == o == m == 0,
           f"violations over 100 perturbations each: sampler {s}, oracle {o}, mhop {m} (need 0)")


def test_7_anchor_set_stability(countrywise):
    s, _ = countrywise
    res = stability_run(COUNTRYWISE_SEEDS[0], first=s["runs"][0]["report"])["result"]
    record(7, "overlap under a second anchor family", res.overlap_coefficient >= 0.5,
           f"overlap coefficient {res.overlap_coefficient:.3f} (>= 0.5), jaccard {res.jaccard:.3f}, "
           f"sizes {res.set_a_size}/{res.set_b_size}")


def test_8_detect_determinism_across_threads(tmp_path):
    c = COUNTRYWISE
    lo, hi = COUNTRYWISE_THRESHOLDS
    targets = c.region_names()[:COUNTRYWISE_IN_SCOPE]
    cfg = {
        "seed": 42,
        "paths": {"data_dir": "data", "output_dir": "out"},
        "synth": {"regions": c.regions, "nodes_per_region": c.nodes_per_region, "p_in": c.p_in,
                  "p_out": c.p_out, "global_fraction": c.global_fraction, "global_spread": c.global_spread,
                  "anchor_degree": c.anchor_degree, "anchor_families": c.anchor_families},
        "hypothesis": {"target_classes": targets, "anchor_classes": targets},
        "sampling": {"local_threshold": lo, "global_threshold": hi},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    assert main(["--config", str(path), "gen"]) == 0
    outputs = []
    for threads in ("1", "4"):
        assert main(["--config", str(path), "--threads", threads, "detect"]) == 0
        outputs.append((tmp_path / "out" / "report_nodes.csv").read_bytes())
    record(8, "detect per-node CSV identical for --threads 1 and 4", outputs[0] == outputs[1],
           f"{len(outputs[0])} bytes, byte-identical={outputs[0] == outputs[1]}")


def test_9_classifier_properties(tmp_path):
    rng = np.random.default_rng(9)
    classes = ("A", "B", "C", "OT")
    X = np.vstack([rng.normal(3 * i, 1.5, size=(125, 6)) for i in range(4)])
    y = [c for c in classes for _ in range(125)]
    probe = rng.uniform(-10, 20, size=(10_000, 6))
    worst, mismatched = 0.0, 0
    for kind in ("random_forest", "adaboost", "naive_bayes"):
        m = train_arrays(X, y, classes, TrainConfig(kind=kind, trees=50, rounds=50, rng_seed=9))
        P = m.predict_proba(probe)
        worst = max(worst, float(np.abs(P.sum(axis=1) - 1).max()), float(-min(P.min(), 0)))
        save_model(m, tmp_path / f"{kind}.json")
        back = load_model(tmp_path / f"{kind}.json")
        mismatched += int((back.predict_proba(X) != m.predict_proba(X)).any(axis=1).sum())
    record(9, "probabilities normalised; serialisation round-trip", worst <= 1e-9 and mismatched == 0,
           f"max |sum-1| {worst:.2e} on 10000 inputs x 3 kinds (tol 1e-9); "
           f"{mismatched} changed predictions on 500 rows x 3 kinds (need 0)")
