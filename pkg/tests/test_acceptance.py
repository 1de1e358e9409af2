"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria execute.
"""

import functools
import json
import time

import numpy as np
import pytest

from concur.cli import main
from concur.evaluate import evaluate
from concur.gnn import (TrainConfig, count_cp_params, init_model,
                        loss_and_grads, normalize_adjacency, predict,
                        sample_mask, tokenize_labels, train)
from concur.graph import RoadGraph, stratified_split
from concur.metrics import _khop_counts, metric_report
from concur.stats import hypothesis_test, paired_t_test, t_cdf
from concur.synth import SynthConfig, generate_dataset, generate_suite

from conftest import random_graph, random_labels
from oracles import (dense_adjacency, fd_grad, normal_cdf, t_cdf_df1,
                     t_cdf_df2)

GRID_KS = [1, 2, 4, 8, 10]


def criterion(name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[acceptance] {name}: FAIL")
                raise
            print(f"[acceptance] {name}: PASS")
        return wrapper
    return deco


def oracle_counts_per_k(graph, labels, ks):
    """Dense boolean-reachability oracle: per-node ball and positive counts."""
    adj = dense_adjacency(graph).astype(np.float64)
    n = graph.num_nodes
    reach = np.eye(n)
    pos = (np.asarray(labels) == 1).astype(np.float64)
    out = {}
    for k in range(1, max(ks) + 1):
        reach = ((reach @ adj + reach) > 0).astype(np.float64)
        if k in ks:
            ball = reach.copy()
            np.fill_diagonal(ball, 0.0)
            out[k] = (ball.sum(axis=1).astype(np.int64),
                      (ball @ pos).astype(np.int64))
    return out


@criterion("C1 metric-oracle-equivalence (50 graphs, zero-tol counts, 1e-12 means)")
def test_c1_metric_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    for trial in range(50):
        n = int(rng.integers(30, 201))
        graph = random_graph(rng, n, avg_degree=float(rng.uniform(1.5, 4.0)))
        labels = random_labels(rng, n, positive_ratio=0.3)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        ball, pos = _khop_counts(graph, GRID_KS, labels == 1)
        expected = oracle_counts_per_k(graph, labels, GRID_KS)
        for col, k in enumerate(GRID_KS):
            exp_ball, exp_pos = expected[k]
            assert np.array_equal(ball[:, col], exp_ball)
            assert np.array_equal(pos[:, col], exp_pos)
        report = metric_report(graph, labels, GRID_KS)
        for col, k in enumerate(GRID_KS):
            exp_ball, exp_pos = expected[k]
            for z in (0, 1):
                elig = (np.asarray(labels) == z) & (exp_ball > 0)
                assert report.counted[z][col] == int(elig.sum())
                assert report.excluded[z][col] == int(
                    np.sum(np.asarray(labels) == z) - elig.sum())
                ancd_oracle = sum(exp_pos[elig] / exp_ball[elig]) / elig.sum()
                ancc_oracle = sum((exp_pos[elig] > 0) * 1.0) / elig.sum()
                assert abs(report.ancd[z][col] - ancd_oracle) < 1e-12
                assert abs(report.ancc[z][col] - ancc_oracle) < 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"runtime {elapsed:.1f}s exceeds 10s budget"


@criterion("C2 metric-invariants (pointwise, monotone, permutation, workers)")
def test_c2_metric_invariants():
    rng = np.random.default_rng(202)
    for trial in range(20):
        n = int(rng.integers(40, 160))
        graph = random_graph(rng, n, avg_degree=3.0)
        labels = random_labels(rng, n, positive_ratio=0.3)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        ball, pos = _khop_counts(graph, GRID_KS, labels == 1)
        nonzero = ball > 0
        ncd_vals = np.where(nonzero, pos / np.maximum(ball, 1), 0.0)
        ncc_vals = (pos > 0).astype(float)
        assert np.all(ncc_vals[nonzero] >= ncd_vals[nonzero])

        try:
            report = metric_report(graph, labels, GRID_KS)
        except ValueError:
            continue
        for z in (0, 1):
            row = report.ancc[z]
            assert all(a <= b + 1e-15 for a, b in zip(row, row[1:]))

        perm = rng.permutation(n)
        edges = graph.edge_pairs()
        permuted = RoadGraph.from_edges(
            n, np.column_stack([perm[edges[:, 0]], perm[edges[:, 1]]]))
        plabels = np.empty_like(labels)
        plabels[perm] = labels
        perm_report = metric_report(permuted, plabels, GRID_KS)
        for z in (0, 1):
            assert perm_report.counted[z] == report.counted[z]
            assert perm_report.excluded[z] == report.excluded[z]
            for a, b in zip(report.ancd[z] + report.ancc[z],
                            perm_report.ancd[z] + perm_report.ancc[z]):
                assert abs(a - b) < 1e-12

        base = report.to_dict()
        for workers in (2, 8):
            assert metric_report(graph, labels, GRID_KS,
                                 workers=workers).to_dict() == base


@criterion("C3 t-test correctness (closed forms, antisymmetry, normal limit)")
def test_c3_t_test_correctness():
    for t in np.linspace(-50.0, 50.0, 100):
        assert abs(t_cdf(float(t), 1) - t_cdf_df1(float(t))) < 1e-10
        assert abs(t_cdf(float(t), 2) - t_cdf_df2(float(t))) < 1e-10
    for df in (1, 2, 10, 1000, 10**5):
        for t in (-30.0, -2.5, -0.1, 0.0, 1.7, 42.0):
            assert abs(t_cdf(-t, df) + t_cdf(t, df) - 1.0) < 1e-12
    assert abs(t_cdf(1.96, 10**5) - 0.9750021) < 1e-4
    assert abs(t_cdf(-1.0, 10**6) - normal_cdf(-1.0)) < 1e-4
    res = paired_t_test([0.1, 0.2, 0.15], [0.3, 0.5, 0.25])
    assert res.df == 2
    assert abs(res.t_stat - (-3.4641)) < 1e-4
    assert abs(res.p_one_sided - 0.03709) < 1e-4


@criterion("C4 hypothesis positive/negative control (J=20, alpha=0.01)")
def test_c4_hypothesis_controls():
    start = time.perf_counter()
    planted = SynthConfig(num_nodes=900, num_seeds=5, label_mode="planted")
    reports = [metric_report(g, labels, [1])
               for g, labels in generate_suite(20, planted, seed=11)]
    for metric in ("ANCD", "ANCC"):
        res = hypothesis_test(reports, metric, 1)
        assert res.t_stat < 0
        assert res.p_one_sided < 0.01, f"{metric} p={res.p_one_sided}"

    independent = SynthConfig(num_nodes=900, num_seeds=5,
                              label_mode="independent")
    rejections = 0
    for suite_seed in range(20):
        reports = [metric_report(g, labels, [1])
                   for g, labels in generate_suite(20, independent,
                                                   seed=1000 + suite_seed)]
        res = hypothesis_test(reports, "ANCD", 1)
        if res.p_one_sided < 0.01:
            rejections += 1
    assert rejections <= 2, f"{rejections}/20 null suites rejected"
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2min budget"


def gradient_instance(seed):
    rng = np.random.default_rng(seed)
    graph = random_graph(rng, 12, avg_degree=3.0, features=3)
    labels = random_labels(rng, 12, positive_ratio=0.4)
    if labels.sum() in (0, 12):
        labels[0] = 1 - labels[0]
    train_idx = np.sort(rng.choice(12, size=6, replace=False))
    return graph, labels, train_idx, rng


@criterion("C5 gradient-correctness (FD, rel err < 1e-5, 20 instances x 2 arms)")
def test_c5_gradient_correctness():
    checked = 0
    seed = 0
    while checked < 20 and seed < 200:
        seed += 1
        graph, labels, train_idx, rng = gradient_instance(500 + seed)
        a_hat = normalize_adjacency(graph)
        x = graph.node_features
        split_like = type("S", (), {})()
        split_like.train = train_idx
        for use_cp in (True, False):
            model = init_model(3, 5, 2, np.random.default_rng(900 + seed), use_cp)
            tokens = None
            if use_cp:
                mask = sample_mask(12, 0.25, rng)
                tokens = tokenize_labels(labels, split_like, mask)
            logp_pre = a_hat @ (x @ model.w1) + model.b1
            if np.min(np.abs(logp_pre)) < 1e-4:
                break  # too close to a ReLU kink for finite differences
            _, grads = loss_and_grads(model, a_hat, x, tokens, labels, train_idx)

            def loss_fn():
                value, _ = loss_and_grads(model, a_hat, x, tokens, labels,
                                          train_idx)
                return value

            for name, param in model.params().items():
                fd = fd_grad(loss_fn, param, eps=1e-5)
                denom = np.maximum(1.0, np.maximum(np.abs(fd),
                                                   np.abs(grads[name])))
                rel = np.abs(fd - grads[name]) / denom
                assert float(rel.max()) < 1e-5, f"{name} rel err {rel.max()}"
        else:
            checked += 1
    assert checked == 20


@criterion("C6 CP parameter accounting ((C+1)*d for d in {1,8,16,64})")
def test_c6_cp_param_accounting():
    for hidden in (1, 8, 16, 64):
        cp = init_model(7, hidden, 2, np.random.default_rng(0), use_cp=True)
        base = init_model(7, hidden, 2, np.random.default_rng(0), use_cp=False)
        delta = cp.param_count() - base.param_count()
        assert delta == count_cp_params(2, hidden) == 3 * hidden


@criterion("C7 non-leakage (test-label perturbation leaves predict unchanged)")
def test_c7_non_leakage():
    rng = np.random.default_rng(707)
    for trial in range(10):
        n = int(rng.integers(30, 80))
        graph = random_graph(rng, n, avg_degree=3.0, features=3)
        labels = random_labels(rng, n, positive_ratio=0.3)
        if min(labels.sum(), n - labels.sum()) < 3:
            labels[:3] = 1
        split = stratified_split(labels, (0.6, 0.2, 0.2), seed=trial)
        model, _ = train(graph, labels, split,
                         TrainConfig(epochs=3, seed=trial, use_cp=True))
        probs = predict(model, graph, labels, split)
        tampered = labels.copy()
        tampered[split.test] = 1 - tampered[split.test]
        assert np.array_equal(probs, predict(model, graph, tampered, split))


@criterion("C8 directional CP gain (grid 2500, 10 seeds: dF1 > 0 and dAUC > 0)")
def test_c8_directional_cp_gain():
    start = time.perf_counter()
    graph, labels = generate_dataset(SynthConfig())   # grid ~2500, ratio 0.10,
    split = stratified_split(labels, (0.6, 0.2, 0.2), seed=0)  # signal 0.3
    means = {}
    for use_cp in (True, False):
        f1s, aucs = [], []
        for seed in range(10):
            cfg = TrainConfig(seed=seed, use_cp=use_cp)
            model, _ = train(graph, labels, split, cfg)
            result = evaluate(predict(model, graph, labels, split), labels,
                              split, "test")
            f1s.append(result.f1)
            aucs.append(result.auc)
        means[use_cp] = (float(np.mean(f1s)), float(np.mean(aucs)))
    d_f1 = means[True][0] - means[False][0]
    d_auc = means[True][1] - means[False][1]
    print(f"  [C8] cp f1/auc = {means[True][0]:.4f}/{means[True][1]:.4f}, "
          f"baseline = {means[False][0]:.4f}/{means[False][1]:.4f}, "
          f"delta = {d_f1:+.4f}/{d_auc:+.4f}")
    assert d_f1 > 0.0
    assert d_auc > 0.0
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"runtime {elapsed:.1f}s exceeds 5min budget"


def strip_wall_time(path):
    payload = json.loads(path.read_text())
    payload.get("manifest", {}).pop("wall_time_s", None)
    return json.dumps(payload, indent=2, sort_keys=True)


@criterion("C9 determinism (rerun -> byte-identical reports sans wall time)")
def test_c9_determinism(tmp_path):
    suite = tmp_path / "suite"
    run = tmp_path / "train"
    report = tmp_path / "report"
    cmds = [
        ["synth", "--out", str(suite), "--nodes", "400", "--suite", "2",
         "--seed", "5"],
        ["metrics", "--nodes", str(suite / "ds_000" / "nodes.csv"),
         "--edges", str(suite / "ds_000" / "edges.csv"), "--k", "1,2",
         "--out", str(tmp_path / "m0.json")],
        ["metrics", "--nodes", str(suite / "ds_001" / "nodes.csv"),
         "--edges", str(suite / "ds_001" / "edges.csv"), "--k", "1,2",
         "--out", str(tmp_path / "m1.json")],
        ["ttest", str(tmp_path / "m0.json"), str(tmp_path / "m1.json"),
         "--k", "1", "--out", str(tmp_path / "t.json")],
        ["train", "--data", str(suite / "ds_000"), "--out", str(run),
         "--epochs", "4", "--seeds", "2"],
        ["report", str(run), "--out", str(report), "--no-figures"],
    ]
    json_outputs = [tmp_path / "m0.json", tmp_path / "m1.json",
                    tmp_path / "t.json", run / "eval.json",
                    run / "run_000" / "checkpoint.json",
                    report / "report.json", suite / "manifest.json"]
    byte_outputs = [suite / "ds_000" / "nodes.csv",
                    suite / "ds_000" / "edges.csv",
                    run / "run_000" / "history.csv", run / "split.json",
                    report / "report.csv", report / "report.txt"]
    for cmd in cmds:
        assert main(cmd) == 0
    json_snaps = [strip_wall_time(p) for p in json_outputs]
    byte_snaps = [p.read_bytes() for p in byte_outputs]
    for cmd in cmds:
        assert main(cmd) == 0
    assert [strip_wall_time(p) for p in json_outputs] == json_snaps
    assert [p.read_bytes() for p in byte_outputs] == byte_snaps
