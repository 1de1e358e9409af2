"""Command-line pipeline: synth | metrics | ttest | train | report.

Every command is deterministic given its flags (seeds included) and every
JSON report embeds a run manifest.  Exit codes: 0 success, 1 data or
validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .evaluate import evaluate
from .gnn import TrainConfig, predict, save_model, train
from .graph import (GraphFormatError, load_dataset, load_split, save_dataset,
                    save_split, stratified_split)
from .metrics import DEFAULT_HOPS, MetricReport, metric_report
from .stats import hypothesis_test
from .synth import LABEL_MODES, TOPOLOGIES, SynthConfig, generate_dataset, jitter_configs
from . import plotting

WORKERS_ENV = "CONCUR_WORKERS"

_TRAIN_DEFAULTS = TrainConfig()


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _digest(path) -> str:
    # JSON reports are digested with the volatile wall-time field stripped,
    # so chained reports stay byte-identical across reruns.
    raw = Path(path).read_bytes()
    if str(path).endswith(".json"):
        try:
            payload = json.loads(raw)
            if isinstance(payload, dict) and isinstance(payload.get("manifest"), dict):
                payload["manifest"].pop("wall_time_s", None)
                raw = json.dumps(payload, indent=2, sort_keys=True).encode()
        except json.JSONDecodeError:
            pass
    return hashlib.sha256(raw).hexdigest()


def _manifest(argv, args, seed, inputs, t0) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return {
        "command": list(argv),
        "config": config,
        "seed": seed,
        "input_digests": {str(p): _digest(p) for p in inputs},
        "version": __version__,
        "wall_time_s": time.perf_counter() - t0,
    }


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise ValueError(f"bad integer list {text!r}") from None


def _mask_rate_arg(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 0.5:
        raise argparse.ArgumentTypeError(f"mask rate {value} outside (0, 0.5)")
    return value


def cmd_synth(args, argv) -> int:
    t0 = time.perf_counter()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    num_seeds = args.num_seeds
    if num_seeds is None:
        target = max(1, round(args.positive_ratio * args.nodes))
        num_seeds = min(12, max(1, target // 4))
    template = SynthConfig(
        num_nodes=args.nodes, topology=args.topology, geo_radius=args.geo_radius,
        num_seeds=num_seeds, diffusion_prob=args.diffusion_prob,
        diffusion_rounds=args.diffusion_rounds,
        target_positive_ratio=args.positive_ratio, feature_dim=args.feature_dim,
        feature_signal=args.feature_signal, seed=args.seed,
        label_mode=args.label_mode)
    if args.suite:
        tasks = [(cfg, out / f"ds_{j:03d}")
                 for j, cfg in enumerate(jitter_configs(template, args.suite, args.seed))]
    else:
        tasks = [(template, out)]
    datasets = []
    for cfg, dest in tasks:
        dest.mkdir(parents=True, exist_ok=True)
        graph, labels = generate_dataset(cfg)
        save_dataset(graph, labels, dest / "nodes.csv", dest / "edges.csv")
        datasets.append({
            "dir": str(dest.relative_to(out)) if dest != out else ".",
            "num_nodes": graph.num_nodes,
            "num_edges": graph.num_edges,
            "num_positive": int(np.sum(np.asarray(labels) == 1)),
            "config_seed": cfg.seed,
        })
    payload = {"manifest": _manifest(argv, args, args.seed, [], t0),
               "datasets": datasets}
    _write_json(out / "manifest.json", payload)
    print(f"wrote {len(datasets)} dataset(s) under {out}")
    return 0


def cmd_metrics(args, argv) -> int:
    t0 = time.perf_counter()
    graph, labels = load_dataset(args.nodes, args.edges)
    ks = _parse_int_list(args.k)
    workers = args.workers if args.workers is not None else _default_workers()
    report = metric_report(graph, labels, ks, workers=workers)
    payload = {"manifest": _manifest(argv, args, None, [args.nodes, args.edges], t0)}
    payload.update(report.to_dict())
    _write_json(args.out, payload)
    if args.plot:
        plotting.plot_metric_vs_k(report.to_dict(), Path(args.out).with_suffix(".png"))
    print(f"wrote metric report {args.out}")
    return 0


def cmd_ttest(args, argv) -> int:
    t0 = time.perf_counter()
    if len(args.reports) < 2:
        raise ValueError("need at least 2 metric reports (paired test requires n >= 2)")
    reports = []
    for path in args.reports:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        reports.append(MetricReport.from_dict(payload))
    metrics = ["ANCD", "ANCC"] if args.metric == "both" else [args.metric]
    ks = _parse_int_list(args.k)
    ttest = {m: {str(k): hypothesis_test(reports, m, k).to_dict() for k in ks}
             for m in metrics}
    payload = {"manifest": _manifest(argv, args, None, args.reports, t0),
               "num_datasets": len(reports),
               "ttest": ttest}
    _write_json(args.out, payload)
    print(f"wrote t-test report {args.out}")
    return 0


def _mean_sd(values):
    if any(v is None for v in values):
        return None, None
    mean = sum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, var ** 0.5


def cmd_train(args, argv) -> int:
    t0 = time.perf_counter()
    data = Path(args.data)
    nodes_path, edges_path = data / "nodes.csv", data / "edges.csv"
    for p in (nodes_path, edges_path):
        if not p.exists():
            raise ValueError(f"dataset file not found: {p}")
    graph, labels = load_dataset(nodes_path, edges_path)
    if args.splits:
        split = load_split(args.splits)
    else:
        ratios = tuple(float(tok) for tok in args.ratios.split(","))
        split = stratified_split(labels, ratios, args.split_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_split(split, out / "split.json")

    seeds = [args.seed + i for i in range(args.seeds)]
    arm = "cp" if args.cp else "baseline"

    def run_one(seed):
        cfg = TrainConfig(mask_rate=args.mask_rate, learning_rate=args.lr,
                          weight_decay=args.weight_decay, epochs=args.epochs,
                          hidden_dim=args.hidden_dim, seed=seed, use_cp=args.cp)
        model, history = train(graph, labels, split, cfg)
        probs = predict(model, graph, labels, split)
        return (cfg, model, history,
                evaluate(probs, labels, split, "valid"),
                evaluate(probs, labels, split, "test"))

    workers = args.workers if args.workers is not None else _default_workers()
    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, seeds))
    else:
        results = [run_one(s) for s in seeds]

    runs = []
    for i, (cfg, model, history, val, test) in enumerate(results):
        run_dir = out / f"run_{i:03d}"
        run_dir.mkdir(exist_ok=True)
        save_model(model, run_dir / "checkpoint.json", seed=cfg.seed, config=cfg)
        with (run_dir / "history.csv").open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,loss,val_f1\n")
            for epoch, loss, val_f1 in history:
                fh.write(f"{epoch},{loss!r},{val_f1!r}\n")
        runs.append({"seed": cfg.seed, "final_loss": history[-1][1],
                     "valid": val.to_dict(), "test": test.to_dict()})

    summary = {}
    for subset in ("valid", "test"):
        for name in ("f1", "auc"):
            mean, sd = _mean_sd([r[subset][name] for r in runs])
            summary[f"{subset}_{name}_mean"] = mean
            summary[f"{subset}_{name}_sd"] = sd
    payload = {"manifest": _manifest(argv, args, args.seed,
                                     [nodes_path, edges_path], t0),
               "arm": arm, "seeds": seeds, "runs": runs, "summary": summary}
    _write_json(out / "eval.json", payload)
    f1m = summary["test_f1_mean"]
    print(f"{arm}: {len(seeds)} run(s), mean test F1 "
          f"{f1m:.4f}" if f1m is not None else f"{arm}: done")
    return 0


def _fmt(value, width=16):
    if value is None:
        return "-".ljust(width)
    return f"{value:.4f}".ljust(width)


def _fmt_pm(mean, sd, width=18):
    if mean is None:
        return "-".ljust(width)
    return f"{mean:.4f} +/- {sd:.4f}".ljust(width)


def _report_text(arms, delta, warnings_list):
    lines = []
    header = (f"{'arm':<10}{'runs':<6}{'valid_f1':<18}{'test_f1':<18}"
              f"{'valid_auc':<18}{'test_auc':<18}")
    lines.append(header)
    lines.append("-" * len(header))
    for arm in sorted(arms):
        s = arms[arm]["summary"]
        lines.append(f"{arm:<10}{arms[arm]['num_runs']:<6}"
                     f"{_fmt_pm(s['valid_f1_mean'], s['valid_f1_sd'])}"
                     f"{_fmt_pm(s['test_f1_mean'], s['test_f1_sd'])}"
                     f"{_fmt_pm(s['valid_auc_mean'], s['valid_auc_sd'])}"
                     f"{_fmt_pm(s['test_auc_mean'], s['test_auc_sd'])}")
    if delta is not None:
        lines.append(f"{'delta':<10}{'':<6}"
                     f"{_fmt(delta['valid_f1'], 18)}{_fmt(delta['test_f1'], 18)}"
                     f"{_fmt(delta['valid_auc'], 18)}{_fmt(delta['test_auc'], 18)}")
    for w in warnings_list:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _read_histories(run_dir: Path):
    out = []
    for sub in sorted(run_dir.glob("run_*")):
        hist_path = sub / "history.csv"
        if not hist_path.exists():
            continue
        rows = []
        for line in hist_path.read_text(encoding="utf-8").splitlines()[1:]:
            epoch, loss, val_f1 = line.split(",")
            rows.append((int(epoch), float(loss), float(val_f1)))
        out.append(rows)
    return out


def cmd_report(args, argv) -> int:
    t0 = time.perf_counter()
    arms = {}
    histories = {}
    warnings_list = []
    eval_paths = []
    for d in args.runs:
        eval_path = Path(d) / "eval.json"
        if not eval_path.exists():
            raise ValueError(f"run dir missing eval.json: {d}")
        payload = json.loads(eval_path.read_text(encoding="utf-8"))
        arm = payload["arm"]
        if arm in arms:
            warnings_list.append(f"duplicate arm {arm!r} in {d}; keeping first")
            continue
        eval_paths.append(eval_path)
        arms[arm] = {"dir": str(d), "num_runs": len(payload["runs"]),
                     "summary": payload["summary"]}
        histories[arm] = _read_histories(Path(d))
    delta = None
    if "cp" in arms and "baseline" in arms:
        delta = {}
        for key in ("valid_f1", "test_f1", "valid_auc", "test_auc"):
            a = arms["cp"]["summary"][f"{key}_mean"]
            b = arms["baseline"]["summary"][f"{key}_mean"]
            delta[key] = None if a is None or b is None else a - b
    else:
        missing = {"cp", "baseline"} - set(arms)
        for arm in sorted(missing):
            warnings_list.append(f"missing arm: {arm}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"manifest": _manifest(argv, args, None, eval_paths, t0),
               "arms": arms, "delta": delta, "warnings": warnings_list}
    _write_json(out / "report.json", payload)

    text = _report_text(arms, delta, warnings_list)
    (out / "report.txt").write_text(text, encoding="utf-8")

    with (out / "report.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("arm,runs,valid_f1_mean,valid_f1_sd,test_f1_mean,test_f1_sd,"
                 "valid_auc_mean,valid_auc_sd,test_auc_mean,test_auc_sd\n")
        to_cell = lambda v: "" if v is None else repr(v)
        for arm in sorted(arms):
            s = arms[arm]["summary"]
            cells = [arm, str(arms[arm]["num_runs"])]
            for key in ("valid_f1", "test_f1", "valid_auc", "test_auc"):
                cells += [to_cell(s[f"{key}_mean"]), to_cell(s[f"{key}_sd"])]
            fh.write(",".join(cells) + "\n")
        if delta is not None:
            cells = ["delta", ""]
            for key in ("valid_f1", "test_f1", "valid_auc", "test_auc"):
                cells += [to_cell(delta[key]), ""]
            fh.write(",".join(cells) + "\n")

    if not args.no_figures:
        if any(histories.values()):
            plotting.plot_loss_curves(histories, out / "loss_curves.png")
        summaries = {arm: arms[arm]["summary"] for arm in arms}
        plotting.plot_arm_comparison(summaries, out / "comparison.png")

    if args.format == "json":
        print(json.dumps({"arms": arms, "delta": delta,
                          "warnings": warnings_list}, indent=2, sort_keys=True))
    else:
        print(text, end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="concur",
        description="Road-network incident concurrency metrics and "
                    "label-token graph classifier.")
    parser.add_argument("--version", action="version", version=f"concur {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate synthetic dataset(s)")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--nodes", type=int, required=True, help="nodes per dataset")
    sp.add_argument("--topology", choices=TOPOLOGIES, default="grid")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--suite", type=int, default=0, metavar="J",
                    help="generate J jittered datasets in ds_*/ subdirectories")
    sp.add_argument("--positive-ratio", type=float, default=0.10)
    sp.add_argument("--num-seeds", type=int, default=None,
                    help="incident cluster seed count (default scales with "
                         "the target positive count, capped at 12)")
    sp.add_argument("--diffusion-prob", type=float, default=0.6)
    sp.add_argument("--diffusion-rounds", type=int, default=60)
    sp.add_argument("--geo-radius", type=float, default=0.035,
                    help="edge radius for the rgg topology")
    sp.add_argument("--feature-dim", type=int, default=8)
    sp.add_argument("--feature-signal", type=float, default=0.3)
    sp.add_argument("--label-mode", choices=LABEL_MODES, default="planted")
    sp.set_defaults(func=cmd_synth)

    mp = sub.add_parser("metrics", help="compute ANCD/ANCC metric report")
    mp.add_argument("--nodes", required=True, help="nodes.csv path")
    mp.add_argument("--edges", required=True, help="edges.csv path")
    mp.add_argument("--k", default=",".join(str(k) for k in DEFAULT_HOPS),
                    help="comma-separated hop bounds")
    mp.add_argument("--out", required=True, help="output JSON path")
    mp.add_argument("--workers", type=int, default=None,
                    help=f"worker count (default ${WORKERS_ENV} or 1)")
    mp.add_argument("--plot", action="store_true",
                    help="also render metric-vs-k curves as PNG")
    mp.set_defaults(func=cmd_metrics)

    tp = sub.add_parser("ttest", help="paired t-test across metric reports")
    tp.add_argument("reports", nargs="+", help="metric report JSON paths")
    tp.add_argument("--metric", choices=["ANCD", "ANCC", "both"], default="both")
    tp.add_argument("--k", default="1", help="comma-separated hop bounds")
    tp.add_argument("--out", required=True, help="output JSON path")
    tp.set_defaults(func=cmd_ttest)

    rp = sub.add_parser("train", help="train the classifier on a dataset dir")
    rp.add_argument("--data", required=True, help="directory with nodes.csv/edges.csv")
    rp.add_argument("--out", required=True, help="output run directory")
    rp.add_argument("--cp", action=argparse.BooleanOptionalAction, default=True,
                    help="enable the label-token channel (--no-cp for baseline)")
    rp.add_argument("--seeds", type=int, default=1, help="number of seeded runs")
    rp.add_argument("--seed", type=int, default=0, help="base seed")
    rp.add_argument("--mask-rate", type=_mask_rate_arg,
                    default=_TRAIN_DEFAULTS.mask_rate)
    rp.add_argument("--lr", type=float, default=_TRAIN_DEFAULTS.learning_rate)
    rp.add_argument("--weight-decay", type=float,
                    default=_TRAIN_DEFAULTS.weight_decay)
    rp.add_argument("--epochs", type=int, default=_TRAIN_DEFAULTS.epochs)
    rp.add_argument("--hidden-dim", type=int, default=_TRAIN_DEFAULTS.hidden_dim)
    rp.add_argument("--split-seed", type=int, default=0)
    rp.add_argument("--ratios", default="0.6,0.2,0.2",
                    help="train,valid,test fractions")
    rp.add_argument("--splits", default=None, help="existing splits.json to reuse")
    rp.add_argument("--workers", type=int, default=None,
                    help="parallel run fan-out")
    rp.set_defaults(func=cmd_train)

    gp = sub.add_parser("report", help="consolidated comparison of train runs")
    gp.add_argument("runs", nargs="+", help="train output directories")
    gp.add_argument("--out", required=True, help="output directory")
    gp.add_argument("--format", choices=["text", "json"], default="text")
    gp.add_argument("--no-figures", action="store_true",
                    help="skip PNG figure rendering")
    gp.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except (GraphFormatError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
