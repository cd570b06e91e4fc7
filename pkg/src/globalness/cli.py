"""Command line: ``globalness [--config C] [--seed N] [--threads N] <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import differing_keys, load_config
from .errors import ConfigError, GlobalnessError, UsageError
from .evaluation import (
    classification_against_truth,
    density_ratio,
    global_percentage,
    load_density_csv,
    rows_to_csv,
    score_against_truth,
    stability_overlap,
)
from .features import build_features, write_feature_csv
from .pipeline import compare_detectors, definition_oracle, load_report, run_detection
from .synthgen import generate, read_truth, write_synth

log = logging.getLogger("globalness")


def _need_config(args) -> None:
    if not args.config:
        raise UsageError(f"'{args.command}' needs --config")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def cmd_gen(args) -> int:
    _need_config(args)
    cfg = load_config(args.config, args.seed)
    sg = generate(cfg.synth())
    paths = write_synth(sg, cfg.path("data_dir"))
    print(f"nodes\t{sg.graph.node_count}")
    print(f"edges\t{sg.graph.edge_count}")
    print(f"labeled\t{len(sg.labels.labels)}")
    print(f"planted_globals\t{int(sg.truth.planted_global.sum())}")
    print(f"anchors\t{sum(len(f) for f in sg.anchor_pairs)}")
    for name in sorted(paths):
        print(f"wrote\t{paths[name]}")
    return 0


def cmd_features(args) -> int:
    _need_config(args)
    cfg = load_config(args.config, args.seed)
    g, labels = cfg.load_data()
    hyp = cfg.hypothesis(g, labels)
    fm = build_features(g, labels, hyp.anchors, hyp.target_classes, cap=hyp.cap,
                        surrogate=hyp.surrogate, threads=args.threads)
    out = Path(args.out) if args.out else cfg.path("output_dir") / "features.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_feature_csv(fm, out)
    print(f"rows\t{len(fm.node_ids)}\ncolumns\t{fm.width}\nwrote\t{out}")
    return 0


def _detect(cfg, threads):
    g, labels = cfg.load_data()
    hyp = cfg.hypothesis(g, labels)
    report = run_detection(g, labels, hyp, threads=threads,
                           metadata={"config_hash": cfg.config_hash(), "seed": cfg.seed})
    oracle = definition_oracle(g, labels, hyp.anchors, cfg.definition(), hyp.target_classes,
                               cap=hyp.cap, surrogate=hyp.surrogate)
    report.metadata["definition_agreement"] = compare_detectors(report, oracle)
    return report


def cmd_detect(args) -> int:
    _need_config(args)
    cfg = load_config(args.config, args.seed)
    report = _detect(cfg, args.threads)
    out = cfg.path("output_dir")
    jpath, cpath = report.write(out)
    _write_json(out / "config.json", cfg.persisted())
    for t, secs in report.timings.items():
        log.info("stage %s took %.3fs", t, secs)
    for c, a in report.aggregates().items():
        print(f"{c}\tlabeled={a['labeled']}\tglobal={a['global']}\tpct={100 * a['fraction']:.2f}")
    print(f"wrote\t{jpath}\nwrote\t{cpath}")
    return 0


def cmd_eval(args) -> int:
    report = load_report(args.report)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    result = {}
    if args.truth:
        if not Path(args.truth).exists():
            raise UsageError(f"--truth file not found: {args.truth}")
        truth = read_truth(args.truth)
        score = score_against_truth(report, truth)
        cls = classification_against_truth(report, truth)
        result["truth"] = {"global": score, "classification": cls}
        print(f"precision\t{score['precision']}\nrecall\t{score['recall']}")
        print(f"macro_precision\t{cls['macro_precision']}\nmacro_recall\t{cls['macro_recall']}")
        if out:
            rows_to_csv([{k: v for k, v in score.items() if k != "undefined"}], out / "truth_scores.csv")
    pct = global_percentage(report)
    result["percentage"] = pct
    print(rows_to_csv(pct["rows"]), end="")
    print(f"mean_percentage\t{pct['mean']}")
    if out:
        rows_to_csv(pct["rows"], out / "global_percentage.csv")
    if args.density:
        if not Path(args.density).exists():
            raise UsageError(f"--density file not found: {args.density}")
        ratios = density_ratio(report, load_density_csv(args.density))
        result["density_ratio"] = ratios
        print(rows_to_csv(ratios), end="")
        if out:
            rows_to_csv(ratios, out / "density_ratio.csv")
    if out:
        _write_json(out / "eval.json", result)
    return 0


def cmd_stability(args) -> int:
    a = load_config(args.config_a, args.seed)
    b = load_config(args.config_b, args.seed)
    diff = differing_keys(a, b)
    if diff:
        raise ConfigError(f"configs differ beyond anchors: {', '.join(diff)}")
    ra = _detect(a, args.threads)
    rb = _detect(b, args.threads)
    res = stability_overlap(ra, rb)
    out = Path(args.out) if args.out else a.path("output_dir")
    ra.write(out, "report_a")
    rb.write(out, "report_b")
    _write_json(out / "stability.json", res.to_dict())
    for k, v in res.to_dict().items():
        print(f"{k}\t{v}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="globalness", description="Detect global nodes in region-labeled graphs.")
    p.add_argument("--config", help="run config (JSON)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for BFS and tree growing")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", help="write a synthetic graph from the config's synth section")
    f = sub.add_parser("features", help="dump the feature matrix as CSV")
    f.add_argument("--out", help="CSV path (default: <output_dir>/features.csv)")
    sub.add_parser("detect", help="run the detection pipeline")
    e = sub.add_parser("eval", help="tables from a detection report")
    e.add_argument("--report", required=True)
    e.add_argument("--truth", help="planted-truth CSV")
    e.add_argument("--density", help="class,density CSV")
    e.add_argument("--out", help="directory for CSV/JSON tables")
    s = sub.add_parser("stability", help="compare detections under two anchor sets")
    s.add_argument("config_a")
    s.add_argument("config_b")
    s.add_argument("--out", help="directory for outputs (default: output_dir of config_a)")
    return p


COMMANDS = {"gen": cmd_gen, "features": cmd_features, "detect": cmd_detect, "eval": cmd_eval,
            "stability": cmd_stability}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except GlobalnessError as e:
        where = f" [stage={e.stage}]" if e.stage else ""
        print(f"error{where}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: I/O: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
