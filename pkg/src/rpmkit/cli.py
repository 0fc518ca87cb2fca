"""Command-line entry point: generate / train / eval / split / report.

Exit codes: 0 success, 1 usage, 2 data error, 3 training abort. Every
command echoes its fully-resolved configuration before doing work.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import Counter
from pathlib import Path

from . import episodes, rpm, training
from .training import Corpora, RunConfig, TrainingAbort

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_ABORT = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _echo_config(name: str, resolved: dict) -> None:
    print(f"config[{name}]: {json.dumps(resolved, sort_keys=True)}")


def _parse_raster(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rpmkit", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("generate", help="write an rpm-jsonl corpus")
    g.add_argument("--config", choices=sorted(rpm.CONFIG_SLOTS), default="center")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, default=rpm.DEFAULT_SEED)
    g.add_argument("--out", required=True)
    g.add_argument("--raster", type=_parse_raster, default=None, metavar="HxW")

    t = sub.add_parser("train", help="train a reasoner on a corpus")
    t.add_argument("--mode", choices=training.MODES, default=None)
    t.add_argument("--data", required=True)
    t.add_argument("--batch", type=int, choices=(2, 32), default=None)
    t.add_argument("--epochs", type=int, default=None,
                   help="default 400 with --cross-shapes, else 50")
    t.add_argument("--k", type=int, default=None, help="queries per episode")
    t.add_argument("--preset-subsample", type=int,
                   choices=sorted(episodes.FEW_SHOT_PRESETS.values()), default=None)
    t.add_argument("--cross-shapes", action="store_true",
                   help="train on triangle/square/hexagon, eval on pentagon/circle")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--lr", type=float, default=None)
    t.add_argument("--margin-p", type=float, default=None)
    t.add_argument("--margin-n", type=float, default=None)
    t.add_argument("--ways", type=int, default=None)
    t.add_argument("--shots", type=int, default=None)
    t.add_argument("--meta-batches", type=int, default=None)
    t.add_argument("--inner-lr", type=float, default=None)
    t.add_argument("--maml-analogy", action=argparse.BooleanOptionalAction, default=None)
    t.add_argument("--resume", default=None, help="checkpoint to continue from")
    t.add_argument("--config-file", default=None,
                   help="JSON file of RunConfig fields; explicit flags win")
    t.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="score a checkpoint, or validate a corpus")
    e.add_argument("--ckpt", default=None)
    e.add_argument("--data", required=True)
    e.add_argument("--validate-only", action="store_true")

    s = sub.add_parser("split", help="cross-shape split or few-shot subsample")
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--cross-shapes", action="store_true")
    s.add_argument("--preset-subsample", type=int,
                   choices=sorted(episodes.FEW_SHOT_PRESETS.values()), default=None)
    s.add_argument("--seed", type=int, default=12345)

    r = sub.add_parser("report", help="summarize one or more training runs")
    r.add_argument("--run", action="append", required=True,
                   help="run directory (repeatable)")
    r.add_argument("--csv", default=None, help="also write rows to this CSV file")
    return parser


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def _cmd_generate(args) -> int:
    _echo_config("generate", {
        "config": args.config, "count": args.count, "seed": args.seed,
        "out": str(args.out), "raster": list(args.raster) if args.raster else None,
    })
    problems = rpm.generate_corpus(args.config, args.count, seed=args.seed,
                                   raster_hw=args.raster)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rpm.save_corpus(problems, args.out)
    histogram = Counter(episodes.task_signature(p) for p in problems)
    print(f"wrote {len(problems)} problems to {args.out}")
    print(f"distinct rule signatures: {len(histogram)}")
    for sig, count in histogram.most_common(10):
        compact = ",".join(f"{a}:{k}{'' if p == 0 else p:+d}" if p else f"{a}:{k}"
                           for a, k, p in sig)
        print(f"  {count:5d}  {compact}")
    return EXIT_OK


def _load_corpus_or_fail(path: str):
    return rpm.load_corpus(path)


def _resolve_run_config(args) -> RunConfig:
    base: dict = {}
    if args.config_file:
        base = json.loads(Path(args.config_file).read_text())
    overrides = {
        "mode": args.mode,
        "batch_size": args.batch,
        "epochs": args.epochs,
        "lr": args.lr,
        "seed": args.seed,
        "k_queries": args.k,
        "margin_p": args.margin_p,
        "margin_n": args.margin_n,
        "n_ways": args.ways,
        "k_shot": args.shots,
        "meta_batches": args.meta_batches,
        "inner_lr": args.inner_lr,
        "maml_analogy": args.maml_analogy,
    }
    merged = {**base, **{k: v for k, v in overrides.items() if v is not None}}
    merged.setdefault("epochs", 400 if args.cross_shapes else 50)
    merged.setdefault("batch_size", 2 if args.cross_shapes else 32)
    return RunConfig.from_dict(merged)


def _cmd_train(args) -> int:
    problems = _load_corpus_or_fail(args.data)
    config = _resolve_run_config(args)
    if problems and problems[0].config != config.config:
        config = RunConfig.from_dict({**config.to_dict(), "config": problems[0].config})

    split_report = None
    if args.cross_shapes:
        spec = episodes.SplitSpec(seed=config.seed)
        result = episodes.cross_attribute_split(problems, spec)
        halves = training.split_folds(result.eval, config.seed, (0.0, 0.5, 0.5))
        corpora = Corpora(train=result.train, val=halves.val, test=halves.test)
        split_report = result.summary()
    else:
        corpora = training.split_folds(problems, config.seed)

    if args.preset_subsample is not None:
        n = episodes.resolve_preset(args.preset_subsample)
        corpora = Corpora(
            train=episodes.few_shot_subsample(corpora.train, n, config.seed),
            val=corpora.val,
            test=corpora.test,
        )

    _echo_config("train", {**config.to_dict(),
                           "data": str(args.data),
                           "cross_shapes": bool(args.cross_shapes),
                           "preset_subsample": args.preset_subsample,
                           "out": str(args.out)})
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", corpora.train), ("val", corpora.val), ("test", corpora.test)):
        rpm.save_corpus(part, out_dir / f"{name}.jsonl")
    result = training.train(config, corpora, out_dir=out_dir,
                            resume_from=args.resume, split_report=split_report)
    m = result.manifest
    print(f"best epoch {m['best_epoch']}  val {m['best_val_accuracy']}  "
          f"test {m['test_accuracy']:.4f}")
    print(f"artifacts in {out_dir}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    problems = _load_corpus_or_fail(args.data)
    if args.validate_only:
        _echo_config("eval", {"data": str(args.data), "validate_only": True})
        bad = 0
        for p in problems:
            report = rpm.validate_problem(p)
            if not report.ok:
                bad += 1
                detail = "; ".join(report.errors) or f"satisfying={list(report.satisfying)}"
                print(f"problem {p.id}: INVALID ({detail})")
        print(f"validated {len(problems)} problems: {len(problems) - bad} ok, {bad} invalid")
        return EXIT_OK if bad == 0 else EXIT_DATA
    if not args.ckpt:
        print("error: --ckpt is required unless --validate-only", file=sys.stderr)
        return EXIT_USAGE
    _echo_config("eval", {"data": str(args.data), "ckpt": str(args.ckpt)})
    model, _ = training.load_checkpoint(args.ckpt)
    acc, _records = training.evaluate(model, problems)
    print(f"accuracy {acc!r} on {len(problems)} problems")
    return EXIT_OK


def _cmd_split(args) -> int:
    problems = _load_corpus_or_fail(args.data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _echo_config("split", {"data": str(args.data), "out": str(args.out),
                           "cross_shapes": args.cross_shapes,
                           "preset_subsample": args.preset_subsample,
                           "seed": args.seed})
    if args.cross_shapes:
        result = episodes.cross_attribute_split(problems, episodes.SplitSpec(seed=args.seed))
        rpm.save_corpus(result.train, out_dir / "train.jsonl")
        rpm.save_corpus(result.eval, out_dir / "eval.jsonl")
        report = result.summary()
    elif args.preset_subsample is not None:
        n = episodes.resolve_preset(args.preset_subsample)
        sub = episodes.few_shot_subsample(problems, n, args.seed)
        rpm.save_corpus(sub, out_dir / "subsample.jsonl")
        report = {"n_subsample": len(sub), "of": len(problems), "seed": args.seed}
    else:
        print("error: choose --cross-shapes or --preset-subsample", file=sys.stderr)
        return EXIT_USAGE
    (out_dir / "split_report.json").write_text(json.dumps(report, sort_keys=True) + "\n")
    print(f"split report: {json.dumps(report, sort_keys=True)}")
    return EXIT_OK


def _cmd_report(args) -> int:
    _echo_config("report", {"runs": [str(r) for r in args.run], "csv": args.csv})
    rows = []
    for run_dir in args.run:
        path = Path(run_dir) / "manifest.json"
        manifest = json.loads(path.read_text())
        rc = manifest["run_config"]
        rows.append({
            "run": str(run_dir),
            "mode": rc["mode"],
            "n_train": manifest["corpus_sizes"]["train"],
            "batch": rc["batch_size"],
            "seed": rc["seed"],
            "best_val": manifest["best_val_accuracy"],
            "test_accuracy": manifest["test_accuracy"],
        })
    header = ["run", "mode", "n_train", "batch", "seed", "best_val", "test_accuracy"]
    widths = {h: max(len(h), *(len(str(r[h])) for r in rows)) for h in header}
    print("  ".join(h.ljust(widths[h]) for h in header))
    for r in rows:
        print("  ".join(str(r[h]).ljust(widths[h]) for h in header))

    # Table-1-style grid when several subsample sizes are present
    sizes = sorted({r["n_train"] for r in rows})
    modes = sorted({r["mode"] for r in rows})
    if len(sizes) > 1:
        print()
        print("test accuracy by mode x training-set size:")
        print("  ".join(["mode".ljust(14)] + [str(s).rjust(8) for s in sizes]))
        for mode in modes:
            cells = []
            for s in sizes:
                vals = [r["test_accuracy"] for r in rows if r["mode"] == mode and r["n_train"] == s]
                cells.append(f"{sum(vals) / len(vals):.4f}".rjust(8) if vals else "-".rjust(8))
            print("  ".join([mode.ljust(14)] + cells))

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=header)
            w.writeheader()
            w.writerows(rows)
    return EXIT_OK


_VERBS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "split": _cmd_split,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _VERBS[args.verb](args)
    except TrainingAbort as e:
        print(f"training aborted: {e}", file=sys.stderr)
        return EXIT_ABORT
    except (rpm.CorpusParseError, rpm.CorpusVersionError, rpm.GenerationError,
            FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
