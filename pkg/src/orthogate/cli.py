"""Batch entry points: refine, split, train, predict, evaluate, gate, ingest,
serve, report.

Every subcommand prints exactly one JSON summary line to stdout; anything
verbose goes to stderr. Exit codes: 0 success, 1 validation error, 2 I/O
error. All randomness flows from explicit --seed flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import GatePolicy, GateStatus, Lexicon, evidence_check, gate, language_risk
from .audit import AuditLog
from .corpus import (
    CorpusError,
    SplitError,
    load_corpus,
    load_split,
    make_controlled_split,
    make_natural_split,
    refine,
    save_corpus,
    save_split,
)
from .embeddings import EmbeddingError, parse_embedding_spec
from .metrics import EceConfig, evaluate, format_report_table, ingest_external_predictions, report_to_json_obj
from .model import (
    VARIANT_NONE,
    VARIANT_PER_LANGUAGE,
    VARIANT_SHARED,
    TrainConfig,
    load_checkpoint,
    predict_records,
    save_checkpoint,
    save_history,
    train_on_split,
)
from .predictions import PredictionError, load_predictions, save_predictions
from .service import ServiceConfig, create_app_from_config

VARIANT_FLAGS = {
    "hpa": VARIANT_PER_LANGUAGE,
    "shared": VARIANT_SHARED,
    "none": VARIANT_NONE,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the CLI contract is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit(summary: dict) -> None:
    print(json.dumps(summary, ensure_ascii=False))


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"--ratios needs three comma-separated fractions, got {text!r}")
    return tuple(parts)  # type: ignore[return-value]


def cmd_refine(args) -> None:
    records = load_corpus(args.corpus)
    refined, report = refine(records, min_tokens=args.min_tokens)
    save_corpus(args.out, refined)
    _emit({"command": "refine", "out": str(args.out), **report.to_json_obj()})


def cmd_split(args) -> None:
    records = load_corpus(args.corpus)
    if args.mode == "controlled":
        if args.per_class is None:
            raise SplitError("--per-class is required for controlled splits")
        split = make_controlled_split(records, per_class=args.per_class, seed=args.seed)
    else:
        split = make_natural_split(records, ratios=_parse_ratios(args.ratios), seed=args.seed)
    save_split(split, args.out)
    _emit(
        {
            "command": "split",
            "mode": split.mode,
            "seed": split.seed,
            "out": str(args.out),
            "counts": {name: len(part) for name, part in split.partitions().items()},
        }
    )


def _train_once(split_dir, embeddings, variant, bottleneck, config):
    split = load_split(split_dir)
    source = parse_embedding_spec(embeddings)
    return train_on_split(
        split, source, config=config, variant=VARIANT_FLAGS[variant], bottleneck=bottleneck
    )


def cmd_train(args) -> None:
    config = TrainConfig(
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        epochs=args.epochs,
        batch_size=args.batch_size,
        dropout=args.dropout,
        seed=args.seed,
    )
    clf, history = _train_once(args.split, args.embeddings, args.variant, args.bottleneck, config)
    save_checkpoint(args.out, clf)
    log_path = Path(args.out).with_suffix(".log.jsonl")
    save_history(log_path, history)
    _emit(
        {
            "command": "train",
            "out": str(args.out),
            "log": str(log_path),
            "epochs": args.epochs,
            "selection": clf.selection_,
        }
    )


def cmd_predict(args) -> None:
    clf = load_checkpoint(args.model)
    source = parse_embedding_spec(args.embeddings)
    records = load_corpus(args.corpus)
    predictions = predict_records(clf, source, records)
    save_predictions(args.out, predictions)
    _emit({"command": "predict", "out": str(args.out), "count": len(predictions)})


def cmd_evaluate(args) -> None:
    ece_config = EceConfig(n_bins=args.ece_bins)
    if args.predictions:
        runs = [load_predictions(path) for path in args.predictions]
        run_seeds = None
    else:
        if not args.split or not args.embeddings:
            raise PredictionError(
                "evaluate needs either --predictions files or --split with --embeddings"
            )
        split = load_split(args.split)
        source = parse_embedding_spec(args.embeddings)
        runs = []
        run_seeds = []
        for i in range(args.runs):
            seed = args.seed + i
            config = TrainConfig(
                learning_rate=args.learning_rate,
                weight_decay=args.weight_decay,
                epochs=args.epochs,
                batch_size=args.batch_size,
                dropout=args.dropout,
                seed=seed,
            )
            clf, _ = train_on_split(
                split,
                source,
                config=config,
                variant=VARIANT_FLAGS[args.variant],
                bottleneck=args.bottleneck,
            )
            runs.append(predict_records(clf, source, split.test))
            run_seeds.append(seed)
            _log(f"run {i + 1}/{args.runs} (seed {seed}) done")
    reports = evaluate(runs, ece_config)
    obj = report_to_json_obj(reports, ece_config)
    if run_seeds is not None:
        obj["run_seeds"] = run_seeds
    obj["n_runs"] = len(runs)
    Path(args.out).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _log(format_report_table(reports))
    overall = reports[-1].metrics
    _emit(
        {
            "command": "evaluate",
            "out": str(args.out),
            "n_runs": len(runs),
            "overall_macro_f1": overall["f1"].mean if overall["f1"] else None,
            "overall_ece": overall["ece"].mean if overall["ece"] else None,
        }
    )


def cmd_gate(args) -> None:
    clf = load_checkpoint(args.model)
    source = parse_embedding_spec(args.embeddings)
    lexicon = Lexicon.from_file(args.lexicon) if args.lexicon else Lexicon.default()
    policy = GatePolicy.from_file(args.policy) if args.policy else GatePolicy()
    records = load_corpus(args.corpus)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    audit = AuditLog(out_dir / "audit.jsonl")
    predictions = predict_records(clf, source, records)

    authorized = 0
    deferred = 0
    with open(out_dir / "decisions.jsonl", "w", encoding="utf-8") as handle:
        for record, prediction in zip(records, predictions):
            evidence = evidence_check(record.text, prediction.predicted, record.language, lexicon)
            risk = language_risk(record.text, record.language, lexicon)
            decision = gate(prediction, evidence, risk, policy)
            if decision.status == GateStatus.REQUIRE_REVIEW:
                deferred += 1
            else:
                authorized += 1
            audit.append(
                event="predict",
                record_id=record.id,
                record=record.to_json_obj(),
                prediction=prediction.to_json_obj(),
                verdicts={
                    "evidence": evidence.to_json_obj(),
                    "language_risk": risk.to_json_obj(),
                },
                decision=decision.to_json_obj(),
            )
            handle.write(
                json.dumps(
                    {
                        "id": record.id,
                        "lang": record.language.value,
                        "predicted": prediction.predicted.wire,
                        "confidence": prediction.confidence,
                        "gate": decision.to_json_obj(),
                        "evidence": evidence.to_json_obj(),
                        "language_risk": risk.to_json_obj(),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    _emit(
        {
            "command": "gate",
            "out": str(out_dir),
            "count": len(records),
            "authorized": authorized,
            "deferred": deferred,
        }
    )


def cmd_ingest(args) -> None:
    corpus = load_corpus(args.corpus)
    predictions = ingest_external_predictions(args.input, corpus)
    save_predictions(args.out, predictions)
    _emit({"command": "ingest", "out": str(args.out), "count": len(predictions)})


def cmd_serve(args) -> None:
    import uvicorn

    config = ServiceConfig.resolve(args.config)
    app = create_app_from_config(config)
    _emit({"command": "serve", "host": config.host, "port": config.port})
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


def cmd_report(args) -> None:
    obj = json.loads(Path(args.report).read_text(encoding="utf-8"))
    table = _format_saved_report(obj)
    if args.out:
        Path(args.out).write_text(table + "\n", encoding="utf-8")
    else:
        _log(table)
    _emit({"command": "report", "scopes": len(obj.get("scopes", {})), "out": args.out})


def _format_saved_report(obj: dict) -> str:
    from .metrics import METRIC_NAMES

    headers = ["scope"] + list(METRIC_NAMES)
    rows = []
    for scope, metrics in obj.get("scopes", {}).items():
        cells = [scope]
        for name in METRIC_NAMES:
            value = metrics.get(name)
            if value is None:
                cells.append("-")
            else:
                cells.append(f"{value['mean']:.4f}+/-{value['std']:.4f}")
        rows.append(cells)
    widths = [max(len(r[i]) for r in [headers] + rows) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)) for row in rows)
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orthogate")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", help="dedup, filter and normalize a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-tokens", type=int, default=3, dest="min_tokens")
    p.set_defaults(fn=cmd_refine)

    p = sub.add_parser("split", help="build controlled or natural splits")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["controlled", "natural"], required=True)
    p.add_argument("--per-class", type=int, default=None, dest="per_class")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_split)

    def add_train_flags(p):
        p.add_argument("--embeddings", required=True, help="hash:<dim>:<seed> or a JSONL path")
        p.add_argument("--variant", choices=sorted(VARIANT_FLAGS), default="hpa")
        p.add_argument("--bottleneck", type=int, default=512)
        p.add_argument("--epochs", type=int, default=20)
        p.add_argument("--batch-size", type=int, default=32, dest="batch_size")
        p.add_argument("--learning-rate", type=float, default=1e-3, dest="learning_rate")
        p.add_argument("--weight-decay", type=float, default=0.01, dest="weight_decay")
        p.add_argument("--dropout", type=float, default=0.1)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train the adapter classifier on a split")
    p.add_argument("--split", required=True, help="split directory")
    p.add_argument("--out", required=True, help="checkpoint path")
    add_train_flags(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="predict a corpus with a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("evaluate", help="score prediction runs or train N seeds")
    p.add_argument("--predictions", nargs="*", default=None, help="one file per run")
    p.add_argument("--split", default=None)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--ece-bins", type=int, default=15, dest="ece_bins")
    p.add_argument("--embeddings", default=None, help="hash:<dim>:<seed> or a JSONL path")
    p.add_argument("--variant", choices=sorted(VARIANT_FLAGS), default="hpa")
    p.add_argument("--bottleneck", type=int, default=512)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32, dest="batch_size")
    p.add_argument("--learning-rate", type=float, default=1e-3, dest="learning_rate")
    p.add_argument("--weight-decay", type=float, default=0.01, dest="weight_decay")
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("gate", help="offline gated inference over a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--policy", default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_gate)

    p = sub.add_parser("ingest", help="normalize an external prediction file")
    p.add_argument("--input", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None, help="falls back to $ORTHOGATE_CONFIG")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("report", help="render a saved evaluation report as a table")
    p.add_argument("--report", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except (CorpusError, SplitError, PredictionError, EmbeddingError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
