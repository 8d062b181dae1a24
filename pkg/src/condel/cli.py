"""Operator command line: ingest, train, annotate, evaluate, analyze, serve.

Exit codes: 0 success, 1 validation/data error, 2 usage error.  All
outputs are byte-deterministic given the same inputs and seeds; analysis
results are emitted as CSV/JSON data, never as images.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import metrics, model as model_mod, rules as rules_mod
from .corpus import Label, dump_corpus, load_corpus
from .errors import CondelError
from .index import build_index
from .metrics import (
    compare_distributions,
    delta_to_dict,
    evaluate,
    global_explanations,
    report_to_json,
    word_table,
    word_table_to_csv,
)
from .model import TrainConfig, annotate, import_predictions, load_model, pr_curve, save_model, train_linear


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str, threshold: float = 0.5):
    try:
        return load_corpus(path, threshold=threshold)
    except OSError as e:
        raise CondelError(f"cannot read corpus {path}: {e.strerror}") from None


def _ruleset(arg: str, mode: str | None) -> rules_mod.RuleSet:
    """Accept either a path to a ruleset JSON file or inline JSON."""
    raw = arg.strip()
    if raw.startswith("{"):
        obj = json.loads(raw)
    else:
        with open(arg, encoding="utf-8") as fh:
            obj = json.load(fh)
    if mode:
        obj = {**obj, "mode": mode}
    return rules_mod.ruleset_from_obj(obj)


def cmd_validate(args) -> int:
    corpus = _load(args.corpus)
    gold_toxic = sum(1 for c in corpus.comments if c.gold is Label.TOXIC)
    pred_toxic = sum(
        1 for c in corpus.comments if c.pred and c.pred.label is Label.TOXIC
    )
    print(
        f"{corpus.name}: {len(corpus)} comments, "
        f"{gold_toxic} gold-toxic, {pred_toxic} predicted-toxic"
    )
    return 0


def cmd_train(args) -> int:
    corpus = _load(args.corpus)
    config = TrainConfig(
        l1_penalty=args.l1,
        epochs=args.epochs,
        learning_rate=args.lr,
        seed=args.seed,
    )
    trained = train_linear(corpus, config)
    save_model(trained, args.output)
    nonzero = sum(1 for w in trained.weights.values() if w != 0.0)
    print(f"trained {nonzero} weights, bias {trained.bias:.6f}, rho {trained.rho:.6f}")
    return 0


def cmd_annotate(args) -> int:
    corpus = _load(args.corpus)
    trained = load_model(args.model)
    dump_corpus(annotate(trained, corpus), args.output)
    return 0


def cmd_import_preds(args) -> int:
    corpus = _load(args.corpus)
    dump_corpus(import_predictions(corpus, args.predictions), args.output)
    return 0


def cmd_evaluate(args) -> int:
    corpus = _load(args.corpus)
    ruleset = _ruleset(args.rules, args.mode)
    report = evaluate(corpus, build_index(corpus), ruleset)
    _write(report_to_json(report) + "\n", args.output)
    return 0


def cmd_word_table(args) -> int:
    corpus = _load(args.corpus)
    rows = word_table(
        corpus,
        build_index(corpus),
        min_support=args.min_support,
        sort_by=args.sort,
        descending=args.desc,
    )
    _write(word_table_to_csv(rows), args.output)
    return 0


def cmd_global_expl(args) -> int:
    corpus = _load(args.corpus)
    expl = global_explanations(corpus, args.k)
    for token, freq in expl.entries:
        print(f"{token} {freq}")
    return 0


def cmd_pr_curve(args) -> int:
    corpus = _load(args.corpus)
    points = pr_curve(corpus, args.thresholds)
    lines = ["threshold,precision,recall"]
    for p in points:
        precision = "" if p.precision is None else repr(p.precision)
        lines.append(f"{p.threshold!r},{precision},{p.recall!r}")
    _write("\n".join(lines) + "\n", args.output)
    return 0


def cmd_compare(args) -> int:
    corpus_a = _load(args.corpus_a)
    corpus_b = _load(args.corpus_b)
    ruleset = _ruleset(args.rules, args.mode)
    report_a = evaluate(corpus_a, build_index(corpus_a), ruleset)
    report_b = evaluate(corpus_b, build_index(corpus_b), ruleset)
    delta = compare_distributions(report_a, report_b)
    payload = {
        "a": metrics.report_to_dict(report_a),
        "b": metrics.report_to_dict(report_b),
        "delta": delta_to_dict(delta),
    }
    _write(json.dumps(payload, indent=2) + "\n", args.output)
    return 0


def cmd_serve(args) -> int:
    from .server import ServerConfig, serve

    serve(ServerConfig.load(args.config))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condel",
        description="conditional-delegation workbench for content moderation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus file and print a summary")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("train", help="fit the linear classifier on a labeled corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True, help="model JSON path")
    p.add_argument("--l1", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("annotate", help="attach model predictions to every comment")
    p.add_argument("corpus")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("import-preds", help="merge external predictions by id")
    p.add_argument("corpus")
    p.add_argument("predictions")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_import_preds)

    p = sub.add_parser("evaluate", help="full metric report for a ruleset")
    p.add_argument("corpus")
    p.add_argument("--rules", required=True, help="ruleset JSON file or inline JSON")
    p.add_argument("--mode", choices=["delegation", "report_all"])
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("word-table", help="per-word precision/reward table as CSV")
    p.add_argument("corpus")
    p.add_argument("--min-support", type=int, default=100)
    p.add_argument("--sort", default="word", help="column to sort by")
    p.add_argument("--desc", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_word_table)

    p = sub.add_parser("global-expl", help="most frequent rationale tokens")
    p.add_argument("corpus")
    p.add_argument("-k", type=int, default=15)
    p.set_defaults(func=cmd_global_expl)

    p = sub.add_parser("pr-curve", help="precision/recall over a threshold sweep")
    p.add_argument("corpus")
    p.add_argument("--thresholds", type=float, nargs="+", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pr_curve)

    p = sub.add_parser("compare", help="metric deltas between two corpora")
    p.add_argument("corpus_a")
    p.add_argument("corpus_b")
    p.add_argument("--rules", required=True)
    p.add_argument("--mode", choices=["delegation", "report_all"])
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CondelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e.filename or e} not found", file=sys.stderr)
        return 1
    except json.JSONDecodeError as e:
        print(f"error: invalid JSON: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
