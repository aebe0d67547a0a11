"""casevec CLI: train the toy encoder on pipeline artifacts, export embeddings.

    casevec train  --cases CACHE --judgments JSON --run TREC_RUN --out DIR
                   [--queries CACHE] [--steps N] [--epochs N] [--seed N]
    casevec export --checkpoint PT --cases CACHE --out EMBEDDINGS_TSV
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .data import read_case_cache, read_judgments, read_run_rankings
from .export import export_embeddings
from .training import TrainConfig, load_checkpoint, train


def _require(path: str, hint: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"missing {hint}: {p}")
    return p


def cmd_train(args) -> None:
    config = TrainConfig()
    if args.steps is not None:
        config = replace(config, pretrain_steps=args.steps)
    if args.epochs is not None:
        config = replace(config, finetune_epochs=args.epochs)
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    cases = read_case_cache(_require(args.cases, "case cache"))
    judgments = read_judgments(_require(args.judgments, "judgments file"))
    rankings = read_run_rankings(_require(args.run, "run file"))
    query_cases = read_case_cache(_require(args.queries, "query cache")) if args.queries else None

    model, tokenizer, history = train(
        config, cases, judgments, rankings, args.out, query_cases=query_cases
    )
    first = history.moving_average(1)
    last = history.moving_average(len(history.pretrain_total))
    print(
        f"pretrained {len(history.pretrain_total)} steps "
        f"(moving-average loss {first:.4f} -> {last:.4f}), "
        f"finetuned {len(history.finetune)} steps, "
        f"skipped {history.skipped_cases} unsplittable cases"
    )
    print(f"checkpoints in {args.out}")


def cmd_export(args) -> None:
    model, tokenizer = load_checkpoint(_require(args.checkpoint, "checkpoint"))
    cases = read_case_cache(_require(args.cases, "case cache"))
    fallbacks = export_embeddings(model, tokenizer, cases, args.out)
    print(f"wrote {len(cases)} vectors (dim {model.config.dim}) to {args.out}; "
          f"{fallbacks} full-text fallbacks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="casevec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train")
    p_train.add_argument("--cases", required=True, help="processed-case cache (JSONL)")
    p_train.add_argument("--judgments", required=True, help="judgments JSON")
    p_train.add_argument("--run", required=True, help="first-stage TREC run for negatives")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--queries", default=None, help="query-role cache (optional)")
    p_train.add_argument("--steps", type=int, default=None)
    p_train.add_argument("--epochs", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.set_defaults(func=cmd_train)

    p_export = sub.add_parser("export")
    p_export.add_argument("--checkpoint", required=True)
    p_export.add_argument("--cases", required=True)
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
