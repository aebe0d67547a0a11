"""Command-line pipeline: preprocess | index | retrieve | features | train |
rank | postprocess | evaluate.

Each subcommand is a thin wrapper over one module, reading upstream stage
files from the work directory and writing its own. Stage files:

    queries.cache.jsonl, candidates.cache.jsonl   (preprocess)
    index.json                                    (index)
    retrieve_<scorer>.run                         (retrieve)
    ltr_train.tsv, ltr_valid.tsv, ltr_infer.tsv   (features)
    model.txt, train.log                          (train)
    rank.run                                      (rank)
    answers.json                                  (postprocess)
    eval.json                                     (evaluate)
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as config_mod
from . import corpus, evaluate, features, lexical, ltr, postprocess, preprocess


class StageError(Exception):
    pass


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise StageError(f"missing {hint}: {path} (run the upstream command first)")
    return path


def _work_dir(cfg, args) -> Path:
    work = Path(args.stage_dir) if args.stage_dir else cfg.work_dir
    work.mkdir(parents=True, exist_ok=True)
    return work


def cmd_preprocess(cfg, args) -> None:
    work = _work_dir(cfg, args)
    for role, label, directory, name in (
        ("query", "queries", cfg.queries_dir, "queries.cache.jsonl"),
        ("candidate", "candidates", cfg.candidates_dir, "candidates.cache.jsonl"),
    ):
        if not directory.is_dir():
            raise StageError(f"missing corpus directory: {directory}")
        loaded = corpus.load_corpus(directory, is_query=(role == "query"))
        cases = preprocess.preprocess_corpus(loaded, role, cfg.min_year, cfg.max_year)
        preprocess.write_cache(cases, work / name, provenance=cfg.provenance())
        print(
            f"{label}: {len(cases)} cases, "
            f"{sum(c.placeholder_count for c in cases)} placeholders, "
            f"{sum(c.french_paragraphs_removed for c in cases)} French paragraphs removed, "
            f"{sum(1 for c in cases if c.summary)} summaries found, "
            f"{len(loaded.warnings)} load warnings"
        )


def cmd_index(cfg, args) -> None:
    work = _work_dir(cfg, args)
    cache = _require(work / "candidates.cache.jsonl", "candidates cache")
    cases = preprocess.read_cache(cache)
    index = lexical.build_index(cases, cfg.tokenizer)
    lexical.save_index(index, work / "index.json", provenance=cfg.provenance())
    print(f"indexed {index.n_docs} documents, {len(index.postings)} terms, avgdl {index.avgdl:.2f}")


def cmd_retrieve(cfg, args) -> None:
    work = _work_dir(cfg, args)
    index = lexical.load_index(_require(work / "index.json", "index"))
    queries = preprocess.read_cache(_require(work / "queries.cache.jsonl", "queries cache"))
    k = args.k if args.k else cfg.pool_size
    scored = {
        q.case_id: lexical.retrieve_topk(index, q, args.scorer, k, cfg.scoring) for q in queries
    }
    run = corpus.run_from_scores(scored)
    out = work / f"retrieve_{args.scorer}.run"
    corpus.write_run(run, out, tag=cfg.run_tag)
    print(f"wrote {len(run)} entries for {len(queries)} queries to {out}")


def cmd_features(cfg, args) -> None:
    work = _work_dir(cfg, args)
    index = lexical.load_index(_require(work / "index.json", "index"))
    queries = preprocess.read_cache(_require(work / "queries.cache.jsonl", "queries cache"))
    candidates = preprocess.read_cache(_require(work / "candidates.cache.jsonl", "candidates cache"))
    judgments = corpus.load_judgments(_require(cfg.judgments, "judgments file"))
    dense = features.load_dense_source(_require(cfg.dense_scores, "dense-score file"))

    split = corpus.split_queries(
        set(q.case_id for q in queries), cfg.validation_count, cfg.seed
    )
    train_queries = [q for q in queries if q.case_id in split.train_query_ids]
    valid_queries = [q for q in queries if q.case_id in split.validation_query_ids]

    jobs = (
        ("ltr_train.tsv", train_queries, "train"),
        ("ltr_valid.tsv", valid_queries, "eval"),
        ("ltr_infer.tsv", queries, "infer"),
    )
    for name, qs, mode in jobs:
        dataset = features.build_ltr_dataset(
            qs, candidates, judgments if mode != "infer" else None, index, cfg.scoring,
            dense, cfg.pool_size, mode=mode, neg_ratio=cfg.neg_ratio, seed=cfg.seed,
        )
        features.write_dataset(dataset, work / name, provenance=cfg.provenance())
        print(f"{name}: {len(dataset)} rows, {len(dataset.group_ids())} groups ({mode})")


def cmd_train(cfg, args) -> None:
    work = _work_dir(cfg, args)
    train_set = features.read_dataset(_require(work / "ltr_train.tsv", "training dataset"))
    valid_set = features.read_dataset(_require(work / "ltr_valid.tsv", "validation dataset"))
    model = ltr.fit(train_set, valid_set, cfg.train)
    ltr.save_model(model, work / "model.txt", provenance=cfg.provenance())
    ltr.save_train_log(model, work / "train.log")
    best = model.train_log[model.best_iteration - 1]
    print(
        f"trained {len(model.trees)} trees; best iteration {model.best_iteration} "
        f"(valid NDCG@{cfg.train.ndcg_k} {best.valid_ndcg:.4f})"
    )


def cmd_rank(cfg, args) -> None:
    work = _work_dir(cfg, args)
    model = ltr.load_model(_require(work / "model.txt", "model file"))
    dataset = features.read_dataset(_require(work / "ltr_infer.tsv", "inference dataset"))
    scores = model.predict(dataset.feature_matrix())
    by_query: dict[str, list[tuple[str, float]]] = {}
    for row, score in zip(dataset.rows, scores):
        by_query.setdefault(row.query_id, []).append((row.case_id, float(score)))
    for qid in by_query:
        by_query[qid].sort(key=lambda pair: (-pair[1], pair[0]))
    run = corpus.run_from_scores(by_query)
    corpus.write_run(run, work / "rank.run", tag=cfg.run_tag)
    print(f"ranked {len(run)} rows for {len(by_query)} queries")


def cmd_postprocess(cfg, args) -> None:
    work = _work_dir(cfg, args)
    run = corpus.read_run(_require(work / "rank.run", "ranked run"))
    queries = preprocess.read_cache(_require(work / "queries.cache.jsonl", "queries cache"))
    candidates = preprocess.read_cache(_require(work / "candidates.cache.jsonl", "candidates cache"))
    params = postprocess.CutoffParams(
        p=args.p if args.p is not None else cfg.cutoff.p,
        l=args.l if args.l is not None else cfg.cutoff.l,
        h=args.h if args.h is not None else cfg.cutoff.h,
    )
    answers = postprocess.finalize(
        run,
        query_years={q.case_id: q.trial_year for q in queries},
        candidate_years={c.case_id: c.trial_year for c in candidates},
        query_ids={q.case_id for q in queries},
        params=params,
    )
    postprocess.write_answers(answers, work / "answers.json")
    sizes = [len(v) for v in answers.values()]
    print(
        f"answers for {len(answers)} queries "
        f"(sizes min {min(sizes) if sizes else 0} max {max(sizes) if sizes else 0})"
    )


def cmd_evaluate(cfg, args) -> None:
    work = _work_dir(cfg, args)
    judgments = corpus.load_judgments(_require(cfg.judgments, "judgments file"))
    if args.run:
        run = corpus.read_run(_require(Path(args.run), "run file"))
        report = evaluate.prf_at_k(run, judgments, args.k or cfg.train.ndcg_k)
    else:
        answers = postprocess.read_answers(_require(work / "answers.json", "answers file"))
        report = evaluate.micro_prf(answers, judgments)
    evaluate.write_report(report, work / "eval.json")
    print(report.to_table())


COMMANDS = {
    "preprocess": cmd_preprocess,
    "index": cmd_index,
    "retrieve": cmd_retrieve,
    "features": cmd_features,
    "train": cmd_train,
    "rank": cmd_rank,
    "postprocess": cmd_postprocess,
    "evaluate": cmd_evaluate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="legalir", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="pipeline config file (INI)")
        p.add_argument("--stage-dir", default=None, help="override the configured work dir")
        if name == "retrieve":
            p.add_argument("--scorer", choices=("tfidf", "bm25", "qld"), default="bm25")
            p.add_argument("--k", type=int, default=None)
        if name == "postprocess":
            p.add_argument("--p", type=float, default=None)
            p.add_argument("--l", type=int, default=None)
            p.add_argument("--h", type=int, default=None)
        if name == "evaluate":
            p.add_argument("--run", default=None, help="evaluate a run file at --k instead of answers")
            p.add_argument("--k", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_mod.load_config(args.config)
        COMMANDS[args.command](cfg, args)
    except (StageError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
