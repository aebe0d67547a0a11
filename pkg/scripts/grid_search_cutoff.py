#!/usr/bin/env python3
"""Grid search over the cut-off parameters (p, l, h) on a ranked run.

Reads rank.run plus the caches from a work dir (run scripts/run_demo.py
first) and reports micro-F1 for every grid point against the judgments.

Usage: python3 scripts/grid_search_cutoff.py [work_dir]
"""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

from legalir.config import load_config
from legalir.corpus import load_judgments, read_run
from legalir.evaluate import micro_prf
from legalir.postprocess import CutoffParams, finalize
from legalir.preprocess import read_cache

P_GRID = [0.70, 0.76, 0.80, 0.84, 0.88, 0.92]
L_GRID = [1, 2, 3, 4]
H_GRID = [4, 5, 6, 8]


def main() -> int:
    work = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "work"
    cfg = load_config(ROOT / "fixtures" / "mini_corpus" / "config.ini")
    run = read_run(work / "rank.run")
    queries = read_cache(work / "queries.cache.jsonl")
    candidates = read_cache(work / "candidates.cache.jsonl")
    judgments = load_judgments(cfg.judgments)

    query_years = {q.case_id: q.trial_year for q in queries}
    candidate_years = {c.case_id: c.trial_year for c in candidates}
    query_ids = {q.case_id for q in queries}

    results = []
    for p in P_GRID:
        for l in L_GRID:
            for h in H_GRID:
                if h < l:
                    continue
                answers = finalize(
                    run, query_years, candidate_years, query_ids, CutoffParams(p=p, l=l, h=h)
                )
                report = micro_prf(answers, judgments)
                results.append((report.f1, report.precision, report.recall, p, l, h))

    results.sort(reverse=True)
    print(f"{'f1':>8} {'prec':>8} {'rec':>8}   p     l  h")
    for f1, precision, recall, p, l, h in results[:15]:
        print(f"{f1:8.4f} {precision:8.4f} {recall:8.4f}   {p:.2f}  {l}  {h}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
