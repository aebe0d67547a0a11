"""Micro-averaged precision/recall/F1 over answer sets, plus fixed-k diagnostics.

TP/FP/FN are summed over all queries before dividing (micro-average), which
is not the mean of per-query metrics. Division-by-zero conventions: P = 0
when tp+fp = 0, R = 0 when tp+fn = 0, F1 = 0 when P+R = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import JudgmentSet, RunList


@dataclass
class QueryCounts:
    query_id: str
    tp: int
    fp: int
    fn: int


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    per_query: list[QueryCounts] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_query": [
                {"query_id": q.query_id, "tp": q.tp, "fp": q.fp, "fn": q.fn}
                for q in self.per_query
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        lines = [
            f"{'query':<16}{'tp':>6}{'fp':>6}{'fn':>6}",
            "-" * 34,
        ]
        for q in self.per_query:
            lines.append(f"{q.query_id:<16}{q.tp:>6}{q.fp:>6}{q.fn:>6}")
        lines.append("-" * 34)
        lines.append(f"{'total':<16}{self.tp:>6}{self.fp:>6}{self.fn:>6}")
        lines.append(
            f"precision={self.precision:.4f} recall={self.recall:.4f} f1={self.f1:.4f}"
        )
        return "\n".join(lines)


def _report(per_query: list[QueryCounts]) -> EvalReport:
    tp = sum(q.tp for q in per_query)
    fp = sum(q.fp for q in per_query)
    fn = sum(q.fn for q in per_query)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1,
                      per_query=per_query)


def micro_prf(answers: dict[str, list[str]], judgments: JudgmentSet) -> EvalReport:
    """Micro-averaged P/R/F1 of ``answers`` against gold judgments.

    Every answered query must be judged; judged queries missing from the
    answers count their whole gold set as false negatives.
    """
    for qid in answers:
        if qid not in judgments:
            raise ValueError(f"query missing from judgments: {qid}")

    per_query = []
    for qid in sorted(judgments.noticed):
        gold = judgments.gold(qid)
        returned = set(answers.get(qid, []))
        tp = len(returned & gold)
        per_query.append(
            QueryCounts(query_id=qid, tp=tp, fp=len(returned) - tp, fn=len(gold) - tp)
        )
    return _report(per_query)


def truncate_run(run: RunList, k: int) -> dict[str, list[str]]:
    return {
        qid: [e.case_id for e in entries[:k]] for qid, entries in run.by_query().items()
    }


def prf_at_k(run: RunList, judgments: JudgmentSet, k: int) -> EvalReport:
    """micro_prf of the answer set formed by truncating each query's run to k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return micro_prf(truncate_run(run, k), judgments)


def write_report(report: EvalReport, file_path: str | Path) -> None:
    Path(file_path).write_text(report.to_json(), encoding="utf-8")
