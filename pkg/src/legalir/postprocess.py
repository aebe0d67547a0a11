"""Heuristic post-processing: trial-date filter, query-case filter, dynamic cut-off.

Filters run in that order so the answer-size clamp applies to the final
candidate pool. The cut-off keeps candidates whose score is strictly above
p times the top score, clamped to [l, h] entries (or everything available
when fewer than l remain).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from .corpus import RunList


@dataclass(frozen=True)
class CutoffParams:
    p: float = 0.84
    l: int = 4
    h: int = 6

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must be in (0, 1]")
        if self.l < 0:
            raise ValueError("l must be >= 0")
        if self.h < self.l:
            raise ValueError("h must be >= l")


ScoredList = list[tuple[str, float]]


def filter_by_trial_date(
    scored: ScoredList,
    query_year: Optional[int],
    candidate_years: Mapping[str, Optional[int]],
) -> ScoredList:
    """Drop candidates whose known trial year is later than the query's.

    Unknown query year keeps everything; unknown candidate years are kept;
    a candidate year equal to the query year is kept (year granularity
    cannot order same-year cases).
    """
    if query_year is None:
        return list(scored)
    kept = []
    for case_id, score in scored:
        year = candidate_years.get(case_id)
        if year is not None and year > query_year:
            continue
        kept.append((case_id, score))
    return kept


def filter_query_cases(scored: ScoredList, query_ids: set[str]) -> ScoredList:
    """Remove candidates that are themselves query cases."""
    return [(case_id, score) for case_id, score in scored if case_id not in query_ids]


def dynamic_cutoff(scored: ScoredList, params: CutoffParams) -> list[str]:
    """Variable-size answer selection.

    When negative scores are present the whole list is shifted so the
    minimum is 0 (the threshold ratio is meaningless on negative scores).
    S is the shifted top score; entries with shifted score strictly greater
    than p*S are kept, then the count is clamped to [l, h]. Ties at the
    boundary resolve by ascending case_id.
    """
    if not scored:
        return []
    ordered = sorted(scored, key=lambda pair: (-pair[1], pair[0]))
    shift = max(0.0, -min(score for _, score in ordered))
    top = ordered[0][1] + shift
    threshold = params.p * top
    selected = sum(1 for _, score in ordered if score + shift > threshold)
    size = max(selected, min(params.l, len(ordered)))
    size = min(size, params.h)
    return [case_id for case_id, _ in ordered[:size]]


AnswerSet = dict[str, list[str]]


def finalize(
    run: RunList,
    query_years: Mapping[str, Optional[int]],
    candidate_years: Mapping[str, Optional[int]],
    query_ids: set[str],
    params: CutoffParams,
) -> AnswerSet:
    """Apply date filter, query-case filter, and dynamic cut-off per query."""
    run.validate()
    answers: AnswerSet = {}
    for query_id, entries in run.by_query().items():
        scored = [(e.case_id, e.score) for e in entries]
        scored = filter_by_trial_date(scored, query_years.get(query_id), candidate_years)
        scored = filter_query_cases(scored, query_ids)
        answers[query_id] = dynamic_cutoff(scored, params)
    return answers


def write_answers(answers: AnswerSet, file_path: str | Path, extension: str = ".txt") -> None:
    """Write answers as JSON mirroring the judgment format (filename keys)."""
    payload = {
        f"{qid}{extension}": [f"{cid}{extension}" for cid in cids]
        for qid, cids in sorted(answers.items())
    }
    Path(file_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_answers(file_path: str | Path) -> AnswerSet:
    raw = json.loads(Path(file_path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError("answers root must be a JSON object")
    return {Path(k).stem: [Path(v).stem for v in values] for k, values in raw.items()}
