"""Readers for the upstream pipeline's file formats.

casevec consumes the retrieval pipeline only through its published
artifacts: the processed-case JSONL cache, the judgments JSON, and a
TREC-format run file for hard-negative mining.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

CACHE_FORMAT = "processed-case-cache"
CACHE_VERSION = 1

PLACEHOLDERS = ("FRAGMENT_SUPPRESSED", "REFERENCE_SUPPRESSED", "CITATION_SUPPRESSED")
_PLACEHOLDER_RE = re.compile("|".join(PLACEHOLDERS))


@dataclass
class CachedCase:
    case_id: str
    body_text: str
    reference_sentences: list[str]


def read_case_cache(file_path: str | Path) -> list[CachedCase]:
    """Parse the pipeline's processed-case cache (JSONL with a header line)."""
    path = Path(file_path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty cache file")
    header = json.loads(lines[0])
    if header.get("format") != CACHE_FORMAT or header.get("version") != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache header {header}")
    cases = []
    for line in lines[1:]:
        if not line.strip():
            continue
        row = json.loads(line)
        cases.append(
            CachedCase(
                case_id=row["case_id"],
                body_text=row["body_text"],
                reference_sentences=list(row.get("reference_sentences") or []),
            )
        )
    return cases


def query_text(case: CachedCase) -> str:
    """The citation-sentence view of a case (placeholder literals removed),
    falling back to the full body when no citation sentences exist."""
    if case.reference_sentences:
        joined = " ".join(case.reference_sentences)
        return re.sub(r"  +", " ", _PLACEHOLDER_RE.sub("", joined)).strip()
    return case.body_text


def read_judgments(file_path: str | Path) -> dict[str, set[str]]:
    raw = json.loads(Path(file_path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError("judgments root must be a JSON object")
    noticed: dict[str, set[str]] = {}
    for name, values in raw.items():
        if not isinstance(values, list):
            raise ValueError(f"judgment value for {name!r} must be an array")
        qid = Path(name).stem
        noticed[qid] = {Path(str(v)).stem for v in values} - {qid}
    return noticed


def read_run_rankings(file_path: str | Path) -> dict[str, list[str]]:
    """query_id -> case_ids in rank order, from a TREC six-column run file."""
    rankings: dict[str, list[str]] = {}
    path = Path(file_path)
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"{path}:{number}: expected 6 columns, got {len(parts)}")
        rankings.setdefault(parts[0], []).append(parts[2])
    return rankings
