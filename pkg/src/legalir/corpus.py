"""Corpus, judgment, and run-file storage.

File conventions:
  * corpus: directory of ``*.txt`` files, case_id = filename stem
  * judgments: JSON object mapping query filename -> array of noticed filenames
  * runs: TREC six-column text, ``qid Q0 docid rank score tag``, scores with
    exactly 6 fractional digits
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaseDocument:
    """A raw case exactly as read from disk."""

    case_id: str
    raw_text: str
    is_query: bool = False


@dataclass
class CorpusLoadResult:
    documents: list[CaseDocument]
    warnings: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)


def load_corpus(directory_path: str | Path, is_query: bool = False) -> CorpusLoadResult:
    """Load every ``*.txt`` file in ``directory_path``, ordered by case_id.

    Invalid UTF-8 bytes are replaced (recorded as a warning); unreadable files
    are skipped with a warning. A missing directory is fatal.
    """
    directory = Path(directory_path)
    if not directory.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {directory}")

    documents: list[CaseDocument] = []
    warnings: list[str] = []
    for path in sorted(directory.glob("*.txt"), key=lambda p: p.stem):
        try:
            data = path.read_bytes()
        except OSError as exc:
            warnings.append(f"unreadable file skipped: {path} ({exc})")
            logger.warning(warnings[-1])
            continue
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            text = data.decode("utf-8", errors="replace")
            warnings.append(f"invalid UTF-8 replaced in: {path}")
            logger.warning(warnings[-1])
        documents.append(CaseDocument(case_id=path.stem, raw_text=text, is_query=is_query))

    ids = [d.case_id for d in documents]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate case ids in {directory}")
    return CorpusLoadResult(documents=documents, warnings=warnings)


def _stem(name: str) -> str:
    return Path(name).stem


@dataclass
class JudgmentSet:
    """Gold mapping query_id -> set of noticed case_ids (self-references excluded)."""

    noticed: dict[str, set[str]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __contains__(self, query_id: str) -> bool:
        return query_id in self.noticed

    def gold(self, query_id: str) -> set[str]:
        return self.noticed[query_id]

    def query_ids(self) -> list[str]:
        return sorted(self.noticed)

    def validate_ids(self, known_ids: set[str]) -> list[str]:
        """Return warnings for referenced ids that are not in ``known_ids``."""
        unknown = []
        for qid, cids in sorted(self.noticed.items()):
            for cid in sorted(cids):
                if cid not in known_ids:
                    unknown.append(f"judgment for {qid} references unknown case {cid}")
        return unknown


def load_judgments(file_path: str | Path) -> JudgmentSet:
    """Parse a judgments JSON file, normalizing filenames to case_id stems."""
    path = Path(file_path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed judgments JSON at {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"judgments root must be a JSON object, got {type(raw).__name__}")

    noticed: dict[str, set[str]] = {}
    warnings: list[str] = []
    for name, values in raw.items():
        if not isinstance(values, list):
            raise ValueError(f"judgment value for {name!r} must be an array")
        qid = _stem(name)
        ids = set()
        for value in values:
            cid = _stem(str(value))
            if cid == qid:
                warnings.append(f"self-reference dropped for query {qid}")
                logger.warning(warnings[-1])
                continue
            ids.add(cid)
        noticed[qid] = ids
    return JudgmentSet(noticed=noticed, warnings=warnings)


def write_judgments(judgments: JudgmentSet, file_path: str | Path, extension: str = ".txt") -> None:
    """Write judgments in the filename->array JSON convention."""
    payload = {
        f"{qid}{extension}": [f"{cid}{extension}" for cid in sorted(cids)]
        for qid, cids in sorted(judgments.noticed.items())
    }
    Path(file_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/validation partition of the query set."""

    train_query_ids: frozenset[str]
    validation_query_ids: frozenset[str]
    seed: int


def split_queries(query_ids: set[str], validation_count: int, seed: int) -> SplitSpec:
    """Deterministically partition ``query_ids`` into train and validation sets."""
    ids = sorted(query_ids)
    if validation_count > len(ids):
        raise ValueError(f"validation_count {validation_count} exceeds {len(ids)} queries")
    if validation_count < 0:
        raise ValueError("validation_count must be non-negative")
    rng = random.Random(seed)
    validation = set(rng.sample(ids, validation_count))
    train = frozenset(i for i in ids if i not in validation)
    return SplitSpec(train_query_ids=train, validation_query_ids=frozenset(validation), seed=seed)


@dataclass(frozen=True)
class RunEntry:
    query_id: str
    case_id: str
    rank: int
    score: float


@dataclass
class RunList:
    """Ranked retrieval output. Scores are held at 6-decimal resolution,
    matching the file format, so write/read is an identity."""

    entries: list[RunEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.entries = [
            RunEntry(e.query_id, e.case_id, e.rank, round(e.score, 6)) for e in self.entries
        ]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RunList) and self.entries == other.entries

    def __len__(self) -> int:
        return len(self.entries)

    def by_query(self) -> dict[str, list[RunEntry]]:
        grouped: dict[str, list[RunEntry]] = {}
        for entry in self.entries:
            grouped.setdefault(entry.query_id, []).append(entry)
        return grouped

    def validate(self) -> None:
        """Check per-query invariants: consecutive ranks from 1, non-increasing
        scores, no duplicate (query_id, case_id) pairs."""
        seen: set[tuple[str, str]] = set()
        for qid, entries in self.by_query().items():
            previous_score = None
            for position, entry in enumerate(entries, start=1):
                if entry.rank != position:
                    raise ValueError(
                        f"run for {qid}: rank {entry.rank} at position {position} is not consecutive"
                    )
                if previous_score is not None and entry.score > previous_score:
                    raise ValueError(f"run for {qid}: scores increase at rank {entry.rank}")
                previous_score = entry.score
                key = (qid, entry.case_id)
                if key in seen:
                    raise ValueError(f"duplicate run entry {key}")
                seen.add(key)


def run_from_scores(scored_by_query: dict[str, list[tuple[str, float]]]) -> RunList:
    """Build a RunList from per-query (case_id, score) lists already sorted
    by descending score."""
    entries = []
    for qid in sorted(scored_by_query):
        for rank, (cid, score) in enumerate(scored_by_query[qid], start=1):
            entries.append(RunEntry(qid, cid, rank, score))
    return RunList(entries=entries)


def write_run(run: RunList, file_path: str | Path, tag: str = "run") -> None:
    """Write a TREC-format run file (6 fractional digits on scores)."""
    run.validate()
    lines = [
        f"{e.query_id} Q0 {e.case_id} {e.rank} {e.score:.6f} {tag}" for e in run.entries
    ]
    Path(file_path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_run(file_path: str | Path) -> RunList:
    """Parse a TREC-format run file, reporting the line number on errors."""
    entries = []
    path = Path(file_path)
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"{path}:{number}: expected 6 columns, got {len(parts)}")
        qid, _, cid, rank_text, score_text, _tag = parts
        try:
            rank = int(rank_text)
            score = float(score_text)
        except ValueError as exc:
            raise ValueError(f"{path}:{number}: {exc}") from exc
        entries.append(RunEntry(qid, cid, rank, score))
    run = RunList(entries=entries)
    run.validate()
    return run
