"""Structure-aware cleaning of legal cases.

Pipeline per case: strip the procedural preamble, extract the trial year and
the citation-bearing sentences, remove citation placeholders and French
paragraphs, pull out the Summary section. Query cases are reduced to their
citation sentences; candidate cases keep the full cleaned text with the
summary prepended.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Optional

from .corpus import CaseDocument

PLACEHOLDERS = ("FRAGMENT_SUPPRESSED", "REFERENCE_SUPPRESSED", "CITATION_SUPPRESSED")

_PLACEHOLDER_RE = re.compile("|".join(re.escape(p) for p in PLACEHOLDERS))
_PARAGRAPH_SPLIT_RE = re.compile(r"\n\s*\n")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?;])\s+")
_YEAR_RE = re.compile(r"(?<!\d)\d{4}(?!\d)")
_WORD_RE = re.compile(r"[a-zA-Z]+")
_SUMMARY_HEADING_RE = re.compile(r"^\s*Summary\s*:?\s*(.*)$")
# A structural subheading: an all-caps line (optionally ending in a colon).
_SUBHEADING_RE = re.compile(r"^\s*[A-Z][A-Z .&'\-]{2,}:?\s*$")

DEFAULT_MIN_YEAR = 1850
DEFAULT_MAX_YEAR = 2025
SUMMARY_CHAR_CAP = 4000

# Fixed 30-word function-word stoplists used by the French paragraph
# classifier. A paragraph counts as French when it has at least 3 French
# hits and strictly more French than English hits.
FRENCH_STOPWORDS = frozenset(
    "le la les de des du un une et est en que qui ne pas pour par avec sur "
    "dans au aux ce cette ses son sa sont ont mais".split()
)
ENGLISH_STOPWORDS = frozenset(
    "the of and to in that is was for it with as his her on be at by this "
    "are or an not from which but has have had were".split()
)
assert len(FRENCH_STOPWORDS) == 30 and len(ENGLISH_STOPWORDS) == 30
assert not (FRENCH_STOPWORDS & ENGLISH_STOPWORDS)

CACHE_FORMAT = "processed-case-cache"
CACHE_VERSION = 1


@dataclass
class ProcessedCase:
    """Cleaned case text plus the metadata extracted along the way.

    ``placeholder_count`` is counted before placeholder removal;
    ``token_length`` stays None until an index or feature extractor
    tokenizes the body.
    """

    case_id: str
    body_text: str
    summary: Optional[str] = None
    reference_sentences: list[str] = field(default_factory=list)
    placeholder_count: int = 0
    french_paragraphs_removed: int = 0
    trial_year: Optional[int] = None
    token_length: Optional[int] = None


def strip_prefix(text: str) -> str:
    """Drop everything before the first literal "[1]" (procedural preamble)."""
    position = text.find("[1]")
    if position < 0:
        return text
    return text[position:]


def count_and_remove_placeholders(text: str) -> tuple[str, int]:
    """Remove the three placeholder literals, collapsing the doubled spaces
    this leaves behind. Returns (cleaned text, occurrence count)."""
    count = len(_PLACEHOLDER_RE.findall(text))
    if count == 0:
        return text, 0
    cleaned = _PLACEHOLDER_RE.sub("", text)
    cleaned = re.sub(r"[ \t]{2,}", " ", cleaned)
    cleaned = re.sub(r"[ \t]+\n", "\n", cleaned)
    return cleaned.strip(" \t"), count


def _french_hits(paragraph: str) -> tuple[int, int]:
    words = [w.lower() for w in _WORD_RE.findall(paragraph)]
    french = sum(1 for w in words if w in FRENCH_STOPWORDS)
    english = sum(1 for w in words if w in ENGLISH_STOPWORDS)
    return french, english


def is_french_paragraph(paragraph: str) -> bool:
    french, english = _french_hits(paragraph)
    return french >= 3 and french > english


def remove_french_paragraphs(text: str) -> tuple[str, int]:
    """Drop blank-line-delimited paragraphs classified as French.

    Surviving paragraphs are re-joined with a single blank line; order is
    preserved.
    """
    if not text.strip():
        return "", 0
    paragraphs = [p for p in _PARAGRAPH_SPLIT_RE.split(text) if p.strip()]
    kept = [p for p in paragraphs if not is_french_paragraph(p)]
    return "\n\n".join(kept), len(paragraphs) - len(kept)


def extract_summary(text: str) -> Optional[str]:
    """Return the text between a "Summary" heading line and the next
    structural subheading, capped at SUMMARY_CHAR_CAP characters. None when
    no heading is found or the section is empty."""
    lines = text.splitlines()
    start = None
    first_chunk = ""
    for i, line in enumerate(lines):
        match = _SUMMARY_HEADING_RE.match(line)
        if match:
            start = i + 1
            first_chunk = match.group(1).strip()
            break
    if start is None:
        return None

    collected = [first_chunk] if first_chunk else []
    for line in lines[start:]:
        if _SUBHEADING_RE.match(line):
            break
        if line.strip():
            collected.append(line.strip())
        if sum(len(c) + 1 for c in collected) > SUMMARY_CHAR_CAP:
            break
    summary = "\n".join(collected).strip()
    summary = summary[:SUMMARY_CHAR_CAP]
    return summary or None


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!', '?', ';' followed by whitespace. No abbreviation
    handling; boundary noise is tolerable for placeholder sentences."""
    return [s.strip() for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]


def extract_reference_sentences(text: str) -> list[str]:
    """Sentences containing at least one placeholder, in document order.
    Expects the pre-removal (placeholder-bearing) text."""
    return [s for s in split_sentences(text) if _PLACEHOLDER_RE.search(s)]


def extract_trial_year(
    text: str, min_year: int = DEFAULT_MIN_YEAR, max_year: int = DEFAULT_MAX_YEAR
) -> Optional[int]:
    """Largest standalone 4-digit token within [min_year, max_year], or None."""
    if min_year > max_year:
        raise ValueError("min_year must not exceed max_year")
    years = [int(m) for m in _YEAR_RE.findall(text)]
    years = [y for y in years if min_year <= y <= max_year]
    return max(years) if years else None


def preprocess_case(
    doc: CaseDocument,
    role: Literal["query", "candidate"],
    min_year: int = DEFAULT_MIN_YEAR,
    max_year: int = DEFAULT_MAX_YEAR,
) -> ProcessedCase:
    """Run the full cleaning pipeline on one case.

    Queries keep only their citation sentences (falling back to the full
    cleaned text when there are none, so the query stays searchable);
    candidates keep the summary-prepended full cleaned text.
    """
    if role not in ("query", "candidate"):
        raise ValueError(f"unknown role: {role!r}")

    stripped = strip_prefix(doc.raw_text)
    trial_year = extract_trial_year(stripped, min_year, max_year)
    reference_sentences = extract_reference_sentences(stripped)

    no_placeholders, placeholder_count = count_and_remove_placeholders(stripped)
    cleaned, french_removed = remove_french_paragraphs(no_placeholders)
    summary = extract_summary(cleaned)

    if role == "query" and reference_sentences:
        joined = " ".join(reference_sentences)
        body, _ = count_and_remove_placeholders(joined)
        body, _ = remove_french_paragraphs(body)
    elif role == "query":
        body = cleaned
    else:
        body = f"{summary}\n\n{cleaned}" if summary else cleaned

    return ProcessedCase(
        case_id=doc.case_id,
        body_text=body,
        summary=summary,
        reference_sentences=reference_sentences,
        placeholder_count=placeholder_count,
        french_paragraphs_removed=french_removed,
        trial_year=trial_year,
    )


def preprocess_corpus(
    docs: Iterable[CaseDocument],
    role: Literal["query", "candidate"],
    min_year: int = DEFAULT_MIN_YEAR,
    max_year: int = DEFAULT_MAX_YEAR,
) -> list[ProcessedCase]:
    return [preprocess_case(d, role, min_year, max_year) for d in docs]


def write_cache(
    cases: Iterable[ProcessedCase], file_path: str | Path, provenance: dict | None = None
) -> None:
    """Write a JSON-lines cache with a version header line."""
    header = {"format": CACHE_FORMAT, "version": CACHE_VERSION}
    if provenance:
        header["provenance"] = provenance
    lines = [json.dumps(header, sort_keys=True)]
    for case in cases:
        lines.append(
            json.dumps(
                {
                    "case_id": case.case_id,
                    "body_text": case.body_text,
                    "summary": case.summary,
                    "reference_sentences": case.reference_sentences,
                    "placeholder_count": case.placeholder_count,
                    "french_paragraphs_removed": case.french_paragraphs_removed,
                    "trial_year": case.trial_year,
                    "token_length": case.token_length,
                },
                sort_keys=True,
            )
        )
    Path(file_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_cache(file_path: str | Path) -> list[ProcessedCase]:
    path = Path(file_path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty cache file")
    header = json.loads(lines[0])
    if header.get("format") != CACHE_FORMAT or header.get("version") != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache header {header}")
    cases = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{number}: {exc}") from exc
        cases.append(
            ProcessedCase(
                case_id=row["case_id"],
                body_text=row["body_text"],
                summary=row["summary"],
                reference_sentences=list(row["reference_sentences"]),
                placeholder_count=int(row["placeholder_count"]),
                french_paragraphs_removed=int(row["french_paragraphs_removed"]),
                trial_year=row["trial_year"],
                token_length=row["token_length"],
            )
        )
    return cases
