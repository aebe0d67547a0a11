"""Split a case into Fact / Reasoning / Decision spans by heading patterns.

The heading vocabularies are a pinned approximation of common case-law
section titles. A case only qualifies for pre-training when all three
sections are found, non-empty, and in document order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

FACT_HEADINGS = ("FACTS", "FACT", "BACKGROUND", "STATEMENT OF FACTS")
REASONING_HEADINGS = ("ANALYSIS", "DISCUSSION", "REASONS", "REASONING")
DECISION_HEADINGS = ("DISPOSITION", "CONCLUSION", "DECISION", "ORDER", "JUDGMENT")

_ALL_HEADINGS = FACT_HEADINGS + REASONING_HEADINGS + DECISION_HEADINGS
_HEADING_RE = re.compile(
    r"^[ \t]*(" + "|".join(re.escape(h) for h in _ALL_HEADINGS) + r")[ \t]*:?[ \t]*$",
    re.MULTILINE,
)


@dataclass(frozen=True)
class SectionText:
    """Raw text spans, each starting after its heading line."""

    fact: str
    reasoning: str
    decision: str


def split_sections(raw_text: str) -> SectionText | None:
    """Assign contiguous spans to Fact/Reasoning/Decision, or None when any
    section is missing, empty, or out of order."""
    matches = [(m.start(), m.end(), m.group(1)) for m in _HEADING_RE.finditer(raw_text)]
    if not matches:
        return None

    spans: dict[str, tuple[int, str]] = {}
    for i, (start, end, title) in enumerate(matches):
        body_start = end
        body_end = matches[i + 1][0] if i + 1 < len(matches) else len(raw_text)
        body = raw_text[body_start:body_end].strip()
        if title in FACT_HEADINGS:
            kind = "fact"
        elif title in REASONING_HEADINGS:
            kind = "reasoning"
        else:
            kind = "decision"
        if kind not in spans:  # first heading of each kind wins
            spans[kind] = (start, body)

    if set(spans) != {"fact", "reasoning", "decision"}:
        return None
    offsets = [spans["fact"][0], spans["reasoning"][0], spans["decision"][0]]
    if not (offsets[0] < offsets[1] < offsets[2]):
        return None
    if not all(spans[k][1] for k in ("fact", "reasoning", "decision")):
        return None
    return SectionText(
        fact=spans["fact"][1],
        reasoning=spans["reasoning"][1],
        decision=spans["decision"][1],
    )
