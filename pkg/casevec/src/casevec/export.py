"""Export one dense vector per case in the pipeline's embedding format.

Format: line 1 is the integer dimension; every following line is
``case_id<TAB>v1,v2,...`` with 9-significant-digit floats. Vectors come
from the encoder's summary of the Fact section (full body when the case
does not split), truncated to the model's 512-token input budget.
"""

from __future__ import annotations

import logging
from pathlib import Path

import torch

from .bpe import SubwordTokenizer
from .data import CachedCase
from .model import CaseEncoderModel
from .sections import split_sections

logger = logging.getLogger(__name__)


def case_embedding(
    model: CaseEncoderModel, tokenizer: SubwordTokenizer, case: CachedCase
) -> tuple[torch.Tensor, bool]:
    """(vector, used_fact_section). Falls back to the full cleaned text when
    section splitting fails."""
    spans = split_sections(case.body_text)
    text = spans.fact if spans else case.body_text
    ids = tokenizer.encode(text)
    with torch.no_grad():
        vector = model.case_vector(ids)
    return vector, spans is not None


def export_embeddings(
    model: CaseEncoderModel,
    tokenizer: SubwordTokenizer,
    cases: list[CachedCase],
    file_path: str | Path,
) -> int:
    """Write vectors for every case (sorted by id); returns the number of
    cases that fell back to full-text embedding."""
    torch.set_num_threads(1)
    model.eval()
    fallbacks = 0
    lines = [str(model.config.dim)]
    for case in sorted(cases, key=lambda c: c.case_id):
        vector, split_ok = case_embedding(model, tokenizer, case)
        if not split_ok:
            fallbacks += 1
            logger.warning("case %s did not split into sections; embedded full text", case.case_id)
        values = ",".join(f"{x:.9g}" for x in vector.tolist())
        lines.append(f"{case.case_id}\t{values}")
    Path(file_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return fallbacks
