import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from legalir.preprocess import ProcessedCase

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


def make_case(case_id: str, text: str, placeholder_count: int = 0) -> ProcessedCase:
    return ProcessedCase(case_id=case_id, body_text=text, placeholder_count=placeholder_count)


@pytest.fixture
def corpus_c3() -> list[ProcessedCase]:
    """The tiny hand-counted corpus: d1="a b a", d2="b c", d3="a c c d"."""
    return [
        make_case("d1", "a b a"),
        make_case("d2", "b c"),
        make_case("d3", "a c c d"),
    ]


@pytest.fixture
def mini_corpus_dir() -> Path:
    return FIXTURES / "mini_corpus"


@pytest.fixture
def golden_dir() -> Path:
    return FIXTURES / "golden"
