"""Tokenization, inverted index, and the lexical scorers (TF-IDF, BM25, QLD).

Formula conventions (natural log throughout):
  * TF-IDF: sum over query tokens of (tf/len) * ln(N / (df + 1))
  * BM25:   non-negative IDF variant ln(1 + (N - df + 0.5) / (df + 0.5)),
    saturation k1, length normalization b; each query-token occurrence
    contributes
  * QLD:    Dirichlet smoothing, sum of ln((tf + mu * p(t|C)) / (len + mu));
    query tokens unseen in the collection are dropped (their collection
    probability is zero)
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from .preprocess import ProcessedCase

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")

# Compact stopword list applied only when TokenizerConfig.remove_stopwords is on.
STOPWORDS = frozenset(
    "a an and are as at be but by for from had has have he her his i if in is "
    "it its not of on or s t that the their there they this to was were which "
    "will with".split()
)

INDEX_FORMAT = "inverted-index"
INDEX_VERSION = 1

Scorer = Literal["tfidf", "bm25", "qld"]


@dataclass(frozen=True)
class TokenizerConfig:
    """Lowercased maximal alphanumeric runs; optional stopword removal and
    token-count truncation (max_length 0 = unlimited)."""

    lowercase: bool = True
    remove_stopwords: bool = False
    max_length: int = 0


@dataclass(frozen=True)
class ScoringParams:
    bm25_k1: float = 3.0
    bm25_b: float = 1.0
    qld_mu: float = 1000.0

    def __post_init__(self) -> None:
        if self.bm25_k1 < 0:
            raise ValueError("bm25_k1 must be >= 0")
        if not 0.0 <= self.bm25_b <= 1.0:
            raise ValueError("bm25_b must be in [0, 1]")
        if self.qld_mu <= 0:
            raise ValueError("qld_mu must be > 0")


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    if config.lowercase:
        text = text.lower()
    tokens = _TOKEN_RE.findall(text)
    if config.remove_stopwords:
        tokens = [t for t in tokens if t.lower() not in STOPWORDS]
    if config.max_length > 0:
        tokens = tokens[: config.max_length]
    return tokens


@dataclass
class InvertedIndex:
    """Postings plus the collection statistics backing all three scorers."""

    config: TokenizerConfig = field(default_factory=TokenizerConfig)
    postings: dict[str, dict[str, int]] = field(default_factory=dict)
    doc_len: dict[str, int] = field(default_factory=dict)

    @property
    def n_docs(self) -> int:
        return len(self.doc_len)

    @property
    def total_tokens(self) -> int:
        return sum(self.doc_len.values())

    @property
    def avgdl(self) -> float:
        return self.total_tokens / self.n_docs if self.n_docs else 0.0

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def tf(self, term: str, doc_id: str) -> int:
        return self.postings.get(term, {}).get(doc_id, 0)

    def ctf(self, term: str) -> int:
        return sum(self.postings.get(term, {}).values())

    def p_collection(self, term: str) -> float:
        total = self.total_tokens
        return self.ctf(term) / total if total else 0.0

    def doc_ids(self) -> list[str]:
        return sorted(self.doc_len)

    def require_doc(self, doc_id: str) -> None:
        if doc_id not in self.doc_len:
            raise ValueError(f"doc_id not indexed: {doc_id}")

    def tokenize_query(self, text: str) -> list[str]:
        return tokenize(text, self.config)

    def check_invariants(self) -> None:
        for term, posting in self.postings.items():
            if not posting:
                raise ValueError(f"term with empty posting list: {term}")
            if any(tf < 1 for tf in posting.values()):
                raise ValueError(f"non-positive tf for term {term}")
        by_doc: dict[str, int] = {d: 0 for d in self.doc_len}
        for posting in self.postings.values():
            for doc_id, tf in posting.items():
                by_doc[doc_id] += tf
        for doc_id, length in self.doc_len.items():
            if by_doc[doc_id] != length:
                raise ValueError(f"token count mismatch for {doc_id}")


def build_index(
    cases: Iterable[ProcessedCase], config: TokenizerConfig = TokenizerConfig()
) -> InvertedIndex:
    """Index ``cases`` by case_id, writing token_length back to each case."""
    index = InvertedIndex(config=config)
    for case in sorted(cases, key=lambda c: c.case_id):
        if case.case_id in index.doc_len:
            raise ValueError(f"duplicate case_id: {case.case_id}")
        tokens = tokenize(case.body_text, config)
        case.token_length = len(tokens)
        index.doc_len[case.case_id] = len(tokens)
        for token in tokens:
            index.postings.setdefault(token, {})
            index.postings[token][case.case_id] = index.postings[token].get(case.case_id, 0) + 1
    return index


def tfidf_score(index: InvertedIndex, query_terms: list[str], doc_id: str) -> float:
    index.require_doc(doc_id)
    length = index.doc_len[doc_id]
    if length == 0:
        return 0.0
    score = 0.0
    for term in query_terms:
        tf = index.tf(term, doc_id)
        if tf == 0:
            continue
        score += (tf / length) * math.log(index.n_docs / (index.df(term) + 1))
    return score


def bm25_score(
    index: InvertedIndex, query_terms: list[str], doc_id: str, params: ScoringParams
) -> float:
    index.require_doc(doc_id)
    k1, b = params.bm25_k1, params.bm25_b
    length = index.doc_len[doc_id]
    avgdl = index.avgdl
    score = 0.0
    for term in query_terms:
        tf = index.tf(term, doc_id)
        if tf == 0:
            continue
        df = index.df(term)
        idf = math.log(1.0 + (index.n_docs - df + 0.5) / (df + 0.5))
        norm = k1 * (1.0 - b + b * length / avgdl) if avgdl else k1
        score += idf * tf * (k1 + 1.0) / (tf + norm)
    return score


def qld_score(
    index: InvertedIndex, query_terms: list[str], doc_id: str, params: ScoringParams
) -> float:
    index.require_doc(doc_id)
    mu = params.qld_mu
    length = index.doc_len[doc_id]
    score = 0.0
    for term in query_terms:
        p_c = index.p_collection(term)
        if p_c == 0.0:
            continue
        score += math.log((index.tf(term, doc_id) + mu * p_c) / (length + mu))
    return score


def score_document(
    index: InvertedIndex,
    query_terms: list[str],
    doc_id: str,
    scorer: Scorer,
    params: ScoringParams,
) -> float:
    if scorer == "tfidf":
        return tfidf_score(index, query_terms, doc_id)
    if scorer == "bm25":
        return bm25_score(index, query_terms, doc_id, params)
    if scorer == "qld":
        return qld_score(index, query_terms, doc_id, params)
    raise ValueError(f"unknown scorer: {scorer!r}")


def retrieve_topk(
    index: InvertedIndex,
    query: ProcessedCase,
    scorer: Scorer,
    k: int,
    params: ScoringParams,
) -> list[tuple[str, float]]:
    """Score every indexed document against ``query`` and return the top k.

    The query's own case_id is excluded; ties are broken by ascending doc_id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query_terms = index.tokenize_query(query.body_text)
    scored = [
        (doc_id, score_document(index, query_terms, doc_id, scorer, params))
        for doc_id in index.doc_ids()
        if doc_id != query.case_id
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def save_index(index: InvertedIndex, file_path: str | Path, provenance: dict | None = None) -> None:
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "provenance": provenance or {},
        "config": {
            "lowercase": index.config.lowercase,
            "remove_stopwords": index.config.remove_stopwords,
            "max_length": index.config.max_length,
        },
        "doc_len": index.doc_len,
        "postings": index.postings,
    }
    Path(file_path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_index(file_path: str | Path) -> InvertedIndex:
    path = Path(file_path)
    payload = json.loads(path.read_text(encoding="utf-8"))
    if payload.get("format") != INDEX_FORMAT or payload.get("version") != INDEX_VERSION:
        raise ValueError(f"{path}: unsupported index header")
    config = TokenizerConfig(**payload["config"])
    index = InvertedIndex(
        config=config,
        postings={t: dict(p) for t, p in payload["postings"].items()},
        doc_len=dict(payload["doc_len"]),
    )
    index.check_invariants()
    return index
