"""The 8-feature vector per (query, candidate) pair and grouped LTR datasets.

Features: query/candidate token lengths, query/candidate placeholder counts,
BM25, QLD, TF-IDF, and a dense inner-product score supplied by an external
embedding table (or a precomputed score table). Missing dense coverage is an
error, never a silent zero.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .corpus import JudgmentSet
from .lexical import InvertedIndex, ScoringParams, bm25_score, qld_score, retrieve_topk, tfidf_score
from .preprocess import ProcessedCase

logger = logging.getLogger(__name__)

FEATURE_NAMES = (
    "query_length",
    "candidate_length",
    "query_ref_num",
    "doc_ref_num",
    "bm25",
    "qld",
    "tfidf",
    "dense",
)
N_FEATURES = len(FEATURE_NAMES)

DatasetMode = Literal["train", "eval", "infer"]


@dataclass(frozen=True)
class FeatureVector:
    query_length: float
    candidate_length: float
    query_ref_num: float
    doc_ref_num: float
    bm25: float
    qld: float
    tfidf: float
    dense: float

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.query_length,
                self.candidate_length,
                self.query_ref_num,
                self.doc_ref_num,
                self.bm25,
                self.qld,
                self.tfidf,
                self.dense,
            ],
            dtype=np.float64,
        )

    def __post_init__(self) -> None:
        values = self.to_array()
        if not np.all(np.isfinite(values)):
            raise ValueError(f"non-finite feature value: {self}")


def inner_product(u: Sequence[float], v: Sequence[float]) -> float:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return float(np.dot(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)))


class EmbeddingTable:
    """case_id -> fixed-dimension vector; dense score = inner product."""

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int):
        self.dimension = dimension
        self.vectors = vectors
        for cid, vec in vectors.items():
            if vec.shape != (dimension,):
                raise ValueError(f"embedding for {cid} has shape {vec.shape}, want ({dimension},)")

    def __contains__(self, case_id: str) -> bool:
        return case_id in self.vectors

    def vector(self, case_id: str) -> np.ndarray:
        if case_id not in self.vectors:
            raise KeyError(f"no embedding for case: {case_id}")
        return self.vectors[case_id]

    def score(self, query_id: str, case_id: str) -> float:
        return inner_product(self.vector(query_id), self.vector(case_id))


class ScoreTable:
    """Precomputed (query_id, case_id) -> dense score."""

    def __init__(self, scores: dict[tuple[str, str], float]):
        self.scores = scores

    def score(self, query_id: str, case_id: str) -> float:
        key = (query_id, case_id)
        if key not in self.scores:
            raise KeyError(f"no dense score for pair: {query_id} / {case_id}")
        return self.scores[key]


DenseScoreSource = EmbeddingTable | ScoreTable


def load_dense_source(file_path: str | Path) -> DenseScoreSource:
    """Parse a dense-score file.

    Embedding table: first line is the integer dimension d, then lines of
    ``case_id<TAB>v1,v2,...,vd``. Score table: lines of
    ``query_id<TAB>case_id<TAB>score`` (no header).
    """
    path = Path(file_path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty dense-score file")

    try:
        dimension = int(lines[0])
        is_embedding = True
    except ValueError:
        is_embedding = False

    if is_embedding:
        vectors: dict[str, np.ndarray] = {}
        for number, line in enumerate(lines[1:], start=2):
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{number}: expected 'case_id<TAB>values'")
            case_id, values = parts
            vec = np.array([float(x) for x in values.split(",")], dtype=np.float64)
            if vec.shape != (dimension,):
                raise ValueError(f"{path}:{number}: expected {dimension} values, got {vec.shape[0]}")
            vectors[case_id] = vec
        return EmbeddingTable(vectors, dimension)

    scores: dict[tuple[str, str], float] = {}
    for number, line in enumerate(lines, start=1):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{number}: expected 'query_id<TAB>case_id<TAB>score'")
        scores[(parts[0], parts[1])] = float(parts[2])
    return ScoreTable(scores)


def write_embeddings(table: EmbeddingTable, file_path: str | Path) -> None:
    lines = [str(table.dimension)]
    for cid in sorted(table.vectors):
        values = ",".join(f"{x:.9g}" for x in table.vectors[cid])
        lines.append(f"{cid}\t{values}")
    Path(file_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def extract_features(
    query: ProcessedCase,
    cand: ProcessedCase,
    index: InvertedIndex,
    params: ScoringParams,
    dense: DenseScoreSource,
) -> FeatureVector:
    """Compute the 8 features for one (query, candidate) pair.

    The candidate must be indexed; lexical features reuse the index scorers
    exactly, so they are bitwise equal to calling those scorers directly.
    """
    index.require_doc(cand.case_id)
    query_terms = index.tokenize_query(query.body_text)
    if query.token_length is None:
        query.token_length = len(query_terms)
    return FeatureVector(
        query_length=float(len(query_terms)),
        candidate_length=float(index.doc_len[cand.case_id]),
        query_ref_num=float(query.placeholder_count),
        doc_ref_num=float(cand.placeholder_count),
        bm25=bm25_score(index, query_terms, cand.case_id, params),
        qld=qld_score(index, query_terms, cand.case_id, params),
        tfidf=tfidf_score(index, query_terms, cand.case_id),
        dense=dense.score(query.case_id, cand.case_id),
    )


@dataclass
class LtrRow:
    query_id: str
    case_id: str
    features: FeatureVector
    label: int
    forced: bool = False


@dataclass
class LtrDataset:
    """Rows grouped into per-query contiguous blocks."""

    rows: list[LtrRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def group_ids(self) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if not seen or seen[-1] != row.query_id:
                seen.append(row.query_id)
        if len(seen) != len(set(seen)):
            raise ValueError("query groups are not contiguous")
        return seen

    def group_slices(self) -> list[tuple[str, slice]]:
        slices = []
        start = 0
        for i in range(1, len(self.rows) + 1):
            if i == len(self.rows) or self.rows[i].query_id != self.rows[start].query_id:
                slices.append((self.rows[start].query_id, slice(start, i)))
                start = i
        return slices

    def feature_matrix(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, N_FEATURES))
        return np.stack([row.features.to_array() for row in self.rows])

    def labels(self) -> np.ndarray:
        return np.array([row.label for row in self.rows], dtype=np.int64)


def build_ltr_dataset(
    queries: Sequence[ProcessedCase],
    candidates: Sequence[ProcessedCase],
    judgments: JudgmentSet | None,
    index: InvertedIndex,
    params: ScoringParams,
    dense: DenseScoreSource,
    pool_size: int,
    mode: DatasetMode = "eval",
    neg_ratio: int = 15,
    seed: int = 0,
) -> LtrDataset:
    """Assemble per-query groups from the BM25 top-``pool_size`` pool.

    ``eval`` keeps the full pool plus force-included judged positives that
    BM25 missed; ``train`` additionally down-samples negatives to
    ``neg_ratio`` per positive with a seeded generator; ``infer`` uses the
    raw pool with all-zero labels (judgments may be None). Judged positives
    absent from the index are skipped with a warning.
    """
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    if mode not in ("train", "eval", "infer"):
        raise ValueError(f"unknown dataset mode: {mode!r}")
    if mode != "infer" and judgments is None:
        raise ValueError(f"mode {mode!r} requires judgments")

    by_id = {c.case_id: c for c in candidates}
    rows: list[LtrRow] = []
    for query in sorted(queries, key=lambda q: q.case_id):
        pool = retrieve_topk(index, query, "bm25", pool_size, params)
        pool_ids = [cid for cid, _ in pool]

        gold: set[str] = set()
        if mode != "infer":
            if query.case_id not in judgments:
                raise ValueError(f"query missing from judgments: {query.case_id}")
            gold = judgments.gold(query.case_id)

        group: list[LtrRow] = []
        for cid in pool_ids:
            label = 1 if cid in gold else 0
            group.append(
                LtrRow(query.case_id, cid, extract_features(query, by_id[cid], index, params, dense), label)
            )
        for cid in sorted(gold - set(pool_ids)):
            if cid not in by_id or cid not in index.doc_len:
                logger.warning("judged positive %s for %s is not indexed; skipped", cid, query.case_id)
                continue
            group.append(
                LtrRow(query.case_id, cid, extract_features(query, by_id[cid], index, params, dense), 1, forced=True)
            )

        if mode == "train":
            n_pos = sum(r.label for r in group)
            n_neg = len(group) - n_pos
            if n_pos == 0:
                logger.warning("query %s has no judged positives; keeping all-zero group", query.case_id)
            elif n_neg > neg_ratio * n_pos:
                rng = random.Random(f"{seed}:{query.case_id}")
                chosen = set(rng.sample(range(n_neg), neg_ratio * n_pos))
                kept, ordinal = [], 0
                for row in group:
                    if row.label == 1:
                        kept.append(row)
                    else:
                        if ordinal in chosen:
                            kept.append(row)
                        ordinal += 1
                group = kept
        rows.extend(group)
    return LtrDataset(rows=rows)


def write_dataset(
    dataset: LtrDataset, file_path: str | Path, provenance: dict | None = None
) -> None:
    """Tab-separated rows: query_id, case_id, label, f1..f8 (6 fractional digits)."""
    lines = []
    if provenance:
        for key in sorted(provenance):
            lines.append(f"# {key}={provenance[key]}")
    for row in dataset.rows:
        values = "\t".join(f"{x:.6f}" for x in row.features.to_array())
        lines.append(f"{row.query_id}\t{row.case_id}\t{row.label}\t{values}")
    Path(file_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dataset(file_path: str | Path) -> LtrDataset:
    path = Path(file_path)
    rows = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3 + N_FEATURES:
            raise ValueError(f"{path}:{number}: expected {3 + N_FEATURES} columns, got {len(parts)}")
        try:
            label = int(parts[2])
            values = [float(x) for x in parts[3:]]
        except ValueError as exc:
            raise ValueError(f"{path}:{number}: {exc}") from exc
        rows.append(LtrRow(parts[0], parts[1], FeatureVector(*values), label))
    return LtrDataset(rows=rows)
