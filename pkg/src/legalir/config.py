"""Pipeline configuration: one INI-style file drives every subcommand.

Paths are resolved relative to the config file's directory. A single seed
governs the query split, negative down-sampling, and tree training.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .lexical import ScoringParams, TokenizerConfig
from .ltr import TrainParams
from .postprocess import CutoffParams
from .preprocess import DEFAULT_MAX_YEAR, DEFAULT_MIN_YEAR


@dataclass
class PipelineConfig:
    queries_dir: Path = Path("queries")
    candidates_dir: Path = Path("candidates")
    judgments: Path = Path("judgments.json")
    dense_scores: Path = Path("embeddings.tsv")
    work_dir: Path = Path("work")

    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    scoring: ScoringParams = field(default_factory=ScoringParams)
    train: TrainParams = field(default_factory=TrainParams)
    cutoff: CutoffParams = field(default_factory=CutoffParams)

    seed: int = 7
    validation_count: int = 0
    pool_size: int = 100
    neg_ratio: int = 15
    run_tag: str = "legalir"
    min_year: int = DEFAULT_MIN_YEAR
    max_year: int = DEFAULT_MAX_YEAR

    def provenance(self) -> dict:
        """Flat key=value view echoed into stage-file headers."""
        return {
            "tokenizer.lowercase": self.tokenizer.lowercase,
            "tokenizer.remove_stopwords": self.tokenizer.remove_stopwords,
            "tokenizer.max_length": self.tokenizer.max_length,
            "scoring.bm25_k1": self.scoring.bm25_k1,
            "scoring.bm25_b": self.scoring.bm25_b,
            "scoring.qld_mu": self.scoring.qld_mu,
            "train.learning_rate": self.train.learning_rate,
            "train.num_leaves": self.train.num_leaves,
            "train.early_stopping_rounds": self.train.early_stopping_rounds,
            "train.max_trees": self.train.max_trees,
            "train.ndcg_k": self.train.ndcg_k,
            "cutoff.p": self.cutoff.p,
            "cutoff.l": self.cutoff.l,
            "cutoff.h": self.cutoff.h,
            "pipeline.seed": self.seed,
            "pipeline.validation_count": self.validation_count,
            "pipeline.pool_size": self.pool_size,
            "pipeline.neg_ratio": self.neg_ratio,
        }


def load_config(file_path: str | Path) -> PipelineConfig:
    path = Path(file_path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")
    base = path.parent

    def get(section: str, key: str, cast, default):
        if parser.has_option(section, key):
            if cast is bool:
                return parser.getboolean(section, key)
            return cast(parser.get(section, key))
        return default

    def get_path(key: str, default: str) -> Path:
        raw = get("paths", key, str, default)
        p = Path(raw)
        return p if p.is_absolute() else (base / p)

    defaults = PipelineConfig()
    return PipelineConfig(
        queries_dir=get_path("queries_dir", "queries"),
        candidates_dir=get_path("candidates_dir", "candidates"),
        judgments=get_path("judgments", "judgments.json"),
        dense_scores=get_path("dense_scores", "embeddings.tsv"),
        work_dir=get_path("work_dir", "work"),
        tokenizer=TokenizerConfig(
            lowercase=get("tokenizer", "lowercase", bool, True),
            remove_stopwords=get("tokenizer", "remove_stopwords", bool, False),
            max_length=get("tokenizer", "max_length", int, 0),
        ),
        scoring=ScoringParams(
            bm25_k1=get("scoring", "bm25_k1", float, 3.0),
            bm25_b=get("scoring", "bm25_b", float, 1.0),
            qld_mu=get("scoring", "qld_mu", float, 1000.0),
        ),
        train=TrainParams(
            learning_rate=get("train", "learning_rate", float, 0.01),
            num_leaves=get("train", "num_leaves", int, 20),
            early_stopping_rounds=get("train", "early_stopping_rounds", int, 100),
            max_trees=get("train", "max_trees", int, 1000),
            ndcg_k=get("train", "ndcg_k", int, 5),
            min_samples_per_leaf=get("train", "min_samples_per_leaf", int, 1),
            seed=get("pipeline", "seed", int, defaults.seed),
        ),
        cutoff=CutoffParams(
            p=get("cutoff", "p", float, 0.84),
            l=get("cutoff", "l", int, 4),
            h=get("cutoff", "h", int, 6),
        ),
        seed=get("pipeline", "seed", int, defaults.seed),
        validation_count=get("pipeline", "validation_count", int, 0),
        pool_size=get("pipeline", "pool_size", int, 100),
        neg_ratio=get("pipeline", "neg_ratio", int, 15),
        run_tag=get("pipeline", "run_tag", str, "legalir"),
        min_year=get("pipeline", "min_year", int, DEFAULT_MIN_YEAR),
        max_year=get("pipeline", "max_year", int, DEFAULT_MAX_YEAR),
    )
