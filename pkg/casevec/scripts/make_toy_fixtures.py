#!/usr/bin/env python3
"""Regenerate the 100-case toy corpus and its derived pipeline artifacts.

Writes the raw corpus, then runs the retrieval pipeline's CLI (preprocess,
index, retrieve) to produce the artifacts casevec consumes:

    fixtures/toy_corpus/cases/       100 sectioned cases (20 with citations)
    fixtures/toy_corpus/queries/     the 20 query cases (copies)
    fixtures/toy_corpus/judgments.json
    fixtures/cases.cache.jsonl       candidate-role processed cache
    fixtures/queries.cache.jsonl     query-role processed cache
    fixtures/bm25.run                BM25 top-100 per query (negative mining)
    fixtures/judgments.json

Requires the legalir package to be installed (the pipeline under ../..).
"""

from __future__ import annotations

import json
import random
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).resolve().parent
PKG = HERE.parent
FIXTURES = PKG / "fixtures"
TOY = FIXTURES / "toy_corpus"

TOPICS = {
    "carriage": ["shipment", "container", "demurrage", "consignee", "manifest", "stevedore", "wharf", "bailment"],
    "customs": ["tariff", "valuation", "importer", "classification", "duty", "broker", "declaration", "seizure"],
    "banking": ["guarantee", "mortgagor", "foreclosure", "surety", "indenture", "collateral", "default", "redemption"],
    "labour": ["grievance", "arbitrator", "bargaining", "dismissal", "reinstatement", "union", "seniority", "layoff"],
    "energy": ["pipeline", "easement", "royalty", "wellhead", "abandonment", "operator", "tract", "severance"],
    "aviation": ["airworthiness", "fuselage", "tarmac", "charter", "logbook", "crew", "maintenance", "airframe"],
    "forestry": ["timber", "stumpage", "harvest", "tenure", "silviculture", "cutblock", "scaling", "reforestation"],
    "telecom": ["spectrum", "subscriber", "interconnection", "switchgear", "billing", "bandwidth", "tower", "roaming"],
    "securities": ["prospectus", "insider", "underwriter", "misrepresentation", "registrant", "takeover", "escrow", "solicitation"],
    "privacy": ["complainant", "safeguard", "breach", "encryption", "retention", "anonymization", "oversight", "custodian"],
}
TOPIC_LIST = list(TOPICS)

FILLER = [
    "The parties filed extensive written submissions.",
    "The record before the court was voluminous.",
    "Both sides rely on the governing statutory scheme.",
    "The standard of review was not in dispute.",
    "Costs follow the event in the ordinary way.",
]

VERDICTS = ["granted", "dismissed", "allowed in part", "remitted for redetermination"]


def sentence(rng: random.Random, terms: list[str]) -> str:
    a, b = rng.sample(terms, 2)
    patterns = [
        f"The {a} was central to the dispute over the {b}.",
        f"The evidence showed the {a} preceded any issue with the {b}.",
        f"Neither the {a} nor the {b} was documented contemporaneously.",
        f"The witnesses disagreed about the handling of the {a} and the {b}.",
        f"The {a} arrangement incorporated the standard {b} terms.",
    ]
    return rng.choice(patterns)


def citation_sentence(rng: random.Random, terms: list[str]) -> str:
    a, b = rng.sample(terms, 2)
    placeholder = rng.choice(["FRAGMENT_SUPPRESSED", "REFERENCE_SUPPRESSED", "CITATION_SUPPRESSED"])
    return rng.choice(
        [
            f"As established in {placeholder}, the {a} governs the {b}.",
            f"The court in {placeholder} treated the {a} as part of the {b}.",
            f"See {placeholder} on the relationship between the {a} and the {b}.",
        ]
    )


def paragraphs(rng: random.Random, terms: list[str], count: int, citations: int = 0) -> str:
    blocks = []
    for i in range(count):
        lines = [sentence(rng, terms), rng.choice(FILLER), sentence(rng, terms)]
        if i < citations:
            lines.insert(1, citation_sentence(rng, terms))
        blocks.append(" ".join(lines))
    return "\n\n".join(blocks)


def case_text(rng: random.Random, topic: str, is_query: bool) -> str:
    terms = TOPICS[topic]
    header = f"In the matter of a {topic} proceeding\nDocket {rng.randint(100, 999)}\n"
    opening = "[1] This matter came before the court for determination.\n"
    facts = paragraphs(rng, terms, rng.randint(2, 4), citations=rng.randint(2, 3) if is_query else 0)
    analysis = paragraphs(rng, terms, rng.randint(2, 3))
    disposition = f"The application is {rng.choice(VERDICTS)}. {sentence(rng, terms)}"
    return (
        f"{header}\n{opening}\nFACTS\n\n{facts}\n\nANALYSIS\n\n{analysis}\n\n"
        f"DISPOSITION\n\n{disposition}\n"
    )


CONFIG_INI = """\
[paths]
queries_dir = queries
candidates_dir = cases
judgments = judgments.json
dense_scores = unused.tsv
work_dir = work

[pipeline]
pool_size = 100
run_tag = toy
"""


def main() -> int:
    rng = random.Random(20230301)
    cases_dir = TOY / "cases"
    queries_dir = TOY / "queries"
    if TOY.exists():
        shutil.rmtree(TOY)
    cases_dir.mkdir(parents=True)
    queries_dir.mkdir(parents=True)

    texts: dict[str, str] = {}
    queries: list[str] = []
    for i in range(100):
        topic = TOPIC_LIST[i % 10]
        case_id = f"{i:03d}"
        is_query = i < 20  # the first two cases of every topic carry citations
        text = case_text(rng, topic, is_query)
        texts[case_id] = text
        (cases_dir / f"{case_id}.txt").write_text(text, encoding="utf-8")
        if is_query:
            queries.append(case_id)

    judgments = {}
    for qid in queries:
        topic_index = int(qid) % 10
        same_topic = [
            cid for cid in texts if int(cid) % 10 == topic_index and cid != qid
        ]
        count = rng.randint(2, 4)
        judgments[qid] = sorted(rng.sample(same_topic, count))
        (queries_dir / f"{qid}.txt").write_text(texts[qid], encoding="utf-8")

    payload = {f"{q}.txt": [f"{c}.txt" for c in cs] for q, cs in sorted(judgments.items())}
    (TOY / "judgments.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    (TOY / "config.ini").write_text(CONFIG_INI, encoding="utf-8")

    with tempfile.TemporaryDirectory() as tmp:
        for command in (
            ["preprocess"],
            ["index"],
            ["retrieve", "--scorer", "bm25", "--k", "100"],
        ):
            result = subprocess.run(
                [sys.executable, "-m", "legalir.cli", *command,
                 "--config", str(TOY / "config.ini"), "--stage-dir", tmp],
                capture_output=True, text=True,
            )
            if result.returncode != 0:
                print(result.stdout + result.stderr, file=sys.stderr)
                return result.returncode
        stage = Path(tmp)
        shutil.copy(stage / "candidates.cache.jsonl", FIXTURES / "cases.cache.jsonl")
        shutil.copy(stage / "queries.cache.jsonl", FIXTURES / "queries.cache.jsonl")
        shutil.copy(stage / "retrieve_bm25.run", FIXTURES / "bm25.run")
    shutil.copy(TOY / "judgments.json", FIXTURES / "judgments.json")
    print(f"toy corpus: 100 cases, {len(queries)} queries, artifacts in {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
