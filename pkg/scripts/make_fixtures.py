#!/usr/bin/env python3
"""Regenerate the bundled synthetic mini corpus (30 distinct cases).

Deterministic by construction: rerunning produces byte-identical fixtures.
Layout:
    fixtures/mini_corpus/queries/        10 query cases
    fixtures/mini_corpus/candidates/     20 candidates + 2 query-case copies
    fixtures/mini_corpus/judgments.json  gold noticed-case mapping
    fixtures/mini_corpus/embeddings.tsv  stub dense vectors (dim 8)
    fixtures/mini_corpus/config.ini      pipeline config wired to the above

The two query copies exercise the query-case answer filter; candidate
000004 postdates its topic's queries (date filter), 000015 carries no
4-digit year (unknown-year path), and 000020 is majority-French.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
MINI = ROOT / "fixtures" / "mini_corpus"

TOPICS = {
    "admiralty": ["vessel", "cargo", "lien", "maritime", "freight", "charterparty", "salvage", "mortgage"],
    "immigration": ["refugee", "asylum", "deportation", "visa", "residency", "sponsorship", "removal", "protection"],
    "taxation": ["income", "deduction", "assessment", "taxpayer", "exemption", "audit", "penalty", "revenue"],
    "patents": ["invention", "infringement", "claims", "novelty", "obviousness", "licensee", "royalty", "disclosure"],
    "fisheries": ["salmon", "herring", "quota", "fishery", "catch", "season", "allocation", "conservation"],
}
TOPIC_LIST = list(TOPICS)

SURNAMES = [
    "Arsenault", "Beaulieu", "Chen", "Dhaliwal", "Esposito", "Fontaine", "Grewal",
    "Haddad", "Ivanova", "Johnson", "Kowalski", "Laurier", "MacDonald", "Nguyen",
    "Okafor", "Pelletier",
]
CITIES = ["Ottawa", "Toronto", "Vancouver", "Halifax", "Montreal", "Winnipeg"]

FRENCH_SENTENCES = [
    "Le tribunal conclut que la demande est rejetée et que les motifs sont communiqués aux parties.",
    "La cour estime que les arguments du demandeur ne sont pas fondés en droit et les rejette.",
    "Les dépens sont adjugés à la partie intimée selon le tarif établi par les règles de la cour.",
    "Le juge estime que la preuve présentée par le demandeur est insuffisante pour établir ses prétentions.",
]

FILLER = [
    "The standard of review for questions of law is correctness.",
    "Procedural fairness requires adequate notice to the parties.",
    "The tribunal weighed the documentary record with care.",
    "Counsel for the respondent conceded this point at the hearing.",
    "The burden rests on the applicant throughout these proceedings.",
    "Relief under this provision is discretionary in nature.",
]


def sentence(rng: random.Random, terms: list[str]) -> str:
    a, b = rng.sample(terms, 2)
    patterns = [
        f"The {a} dispute turned on the treatment of the {b} in the governing scheme.",
        f"The evidence established that the {a} was connected to the {b} at the relevant time.",
        f"The panel considered whether the {a} regime displaces the {b} analysis.",
        f"Nothing in the record supports extending the {a} doctrine to cover the {b}.",
        f"The parties disagreed about how the {a} provisions interact with the {b} framework.",
    ]
    return rng.choice(patterns)


def reference_sentence(rng: random.Random, terms: list[str]) -> str:
    a, b = rng.sample(terms, 2)
    placeholder = rng.choice(["FRAGMENT_SUPPRESSED", "REFERENCE_SUPPRESSED", "CITATION_SUPPRESSED"])
    patterns = [
        f"As held in {placeholder}, the {a} analysis governs the {b} question.",
        f"This court applied {placeholder} when weighing the {a} against the {b}.",
        f"See {placeholder} for the principle that a {a} outranks a registered {b}.",
        f"The respondent relies on {placeholder} concerning the {a} and the {b}.",
    ]
    return rng.choice(patterns)


def preamble(rng: random.Random, year: int | None) -> str:
    name1, name2 = rng.sample(SURNAMES, 2)
    city = rng.choice(CITIES)
    cite = f"[{year}] F.C. {rng.randint(100, 999)}" if year else "unreported"
    return (
        f"{name1} v. {name2}, {cite}\n"
        f"Federal Court of Canada, {city}.\n"
        f"Heard before the presiding judge.\n"
    )


def candidate_text(rng, topic, year, with_summary, n_placeholders, french_paras, yearless=False):
    terms = TOPICS[topic]
    parts = [preamble(rng, None if yearless else year)]
    opening_year = "" if yearless else f" arising from events in {year - rng.randint(1, 3)}"
    parts.append(f"[1] This application concerns the {terms[0]} and the {terms[1]}{opening_year}.\n")
    if with_summary:
        lines = [sentence(rng, terms) for _ in range(2)]
        parts.append("Summary:\n" + "\n".join(lines) + "\n")
    body = []
    for i in range(rng.randint(4, 7)):
        para = [sentence(rng, terms), rng.choice(FILLER), sentence(rng, terms)]
        if n_placeholders > 0 and i < n_placeholders:
            para.insert(1, reference_sentence(rng, terms))
        body.append(f"[{i + 2}] " + " ".join(para))
    for position, fr in zip((1, 3), range(french_paras)):
        body.insert(min(position, len(body)), " ".join(rng.sample(FRENCH_SENTENCES, 2)))
    parts.append("\n\n".join(body) + "\n")
    closing_year = "" if yearless else f" Decided in {year}."
    parts.append(f"CONCLUSION:\nThe application is {rng.choice(['dismissed', 'granted'])} with costs.{closing_year}\n")
    return "\n".join(parts)


def query_text(rng, topic, year, n_refs, french_paras=0):
    terms = TOPICS[topic]
    parts = [preamble(rng, year)]
    parts.append(f"[1] The applicant seeks review of a {terms[2]} decision rendered in {year}.\n")
    body = []
    for i in range(n_refs):
        body.append(f"[{i + 2}] " + " ".join([reference_sentence(rng, terms), rng.choice(FILLER)]))
    for i in range(2):
        body.append(f"[{n_refs + i + 2}] " + " ".join([sentence(rng, terms), rng.choice(FILLER)]))
    for fr in range(french_paras):
        body.insert(1, " ".join(rng.sample(FRENCH_SENTENCES, 2)))
    parts.append("\n\n".join(body) + "\n")
    parts.append(f"DISPOSITION:\nJudgment reserved. Decided in {year}.\n")
    return "\n".join(parts)


CANDIDATES = {
    # case_id: (topic, year, summary, placeholders, french paragraphs)
    "000001": ("admiralty", 1996, True, 0, 0),
    "000002": ("admiralty", 1999, False, 2, 0),
    "000003": ("admiralty", 2001, False, 0, 0),
    "000004": ("admiralty", 2012, False, 0, 0),   # postdates the admiralty queries
    "000005": ("immigration", 1997, True, 0, 0),
    "000006": ("immigration", 2000, False, 0, 1),
    "000007": ("immigration", 2002, False, 1, 0),
    "000008": ("immigration", 2003, False, 0, 0),
    "000009": ("taxation", 1999, True, 0, 0),
    "000010": ("taxation", 2004, False, 0, 0),
    "000011": ("taxation", 1995, False, 0, 0),
    "000012": ("taxation", 2006, False, 0, 0),
    "000013": ("patents", 1998, True, 3, 0),
    "000014": ("patents", 2000, False, 0, 0),
    "000015": ("patents", None, False, 0, 0),     # no detectable year
    "000016": ("patents", 2005, False, 0, 0),
    "000017": ("fisheries", 1994, True, 0, 0),
    "000018": ("fisheries", 2001, False, 0, 2),
    "000019": ("fisheries", 2003, True, 1, 0),
    "000020": ("fisheries", 2002, False, 0, 3),   # majority French
}

QUERIES = {
    # case_id: (topic, year, reference sentences, french paragraphs)
    "000101": ("admiralty", 2004, 3, 0),
    "000102": ("immigration", 2008, 2, 0),
    "000103": ("taxation", 2005, 3, 0),
    "000104": ("patents", 2007, 2, 0),
    "000105": ("fisheries", 2006, 2, 1),
    "000106": ("admiralty", 2010, 2, 0),
    "000107": ("immigration", 2011, 4, 0),
    "000108": ("taxation", 2009, 2, 0),
    "000109": ("patents", 2013, 3, 0),
    "000110": ("fisheries", 2012, 0, 0),          # no reference sentences: fallback path
}

JUDGMENTS = {
    "000101": ["000001", "000002"],
    "000102": ["000005", "000006"],
    "000103": ["000009", "000010"],
    "000104": ["000013", "000014"],
    "000105": ["000017", "000018"],
    "000106": ["000003"],
    "000107": ["000007", "000008"],
    "000108": ["000011"],
    "000109": ["000015", "000016"],
    "000110": ["000019", "000020"],
}

QUERY_COPIES_IN_POOL = ["000101", "000102"]

CONFIG_INI = """\
# Pipeline config for the bundled mini corpus (paths relative to this file).

[paths]
queries_dir = queries
candidates_dir = candidates
judgments = judgments.json
dense_scores = embeddings.tsv
work_dir = ../../work

[tokenizer]
lowercase = true
remove_stopwords = false
max_length = 0

[scoring]
bm25_k1 = 3.0
bm25_b = 1.0
qld_mu = 1000.0

[train]
learning_rate = 0.01
num_leaves = 20
early_stopping_rounds = 100
max_trees = 1000
ndcg_k = 5
min_samples_per_leaf = 1

[cutoff]
p = 0.84
l = 4
h = 6

[pipeline]
seed = 7
validation_count = 3
pool_size = 100
neg_ratio = 15
run_tag = legalir
min_year = 1850
max_year = 2025
"""


def make_embeddings(rng: random.Random, dimension: int = 8) -> dict[str, list[float]]:
    vectors = {}
    cases = [(cid, spec[0]) for cid, spec in CANDIDATES.items()]
    cases += [(cid, spec[0]) for cid, spec in QUERIES.items()]
    for cid, topic in sorted(cases):
        basis = TOPIC_LIST.index(topic)
        vec = [0.3 * rng.gauss(0, 1) for _ in range(dimension)]
        vec[basis] += 2.0
        vectors[cid] = vec
    return vectors


def main() -> None:
    rng = random.Random(20230115)
    queries_dir = MINI / "queries"
    candidates_dir = MINI / "candidates"
    queries_dir.mkdir(parents=True, exist_ok=True)
    candidates_dir.mkdir(parents=True, exist_ok=True)

    query_files = {}
    for cid, (topic, year, n_refs, french) in QUERIES.items():
        text = query_text(rng, topic, year, n_refs, french)
        (queries_dir / f"{cid}.txt").write_text(text, encoding="utf-8")
        query_files[cid] = text

    for cid, (topic, year, summary, placeholders, french) in CANDIDATES.items():
        text = candidate_text(
            rng, topic, year or 2000, summary, placeholders, french, yearless=year is None
        )
        (candidates_dir / f"{cid}.txt").write_text(text, encoding="utf-8")

    for cid in QUERY_COPIES_IN_POOL:
        (candidates_dir / f"{cid}.txt").write_text(query_files[cid], encoding="utf-8")

    payload = {f"{q}.txt": [f"{c}.txt" for c in cs] for q, cs in sorted(JUDGMENTS.items())}
    (MINI / "judgments.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    vectors = make_embeddings(random.Random(20230116))
    lines = ["8"]
    for cid, vec in sorted(vectors.items()):
        lines.append(cid + "\t" + ",".join(f"{x:.9g}" for x in vec))
    (MINI / "embeddings.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    (MINI / "config.ini").write_text(CONFIG_INI, encoding="utf-8")
    print(f"wrote mini corpus under {MINI}")


if __name__ == "__main__":
    main()
