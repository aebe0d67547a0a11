"""Acceptance suite: one test per release criterion, each printing a
[PASS]/[FAIL] line (run with ``pytest tests/test_acceptance.py -v -s``).

Covered criteria:
  1. lexical-oracle-equivalence   (three corpora, 1e-9, < 1 s)
  2. metric-fixtures              (hand counts + counting oracle, exact)
  3. lambdarank-soundness         (gradient sums, finite differences,
                                   separable NDCG@5 >= 0.95, byte-identical
                                   retrain, < 30 s)
  4. postprocessing-invariants    (1,000 randomized cut-off trials, date
                                   filter, worked trace)
  5. end-to-end-determinism       (full CLI chain vs pinned goldens, < 10 s)
  6. defaults-audit               (shipped config values)
"""

import random
import subprocess
import sys
import time

import numpy as np
import pytest

from legalir.corpus import JudgmentSet
from legalir.evaluate import micro_prf
from legalir.lexical import ScoringParams, bm25_score, build_index, qld_score, tfidf_score
from legalir.ltr import TrainParams, compute_lambdas, fit, save_model
from legalir.postprocess import CutoffParams, dynamic_cutoff, filter_by_trial_date

from conftest import FIXTURES, REPO_ROOT, make_case
from oracles import brute_bm25, brute_micro_prf, brute_qld, brute_tfidf, lambdarank_surrogate
from test_ltr import _synthetic_groups

MINI_CONFIG = FIXTURES / "mini_corpus" / "config.ini"
GOLDEN = FIXTURES / "golden"


class _Criterion:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[{status}] {self.name} ({elapsed:.2f}s)")
        return False


def test_criterion_1_lexical_oracle_equivalence():
    with _Criterion("lexical-oracle-equivalence") as crit:
        rng = random.Random(77)
        params = ScoringParams(bm25_k1=3.0, bm25_b=1.0)
        vocab = [f"t{i}" for i in range(15)]
        checked = 0
        for corpus_number in range(3):
            cases = []
            for i in range(rng.randint(6, 20)):
                tokens = [rng.choice(vocab) for _ in range(rng.randint(1, 40))]
                cases.append(make_case(f"d{i:02d}", " ".join(tokens)))
            index = build_index(cases)
            docs = {c.case_id: c.body_text.split() for c in cases}
            queries = [[rng.choice(vocab) for _ in range(rng.randint(1, 8))] for _ in range(6)]
            for query in queries:
                for doc_id in docs:
                    assert abs(
                        tfidf_score(index, query, doc_id) - brute_tfidf(docs, query, doc_id)
                    ) < 1e-9
                    assert abs(
                        bm25_score(index, query, doc_id, params)
                        - brute_bm25(docs, query, doc_id, 3.0, 1.0)
                    ) < 1e-9
                    assert abs(
                        qld_score(index, query, doc_id, params)
                        - brute_qld(docs, query, doc_id, 1000.0)
                    ) < 1e-9
                    checked += 3
        assert checked > 3 * 3 * 6 * 5
        assert time.perf_counter() - crit.start < 1.0, "lexical oracle runtime budget"


def test_criterion_2_metric_fixtures():
    with _Criterion("metric-fixtures"):
        # the 2-query hand example
        answers = {"q1": ["d1", "d2"], "q2": ["d3"]}
        gold = JudgmentSet(noticed={"q1": {"d1"}, "q2": {"d3", "d4"}})
        report = micro_prf(answers, gold)
        assert (report.tp, report.fp, report.fn) == (2, 1, 1)
        assert report.precision == 2 / 3 and report.recall == 2 / 3 and report.f1 == 2 / 3

        # 10-query randomized fixture vs the exhaustive counting oracle
        rng = random.Random(2023)
        gold_map = {
            f"q{i}": {f"d{rng.randint(0, 25)}" for _ in range(rng.randint(1, 6))}
            for i in range(10)
        }
        answer_map = {
            f"q{i}": sorted({f"d{rng.randint(0, 25)}" for _ in range(rng.randint(0, 8))})
            for i in range(10)
        }
        report = micro_prf(answer_map, JudgmentSet(noticed=gold_map))
        tp, fp, fn, precision, recall, f1 = brute_micro_prf(answer_map, gold_map)
        assert (report.tp, report.fp, report.fn) == (tp, fp, fn)
        assert (report.precision, report.recall, report.f1) == (precision, recall, f1)

        # micro must differ from macro on an asymmetric fixture
        answers = {"q1": [f"x{i}" for i in range(9)] + ["a"], "q2": ["b"]}
        gold = JudgmentSet(noticed={"q1": {"a"}, "q2": {"b"}})
        report = micro_prf(answers, gold)
        macro_f1 = (2 * (1 / 10) * 1 / ((1 / 10) + 1) + 1.0) / 2
        assert abs(report.f1 - macro_f1) > 0.05


def test_criterion_3_lambdarank_soundness(tmp_path):
    with _Criterion("lambdarank-soundness") as crit:
        # finite-difference agreement on random groups
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 10))
            labels = rng.integers(0, 2, size=n)
            scores = rng.normal(size=n)
            grads, _ = compute_lambdas(scores, labels, 5)
            assert abs(grads.sum()) < 1e-8
            h = 1e-6
            for m in range(n):
                up, down = scores.copy(), scores.copy()
                up[m] += h
                down[m] -= h
                numeric = (
                    lambdarank_surrogate(up, labels, 5, scores)
                    - lambdarank_surrogate(down, labels, 5, scores)
                ) / (2 * h)
                if abs(numeric) > 1e-12:
                    assert grads[m] == pytest.approx(numeric, rel=1e-5)

        # separable dataset: 2,000 rows over 50 queries
        seeded = random.Random(99)
        train = _synthetic_groups(seeded, 40, 40)
        valid = _synthetic_groups(seeded, 10, 40)
        assert len(train) + len(valid) == 2000
        model = fit(train, valid, TrainParams(max_trees=200))
        assert all(r.max_abs_gradient_sum < 1e-8 for r in model.train_log)
        best = model.train_log[model.best_iteration - 1]
        assert best.valid_ndcg >= 0.95
        assert model.best_iteration <= 200

        # byte-identical retrain
        files = []
        for attempt in range(2):
            seeded = random.Random(5)
            t = _synthetic_groups(seeded, 10, 20)
            v = _synthetic_groups(seeded, 4, 20)
            m = fit(t, v, TrainParams(max_trees=30, early_stopping_rounds=10))
            path = tmp_path / f"retrain_{attempt}.txt"
            save_model(m, path)
            files.append(path.read_bytes())
        assert files[0] == files[1]
        assert time.perf_counter() - crit.start < 30.0, "lambdarank runtime budget"


def test_criterion_4_postprocessing_invariants():
    with _Criterion("postprocessing-invariants"):
        rng = random.Random(424242)
        for _ in range(1000):
            n = rng.randint(1, 40)
            scored = sorted(
                ((f"c{i:02d}", rng.uniform(-50, 50)) for i in range(n)),
                key=lambda t: (-t[1], t[0]),
            )
            l = rng.randint(0, 6)
            h = rng.randint(max(l, 1), 10)
            p = rng.uniform(0.05, 1.0)
            result = dynamic_cutoff(scored, CutoffParams(p=p, l=l, h=h))
            k = len(result)
            assert min(l, n) <= k <= min(h, n)
            shift = max(0.0, -min(s for _, s in scored))
            top = scored[0][1] + shift
            by_id = dict(scored)
            selected = sum(1 for _, s in scored if s + shift > p * top)
            for cid in result[: min(k, selected)]:
                assert by_id[cid] + shift > p * top

        # date filter never emits a known-year candidate later than the query
        for _ in range(300):
            n = rng.randint(1, 20)
            scored = [(f"c{i}", float(n - i)) for i in range(n)]
            years = {
                f"c{i}": rng.choice([None, rng.randint(1990, 2020)]) for i in range(n)
            }
            query_year = rng.choice([None, rng.randint(1990, 2020)])
            kept = filter_by_trial_date(scored, query_year, years)
            if query_year is not None:
                assert all(
                    years[cid] is None or years[cid] <= query_year for cid, _ in kept
                )
            else:
                assert kept == scored

        # the worked trace
        scored = [(f"c{i}", s) for i, s in enumerate([10.0, 9.0, 8.5, 8.4, 5.0, 1.0])]
        assert dynamic_cutoff(scored, CutoffParams(p=0.84, l=4, h=6)) == [
            "c0", "c1", "c2", "c3",
        ]


def _run_chain(stage_dir) -> None:
    for command in (
        "preprocess", "index", "retrieve", "features", "train", "rank", "postprocess", "evaluate",
    ):
        result = subprocess.run(
            [
                sys.executable, "-m", "legalir.cli", command,
                "--config", str(MINI_CONFIG), "--stage-dir", str(stage_dir),
            ],
            capture_output=True,
            text=True,
            cwd=REPO_ROOT,
        )
        assert result.returncode == 0, f"{command} failed: {result.stderr}"


def test_criterion_5_end_to_end_determinism(tmp_path):
    with _Criterion("end-to-end-determinism") as crit:
        stages = [tmp_path / "run_a", tmp_path / "run_b"]
        for stage in stages:
            started = time.perf_counter()
            _run_chain(stage)
            assert time.perf_counter() - started < 10.0, "pipeline runtime budget"
        golden_run = (GOLDEN / "rank.run").read_bytes()
        golden_answers = (GOLDEN / "answers.json").read_bytes()
        for stage in stages:
            assert (stage / "rank.run").read_bytes() == golden_run
            assert (stage / "answers.json").read_bytes() == golden_answers
        assert (stages[0] / "eval.json").read_bytes() == (stages[1] / "eval.json").read_bytes()
        assert (GOLDEN / "eval.json").read_bytes() == (stages[0] / "eval.json").read_bytes()


def test_criterion_6_defaults_audit():
    with _Criterion("defaults-audit"):
        from legalir.config import load_config

        for source in (REPO_ROOT / "configs" / "default.ini", MINI_CONFIG):
            cfg = load_config(source)
            assert cfg.scoring.bm25_k1 == 3.0
            assert cfg.scoring.bm25_b == 1.0
            assert cfg.train.learning_rate == 0.01
            assert cfg.train.num_leaves == 20
            assert cfg.train.early_stopping_rounds == 100
            assert cfg.cutoff.p == 0.84
            assert cfg.cutoff.l == 4
            assert cfg.cutoff.h == 6
            assert cfg.neg_ratio == 15
        assert ScoringParams() == ScoringParams(bm25_k1=3.0, bm25_b=1.0, qld_mu=1000.0)
        assert TrainParams().learning_rate == 0.01
        assert CutoffParams() == CutoffParams(p=0.84, l=4, h=6)
