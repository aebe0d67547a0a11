"""Acceptance suite for the dense-encoder component (run with -v -s).

Criteria:
  1. toy-training          pre-training loss (10-step moving average) at
                           step 50 is below step 1 on the 100-case toy
                           corpus; checkpoints per phase; < 5 min CPU
  2. masking-rates         masked fraction within +-2 tokens of 0.15/0.45
  3. contrastive-closed-forms   ln 2 on the symmetric case, ln(n+1) on
                           all-equal scores, within 1e-6
  4. gradient-checks       both losses match finite differences at 1e-4
                           relative
  5. separable-p-at-1      fine-tuning on separable pairs reaches P@1 = 1.0
                           on held-out queries
  6. cross-component-contract   exported embeddings parse in the pipeline's
                           feature extractor; feature 8 equals the trainer's
                           own score within 1e-5 on 50 pairs
"""

import math
import random
import time

import pytest
import torch

from casevec.data import read_case_cache, read_judgments, read_run_rankings
from casevec.export import case_embedding, export_embeddings
from casevec.model import (
    CaseEncoderModel,
    FinetunePair,
    MaskingConfig,
    ModelConfig,
    contrastive_loss,
    draw_masks,
    pretrain_loss,
)
from casevec.training import TrainConfig, TrainHistory, finetune, load_checkpoint, train

from conftest import FIXTURES, tiny_model
from test_model import _check_gradients, sections


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


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """One real training run on the toy corpus, shared by criteria 1 and 6."""
    work = tmp_path_factory.mktemp("toy_train")
    cases = read_case_cache(FIXTURES / "cases.cache.jsonl")
    queries = read_case_cache(FIXTURES / "queries.cache.jsonl")
    judgments = read_judgments(FIXTURES / "judgments.json")
    rankings = read_run_rankings(FIXTURES / "bm25.run")
    config = TrainConfig(pretrain_steps=50, finetune_epochs=1, seed=13)
    started = time.perf_counter()
    model, tokenizer, history = train(
        config, cases, judgments, rankings, work, query_cases=queries
    )
    elapsed = time.perf_counter() - started
    return model, tokenizer, history, cases, work, elapsed


def test_criterion_1_toy_training(trained):
    with _Criterion("toy-training"):
        model, tokenizer, history, cases, work, elapsed = trained
        assert len(history.pretrain_total) == 50
        assert history.moving_average(50) < history.moving_average(1)
        assert history.skipped_cases == 0
        assert (work / "pretrained.pt").exists()
        assert (work / "checkpoint_epoch1.pt").exists()
        assert (work / "final.pt").exists()
        assert (work / "train.log").read_text().count("pretrain step") == 50
        assert elapsed < 300.0, "toy training runtime budget (5 min CPU)"


def test_criterion_2_masking_rates():
    with _Criterion("masking-rates"):
        rng = random.Random(31)
        config = MaskingConfig(encoder_mask_rate=0.15, decoder_mask_rate=0.45)
        for _ in range(200):
            lengths = (rng.randint(1, 120), rng.randint(1, 120), rng.randint(1, 120))
            s = sections(rng, lengths)
            masks = draw_masks(s, config, rng)
            assert abs(len(masks.fact) - 0.15 * lengths[0]) <= 2
            assert abs(len(masks.reasoning) - 0.45 * lengths[1]) <= 2
            assert abs(len(masks.decision) - 0.45 * lengths[2]) <= 2


def test_criterion_3_contrastive_closed_forms():
    with _Criterion("contrastive-closed-forms"):
        model = tiny_model(seed=2)
        doc = [5, 6, 7, 8, 9]
        pair = FinetunePair(query=[10, 11], positive=list(doc), negatives=[list(doc)])
        assert contrastive_loss(model, pair).item() == pytest.approx(math.log(2), abs=1e-6)
        for n in (2, 5, 15):
            pair = FinetunePair(query=[10, 11], positive=list(doc), negatives=[list(doc)] * n)
            assert contrastive_loss(model, pair).item() == pytest.approx(
                math.log(n + 1), abs=1e-6
            )


def test_criterion_4_gradient_checks():
    with _Criterion("gradient-checks"):
        rng = random.Random(41)
        model = tiny_model(seed=4).double()
        s = sections(rng)
        masks = draw_masks(s, MaskingConfig(), rng)
        _check_gradients(model, lambda: pretrain_loss(model, s, masks)[0], rng,
                         n_probes=8, rel_tol=1e-4)

        model2 = tiny_model(seed=6).double()
        pair = FinetunePair(
            query=[4, 5, 6, 7],
            positive=[8, 9, 10],
            negatives=[[11, 12, 13], [14, 15], [16, 17, 18]],
        )
        _check_gradients(model2, lambda: contrastive_loss(model2, pair), rng,
                         n_probes=8, rel_tol=1e-4)


def test_criterion_5_separable_p_at_1():
    with _Criterion("separable-p-at-1"):
        rng = random.Random(11)
        torch.manual_seed(11)
        torch.set_num_threads(1)
        n_topics = 5

        def topic_tokens(topic: int, n: int) -> list[int]:
            base = 4 + topic * 4
            return [rng.randrange(base, base + 4) for _ in range(n)]

        model = CaseEncoderModel(
            ModelConfig(vocab_size=4 + 4 * n_topics, dim=32, heads=2, ffn_dim=64,
                        encoder_layers=2, decoder_layers=1, max_positions=32)
        )
        pairs = []
        for _ in range(40):
            topic = rng.randrange(n_topics)
            others = [o for o in range(n_topics) if o != topic]
            pairs.append(
                FinetunePair(
                    query=topic_tokens(topic, 10),
                    positive=topic_tokens(topic, 12),
                    negatives=[topic_tokens(rng.choice(others), 12) for _ in range(4)],
                )
            )
        finetune(model, pairs, TrainConfig(finetune_epochs=6, finetune_lr=1e-3, seed=3),
                 TrainHistory())

        model.eval()
        candidates = [topic_tokens(t, 14) for t in range(n_topics)]
        correct = 0
        trials = 20
        for _ in range(trials):
            topic = rng.randrange(n_topics)
            with torch.no_grad():
                qv = model.case_vector(topic_tokens(topic, 9))
                scores = [float(qv @ model.case_vector(c)) for c in candidates]
            correct += int(max(range(n_topics), key=lambda i: scores[i]) == topic)
        assert correct == trials  # P@1 = 1.0 on held-out queries


def test_criterion_6_cross_component_contract(trained, tmp_path):
    with _Criterion("cross-component-contract"):
        from legalir.features import load_dense_source

        model, tokenizer, _, cases, work, _ = trained
        reloaded, reloaded_tokenizer = load_checkpoint(work / "final.pt")
        reloaded.eval()
        path = tmp_path / "embeddings.tsv"
        export_embeddings(reloaded, reloaded_tokenizer, cases, path)

        table = load_dense_source(path)
        assert table.dimension == reloaded.config.dim
        assert len(table.vectors) == len(cases)

        by_id = {c.case_id: c for c in cases}
        ids = sorted(by_id)
        pairs = [(ids[i % len(ids)], ids[(i * 7 + 3) % len(ids)]) for i in range(50)]
        for qid, cid in pairs:
            with torch.no_grad():
                va, _ = case_embedding(reloaded, reloaded_tokenizer, by_id[qid])
                vb, _ = case_embedding(reloaded, reloaded_tokenizer, by_id[cid])
                own = float(va.double() @ vb.double())
            assert table.score(qid, cid) == pytest.approx(own, abs=1e-5)
