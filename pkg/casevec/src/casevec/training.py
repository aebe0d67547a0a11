"""Pre-training and fine-tuning loops with seeded shuffling and per-step logs.

Pre-training optimizes masked-fact MLM plus the two section-reconstruction
losses. Fine-tuning draws (query, positive, 15 hard negatives) groups,
with negatives mined from the top of the supplied first-stage run.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch

from .bpe import SubwordTokenizer
from .data import CachedCase, query_text
from .model import (
    CaseEncoderModel,
    CaseSections,
    FinetunePair,
    MaskingConfig,
    ModelConfig,
    contrastive_loss,
    draw_masks,
    pretrain_loss,
)
from .sections import split_sections


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 128
    heads: int = 4
    ffn_dim: int = 256
    encoder_layers: int = 2
    decoder_layers: int = 1
    max_positions: int = 512
    bpe_merges: int = 400
    masking: MaskingConfig = field(default_factory=MaskingConfig)
    pretrain_steps: int = 60
    pretrain_batch: int = 8
    pretrain_lr: float = 1e-3
    finetune_epochs: int = 2
    finetune_lr: float = 5e-4
    negatives_per_positive: int = 15
    negative_pool: int = 100
    seed: int = 13


@dataclass
class PretrainInstance:
    case_id: str
    sections: CaseSections


@dataclass
class TrainHistory:
    pretrain_total: list[float] = field(default_factory=list)
    pretrain_mlm: list[float] = field(default_factory=list)
    pretrain_reasoning: list[float] = field(default_factory=list)
    pretrain_decision: list[float] = field(default_factory=list)
    finetune: list[float] = field(default_factory=list)
    skipped_cases: int = 0

    def moving_average(self, step: int, window: int = 10) -> float:
        """Mean of the last <= window pre-training losses ending at step
        (1-based)."""
        values = self.pretrain_total[max(0, step - window) : step]
        return sum(values) / len(values)


def build_instances(
    cases: list[CachedCase], tokenizer: SubwordTokenizer
) -> tuple[list[PretrainInstance], int]:
    """Tokenize the splittable cases; returns (instances, skipped count)."""
    instances = []
    skipped = 0
    for case in sorted(cases, key=lambda c: c.case_id):
        spans = split_sections(case.body_text)
        if spans is None:
            skipped += 1
            continue
        fact = tokenizer.encode(spans.fact)
        reasoning = tokenizer.encode(spans.reasoning)
        decision = tokenizer.encode(spans.decision)
        if not (fact and reasoning and decision):
            skipped += 1
            continue
        instances.append(
            PretrainInstance(case.case_id, CaseSections(fact, reasoning, decision))
        )
    return instances, skipped


def build_finetune_pairs(
    queries: dict[str, list[int]],
    documents: dict[str, list[int]],
    judgments: dict[str, set[str]],
    rankings: dict[str, list[str]],
    config: TrainConfig,
    rng: random.Random,
) -> list[FinetunePair]:
    """One pair per (query, judged positive); negatives sampled from the
    first-stage top-``negative_pool`` excluding all judged positives."""
    pairs = []
    for qid in sorted(judgments):
        if qid not in queries:
            continue
        gold = judgments[qid]
        pool = [
            cid
            for cid in rankings.get(qid, [])[: config.negative_pool]
            if cid not in gold and cid != qid and cid in documents
        ]
        if not pool:
            continue
        for positive in sorted(gold):
            if positive not in documents:
                continue
            count = min(config.negatives_per_positive, len(pool))
            negatives = rng.sample(pool, count)
            pairs.append(
                FinetunePair(
                    query=queries[qid],
                    positive=documents[positive],
                    negatives=[documents[cid] for cid in negatives],
                )
            )
    return pairs


def pretrain(
    model: CaseEncoderModel,
    instances: list[PretrainInstance],
    config: TrainConfig,
    history: TrainHistory,
    log=None,
) -> None:
    if not instances:
        raise ValueError("no pre-training instances (section splitting failed everywhere)")
    if len(instances) < config.pretrain_batch:
        raise ValueError(
            f"corpus too small for a batch: {len(instances)} instances "
            f"< batch size {config.pretrain_batch}"
        )
    rng = random.Random(config.seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.pretrain_lr)
    model.train()
    order: list[PretrainInstance] = []
    for step in range(1, config.pretrain_steps + 1):
        if len(order) < config.pretrain_batch:
            refill = list(instances)
            rng.shuffle(refill)
            order.extend(refill)
        batch = [order.pop(0) for _ in range(config.pretrain_batch)]

        optimizer.zero_grad()
        totals = torch.zeros(4)
        loss_sum = None
        for instance in batch:
            masks = draw_masks(instance.sections, config.masking, rng)
            total, mlm, reasoning, decision = pretrain_loss(model, instance.sections, masks)
            loss_sum = total if loss_sum is None else loss_sum + total
            totals += torch.tensor(
                [total.item(), mlm.item(), reasoning.item(), decision.item()]
            )
        loss = loss_sum / len(batch)
        loss.backward()
        optimizer.step()

        means = (totals / len(batch)).tolist()
        history.pretrain_total.append(means[0])
        history.pretrain_mlm.append(means[1])
        history.pretrain_reasoning.append(means[2])
        history.pretrain_decision.append(means[3])
        if log:
            log(f"pretrain step {step}: total {means[0]:.4f} mlm {means[1]:.4f} "
                f"rea {means[2]:.4f} dec {means[3]:.4f}")


def finetune(
    model: CaseEncoderModel,
    pairs: list[FinetunePair],
    config: TrainConfig,
    history: TrainHistory,
    log=None,
    checkpoint=None,
) -> None:
    if not pairs:
        raise ValueError("no fine-tuning pairs")
    rng = random.Random(config.seed + 1)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.finetune_lr)
    model.train()
    step = 0
    for epoch in range(1, config.finetune_epochs + 1):
        order = list(pairs)
        rng.shuffle(order)
        for pair in order:
            step += 1
            optimizer.zero_grad()
            loss = contrastive_loss(model, pair)
            loss.backward()
            optimizer.step()
            history.finetune.append(float(loss.item()))
            if log:
                log(f"finetune epoch {epoch} step {step}: loss {loss.item():.4f}")
        if checkpoint:
            checkpoint(epoch)


def save_checkpoint(
    path: str | Path,
    model: CaseEncoderModel,
    tokenizer: SubwordTokenizer,
    config: TrainConfig,
) -> None:
    torch.save(
        {
            "format": "casevec-checkpoint",
            "version": 1,
            "model_state": model.state_dict(),
            "model_config": asdict(model.config),
            "tokenizer": tokenizer.to_dict(),
            "train_config": asdict(config),
        },
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[CaseEncoderModel, SubwordTokenizer]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("format") != "casevec-checkpoint":
        raise ValueError(f"{path}: not a casevec checkpoint")
    model = CaseEncoderModel(ModelConfig(**payload["model_config"]))
    model.load_state_dict(payload["model_state"])
    tokenizer = SubwordTokenizer.from_dict(payload["tokenizer"])
    return model, tokenizer


def train(
    config: TrainConfig,
    cases: list[CachedCase],
    judgments: dict[str, set[str]],
    rankings: dict[str, list[str]],
    work_dir: str | Path,
    query_cases: list[CachedCase] | None = None,
) -> tuple[CaseEncoderModel, SubwordTokenizer, TrainHistory]:
    """Full recipe: train the tokenizer, pre-train on splittable cases,
    fine-tune on judgment pairs with run-file negatives, checkpoint per
    epoch, and log losses per step to train.log."""
    work = Path(work_dir)
    work.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    torch.set_num_threads(1)

    tokenizer = SubwordTokenizer.train(
        (c.body_text for c in sorted(cases, key=lambda c: c.case_id)),
        n_merges=config.bpe_merges,
    )
    model = CaseEncoderModel(
        ModelConfig(
            vocab_size=len(tokenizer),
            dim=config.dim,
            heads=config.heads,
            ffn_dim=config.ffn_dim,
            encoder_layers=config.encoder_layers,
            decoder_layers=config.decoder_layers,
            max_positions=config.max_positions,
            pad_id=tokenizer.pad_id,
            cls_id=tokenizer.cls_id,
            mask_id=tokenizer.mask_id,
        )
    )

    history = TrainHistory()
    log_lines: list[str] = []
    log = log_lines.append

    instances, skipped = build_instances(cases, tokenizer)
    history.skipped_cases = skipped
    log(f"instances {len(instances)} skipped {skipped}")
    pretrain(model, instances, config, history, log=log)
    save_checkpoint(work / "pretrained.pt", model, tokenizer, config)

    by_id = {c.case_id: c for c in cases}
    if query_cases:
        query_sources = {c.case_id: c for c in query_cases}
    else:
        query_sources = by_id
    queries = {
        qid: tokenizer.encode(query_text(query_sources[qid]))
        for qid in sorted(judgments)
        if qid in query_sources
    }
    queries = {qid: ids for qid, ids in queries.items() if ids}
    documents = {}
    for case in cases:
        spans = split_sections(case.body_text)
        text = spans.fact if spans else case.body_text
        documents[case.case_id] = tokenizer.encode(text)

    pairs = build_finetune_pairs(
        queries, documents, judgments, rankings, config, random.Random(config.seed + 2)
    )
    log(f"finetune pairs {len(pairs)}")
    finetune(
        model,
        pairs,
        config,
        history,
        log=log,
        checkpoint=lambda epoch: save_checkpoint(
            work / f"checkpoint_epoch{epoch}.pt", model, tokenizer, config
        ),
    )
    save_checkpoint(work / "final.pt", model, tokenizer, config)
    (work / "train.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    (work / "history.json").write_text(
        json.dumps(
            {
                "pretrain_total": history.pretrain_total,
                "finetune": history.finetune,
                "skipped_cases": history.skipped_cases,
            }
        )
        + "\n",
        encoding="utf-8",
    )
    return model, tokenizer, history
