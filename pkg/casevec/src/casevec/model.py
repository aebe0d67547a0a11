"""Encoder/decoder model and losses.

A deep bidirectional encoder reads the (masked) Fact section; its
first-position output is the case vector h. Two single-layer decoders
reconstruct aggressively masked Reasoning and Decision text from [h,
masked section], forcing h to absorb the information those sections
depend on. Fine-tuning scores query/candidate pairs by the inner product
of their case vectors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import torch
from torch import nn


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    dim: int = 128
    heads: int = 4
    ffn_dim: int = 256
    encoder_layers: int = 2
    decoder_layers: int = 1
    max_positions: int = 512
    pad_id: int = 0
    cls_id: int = 2
    mask_id: int = 3

    def __post_init__(self) -> None:
        if self.encoder_layers <= self.decoder_layers:
            raise ValueError("encoder must be deeper than the decoders")
        if self.dim % self.heads:
            raise ValueError("dim must be divisible by heads")


@dataclass(frozen=True)
class MaskingConfig:
    encoder_mask_rate: float = 0.15
    decoder_mask_rate: float = 0.45

    # permissible ranges: gentle masking of facts, aggressive of the rest
    def __post_init__(self) -> None:
        if not 0.0 <= self.encoder_mask_rate <= 0.30:
            raise ValueError("encoder_mask_rate must be in [0, 0.30]")
        if not 0.30 <= self.decoder_mask_rate <= 0.60:
            raise ValueError("decoder_mask_rate must be in [0.30, 0.60]")


@dataclass
class CaseSections:
    """Token id sequences for the three structural sections."""

    fact: list[int]
    reasoning: list[int]
    decision: list[int]

    def __post_init__(self) -> None:
        if not (self.fact and self.reasoning and self.decision):
            raise ValueError("all three sections must be non-empty")


@dataclass
class MaskSet:
    """Masked position indices into each section's token list."""

    fact: list[int] = field(default_factory=list)
    reasoning: list[int] = field(default_factory=list)
    decision: list[int] = field(default_factory=list)


def mask_count(rate: float, length: int) -> int:
    return int(round(rate * length))


def draw_masks(sections: CaseSections, config: MaskingConfig, rng: random.Random) -> MaskSet:
    """Sample mask positions per section at the configured rates."""

    def sample(tokens: list[int], rate: float) -> list[int]:
        count = mask_count(rate, len(tokens))
        return sorted(rng.sample(range(len(tokens)), count)) if count else []

    return MaskSet(
        fact=sample(sections.fact, config.encoder_mask_rate),
        reasoning=sample(sections.reasoning, config.decoder_mask_rate),
        decision=sample(sections.decision, config.decoder_mask_rate),
    )


@dataclass
class FinetunePair:
    """One query with its positive and n >= 1 hard negatives (token ids)."""

    query: list[int]
    positive: list[int]
    negatives: list[list[int]]

    def __post_init__(self) -> None:
        if len(self.negatives) < 1:
            raise ValueError("at least one negative is required")


def _make_layer(config: ModelConfig) -> nn.TransformerEncoderLayer:
    return nn.TransformerEncoderLayer(
        d_model=config.dim,
        nhead=config.heads,
        dim_feedforward=config.ffn_dim,
        dropout=0.0,
        activation="gelu",
        batch_first=True,
    )


class CaseEncoderModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.token_embedding = nn.Embedding(config.vocab_size, config.dim)
        self.position_embedding = nn.Embedding(config.max_positions, config.dim)
        self.encoder = nn.ModuleList(_make_layer(config) for _ in range(config.encoder_layers))
        self.reasoning_decoder = nn.ModuleList(
            _make_layer(config) for _ in range(config.decoder_layers)
        )
        self.decision_decoder = nn.ModuleList(
            _make_layer(config) for _ in range(config.decoder_layers)
        )
        # output heads tie to the embedding table; each head owns a bias
        self.encoder_bias = nn.Parameter(torch.zeros(config.vocab_size))
        self.reasoning_bias = nn.Parameter(torch.zeros(config.vocab_size))
        self.decision_bias = nn.Parameter(torch.zeros(config.vocab_size))

    def _positions(self, length: int) -> torch.Tensor:
        return self.position_embedding(
            torch.arange(length, device=self.token_embedding.weight.device)
        )

    def _run(self, layers: nn.ModuleList, states: torch.Tensor) -> torch.Tensor:
        for layer in layers:
            states = layer(states)
        return states

    def _logits(self, states: torch.Tensor, bias: torch.Tensor) -> torch.Tensor:
        return states @ self.token_embedding.weight.T + bias

    def _clip(self, ids: list[int]) -> list[int]:
        return ids[: self.config.max_positions - 1]

    def encode_fact(self, ids: list[int], mask_positions: list[int] | None = None) -> torch.Tensor:
        """Run [CLS] + fact tokens through the encoder; returns (L+1, dim)."""
        ids = self._clip(ids)
        tokens = [self.config.cls_id] + list(ids)
        if mask_positions:
            for position in mask_positions:
                if position + 1 < len(tokens):
                    tokens[position + 1] = self.config.mask_id
        x = self.token_embedding(torch.tensor(tokens, dtype=torch.long))
        x = x + self._positions(len(tokens))
        return self._run(self.encoder, x.unsqueeze(0)).squeeze(0)

    def case_vector(self, ids: list[int]) -> torch.Tensor:
        """h: the encoder's first-position summary of the (unmasked) fact."""
        return self.encode_fact(ids)[0]

    def _decode(
        self,
        layers: nn.ModuleList,
        bias: torch.Tensor,
        h: torch.Tensor,
        ids: list[int],
        mask_positions: list[int],
    ) -> torch.Tensor:
        """Mean NLL of the original tokens at masked positions, conditioning
        on [h, masked section]."""
        ids = self._clip(ids)
        mask_positions = [p for p in mask_positions if p < len(ids)]
        if not mask_positions:
            return h.sum() * 0.0
        masked = list(ids)
        for position in mask_positions:
            masked[position] = self.config.mask_id
        x = self.token_embedding(torch.tensor(masked, dtype=torch.long))
        x = torch.cat([h.unsqueeze(0), x], dim=0)
        x = x + self._positions(len(masked) + 1)
        states = self._run(layers, x.unsqueeze(0)).squeeze(0)
        logits = self._logits(states[1:], bias)  # positions 1.. align with tokens
        targets = torch.tensor([ids[p] for p in mask_positions], dtype=torch.long)
        log_probs = torch.log_softmax(logits[mask_positions], dim=-1)
        return -log_probs[torch.arange(len(mask_positions)), targets].mean()


def pretrain_loss(
    model: CaseEncoderModel, sections: CaseSections, masks: MaskSet
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """(total, masked-fact MLM, reasoning reconstruction, decision
    reconstruction); each term is a mean NLL over its masked positions and
    contributes 0 when nothing is masked."""
    config = model.config
    fact = model._clip(sections.fact)
    fact_masks = [p for p in masks.fact if p < len(fact)]
    hidden = model.encode_fact(fact, fact_masks)
    h = hidden[0]

    if fact_masks:
        logits = model._logits(hidden[1:], model.encoder_bias)
        targets = torch.tensor([fact[p] for p in fact_masks], dtype=torch.long)
        log_probs = torch.log_softmax(logits[fact_masks], dim=-1)
        mlm = -log_probs[torch.arange(len(fact_masks)), targets].mean()
    else:
        mlm = h.sum() * 0.0

    reasoning = model._decode(
        model.reasoning_decoder, model.reasoning_bias, h, sections.reasoning, masks.reasoning
    )
    decision = model._decode(
        model.decision_decoder, model.decision_bias, h, sections.decision, masks.decision
    )
    total = mlm + reasoning + decision
    return total, mlm, reasoning, decision


def score_pair(model: CaseEncoderModel, query_ids: list[int], doc_ids: list[int]) -> torch.Tensor:
    return model.case_vector(query_ids) @ model.case_vector(doc_ids)


def contrastive_loss(model: CaseEncoderModel, pair: FinetunePair) -> torch.Tensor:
    """-log softmax of the positive score against the negatives
    (logsumexp is max-subtracted, so large scores cannot overflow)."""
    query = model.case_vector(pair.query)
    positive = model.case_vector(pair.positive) @ query
    scores = [positive]
    for negative in pair.negatives:
        scores.append(model.case_vector(negative) @ query)
    stacked = torch.stack(scores)
    return torch.logsumexp(stacked, dim=0) - stacked[0]


def encoder_parameter_count(model: CaseEncoderModel) -> int:
    total = sum(p.numel() for p in model.token_embedding.parameters())
    total += sum(p.numel() for p in model.position_embedding.parameters())
    total += sum(p.numel() for p in model.encoder.parameters())
    total += model.encoder_bias.numel()
    return total


def decoder_parameter_count(model: CaseEncoderModel, which: str) -> int:
    layers = model.reasoning_decoder if which == "reasoning" else model.decision_decoder
    bias = model.reasoning_bias if which == "reasoning" else model.decision_bias
    return sum(p.numel() for p in layers.parameters()) + bias.numel()
