import random
from pathlib import Path

import pytest
import torch

from casevec.model import CaseEncoderModel, ModelConfig

PKG_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = PKG_ROOT / "fixtures"


def tiny_config(vocab_size: int = 30, **overrides) -> ModelConfig:
    defaults = dict(
        vocab_size=vocab_size,
        dim=16,
        heads=2,
        ffn_dim=32,
        encoder_layers=2,
        decoder_layers=1,
        max_positions=64,
    )
    defaults.update(overrides)
    return ModelConfig(**defaults)


def tiny_model(seed: int = 0, **overrides) -> CaseEncoderModel:
    torch.manual_seed(seed)
    return CaseEncoderModel(tiny_config(**overrides))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(7)
