"""Minimal deterministic BPE subword tokenizer trained on the toy corpus.

Words are lowercased alphanumeric runs; each word ends with the boundary
symbol ``</w>`` so merges never cross words. Ties in pair frequency break
lexicographically, making training reproducible.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable

_WORD_RE = re.compile(r"[a-z0-9]+")

PAD, UNK, CLS, MASK = "[PAD]", "[UNK]", "[CLS]", "[MASK]"
SPECIALS = (PAD, UNK, CLS, MASK)
END = "</w>"


class SubwordTokenizer:
    def __init__(self, vocab: dict[str, int], merges: list[tuple[str, str]]):
        self.vocab = vocab
        self.merges = merges
        self.ranks = {pair: i for i, pair in enumerate(merges)}
        self._word_cache: dict[str, list[int]] = {}

    @property
    def pad_id(self) -> int:
        return self.vocab[PAD]

    @property
    def unk_id(self) -> int:
        return self.vocab[UNK]

    @property
    def cls_id(self) -> int:
        return self.vocab[CLS]

    @property
    def mask_id(self) -> int:
        return self.vocab[MASK]

    def __len__(self) -> int:
        return len(self.vocab)

    @classmethod
    def train(
        cls, texts: Iterable[str], n_merges: int = 400, min_pair_freq: int = 2
    ) -> "SubwordTokenizer":
        word_freq = Counter()
        for text in texts:
            word_freq.update(_WORD_RE.findall(text.lower()))

        segmentations = {word: [*word, END] for word in word_freq}
        merges: list[tuple[str, str]] = []
        for _ in range(n_merges):
            pair_freq = Counter()
            for word, symbols in segmentations.items():
                freq = word_freq[word]
                for a, b in zip(symbols, symbols[1:]):
                    pair_freq[(a, b)] += freq
            if not pair_freq:
                break
            best_count = max(pair_freq.values())
            if best_count < min_pair_freq:
                break
            best = min(pair for pair, count in pair_freq.items() if count == best_count)
            merges.append(best)
            merged = "".join(best)
            for word, symbols in segmentations.items():
                segmentations[word] = _apply_merge(symbols, best, merged)

        symbols = set()
        for word in word_freq:
            symbols.update([*word, END])
        symbols.update("".join(pair) for pair in merges)
        vocab = {special: i for i, special in enumerate(SPECIALS)}
        for symbol in sorted(symbols):
            vocab[symbol] = len(vocab)
        return cls(vocab=vocab, merges=merges)

    def _encode_word(self, word: str) -> list[int]:
        if word in self._word_cache:
            return self._word_cache[word]
        symbols = [*word, END]
        while len(symbols) > 1:
            candidates = [
                (self.ranks[(a, b)], i)
                for i, (a, b) in enumerate(zip(symbols, symbols[1:]))
                if (a, b) in self.ranks
            ]
            if not candidates:
                break
            rank, i = min(candidates)
            symbols = symbols[:i] + ["".join(symbols[i : i + 2])] + symbols[i + 2 :]
        ids = [self.vocab.get(s, self.unk_id) for s in symbols]
        self._word_cache[word] = ids
        return ids

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        for word in _WORD_RE.findall(text.lower()):
            ids.extend(self._encode_word(word))
        return ids

    def to_dict(self) -> dict:
        return {"vocab": self.vocab, "merges": [list(m) for m in self.merges]}

    @classmethod
    def from_dict(cls, data: dict) -> "SubwordTokenizer":
        return cls(
            vocab=dict(data["vocab"]),
            merges=[tuple(m) for m in data["merges"]],
        )


def _apply_merge(symbols: list[str], pair: tuple[str, str], merged: str) -> list[str]:
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out
