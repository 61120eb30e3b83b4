"""Logits sources standing in for a language model."""
from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np


class LogitsSource(Protocol):
    vocab_size: int

    def next_logits(self, context: Sequence[int]) -> np.ndarray: ...


class MockLM:
    """Deterministic pseudorandom logits keyed on (seed, last ``order`` tokens).

    ``temperature`` scales the spread: small values give peaked, low-entropy
    distributions, large values approach uniform.
    """

    def __init__(self, vocab_size: int, seed: int = 0, temperature: float = 1.0, order: int = 2):
        if vocab_size < 2:
            raise ValueError("vocabulary needs at least two tokens")
        self.vocab_size = vocab_size
        self.seed = seed
        self.temperature = temperature
        self.order = order

    def next_logits(self, context):
        tail = [int(t) for t in context[-self.order:]] if self.order else []
        rng = np.random.default_rng([self.seed, len(tail), *tail])
        return rng.standard_normal(self.vocab_size) / self.temperature


class UniformLM:
    """Every token equally likely."""

    def __init__(self, vocab_size: int):
        self.vocab_size = vocab_size

    def next_logits(self, context):
        return np.zeros(self.vocab_size)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def draw(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF draw with a single uniform variate."""
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(idx, probs.shape[0] - 1)
