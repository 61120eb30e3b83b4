"""Avalanche and chi-square uniformity statistics for the PRFs."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..field import BITS, P
from .batch import as_limbs, bin_index, hash_batch, ints_to_limbs

CHI2_THRESHOLD_DF16 = 26.296  # 0.95 quantile of chi-square with 16 degrees of freedom


def _random_field(rng: np.random.Generator, bits: int = 256) -> int:
    return int.from_bytes(rng.bytes(32), "big") % P if bits >= 254 else int.from_bytes(rng.bytes(32), "big") >> (256 - bits)


def _popcount(limbs: np.ndarray) -> np.ndarray:
    return np.bitwise_count(limbs).sum(axis=1)


def avalanche_coefficient(kind: str, trials: int, seed: int = 0, arity: int = 3) -> float:
    """Mean fraction of output bits flipped by a single input-bit flip.

    Inputs are drawn below 2^253 and the flipped bit is one of the low 253, so
    both the original and the flipped input stay canonical. Output distance is
    measured over all 254 bits of the field.
    """
    rng = np.random.default_rng(seed)
    cols = [[_random_field(rng, 253) for _ in range(trials)] for _ in range(arity)]
    which = rng.integers(0, arity, size=trials)
    bit = rng.integers(0, 253, size=trials)
    flipped = [list(c) for c in cols]
    for i in range(trials):
        flipped[which[i]][i] ^= 1 << int(bit[i])
    if kind == "constant":
        return 0.0
    a = hash_batch(kind, [ints_to_limbs(c) for c in cols])
    b = hash_batch(kind, [ints_to_limbs(c) for c in flipped])
    dist = _popcount(a ^ b)
    return float(dist.mean() / BITS)


def _sha_digests(sk: int, prev: int, vocab: np.ndarray) -> np.ndarray:
    prefix = sk.to_bytes(32, "big") + int(prev).to_bytes(32, "big")
    vals = [int.from_bytes(hashlib.sha256(prefix + int(v).to_bytes(32, "big")).digest(), "big") % P
            for v in vocab]
    return ints_to_limbs(vals)


def _clear_top_bit(limbs: np.ndarray) -> np.ndarray:
    out = limbs.copy()
    out[:, 3] &= np.uint64((1 << 61) - 1)  # keep the value below 2^253
    return out


def digests(kind: str, sk: int, prev: int, vocab: np.ndarray) -> np.ndarray:
    """PRF outputs Hash(sk, prev, v) for every v in ``vocab``."""
    if kind in ("mimc", "poseidon"):
        return hash_batch(kind, [sk, prev, as_limbs(vocab)])
    if kind == "sha256":
        return _sha_digests(sk, prev, vocab)
    if kind == "biased":
        # negative control: Poseidon with the top bit cleared, so the upper
        # third of the field is never hit
        return _clear_top_bit(hash_batch("poseidon", [sk, prev, as_limbs(vocab)]))
    raise ValueError(f"unknown generator {kind!r}")


def chi_square(values: np.ndarray, bins: int) -> float:
    counts = np.bincount(bin_index(values, bins), minlength=bins)
    expected = values.shape[0] / bins
    return float(((counts - expected) ** 2 / expected).sum())


@dataclass
class ChiSquareReport:
    kind: str
    iterations: int
    mean_chi2: float
    stddev: float
    pass_rate: float
    statistics: list

    def as_dict(self) -> dict:
        return {"kind": self.kind, "iterations": self.iterations, "chi2_mean": self.mean_chi2,
                "chi2_std": self.stddev, "pass_rate": self.pass_rate}


def chi_square_uniformity(kind: str, iterations: int, bins: int = 17, vocab_size: int = 50265,
                          seed: int = 0, threshold: float = CHI2_THRESHOLD_DF16) -> ChiSquareReport:
    """Per iteration: fresh key and previous token, hash the whole vocabulary, bin, test."""
    rng = np.random.default_rng(seed)
    vocab = np.arange(vocab_size, dtype=np.int64)
    stats = []
    for _ in range(iterations):
        sk = _random_field(rng)
        prev = int(rng.integers(0, vocab_size))
        stats.append(chi_square(digests(kind, sk, prev, vocab), bins))
    arr = np.array(stats)
    return ChiSquareReport(kind, iterations, float(arr.mean()), float(arr.std()),
                           float((arr < threshold).mean()), stats)
