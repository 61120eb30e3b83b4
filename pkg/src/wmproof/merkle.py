"""Merkle commitment to the secret token-to-position mapping.

Leaves are ``Hash(y, M[y], sk)``; the leaf row is padded to a power of two
with ``Hash(0, 0, sk)`` and internal nodes are two-input hashes. A path bit
of 1 means the running node is the left input at that level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange
from .hashing import prf
from .hashing.batch import as_limbs, hash_batch, limbs_to_ints


@dataclass(frozen=True)
class TokenPositionMap:
    positions: np.ndarray
    n_hat: int

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        if pos.ndim != 1 or pos.size == 0:
            raise ValueError("mapping must be a non-empty 1-D array")
        if pos.min() < 0 or pos.max() >= self.n_hat:
            raise ValueError(f"positions must lie in [0, {self.n_hat})")
        object.__setattr__(self, "positions", pos)

    @property
    def vocab_size(self) -> int:
        return int(self.positions.shape[0])

    def __getitem__(self, y):
        return int(self.positions[y])

    @classmethod
    def random(cls, vocab_size: int, n_hat: int, seed=None) -> "TokenPositionMap":
        rng = np.random.default_rng(seed)
        return cls(rng.integers(0, n_hat, size=vocab_size), n_hat)


@dataclass(frozen=True)
class MerklePath:
    leaf_index: int
    siblings: tuple
    path_bits: tuple

    @property
    def depth(self) -> int:
        return len(self.siblings)


class MerkleTree:
    def __init__(self, levels: list, vocab_size: int, kind: str):
        self.levels = levels  # levels[0] = padded leaves, levels[-1] = [root]
        self.vocab_size = vocab_size
        self.kind = kind

    @property
    def root(self) -> int:
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def leaf(self, y: int) -> int:
        return self.levels[0][y]


def leaf_hash(y: int, pos: int, sk: int, kind: str = "poseidon") -> int:
    return prf(kind, [y, pos, sk])


def node_hash(left: int, right: int, kind: str = "poseidon") -> int:
    return prf(kind, [left, right])


def build_tree(mapping: TokenPositionMap, sk: int, kind: str = "poseidon") -> MerkleTree:
    vocab = mapping.vocab_size
    size = 1
    while size < vocab:
        size *= 2
    leaves = hash_batch(kind, [as_limbs(np.arange(vocab, dtype=np.int64)),
                               as_limbs(mapping.positions), sk])
    level = limbs_to_ints(leaves) + [leaf_hash(0, 0, sk, kind)] * (size - vocab)
    levels = [level]
    while len(level) > 1:
        arr = as_limbs(level)
        level = limbs_to_ints(hash_batch(kind, [np.ascontiguousarray(arr[0::2]),
                                                np.ascontiguousarray(arr[1::2])]))
        levels.append(level)
    return MerkleTree(levels, vocab, kind)


def open_path(tree: MerkleTree, y: int) -> MerklePath:
    if not 0 <= y < tree.vocab_size:
        raise IndexOutOfRange(f"token {y} outside vocabulary of {tree.vocab_size}")
    siblings, bits = [], []
    idx = y
    for level in tree.levels[:-1]:
        siblings.append(level[idx ^ 1])
        bits.append(1 - (idx & 1))
        idx >>= 1
    return MerklePath(y, tuple(siblings), tuple(bits))


def verify_path(leaf: int, path: MerklePath, root: int, kind: str = "poseidon") -> bool:
    h = leaf
    for sib, bit in zip(path.siblings, path.path_bits):
        if bit == 1:
            h = node_hash(h, sib, kind)
        elif bit == 0:
            h = node_hash(sib, h, kind)
        else:
            return False
    return h == root


# conventional name; ``open`` itself is a builtin
open = open_path  # noqa: A001
