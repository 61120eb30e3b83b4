"""Small statement builders shared by circuit, folding and acceptance tests."""
import random

import numpy as np

from wmproof.circuits import build_circuit, openings_for, statement_for
from wmproof.merkle import TokenPositionMap, build_tree
from wmproof.watermark import detect, keygen, kgw_params, segment_params, synthid_params


def small_params(scheme, kind="poseidon", vocab=64, **kw):
    if scheme == "kgw":
        return kgw_params(vocab_size=vocab, hash_kind=kind, **kw)
    if scheme == "synthid":
        return synthid_params(vocab_size=vocab, hash_kind=kind, **{"psi": 2, "xi": 4, **kw})
    return segment_params(vocab_size=vocab, hash_kind=kind, **{"n_hat": 3, "m_hat": 2, **kw})


def random_case(params, n_scored, seed):
    """(key, tokens, mapping, tree) with uniformly random text."""
    rng = random.Random(seed)
    key = keygen(rng)
    tokens = [rng.randrange(params.vocab_size) for _ in range(params.psi + n_scored)]
    mapping = tree = None
    if params.scheme == "segment":
        mapping = TokenPositionMap.random(params.vocab_size, params.n_hat, seed=seed)
        tree = build_tree(mapping, key.sk)
    return key, tokens, mapping, tree


def honest_bundle(params, n_scored, seed, mode="bitwise"):
    key, tokens, mapping, tree = random_case(params, n_scored, seed)
    report = detect(tokens, params, key.sk, mapping)
    stmt = statement_for(params, tokens, key.sk, report, tree.root if tree else None)
    bundle = build_circuit(stmt, mode=mode, depth=tree.depth if tree else None)
    openings = openings_for(tokens, tree, mapping) if tree else None
    return bundle, key, openings, report


def segment_text(mapping, per_position, seed):
    """Text whose scored tokens split evenly: ``per_position`` contexts per position."""
    rng = random.Random(seed)
    pos = np.asarray(mapping.positions)
    by = {j: [int(t) for t in np.flatnonzero(pos == j)] for j in range(mapping.n_hat)}
    order = [j for j in range(mapping.n_hat) for _ in range(per_position)]
    rng.shuffle(order)
    return [rng.choice(by[j]) for j in order] + [rng.randrange(mapping.vocab_size)]
