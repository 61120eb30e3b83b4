"""Chunk-size trade-off table.

Row counts are measured by building the step circuit at each chunk size. The
total cost uses a simple model of a folding prover: each of the ``n_f`` steps
pays for one step instance, and compressing the final running instance costs
about two more. ``verifier_overhead`` adds a fixed per-step row count (the
in-circuit fold verifier of a real recursive backend); it defaults to 0 so the
table reflects only what this package builds.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

from .ivc import build_step_circuit, ivc_prove, ivc_verify
from ..watermark.params import WatermarkParams
from ..hashing import poseidon_hash

FINAL_FACTOR = 2


@dataclass
class SweepRow:
    n_t: int
    n_f: int
    rows_step: int
    rows_final: int
    rows_fold: int
    cost: int
    prove_s: float | None = None
    verify_s: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def divisors(n: int) -> list:
    return [d for d in range(1, n + 1) if n % d == 0]


def sweep_nt(params: WatermarkParams, tokens, candidates=None, sk: int | None = None,
             s_h: int | None = None, verifier_overhead: int = 0, timed: bool = False) -> list:
    """One SweepRow per candidate chunk size (divisors of the scored length by default)."""
    n_scored = len(tokens) - params.psi
    cands = sorted(candidates) if candidates is not None else divisors(n_scored)
    out = []
    for n_t in cands:
        n_f = -(-n_scored // n_t)
        rows = build_step_circuit(params, n_t).cs.num_rows
        per_step = rows + verifier_overhead
        row = SweepRow(n_t, n_f, rows, rows, n_f * per_step, (n_f + FINAL_FACTOR) * per_step)
        if timed:
            if sk is None or s_h is None:
                raise ValueError("timed sweeps need sk and s_h")
            t0 = time.perf_counter()
            proof = ivc_prove(params, tokens, sk, s_h, n_t)
            row.prove_s = time.perf_counter() - t0
            t0 = time.perf_counter()
            ivc_verify(proof, params, tokens, poseidon_hash([sk, 0]))
            row.verify_s = time.perf_counter() - t0
        out.append(row)
    return out


def interior_minimum(rows: list) -> int | None:
    """Chunk size of the minimum cost when it lies strictly inside the table."""
    costs = [r.cost for r in rows]
    k = costs.index(min(costs))
    return rows[k].n_t if 0 < k < len(rows) - 1 else None
