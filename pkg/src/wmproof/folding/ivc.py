"""Incrementally verifiable detection by folding per-chunk step instances.

The scored tokens are cut into chunks of ``n_t``. Each chunk is a plain
instance of one shared step circuit that

* recomputes the key commitment from the witness key,
* opens the running statistic from ``h_in = Acc(count_in, s_H)``,
* adds the chunk's flags weighted by a public 0/1 mask (0 on padding slots),
* publishes ``h_out = Acc(count_out, s_H)``.

Only the accumulator hashes are public, never the intermediate counts. The
chunk instances are folded left to right with Fiat-Shamir challenges; a small
auxiliary circuit ties the final hash to the public final count and the first
hash to a zero count. Segment runs one such chain per message position after
grouping scored tokens by the position of their context token.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ..circuits import bind_constant, commitment_check, kgw_token_flag, segment_token_flags, synthid_token_flags
from ..errors import ChunkSizeMismatch, FoldingUnsupported, ShapeMismatch, TranscriptTruncated
from ..field import P
from ..hashing import poseidon_hash
from ..hashing.batch import limbs_to_ints
from ..merkle import open_path
from ..r1cs.gadgets import BITWISE, gadget_merkle, hash_lc
from ..r1cs.system import LC, ONE_LC, ConstraintSystem, RelaxedInstance
from ..watermark.detect import _windows, positions_of
from ..watermark.params import G_THRESHOLD, WatermarkParams
from ..watermark.scores import kgw_green, segment_green, synthid_g, synthid_seeds
from .relaxed import (compute_cross_term, derive_challenge, fold, fold_products, instance_digest,
                      vector_digest)

SENTINEL = 0


# -- accumulator -------------------------------------------------------------------

def acc_hash(counts, s_h: int) -> int:
    """Hash(count, s_H) for a scalar; a chain Hash(c, h) from h = s_H for vectors."""
    if isinstance(counts, int):
        return poseidon_hash([counts, s_h])
    h = s_h
    for c in counts:
        h = poseidon_hash([int(c), h])
    return h


def acc_hash_lc(cs, counts, s_h) -> LC:
    if not isinstance(counts, list):
        return hash_lc(cs, "poseidon", [counts, s_h])
    h = LC.of(s_h)
    for c in counts:
        h = hash_lc(cs, "poseidon", [c, h])
    return h


# -- step circuits -------------------------------------------------------------------

@dataclass
class StepCircuit:
    scheme: str
    params: WatermarkParams
    n_t: int
    cs: ConstraintSystem
    pub: dict          # name -> list of column indices
    inputs: dict       # name -> Var or nested lists of Var
    depth: int = 0


def _vector(params) -> bool:
    return params.scheme == "segment"


@lru_cache(maxsize=16)
def build_step_circuit(params: WatermarkParams, n_t: int, depth: int = 0) -> StepCircuit:
    if n_t < 1:
        raise ChunkSizeMismatch("chunks need at least one token")
    cs = ConstraintSystem()
    pub = {}

    def alloc(name, n=None):
        vs = [cs.public(name)] if n is None else cs.publics(n, name)
        pub[name] = [v.index for v in vs]
        return vs if n is not None else vs[0]

    scheme = params.scheme
    up = alloc("upsilon")
    psi_v = alloc("psi")
    thr_v = alloc("threshold")
    psi = params.psi
    if scheme == "segment":
        root = alloc("root")
        position = alloc("position")
        mask = alloc("mask", n_t)
        alloc("index", n_t)
        prev = alloc("prev", n_t)
        cur = alloc("cur", n_t)
    else:
        xi_v = alloc("xi") if scheme == "synthid" else None
        mask = alloc("mask", n_t)
        toks = alloc("tokens", psi + n_t)
    h_in = alloc("h_in")
    h_out = alloc("h_out")

    sk = cs.witness("sk")
    s_h = cs.witness("s_h")
    inputs = {"sk": sk, "s_h": s_h}
    bind_constant(cs, psi_v, psi)
    if scheme == "synthid":
        bind_constant(cs, thr_v, G_THRESHOLD)
        bind_constant(cs, xi_v, params.xi)
    else:
        bind_constant(cs, thr_v, params.threshold_green)
    commitment_check(cs, sk, up)
    for m in mask:
        cs.enforce(m, m - ONE_LC, 0)

    if scheme == "segment":
        hyp = params.hypotheses
        c_in = cs.witnesses(hyp, "count_in")
        inputs["count_in"] = c_in
        cs.enforce_zero(acc_hash_lc(cs, [v.lc() for v in c_in], s_h) - h_in)
        totals = [v.lc() for v in c_in]
        sibs_all, bits_all = [], []
        for k in range(n_t):
            sibs = cs.witnesses(depth, f"sib[{k}]")
            bits = cs.witnesses(depth, f"bit[{k}]")
            sibs_all.append(sibs)
            bits_all.append(bits)
            gadget_merkle(cs, prev[k], position, sk, sibs, bits, root, "poseidon", gate=mask[k])
            for j, f in enumerate(segment_token_flags(cs, params, sk, prev[k], cur[k], BITWISE)):
                totals[j] = totals[j] + cs.mul(mask[k], f)
        inputs["sib"] = sibs_all
        inputs["bit"] = bits_all
        cs.enforce_zero(acc_hash_lc(cs, totals, s_h) - h_out)
    else:
        c_in = cs.witness("count_in")
        inputs["count_in"] = c_in
        cs.enforce_zero(acc_hash_lc(cs, c_in, s_h) - h_in)
        total = c_in.lc()
        for k in range(n_t):
            ctx, y = toks[k:k + psi], toks[k + psi]
            if scheme == "kgw":
                flags = [kgw_token_flag(cs, params, sk, ctx, y, BITWISE)]
            else:
                flags = synthid_token_flags(cs, params, sk, ctx, y, BITWISE)
            for f in flags:
                total = total + cs.mul(mask[k], f)
        cs.enforce_zero(acc_hash_lc(cs, total, s_h) - h_out)
    if cs.lookups:
        raise FoldingUnsupported("step circuits must not use lookups")
    return StepCircuit(scheme, params, n_t, cs, pub, inputs, depth)


@lru_cache(maxsize=8)
def build_aux_circuit(width: int) -> tuple:
    """Publics (h_first, h_final, counts...) with witness s_H.

    width 0 means a scalar count."""
    cs = ConstraintSystem()
    h_first = cs.public("h_first")
    h_final = cs.public("h_final")
    counts = cs.publics(max(width, 1), "final_count")
    s_h = cs.witness("s_h")
    if width == 0:
        cs.enforce_zero(acc_hash_lc(cs, 0, s_h) - h_first)
        cs.enforce_zero(acc_hash_lc(cs, counts[0], s_h) - h_final)
    else:
        cs.enforce_zero(acc_hash_lc(cs, [LC() for _ in range(width)], s_h) - h_first)
        cs.enforce_zero(acc_hash_lc(cs, [c.lc() for c in counts], s_h) - h_final)
    return cs, s_h


# -- proof objects --------------------------------------------------------------------

@dataclass
class FoldStep:
    r: int
    t_digest: int


@dataclass
class IvcProof:
    scheme: str
    n_t: int
    n_f: int
    chunks: list                      # plain step instances (RelaxedInstance, mu = 1, err = 0)
    transcript: list                  # FoldStep per fold, n_f - 1 entries
    acc_hashes: list                  # n_f + 1 accumulator hashes
    aux_public: list
    aux_witness: list
    final_count: object
    final_digest: int = 0
    position: int | None = None
    final_instance: RelaxedInstance | None = field(default=None, repr=False)


@dataclass
class SegmentIvcProof:
    n_t: int
    chains: dict                      # position -> IvcProof
    count: list                       # n_hat x 2^m_hat


# -- folding driver -------------------------------------------------------------------

_ZERO_DIGESTS: dict = {}


def _chunk_digest(inst: RelaxedInstance) -> int:
    """instance_digest, with the all-zero err vector of fresh chunks cached."""
    if not any(inst.err):
        n = len(inst.err)
        if n not in _ZERO_DIGESTS:
            _ZERO_DIGESTS[n] = vector_digest([0] * n)
        ed = _ZERO_DIGESTS[n]
    else:
        ed = vector_digest(inst.err)
    return vector_digest(list(inst.public) + [inst.mu, ed] + list(inst.witness))


def fold_chain(cs: ConstraintSystem, chunks: list, transcript: list | None = None):
    """Fold ``chunks`` in order. With ``transcript`` given, replay and compare.

    Returns (final instance, transcript entries) or None on a replay mismatch.
    """
    state = _chunk_digest(chunks[0])
    running = chunks[0]
    run_prods = cs.products(running.z())
    out = []
    for i, inst in enumerate(chunks[1:]):
        prods = cs.products(inst.z())
        t = compute_cross_term(cs, running, inst, run_prods, prods)
        d_run = poseidon_hash([state, vector_digest(list(running.public) + [running.mu])])
        d_t = vector_digest(t)
        r = derive_challenge(d_run, _chunk_digest(inst), d_t)
        if transcript is not None:
            if transcript[i].r != r or transcript[i].t_digest != d_t:
                return None
        out.append(FoldStep(r, d_t))
        running = fold(cs, running, inst, r, t)
        run_prods = fold_products(run_prods, prods, r)
        state = r
    return running, out


# -- chunk layout shared by prover and verifier -------------------------------------------

def _linear_chunk_publics(step: StepCircuit, tokens, c: int, upsilon: int, h_in: int, h_out: int) -> list:
    params, n_t, psi = step.params, step.n_t, step.params.psi
    n_scored = len(tokens) - psi
    vals = [0] * step.cs.num_public
    vals[step.pub["upsilon"][0]] = upsilon
    vals[step.pub["psi"][0]] = psi
    vals[step.pub["threshold"][0]] = G_THRESHOLD if step.scheme == "synthid" else params.threshold_green
    if step.scheme == "synthid":
        vals[step.pub["xi"][0]] = params.xi
    window = [int(t) for t in tokens[c * n_t: c * n_t + psi + n_t]]
    window += [SENTINEL] * (psi + n_t - len(window))
    for col, v in zip(step.pub["tokens"], window):
        vals[col] = v
    for k, col in enumerate(step.pub["mask"]):
        vals[col] = 1 if c * n_t + k < n_scored else 0
    vals[step.pub["h_in"][0]] = h_in
    vals[step.pub["h_out"][0]] = h_out
    return vals


def _segment_chunk_publics(step: StepCircuit, tokens, entries, upsilon, root, position, h_in, h_out) -> list:
    """``entries`` are scored token indices for this chunk (may be short)."""
    params = step.params
    vals = [0] * step.cs.num_public
    vals[step.pub["upsilon"][0]] = upsilon
    vals[step.pub["psi"][0]] = params.psi
    vals[step.pub["threshold"][0]] = params.threshold_green
    vals[step.pub["root"][0]] = root
    vals[step.pub["position"][0]] = position
    for k in range(step.n_t):
        if k < len(entries):
            i = entries[k]
            vals[step.pub["mask"][k]] = 1
            vals[step.pub["index"][k]] = i
            vals[step.pub["prev"][k]] = int(tokens[i - 1])
            vals[step.pub["cur"][k]] = int(tokens[i])
    vals[step.pub["h_in"][0]] = h_in
    vals[step.pub["h_out"][0]] = h_out
    return vals


# -- proving -----------------------------------------------------------------------

def _chunk_counts(params: WatermarkParams, sk: int, tokens, n_t: int) -> list:
    """Per-chunk statistic increments from the batch detection route."""
    ctx, cur = _windows(tokens, params.psi)
    if params.scheme == "kgw":
        per_token = kgw_green(params, sk, ctx, cur).astype(int)
    else:
        per_token = synthid_g(params, synthid_seeds(params, sk, ctx), cur, params.xi).sum(axis=0)
    per_token = [int(v) for v in per_token]
    return [sum(per_token[c:c + n_t]) for c in range(0, len(per_token), n_t)]


def _plain(step: StepCircuit, asg) -> RelaxedInstance:
    return RelaxedInstance.from_assignment(asg, step.cs.num_rows)


def _finish(step, scheme, n_t, chunks, accs, final_count, s_h, position=None) -> IvcProof:
    final, transcript = fold_chain(step.cs, chunks)
    width = step.params.hypotheses if step.scheme == "segment" else 0
    aux_cs, aux_sh = build_aux_circuit(width)
    counts = final_count if width else [final_count]
    aux_pub = [accs[0], accs[-1]] + [int(c) for c in counts]
    aux_asg = aux_cs.solve(aux_pub, {aux_sh: s_h})
    return IvcProof(scheme, n_t, len(chunks), chunks, transcript, accs, aux_asg.public,
                    aux_asg.witness, final_count, instance_digest(final), position, final)


def ivc_prove(params: WatermarkParams, tokens, sk: int, s_h: int, n_t: int) -> IvcProof:
    """Chunked, folded detection proof for kgw or synthid."""
    if params.scheme == "segment":
        raise ValueError("use ivc_prove_segment for the segment scheme")
    tokens = [int(t) for t in tokens]
    step = build_step_circuit(params, n_t)
    upsilon = poseidon_hash([sk, 0])
    increments = _chunk_counts(params, sk, tokens, n_t)
    count = 0
    accs = [acc_hash(0, s_h)]
    chunks = []
    for c, inc in enumerate(increments):
        nxt = count + inc
        accs.append(acc_hash(nxt, s_h))
        pubs = _linear_chunk_publics(step, tokens, c, upsilon, accs[-2], accs[-1])
        asg = step.cs.solve(pubs, {step.inputs["sk"]: sk, step.inputs["s_h"]: s_h,
                                   step.inputs["count_in"]: count})
        chunks.append(_plain(step, asg))
        count = nxt
    return _finish(step, params.scheme, n_t, chunks, accs, count, s_h)


def segment_groups(tokens, mapping, n_hat: int) -> dict:
    """Scored token indices grouped by the position of their context token."""
    pos = positions_of(mapping)
    groups = {p: [] for p in range(n_hat)}
    for i in range(1, len(tokens)):
        groups[int(pos[int(tokens[i - 1])])].append(i)
    return groups


def ivc_prove_segment(params: WatermarkParams, tokens, sk: int, s_h: int, n_t: int,
                      mapping, tree, positions_order=None) -> SegmentIvcProof:
    tokens = [int(t) for t in tokens]
    if len(tokens) <= params.psi:
        from ..errors import TextTooShort
        raise TextTooShort("need more than psi tokens")
    step = build_step_circuit(params, n_t, tree.depth)
    upsilon = poseidon_hash([sk, 0])
    groups = segment_groups(tokens, mapping, params.n_hat)
    hyp = params.hypotheses
    chains = {}
    order = list(positions_order) if positions_order is not None else list(range(params.n_hat))
    for p in order:
        idx = groups[p]
        counts = [0] * hyp
        accs = [acc_hash(counts, s_h)]
        chunks = []
        pieces = [idx[c:c + n_t] for c in range(0, len(idx), n_t)] or [[]]
        for piece in pieces:
            nxt = list(counts)
            if piece:
                prev = [tokens[i - 1] for i in piece]
                cur = [tokens[i] for i in piece]
                for j in range(hyp):
                    nxt[j] += int(segment_green(params, sk, prev, cur, j).sum())
            accs.append(acc_hash(nxt, s_h))
            pubs = _segment_chunk_publics(step, tokens, piece, upsilon, tree.root, p, accs[-2], accs[-1])
            vals = {step.inputs["sk"]: sk, step.inputs["s_h"]: s_h}
            for v, c in zip(step.inputs["count_in"], counts):
                vals[v] = c
            for k in range(n_t):
                y = tokens[piece[k] - 1] if k < len(piece) else 0
                path = open_path(tree, y)
                for v, s in zip(step.inputs["sib"][k], path.siblings):
                    vals[v] = s
                for v, b in zip(step.inputs["bit"][k], path.path_bits):
                    vals[v] = b
            chunks.append(_plain(step, step.cs.solve(pubs, vals)))
            counts = nxt
        chains[p] = _finish(step, "segment", n_t, chunks, accs, counts, s_h, position=p)
    count = [chains[p].final_count for p in range(params.n_hat)]
    return SegmentIvcProof(n_t, chains, count)


# -- verification -----------------------------------------------------------------------

def _structure_ok(proof: IvcProof) -> None:
    if proof.n_f < 1 or len(proof.chunks) != proof.n_f:
        raise TranscriptTruncated(f"expected {proof.n_f} chunk instances, found {len(proof.chunks)}")
    if len(proof.transcript) != proof.n_f - 1:
        raise TranscriptTruncated(f"expected {proof.n_f - 1} fold steps, found {len(proof.transcript)}")
    if len(proof.acc_hashes) != proof.n_f + 1:
        raise TranscriptTruncated("accumulator hash list has the wrong length")


def _chain_ok(step: StepCircuit, proof: IvcProof, expected_publics: list, final_counts: list) -> bool:
    cs = step.cs
    for inst, pubs in zip(proof.chunks, expected_publics):
        if len(inst.public) != cs.num_public or len(inst.witness) != cs.num_witness:
            return False
        if len(inst.err) != cs.num_rows or inst.mu != 1 or any(inst.err):
            return False
        if [int(v) for v in inst.public] != pubs:
            return False
    replay = fold_chain(cs, proof.chunks, proof.transcript)
    if replay is None:
        return False
    final, _ = replay
    if proof.final_digest and instance_digest(final) != proof.final_digest:
        return False
    if not cs.is_relaxed_satisfied(final):
        return False
    width = step.params.hypotheses if step.scheme == "segment" else 0
    aux_cs, _ = build_aux_circuit(width)
    aux_pub = [proof.acc_hashes[0], proof.acc_hashes[-1]] + [int(c) for c in final_counts]
    if [int(v) for v in proof.aux_public] != aux_pub or len(proof.aux_witness) != aux_cs.num_witness:
        return False
    from ..r1cs.system import Assignment
    return aux_cs.is_satisfied(Assignment(aux_pub, [int(w) for w in proof.aux_witness]))


def ivc_verify(proof: IvcProof, params: WatermarkParams, tokens, upsilon: int, claimed=None) -> bool:
    """Replay and check a kgw/synthid proof against public data only."""
    _structure_ok(proof)
    if proof.scheme != params.scheme or params.scheme == "segment":
        return False
    tokens = [int(t) for t in tokens]
    n_scored = len(tokens) - params.psi
    if n_scored < 1 or proof.n_t < 1 or proof.n_f != -(-n_scored // proof.n_t):
        return False
    if claimed is not None and int(claimed) != int(proof.final_count):
        return False
    step = build_step_circuit(params, proof.n_t)
    expected = [_linear_chunk_publics(step, tokens, c, upsilon, proof.acc_hashes[c], proof.acc_hashes[c + 1])
                for c in range(proof.n_f)]
    return _chain_ok(step, proof, expected, [proof.final_count])


def ivc_verify_segment(proof: SegmentIvcProof, params: WatermarkParams, tokens, upsilon: int, root: int,
                       depth: int, claimed=None, positions_order=None) -> bool:
    tokens = [int(t) for t in tokens]
    if sorted(proof.chains) != list(range(params.n_hat)):
        raise TranscriptTruncated("missing position chains")
    if claimed is not None and [list(map(int, r)) for r in claimed] != [list(map(int, r)) for r in proof.count]:
        return False
    step = build_step_circuit(params, proof.n_t, depth)
    seen = []
    order = list(positions_order) if positions_order is not None else list(range(params.n_hat))
    ok = True
    for p in order:
        chain = proof.chains[p]
        _structure_ok(chain)
        if chain.scheme != "segment" or chain.position != p or chain.n_t != proof.n_t:
            return False
        if [int(c) for c in chain.final_count] != [int(c) for c in proof.count[p]]:
            return False
        # read the claimed grouping from the chunk publics, then rebuild them
        expected = []
        for c, inst in enumerate(chain.chunks):
            if len(inst.public) != step.cs.num_public:
                return False
            masks = [int(inst.public[k]) for k in step.pub["mask"]]
            n_real = sum(1 for m in masks if m == 1)
            if masks != [1] * n_real + [0] * (len(masks) - n_real):
                return False
            if n_real < proof.n_t and c != len(chain.chunks) - 1:
                return False
            entries = [int(inst.public[k]) for k in step.pub["index"][:n_real]]
            if any(not params.psi <= i < len(tokens) for i in entries):
                return False
            seen.extend(entries)
            expected.append(_segment_chunk_publics(step, tokens, entries, upsilon, root, p,
                                                   chain.acc_hashes[c], chain.acc_hashes[c + 1]))
        ok = ok and _chain_ok(step, chain, expected, chain.final_count)
        if not ok:
            return False
    return sorted(seen) == list(range(params.psi, len(tokens)))
