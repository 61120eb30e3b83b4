"""Acceptance criteria, one test each. Every test prints a single line:

    [PASS] C<k> <name>: <measured> (<pinned tolerance>)

Tolerances are module constants so they are visible in one place.
"""
import copy
import random
import time

import numpy as np
import pytest

from helpers import honest_bundle, random_case, segment_text, small_params
from oracles import kgw_count, segment_counts, synthid_sum
from wmproof.circuits import statement_for, build_kgw_circuit
from wmproof.field import P
from wmproof.folding import (FoldStep, build_step_circuit, fold, interior_minimum, ivc_prove, ivc_prove_segment,
                            ivc_verify, ivc_verify_segment, sweep_nt)
from wmproof.errors import TranscriptTruncated
from wmproof.hashing.harness import CHI2_THRESHOLD_DF16, avalanche_coefficient, chi_square_uniformity
from wmproof.merkle import TokenPositionMap, build_tree, open_path
from wmproof.r1cs import ConstraintSystem, RelaxedInstance, gadget_compare, gadget_merkle, field_flag, hash_lc
from wmproof.watermark import (MockLM, UniformLM, commit, detect, detect_kgw, detect_segment, embed_kgw,
                              embed_segment, generate, keygen, kgw_params, segment_params, synthid_params)

# pinned tolerances
CHI2_ITERS, CHI2_VOCAB, CHI2_BINS = 1000, 50265, 17
CHI2_MIN_PASS, SHA_MIN_REJECT = 0.95, 0.95
AVALANCHE_TRIALS, AVALANCHE_TOL = 100_000, 0.01
C1_SECONDS, C2_SECONDS, C9_SECONDS = 600, 300, 900
EQUIV_PAIRS, EQUIV_SCORED = 50, 200
EFF_TRIALS, EFF_Z, EFF_RATE = 100, 4.0, 0.95
SEG_TRIALS, SEG_RATE = 50, 0.90
COMPLETENESS_STATEMENTS = 20
BINDING_ATTEMPTS = 1000
FOLD_TRIALS = 1000
MERKLE_PERTURBATIONS = 1000


@pytest.fixture
def line(capsys):
    def emit(k, name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] C{k} {name}: {detail}")
        return ok
    return emit


# -- C1 ---------------------------------------------------------------------------------

def test_c1_hash_uniformity(line):
    t0 = time.perf_counter()
    reps = {k: chi_square_uniformity(k, CHI2_ITERS, bins=CHI2_BINS, vocab_size=CHI2_VOCAB, seed=2024)
            for k in ("mimc", "poseidon", "sha256")}
    secs = time.perf_counter() - t0
    ok = (all(reps[k].pass_rate >= CHI2_MIN_PASS and reps[k].mean_chi2 < CHI2_THRESHOLD_DF16
              for k in ("mimc", "poseidon"))
          and 1 - reps["sha256"].pass_rate > SHA_MIN_REJECT and secs < C1_SECONDS)
    detail = "; ".join(f"{k} pass={r.pass_rate:.3f} mean={r.mean_chi2:.2f}" for k, r in reps.items())
    assert line(1, "hash uniformity", ok,
                f"{detail}; {secs:.0f}s (pass>={CHI2_MIN_PASS}, mean<{CHI2_THRESHOLD_DF16}, "
                f"sha reject>{SHA_MIN_REJECT}, <{C1_SECONDS}s)")


# -- C2 ---------------------------------------------------------------------------------

def test_c2_avalanche(line):
    t0 = time.perf_counter()
    coef = {k: avalanche_coefficient(k, AVALANCHE_TRIALS, seed=7) for k in ("mimc", "poseidon")}
    secs = time.perf_counter() - t0
    ok = all(abs(c - 0.5) <= AVALANCHE_TOL for c in coef.values()) and secs < C2_SECONDS
    assert line(2, "avalanche", ok,
                f"mimc={coef['mimc']:.5f} poseidon={coef['poseidon']:.5f}; {secs:.0f}s "
                f"(0.50 +- {AVALANCHE_TOL}, {AVALANCHE_TRIALS} trials, <{C2_SECONDS}s)")


# -- C3 ---------------------------------------------------------------------------------

def test_c3_detection_count_equivalence(line):
    mism = 0
    cases = {"kgw": kgw_params(), "synthid": synthid_params(), "segment": segment_params()}
    for scheme, params in cases.items():
        for i in range(EQUIV_PAIRS):
            rng = random.Random(1000 * i + len(scheme))
            sk = rng.randrange(1, P)
            toks = [rng.randrange(params.vocab_size) for _ in range(params.psi + EQUIV_SCORED)]
            if scheme == "kgw":
                mism += detect_kgw(toks, params, sk).green_count != kgw_count(toks, params, sk)
            elif scheme == "synthid":
                mism += detect(toks, params, sk).s_g != synthid_sum(toks, params, sk)
            else:
                m = TokenPositionMap.random(params.vocab_size, params.n_hat, seed=i)
                mism += detect_segment(toks, params, sk, m).count != segment_counts(toks, params, sk, m.positions)
    assert line(3, "detection-count oracle equivalence", mism == 0,
                f"{mism} mismatches over 3x{EQUIV_PAIRS} texts of {EQUIV_SCORED} scored tokens (tolerance 0)")


# -- C4 ---------------------------------------------------------------------------------

def test_c4_effectiveness(line):
    V = 256
    params = kgw_params(vocab_size=V, gamma=0.25, delta=2.0)
    hi = lo = 0
    for t in range(EFF_TRIALS):
        key = keygen(random.Random(t))
        lm = MockLM(V, seed=t)
        wm = embed_kgw([t % V], 200, params, key.sk, lm, t)
        hi += detect_kgw(wm, params, key.sk).score > EFF_Z
        plain = generate([t % V], 200, UniformLM(V), t)
        lo += abs(detect_kgw(plain, params, key.sk).score) < EFF_Z
    seg = segment_params(vocab_size=V, n_hat=6, m_hat=4, delta=4.0)
    exact = 0
    for t in range(SEG_TRIALS):
        rng = random.Random(500 + t)
        key = keygen(rng)
        m = TokenPositionMap.random(V, 6, seed=t)
        msg = [rng.randrange(16) for _ in range(6)]
        toks = embed_segment([rng.randrange(V)], 960, seg, key.sk, MockLM(V, seed=t), t, msg, m)
        exact += detect_segment(toks, seg, key.sk, m).decoded_msg == msg
    ok = (hi / EFF_TRIALS >= EFF_RATE and lo / EFF_TRIALS >= EFF_RATE and exact / SEG_TRIALS >= SEG_RATE)
    assert line(4, "effectiveness", ok,
                f"kgw z>{EFF_Z} in {hi}/{EFF_TRIALS}, plain |z|<{EFF_Z} in {lo}/{EFF_TRIALS}, "
                f"segment exact {exact}/{SEG_TRIALS} (>= {EFF_RATE}, >= {EFF_RATE}, >= {SEG_RATE})")


# -- C5 ---------------------------------------------------------------------------------

def test_c5_circuit_completeness(line):
    total = passed = 0
    for kind in ("poseidon", "mimc"):
        for scheme in ("kgw", "synthid", "segment"):
            params = (small_params(scheme, kind, n_hat=6, m_hat=4) if scheme == "segment"
                      else small_params(scheme, kind, xi=30, psi=4) if scheme == "synthid"
                      else small_params(scheme, kind))
            n_scored = 2 if scheme == "segment" else 3
            for i in range(COMPLETENESS_STATEMENTS):
                bundle, key, openings, _ = honest_bundle(params, n_scored, seed=100 * i + 7)
                total += 1
                passed += bundle.cs.is_satisfied(bundle.assign(key.sk, openings))
    assert line(5, "circuit completeness", passed == total,
                f"{passed}/{total} honest statements satisfied (3 schemes x 2 hashes x "
                f"{COMPLETENESS_STATEMENTS}; required 100%)")


# -- C6 ---------------------------------------------------------------------------------

def _repair(bundle, rng):
    """Random hint-output overrides: bit flips, +-1 nudges or fresh field elements."""
    cs = bundle.cs
    outs = [o for h in cs.hints for o in h.outputs]
    chosen = rng.sample(outs, rng.randint(0, 3))
    ov = {}
    for col in chosen:
        roll = rng.random()
        ov[col] = ("flip" if roll < 0.5 else rng.choice([-1, 1]) if roll < 0.8 else rng.randrange(P))
    return ov


def test_c6_circuit_binding(line):
    rng = random.Random(66)
    prepared = []
    for scheme in ("kgw", "synthid", "segment"):
        params = small_params(scheme, vocab=16) if scheme == "segment" else small_params(scheme)
        prepared.append(honest_bundle(params, 3, seed=len(scheme)))
    successes = 0
    for a in range(BINDING_ATTEMPTS):
        bundle, key, openings, _ = prepared[a % 3]
        stmt = copy.deepcopy(bundle.stmt)
        d = rng.choice([-1, 1])
        if stmt.scheme == "segment":
            p, j = rng.randrange(len(stmt.claimed)), rng.randrange(len(stmt.claimed[0]))
            stmt.claimed[p][j] += d
        else:
            stmt.claimed += d
        ov = _repair(bundle, rng)
        asg = bundle.assign(key.sk, openings, stmt=stmt)
        if ov:
            # nudges are relative to the honest value of the column
            z = asg.z()
            ov = {c: (1 - z[c]) % P if v == "flip" else (z[c] + v) % P if v in (-1, 1) else v
                  for c, v in ov.items()}
            asg = bundle.assign(key.sk, openings, overrides=ov, stmt=stmt)
        successes += bundle.cs.is_satisfied(asg)
    assert line(6, "circuit binding", successes == 0,
                f"{successes} satisfying repairs in {BINDING_ATTEMPTS} attempts (required 0)")


# -- C7 ---------------------------------------------------------------------------------

def test_c7_fusion(line):
    ratios = {}
    ok = True
    for n in (25, 50, 100, 200):
        params = kgw_params(vocab_size=1000, fused=False)
        key, toks, _, _ = random_case(params, n, seed=n)
        stmt = statement_for(params, toks, key.sk, detect(toks, params, key.sk))
        fused = build_kgw_circuit(stmt, fused=True).cs.num_rows
        plain = build_kgw_circuit(stmt, fused=False).cs.num_rows
        ratios[n] = fused / plain
        ok &= fused < plain
    detail = ", ".join(f"n={n}: {r:.3f}" for n, r in ratios.items())
    assert line(7, "three-to-one fusion", ok, f"fused/unfused rows {detail} (each < 1)")


# -- C8 ---------------------------------------------------------------------------------

def _fold_system():
    cs = ConstraintSystem()
    a, b, out, f = cs.public(), cs.public(), cs.public(), cs.public()
    h = hash_lc(cs, "poseidon", [a, b])
    cs.enforce_zero(h - out)
    cs.enforce_zero(field_flag(cs, h, P // 4) - f)
    return cs


def test_c8_folding_algebra(line):
    from wmproof.hashing import poseidon_hash
    cs = _fold_system()
    rng = random.Random(8)

    def inst():
        a, b = rng.randrange(P), rng.randrange(P)
        h = poseidon_hash([a, b])
        return RelaxedInstance.from_assignment(cs.solve([a, b, h, int(h < P // 4)], {}), cs.num_rows)

    bad = zero_mismatch = 0
    running = inst()
    for _ in range(FOLD_TRIALS):
        nxt, r = inst(), rng.randrange(P)
        pair_fold = fold(cs, inst(), nxt, r)          # plain pair
        running = fold(cs, running, nxt, rng.randrange(P))  # relaxed pair
        bad += not cs.is_relaxed_satisfied(pair_fold)
        bad += not cs.is_relaxed_satisfied(running)
        zero_mismatch += fold(cs, running, nxt, 0) != running
    ok = bad == 0 and zero_mismatch == 0
    assert line(8, "folding algebra", ok,
                f"{bad} unsatisfied folds in 2x{FOLD_TRIALS}, {zero_mismatch} r=0 mismatches (required 0, 0)")


# -- C9 ---------------------------------------------------------------------------------

def _mutations(proof, rng):
    """50 single mutations of a KGW proof; each returns a mutated deep copy."""
    def pub(i, j, delta=1):
        def f(p):
            p.chunks[i].public[j] = (p.chunks[i].public[j] + delta) % P
        return f

    def wit(i, j):
        def f(p):
            p.chunks[i].witness[j] = (p.chunks[i].witness[j] + 1) % P
        return f

    def err(i, j):
        def f(p):
            p.chunks[i].err[j] = 1
        return f

    def mu(i):
        def f(p):
            p.chunks[i].mu = 2
        return f

    def rr(i, field):
        def f(p):
            s = p.transcript[i]
            p.transcript[i] = FoldStep(s.r + 1, s.t_digest) if field == "r" else FoldStep(s.r, s.t_digest + 1)
        return f

    def acc(i):
        def f(p):
            p.acc_hashes[i] = (p.acc_hashes[i] + 1) % P
        return f

    def swap(i, j):
        def f(p):
            p.chunks[i], p.chunks[j] = p.chunks[j], p.chunks[i]
        return f

    def misc(kind):
        def f(p):
            if kind == "count+1":
                p.final_count += 1
            elif kind == "count-1":
                p.final_count -= 1
            elif kind == "aux_w":
                p.aux_witness[0] = (p.aux_witness[0] + 1) % P
            elif kind == "aux_p":
                p.aux_public[0] = (p.aux_public[0] + 1) % P
            elif kind == "drop_chunk":
                p.chunks.pop()
            elif kind == "drop_step":
                p.transcript.pop()
            elif kind == "dup_chunk":
                p.chunks[1] = copy.deepcopy(p.chunks[0])
            elif kind == "digest":
                p.final_digest += 1
            elif kind == "n_t":
                p.n_t += 1
            elif kind == "reverse":
                p.chunks.reverse()
            elif kind == "scheme":
                p.scheme = "synthid"
        return f

    muts = []
    n_f, n_pub, n_wit = proof.n_f, len(proof.chunks[0].public), len(proof.chunks[0].witness)
    for _ in range(12):
        muts.append(pub(rng.randrange(n_f), rng.randrange(n_pub)))
    for _ in range(10):
        muts.append(wit(rng.randrange(n_f), rng.randrange(n_wit)))
    for _ in range(4):
        muts.append(err(rng.randrange(n_f), rng.randrange(len(proof.chunks[0].err))))
    muts += [mu(0), mu(n_f - 1)]
    for i in range(3):
        muts += [rr(i, "r"), rr(i, "t")]
    muts += [acc(i) for i in (0, 1, n_f)]
    muts += [swap(0, 1), swap(1, n_f - 1)]
    muts += [misc(k) for k in ("count+1", "count-1", "aux_w", "aux_p", "drop_chunk", "drop_step",
                               "dup_chunk", "digest", "n_t", "reverse", "scheme")]
    assert len(muts) == 50
    return muts


def test_c9_ivc_end_to_end(line):
    t0 = time.perf_counter()
    accepted, total = 0, 0
    notes = []
    for params in (kgw_params(vocab_size=1000), synthid_params(vocab_size=1000, xi=4)):
        key, toks, _, _ = random_case(params, 200, seed=9)
        want = detect(toks, params, key.sk).claimed()
        for n_t in (25, 50, 200):
            proof = ivc_prove(params, toks, key.sk, key.s_h, n_t)
            total += 1
            ok = (proof.n_f == 200 // n_t and proof.final_count == want
                  and ivc_verify(proof, params, toks, commit(key.sk), claimed=want))
            accepted += ok
            notes.append(f"{params.scheme}({n_t},{proof.n_f})={'ok' if ok else 'no'}")
    seg = segment_params(vocab_size=64, n_hat=6, m_hat=4)
    key = keygen(random.Random(90))
    m = TokenPositionMap.random(64, 6, seed=90)
    tree = build_tree(m, key.sk)
    toks = segment_text(m, 60, seed=90)
    sproof = ivc_prove_segment(seg, toks, key.sk, key.s_h, 20, m, tree)
    total += 1
    seg_ok = (sproof.count == detect_segment(toks, seg, key.sk, m).count
              and ivc_verify_segment(sproof, seg, toks, commit(key.sk), tree.root, tree.depth))
    accepted += seg_ok
    notes.append(f"segment(60/position)={'ok' if seg_ok else 'no'}")

    params = kgw_params(vocab_size=1000)
    key, toks, _, _ = random_case(params, 40, seed=19)
    base = ivc_prove(params, toks, key.sk, key.s_h, 10)
    rng = random.Random(99)
    survived = 0
    for mutate in _mutations(base, rng):
        p = copy.deepcopy(base)
        mutate(p)
        try:
            survived += bool(ivc_verify(p, params, toks, commit(key.sk)))
        except TranscriptTruncated:
            pass
    secs = time.perf_counter() - t0
    ok = accepted == total and survived == 0 and secs < C9_SECONDS
    assert line(9, "IVC end-to-end", ok,
                f"{accepted}/{total} honest runs accepted [{', '.join(notes)}]; "
                f"{survived}/50 mutations accepted; {secs:.0f}s (all honest, 0 mutations, <{C9_SECONDS}s)")


# -- C10 --------------------------------------------------------------------------------

def test_c10_comparison_gadget(line):
    cs = ConstraintSystem()
    a, b = cs.public(), cs.public()
    gadget_compare(cs, a, b, 16)
    fails = 0
    for x in range(256):
        for y in range(256):
            fails += cs.is_satisfied(cs.solve([x, y], {})) != (x < y)
    for thr in (int(P // 4), P // 2):
        fcs = ConstraintSystem()
        r, out = fcs.public(), fcs.public()
        fcs.enforce_zero(field_flag(fcs, r, thr) - out)
        for v in (thr - 2, thr - 1, thr, thr + 1, 0, P - 1):
            want = int(v < thr)
            fails += not fcs.is_satisfied(fcs.solve([v, want], {}))
            fails += fcs.is_satisfied(fcs.solve([v, 1 - want], {}))
    assert line(10, "comparison gadget", fails == 0,
                f"{fails} disagreements over 65536 pairs at N=16 plus boundary cases (required 0)")


# -- C11 --------------------------------------------------------------------------------

def test_c11_merkle_gadget(line):
    depth = 10
    m = TokenPositionMap.random(1 << depth, 6, seed=11)
    sk = 0xABCDEF
    tree = build_tree(m, sk)
    cs = ConstraintSystem()
    root, y = cs.public(), cs.public()
    pos, skv = cs.witness(), cs.witness()
    sibs, bits = cs.witnesses(depth), cs.witnesses(depth)
    gadget_merkle(cs, y, pos, skv, sibs, bits, root)

    def inputs(t):
        path = open_path(tree, t)
        return {pos: m[t], skv: sk, **dict(zip(sibs, path.siblings)), **dict(zip(bits, path.path_bits))}

    opened = sum(cs.is_satisfied(cs.solve([tree.root, t], inputs(t))) for t in range(1 << depth))
    rng = random.Random(111)
    caught = 0
    for _ in range(MERKLE_PERTURBATIONS):
        t = rng.randrange(1 << depth)
        pubs, vals = [tree.root, t], inputs(t)
        target = rng.choice(["root", "y", "pos", "sk", "sib", "bit"])
        if target == "root":
            pubs[0] = (pubs[0] + rng.randrange(1, P)) % P
        elif target == "y":
            pubs[1] = (t + rng.randrange(1, 1 << depth)) % (1 << depth)
        elif target == "pos":
            vals[pos] = (m[t] + rng.randrange(1, 6)) % 6
        elif target == "sk":
            vals[skv] = (sk + rng.randrange(1, P)) % P
        elif target == "sib":
            s = rng.choice(sibs)
            vals[s] = (vals[s] + rng.randrange(1, P)) % P
        else:
            bvar = rng.choice(bits)
            vals[bvar] = 1 - vals[bvar]
        caught += not cs.is_satisfied(cs.solve(pubs, vals))
    ok = opened == 1 << depth and caught == MERKLE_PERTURBATIONS
    assert line(11, "Merkle gadget", ok,
                f"{opened}/{1 << depth} openings verify, {caught}/{MERKLE_PERTURBATIONS} perturbations rejected "
                f"(required all, all)")


# -- C12 --------------------------------------------------------------------------------

def test_c12_sweep_structure(line):
    params = kgw_params(vocab_size=1000)
    _, toks, _, _ = random_case(params, 200, seed=12)
    rows = sweep_nt(params, toks)
    best = interior_minimum(rows)
    curve = ", ".join(f"{r.n_t}:{r.cost}" for r in rows)
    assert line(12, "sweep structure", best is not None,
                f"interior minimum at N_t={best}; cost by N_t {curve} (minimum strictly inside the range)")
