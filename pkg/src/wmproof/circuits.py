"""Detection circuits for the three watermark schemes.

Every circuit exposes the tokens, the context width, the threshold, the key
commitment and the claimed statistic as public inputs; the secret key (and for
Segment the position mapping openings) stay in the witness. The commitment is
checked in-circuit as Poseidon(sk, 0), which ties the witness key to the
published one. Builders return a :class:`CircuitBundle` whose ``assign``
method runs the witness generator, so honest proving never solves constraints.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import FusionUnavailable, MissingOpening, OddContextWidth, ShapeMismatch, TextTooShort
from .hashing import poseidon_hash
from .merkle import MerklePath
from .r1cs.gadgets import BITWISE, field_flag, hash_lc
from .r1cs.system import LC, ONE_LC, Assignment, ConstraintSystem
from .watermark.params import G_THRESHOLD, WatermarkParams


@dataclass
class DetectionStatement:
    scheme: str
    params: WatermarkParams
    tokens: list
    claimed: object            # int for kgw/synthid, n_hat x 2^m_hat list for segment
    upsilon: int
    root: int | None = None

    @property
    def threshold(self) -> int:
        return G_THRESHOLD if self.scheme == "synthid" else self.params.threshold_green

    @property
    def n_scored(self) -> int:
        return len(self.tokens) - self.params.psi


@dataclass
class CircuitBundle:
    cs: ConstraintSystem
    stmt: DetectionStatement
    public_layout: dict
    witness_layout: dict
    inputs: dict = field(default_factory=dict)

    def publics(self, stmt: DetectionStatement | None = None) -> list:
        return public_values(stmt or self.stmt)

    def assign(self, sk: int, openings: dict | None = None, overrides: dict | None = None,
               stmt: DetectionStatement | None = None) -> Assignment:
        stmt = stmt or self.stmt
        vals = {self.inputs["sk"]: sk}
        if stmt.scheme == "segment":
            vals.update(_opening_inputs(self, stmt, openings))
        return self.cs.solve(self.publics(stmt), vals, overrides)


# -- per-token sections shared with the folding step circuits ------------------------

def context_seed_lc(cs, kind, sk, ctx) -> LC:
    """Two-input chain over the context: Hash(sk, c0), then Hash(sd, c_k)."""
    sd = hash_lc(cs, kind, [sk, ctx[0]])
    for c in ctx[1:]:
        sd = hash_lc(cs, kind, [sd, c])
    return sd


def kgw_token_flag(cs, params: WatermarkParams, sk, ctx, cur, mode=BITWISE) -> LC:
    kind = params.hash_kind
    if params.fused:
        g = hash_lc(cs, kind, [sk, ctx[-1], cur])
    else:
        g = hash_lc(cs, kind, [context_seed_lc(cs, kind, sk, ctx), cur])
    return field_flag(cs, g, params.threshold_green, mode)


def synthid_token_flags(cs, params: WatermarkParams, sk, ctx, cur, mode=BITWISE) -> list:
    kind = params.hash_kind
    sd = LC.of(sk)
    for c0, c1 in zip(ctx[0::2], ctx[1::2]):
        sd = hash_lc(cs, kind, [sd, c0, c1])
    return [field_flag(cs, hash_lc(cs, kind, [sd, cur, k]), G_THRESHOLD, mode)
            for k in range(1, params.xi + 1)]


def segment_token_flags(cs, params: WatermarkParams, sk, prev, cur, mode=BITWISE) -> list:
    kind = params.hash_kind
    out = []
    for j in range(params.hypotheses):
        sd = hash_lc(cs, kind, [sk, prev, j])
        out.append(field_flag(cs, hash_lc(cs, kind, [sd, cur]), params.threshold_green, mode))
    return out


def bind_constant(cs, var, value: int) -> None:
    cs.enforce_zero(LC.of(var) - value)


def commitment_check(cs, sk, upsilon) -> None:
    cs.enforce_zero(hash_lc(cs, "poseidon", [sk, 0]) - upsilon)


# -- monolithic circuits ---------------------------------------------------------

def _check_statement(stmt: DetectionStatement):
    if len(stmt.tokens) <= stmt.params.psi:
        raise TextTooShort(f"need more than {stmt.params.psi} tokens")


def _header(cs, stmt):
    layout = {}
    up = cs.public("upsilon")
    psi = cs.public("psi")
    thr = cs.public("threshold")
    layout.update(upsilon=(0, 1), psi=(1, 2), threshold=(2, 3))
    extra = {}
    if stmt.scheme == "synthid":
        extra["xi"] = cs.public("xi")
        layout["xi"] = (3, 4)
    if stmt.scheme == "segment":
        start = cs.num_public
        extra["root"] = cs.public("root")
        layout["root"] = (start, start + 1)
    start = cs.num_public
    toks = cs.publics(len(stmt.tokens), "tokens")
    layout["tokens"] = (start, start + len(toks))
    return layout, up, psi, thr, toks, extra


def build_kgw_circuit(stmt: DetectionStatement, fused: bool | None = None, mode: str = BITWISE) -> CircuitBundle:
    _check_statement(stmt)
    params = stmt.params
    if fused is None:
        fused = params.fused
    if fused and params.psi != 1:
        raise FusionUnavailable("fused seed needs psi = 1")
    if fused != params.fused:
        params = WatermarkParams(**{**params.to_dict(), "fused": fused})
    cs = ConstraintSystem()
    layout, up, psi_v, thr_v, toks, _ = _header(cs, stmt)
    count = cs.public("count")
    layout["count"] = (cs.num_public - 1, cs.num_public)
    sk = cs.witness("sk")
    bind_constant(cs, psi_v, params.psi)
    bind_constant(cs, thr_v, params.threshold_green)
    commitment_check(cs, sk, up)
    psi = params.psi
    flags = []
    first = cs.num_witness
    for i in range(psi, len(toks)):
        flags.append(kgw_token_flag(cs, params, sk, toks[i - psi:i], toks[i], mode))
    total = LC()
    for f in flags:
        total = total + f
    cs.enforce(total, ONE_LC, count)
    wl = {"sk": [sk.index], "per_token": (cs.num_public + first, cs.num_vars)}
    return CircuitBundle(cs, stmt, layout, wl, {"sk": sk})


def build_synthid_circuit(stmt: DetectionStatement, mode: str = BITWISE) -> CircuitBundle:
    _check_statement(stmt)
    params = stmt.params
    if params.psi % 2:
        raise OddContextWidth("synthid circuits need an even context width")
    cs = ConstraintSystem()
    layout, up, psi_v, thr_v, toks, extra = _header(cs, stmt)
    s_g = cs.public("s_g")
    layout["s_g"] = (cs.num_public - 1, cs.num_public)
    sk = cs.witness("sk")
    bind_constant(cs, psi_v, params.psi)
    bind_constant(cs, thr_v, G_THRESHOLD)
    bind_constant(cs, extra["xi"], params.xi)
    commitment_check(cs, sk, up)
    psi = params.psi
    total = LC()
    for i in range(psi, len(toks)):
        for f in synthid_token_flags(cs, params, sk, toks[i - psi:i], toks[i], mode):
            total = total + f
    cs.enforce(total, ONE_LC, s_g)
    return CircuitBundle(cs, stmt, layout, {"sk": [sk.index]}, {"sk": sk})


def build_segment_circuit(stmt: DetectionStatement, depth: int | None = None, mode: str = BITWISE) -> CircuitBundle:
    """Segment circuit; ``depth`` is the Merkle depth of the committed mapping."""
    _check_statement(stmt)
    params = stmt.params
    if depth is None:
        depth = max(0, (params.vocab_size - 1).bit_length())
    cs = ConstraintSystem()
    layout, up, psi_v, thr_v, toks, extra = _header(cs, stmt)
    root = extra["root"]
    n_hat, hyp = params.n_hat, params.hypotheses
    start = cs.num_public
    count = [[cs.public(f"count[{p}][{j}]") for j in range(hyp)] for p in range(n_hat)]
    layout["count"] = (start, cs.num_public)
    sk = cs.witness("sk")
    bind_constant(cs, psi_v, params.psi)
    bind_constant(cs, thr_v, params.threshold_green)
    commitment_check(cs, sk, up)
    from .r1cs.gadgets import gadget_merkle

    cells = [[LC() for _ in range(hyp)] for _ in range(n_hat)]
    pos_vars, sib_vars, bit_vars = [], [], []
    for i in range(1, len(toks)):
        prev, cur = toks[i - 1], toks[i]
        pos = cs.witness(f"pos[{i}]")
        sibs = cs.witnesses(depth, f"sib[{i}]")
        bits = cs.witnesses(depth, f"bit[{i}]")
        pos_vars.append(pos)
        sib_vars.append(sibs)
        bit_vars.append(bits)
        sel = cs.witnesses(n_hat, f"sel[{i}]")
        cs.hint(lambda pv, n=n_hat: tuple(1 if pv == p else 0 for p in range(n)), sel, [pos])
        one_hot, weighted = LC(), LC()
        for p, s in enumerate(sel):
            cs.enforce(s, s - ONE_LC, 0)
            one_hot = one_hot + s
            weighted = weighted + s * p
        cs.enforce_zero(one_hot - 1)
        cs.enforce_zero(weighted - pos)
        gadget_merkle(cs, prev, pos, sk, sibs, bits, root, "poseidon")
        flags = segment_token_flags(cs, params, sk, prev, cur, mode)
        for p in range(n_hat):
            for j, f in enumerate(flags):
                cells[p][j] = cells[p][j] + cs.mul(sel[p], f)
    for p in range(n_hat):
        for j in range(hyp):
            cs.enforce(cells[p][j], ONE_LC, count[p][j])
    inputs = {"sk": sk, "pos": pos_vars, "sib": sib_vars, "bit": bit_vars, "depth": depth}
    wl = {"sk": [sk.index], "pos": [v.index for v in pos_vars]}
    return CircuitBundle(cs, stmt, layout, wl, inputs)


def _opening_inputs(bundle: CircuitBundle, stmt: DetectionStatement, openings) -> dict:
    """openings: token -> (position, MerklePath) for every scored token's context."""
    if openings is None:
        raise MissingOpening("segment proving needs mapping openings")
    vals = {}
    depth = bundle.inputs["depth"]
    for k, i in enumerate(range(1, len(stmt.tokens))):
        prev = stmt.tokens[i - 1]
        if prev not in openings:
            raise MissingOpening(f"no opening for token {prev}")
        pos, path = openings[prev]
        if len(path.siblings) != depth:
            raise ShapeMismatch(f"opening depth {len(path.siblings)} != {depth}")
        vals[bundle.inputs["pos"][k]] = pos
        for v, s in zip(bundle.inputs["sib"][k], path.siblings):
            vals[v] = s
        for v, b in zip(bundle.inputs["bit"][k], path.path_bits):
            vals[v] = b
    return vals


def public_values(stmt: DetectionStatement) -> list:
    p = stmt.params
    out = [stmt.upsilon, p.psi, stmt.threshold]
    if stmt.scheme == "synthid":
        out.append(p.xi)
    if stmt.scheme == "segment":
        out.append(stmt.root)
    out.extend(int(t) for t in stmt.tokens)
    if stmt.scheme == "segment":
        for row in stmt.claimed:
            out.extend(int(c) for c in row)
    else:
        out.append(int(stmt.claimed))
    return out


def build_circuit(stmt: DetectionStatement, mode: str = BITWISE, depth: int | None = None) -> CircuitBundle:
    if stmt.scheme == "kgw":
        return build_kgw_circuit(stmt, mode=mode)
    if stmt.scheme == "synthid":
        return build_synthid_circuit(stmt, mode=mode)
    if stmt.scheme == "segment":
        return build_segment_circuit(stmt, depth=depth, mode=mode)
    raise ValueError(f"unknown scheme {stmt.scheme!r}")


def openings_for(tokens, tree, mapping) -> dict:
    """Opening map covering every context token of ``tokens``."""
    from .merkle import open_path
    return {int(y): (mapping[int(y)], open_path(tree, int(y))) for y in set(tokens[:-1])}


def prove_and_verify_monolithic(bundle: CircuitBundle, assignment: Assignment) -> bool:
    """Transparent stand-in for prove/verify: publics must match the statement
    and the transmitted witness must satisfy every row."""
    if len(assignment.public) != bundle.cs.num_public or len(assignment.witness) != bundle.cs.num_witness:
        raise ShapeMismatch("assignment does not match the circuit shape")
    if [int(v) for v in assignment.public] != bundle.publics():
        return False
    return bundle.cs.is_satisfied(assignment)


def verify_monolithic(stmt: DetectionStatement, witness: list, depth: int | None = None,
                      mode: str = BITWISE) -> bool:
    """Verifier side: rebuild the circuit from the statement alone and check."""
    bundle = build_circuit(stmt, mode=mode, depth=depth)
    if len(witness) != bundle.cs.num_witness:
        return False
    return bundle.cs.is_satisfied(Assignment(bundle.publics(), [int(w) for w in witness]))


def statement_for(params: WatermarkParams, tokens, sk: int, report, root: int | None = None) -> DetectionStatement:
    return DetectionStatement(params.scheme, params, [int(t) for t in tokens], report.claimed(),
                              poseidon_hash([sk, 0]), root)
