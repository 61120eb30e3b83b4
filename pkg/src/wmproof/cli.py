"""Command line interface: ``wmproof <command> ...``.

Exit codes: 0 success or accept, 1 reject, 2 usage or input error.
``verify`` reads only the proof and the commitment file, never a key.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys

import numpy as np

from . import io
from .circuits import DetectionStatement, build_circuit, openings_for, statement_for
from .errors import WmproofError
from .field import from_hex, to_hex
from .folding import ivc_prove, ivc_prove_segment, ivc_verify, ivc_verify_segment, sweep_nt
from .folding.sweep import interior_minimum
from .hashing.harness import avalanche_coefficient, chi_square_uniformity
from .merkle import TokenPositionMap, build_tree
from .r1cs.system import Assignment
from .watermark import MockLM, commit, detect, embed, keygen, report_from_claimed
from .watermark.params import WatermarkParams

EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1, sort_keys=True))


def cs_digest(cs) -> str:
    blob = json.dumps(cs.to_dict(), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _params(args) -> WatermarkParams:
    extras = {}
    if args.config:
        params, extras = io.params_from_config(io.read_json(args.config, "config"))
    else:
        params = WatermarkParams(scheme=args.scheme, vocab_size=args.vocab,
                                 fused=args.scheme == "kgw")
    if getattr(args, "nt", None) is None and "n_t" in extras:
        args.nt = int(extras["n_t"])
    return params


def _mapping(args, params):
    if params.scheme != "segment":
        return None
    if not args.mapping:
        raise UsageError("the segment scheme needs --mapping")
    return io.mapping_from_json(io.read_json(args.mapping, "mapping"))


# -- commands --------------------------------------------------------------------------

def cmd_keygen(args) -> int:
    key = keygen(random.Random(args.seed) if args.seed is not None else None)
    io.write_json(args.out, "key", io.key_to_json(key), secret=True)
    body = {"upsilon": to_hex(commit(key.sk)), "hash_kind": "poseidon", "root": None}
    if args.n_hat:
        mapping = TokenPositionMap.random(args.vocab, args.n_hat, seed=args.seed)
        io.write_json(args.mapping_out or (str(args.out) + ".mapping"), "mapping", io.mapping_to_json(mapping),
                      secret=True)
        body["root"] = to_hex(build_tree(mapping, key.sk).root)
    if args.commitment:
        io.write_json(args.commitment, "commitment", body)
    _emit({"upsilon": body["upsilon"], "root": body["root"]})
    return EXIT_OK


def cmd_commit(args) -> int:
    key = io.key_from_json(io.read_json(args.key, "key"))
    body = {"upsilon": to_hex(commit(key.sk)), "hash_kind": "poseidon", "root": None}
    if args.mapping:
        mapping = io.mapping_from_json(io.read_json(args.mapping, "mapping"))
        body["root"] = to_hex(build_tree(mapping, key.sk).root)
    if args.out:
        io.write_json(args.out, "commitment", body)
    _emit(body)
    return EXIT_OK


def cmd_embed(args) -> int:
    params = _params(args)
    key = io.key_from_json(io.read_json(args.key, "key"))
    mapping = _mapping(args, params)
    msg = [int(v) for v in args.msg.split(",")] if args.msg else None
    rng = np.random.default_rng(args.seed)
    prompt = [int(v) for v in rng.integers(0, params.vocab_size, size=args.prompt_len)]
    lm = MockLM(params.vocab_size, seed=args.seed)
    tokens = embed(prompt, args.n, params, key.sk, lm, args.seed, msg=msg, mapping=mapping)
    io.write_json(args.out, "text", {"params": params.to_dict(), "tokens": [int(t) for t in tokens],
                                     "prompt_len": args.prompt_len})
    _emit({"tokens": len(tokens), "out": str(args.out)})
    return EXIT_OK


def _text(path):
    doc = io.read_json(path, "text")
    return WatermarkParams.from_dict(doc["params"]), [int(t) for t in doc["tokens"]]


def cmd_detect(args) -> int:
    params, tokens = _text(args.text)
    key = io.key_from_json(io.read_json(args.key, "key"))
    report = detect(tokens, params, key.sk, _mapping(args, params))
    if args.out:
        io.write_json(args.out, "report", report.to_dict())
    _emit(report.to_dict())
    return EXIT_OK


def cmd_prove(args) -> int:
    params, tokens = _text(args.text)
    key = io.key_from_json(io.read_json(args.key, "key"))
    mapping = _mapping(args, params)
    tree = build_tree(mapping, key.sk) if mapping is not None else None
    report = detect(tokens, params, key.sk, mapping)
    stmt = statement_for(params, tokens, key.sk, report, tree.root if tree else None)
    body = {"mode": args.mode, "statement": io.statement_to_json(stmt)}
    if args.mode == "monolithic":
        bundle = build_circuit(stmt, depth=tree.depth if tree else None)
        asg = bundle.assign(key.sk, openings_for(tokens, tree, mapping) if tree else None)
        body.update({"cs_digest": cs_digest(bundle.cs), "publics": io._vec(asg.public),
                     "witness": io._vec(asg.witness), "depth": tree.depth if tree else None})
    else:
        n_t = args.nt or stmt.n_scored
        if params.scheme == "segment":
            proof = ivc_prove_segment(params, tokens, key.sk, key.s_h, n_t, mapping, tree)
            body.update({"ivc": io.segment_ivc_to_json(proof), "depth": tree.depth})
        else:
            body["ivc"] = io.ivc_to_json(ivc_prove(params, tokens, key.sk, key.s_h, n_t))
    io.write_json(args.out, "proof", body)
    _emit({"mode": args.mode, "claimed": body["statement"]["claimed"], "out": str(args.out)})
    return EXIT_OK


def _verify(doc: dict, commitment: dict) -> tuple:
    stmt = io.statement_from_json(doc["statement"])
    if stmt.upsilon != from_hex(commitment["upsilon"]):
        return False, stmt
    if stmt.scheme == "segment":
        if commitment.get("root") is None or stmt.root != from_hex(commitment["root"]):
            return False, stmt
    depth = doc.get("depth")
    if doc["mode"] == "monolithic":
        bundle = build_circuit(stmt, depth=depth)
        if doc.get("cs_digest") != cs_digest(bundle.cs):
            return False, stmt
        publics = io._unvec(doc["publics"])
        witness = io._unvec(doc["witness"])
        if publics != bundle.publics() or len(witness) != bundle.cs.num_witness:
            return False, stmt
        return bundle.cs.is_satisfied(Assignment(publics, witness)), stmt
    if doc["mode"] != "ivc":
        raise io.FormatError(f"unknown proof mode {doc['mode']!r}")
    if stmt.scheme == "segment":
        proof = io.segment_ivc_from_json(doc["ivc"])
        return ivc_verify_segment(proof, stmt.params, stmt.tokens, stmt.upsilon, stmt.root, depth,
                                  claimed=stmt.claimed), stmt
    proof = io.ivc_from_json(doc["ivc"])
    return ivc_verify(proof, stmt.params, stmt.tokens, stmt.upsilon, claimed=stmt.claimed), stmt


def cmd_verify(args) -> int:
    doc = io.read_json(args.proof, "proof")
    commitment = io.read_json(args.commitment, "commitment")
    try:
        ok, stmt = _verify(doc, commitment)
    except (WmproofError, KeyError, TypeError, ValueError) as exc:
        _emit({"accepted": False, "reason": f"{type(exc).__name__}: {exc}"})
        return EXIT_REJECT
    out = {"accepted": bool(ok)}
    if ok:
        rep = report_from_claimed(stmt.params, stmt.claimed, stmt.n_scored)
        out.update({"score": float(rep.score), "decoded_msg": rep.decoded_msg})
    _emit(out)
    return EXIT_OK if ok else EXIT_REJECT


def cmd_hashtest(args) -> int:
    rep = chi_square_uniformity(args.kind, args.iters, seed=args.seed or 0, vocab_size=args.vocab)
    out = rep.as_dict()
    out["avalanche"] = (avalanche_coefficient(args.kind, args.trials, seed=args.seed or 0)
                        if args.kind in ("mimc", "poseidon") else None)
    _emit(out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    params, tokens = _text(args.text)
    cands = [int(v) for v in args.candidates.split(",")] if args.candidates else None
    sk = s_h = None
    if args.timed:
        if not args.key:
            raise UsageError("--timed needs --key")
        key = io.key_from_json(io.read_json(args.key, "key"))
        sk, s_h = key.sk, key.s_h
    rows = sweep_nt(params, tokens, cands, sk, s_h, verifier_overhead=args.overhead, timed=args.timed)
    _emit({"rows": [r.to_dict() for r in rows], "interior_minimum": interior_minimum(rows)})
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wmproof", description="Publicly verifiable LLM watermark detection.")
    sub = ap.add_subparsers(dest="command", required=True)

    def scheme_opts(p):
        p.add_argument("--config", help="JSON config with WatermarkParams fields, n_t and seed")
        p.add_argument("--scheme", choices=("kgw", "synthid", "segment"), default="kgw")
        p.add_argument("--vocab", type=int, default=50265)

    p = sub.add_parser("keygen", help="sample sk and s_H; optionally a token-position mapping")
    p.add_argument("--out", required=True)
    p.add_argument("--commitment")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-hat", type=int, default=0, help="also sample a mapping with this many positions")
    p.add_argument("--vocab", type=int, default=50265)
    p.add_argument("--mapping-out")
    p.set_defaults(fn=cmd_keygen)

    p = sub.add_parser("commit", help="recompute the public commitment from a key")
    p.add_argument("--key", required=True)
    p.add_argument("--mapping")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_commit)

    p = sub.add_parser("embed", help="generate watermarked text from the mock LM")
    scheme_opts(p)
    p.add_argument("--key", required=True)
    p.add_argument("--mapping")
    p.add_argument("--msg", help="comma separated message symbols (segment)")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--prompt-len", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("detect", help="score a text with the secret key")
    p.add_argument("--key", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--mapping")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_detect)

    p = sub.add_parser("prove", help="produce a transparent detection proof")
    p.add_argument("--key", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--mapping")
    p.add_argument("--mode", choices=("monolithic", "ivc"), default="monolithic")
    p.add_argument("--nt", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("verify", help="check a proof against a commitment")
    p.add_argument("--proof", required=True)
    p.add_argument("--commitment", required=True)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("hashtest", help="chi-square and avalanche report for a PRF")
    p.add_argument("--kind", choices=("mimc", "poseidon", "sha256", "biased"), default="poseidon")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--vocab", type=int, default=50265)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_hashtest)

    p = sub.add_parser("sweep", help="chunk-size trade-off table")
    p.add_argument("--text", required=True)
    p.add_argument("--candidates", help="comma separated chunk sizes")
    p.add_argument("--overhead", type=int, default=0, help="fixed per-step verifier rows")
    p.add_argument("--timed", action="store_true")
    p.add_argument("--key")
    p.set_defaults(fn=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"wmproof: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, WmproofError, KeyError, ValueError) as exc:
        print(f"wmproof: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
