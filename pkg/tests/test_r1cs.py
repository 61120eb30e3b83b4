import random

import pytest
from hypothesis import given, settings, strategies as st

from wmproof.errors import IndexOutOfRange, RangeTooWide, ShapeMismatch
from wmproof.field import P
from wmproof.hashing import mimc_hash, poseidon_hash
from wmproof.merkle import TokenPositionMap, build_tree, open_path
from wmproof.r1cs import (BITWISE, BYTE_LOOKUP, LC, ONE_LC, Assignment, ConstraintSystem, field_flag,
                         gadget_bit_decompose, gadget_compare, gadget_flag, gadget_merkle, gadget_sum,
                         hash_lc, is_equal_const, is_satisfied, sign_bit_compare)
from wmproof.r1cs.gadgets import SPLIT

felt = st.integers(min_value=0, max_value=P - 1)


def test_basic_multiplication_row():
    cs = ConstraintSystem()
    x, y = cs.public("x"), cs.public("y")
    z = cs.mul(x, y)
    cs.enforce(z + 1, ONE_LC, cs.materialize(LC.of(x) * 3))
    asg = cs.solve([2, 5], {})
    assert asg.witness[0] == 10
    assert not cs.is_satisfied(asg)          # 10 + 1 != 6
    asg = cs.solve([2, 1], {})
    assert not cs.is_satisfied(asg)
    ok, row = is_satisfied(cs, cs.solve([2, 1], {}))
    assert not ok and row == 2


def test_publics_before_witnesses():
    cs = ConstraintSystem()
    cs.witness()
    with pytest.raises(RuntimeError):
        cs.public()


def test_unallocated_column_rejected():
    cs = ConstraintSystem()
    with pytest.raises(IndexOutOfRange):
        cs.enforce(LC({3: 1}), ONE_LC, 0)


def test_shape_mismatch():
    cs = ConstraintSystem()
    cs.public()
    with pytest.raises(ShapeMismatch):
        cs.solve([1, 2], {})


def test_serialization_round_trip():
    cs = ConstraintSystem()
    x = cs.public()
    w = cs.witness()
    cs.enforce(x, w, LC.of(x) + 7)
    cs.lookup(w)
    back = ConstraintSystem.from_dict(cs.to_dict())
    assert back.to_dict() == cs.to_dict()
    assert back.to_dict()["version"] == 1
    asg = Assignment([2], [(2 + 7) * pow(2, -1, P) % P])
    assert back.products(asg.z()) == cs.products(asg.z())


@pytest.mark.parametrize("kind,ref", [("poseidon", poseidon_hash), ("mimc", mimc_hash)])
@pytest.mark.parametrize("arity", [2, 3])
def test_hash_gadget_matches_reference(kind, ref, arity):
    cs = ConstraintSystem()
    ins = cs.publics(arity)
    out = cs.public()
    cs.enforce_zero(hash_lc(cs, kind, ins) - out)
    vals = [random.Random(arity).randrange(P) for _ in range(arity)]
    assert cs.is_satisfied(cs.solve(vals + [ref(vals)], {}))
    assert not cs.is_satisfied(cs.solve(vals + [ref(vals) + 1], {}))


def test_row_counts_frozen():
    cs = ConstraintSystem()
    hash_lc(cs, "poseidon", cs.publics(2))
    assert cs.num_rows == 255
    cs = ConstraintSystem()
    hash_lc(cs, "mimc", cs.publics(2))
    assert cs.num_rows == 2 * 364


@pytest.mark.parametrize("mode", [BITWISE, BYTE_LOOKUP])
def test_compare_small_exhaustive(mode):
    cs = ConstraintSystem()
    a, b = cs.public(), cs.public()
    gadget_compare(cs, a, b, 9, mode)
    for x in range(0, 256, 5):
        for y in range(0, 256, 3):
            assert cs.is_satisfied(cs.solve([x, y], {})) == (x < y)


def test_compare_range_too_wide():
    cs = ConstraintSystem()
    a, b = cs.public(), cs.public()
    with pytest.raises(RangeTooWide):
        gadget_compare(cs, a, b, 255)


@pytest.mark.parametrize("mode", [BITWISE, BYTE_LOOKUP])
def test_flag_small_exhaustive(mode):
    cs = ConstraintSystem()
    r, t = cs.public(), cs.public()
    f = cs.witness()
    gadget_flag(cs, f, r, t, 9, mode)
    for x in range(0, 256, 17):
        for y in range(0, 256, 5):
            asg = cs.solve([x, y], {})
            assert cs.is_satisfied(asg) and asg.witness[0] == int(x < y)
            forged = cs.solve([x, y], {}, overrides={f: 1 - int(x < y)})
            assert not cs.is_satisfied(forged)


@given(st.integers(0, 2**20 - 1))
def test_bit_decompose(x):
    cs = ConstraintSystem()
    v = cs.public()
    gadget_bit_decompose(cs, v, 20)
    assert cs.is_satisfied(cs.solve([x], {}))
    assert not cs.is_satisfied(cs.solve([x + 2**20], {}))


@given(felt, st.sampled_from([P // 4, P // 2, 1, P - 2**250, 2**SPLIT + 5]))
def test_field_flag_matches_integer_less_than(r, thr):
    cs = ConstraintSystem()
    x = cs.public()
    out = cs.public()
    cs.enforce_zero(field_flag(cs, x, thr) - out)
    assert cs.is_satisfied(cs.solve([r, int(r < thr)], {}))
    assert not cs.is_satisfied(cs.solve([r, 1 - int(r < thr)], {}))


@pytest.mark.parametrize("thr", [P // 4, P // 2])
@pytest.mark.parametrize("delta", [-1, 0, 1])
def test_field_flag_boundaries(thr, delta):
    r = thr + delta
    cs = ConstraintSystem()
    x, out = cs.public(), cs.public()
    cs.enforce_zero(field_flag(cs, x, thr) - out)
    assert cs.is_satisfied(cs.solve([r, int(r < thr)], {}))
    assert int(r < thr) == (1 if delta < 0 else 0)


@settings(max_examples=20)
@given(st.integers(0, 2**256 - 1 - P))
def test_field_flag_rejects_noncanonical_split(r):
    # hi * 2^248 + lo = r + P is a second integer split of the same field element
    cs = ConstraintSystem()
    x = cs.public()
    field_flag(cs, x, P // 4)
    hint = cs.hints[0]
    hi, lo = divmod(r + P, 1 << SPLIT)
    values = [(lo >> i) & 1 for i in range(SPLIT)] + [(hi >> i) & 1 for i in range(8)]
    assert len(values) == len(hint.outputs)
    asg = cs.solve([r], {}, overrides=dict(zip(hint.outputs, values)))
    assert not cs.is_satisfied(asg)


def test_is_equal_const():
    cs = ConstraintSystem()
    x = cs.public()
    e = is_equal_const(cs, x, 9)
    for v in (8, 9, 10):
        asg = cs.solve([v], {})
        assert cs.is_satisfied(asg) and asg.witness[e.index - 1] == int(v == 9)


@given(st.integers(0, 2**30), st.integers(0, 2**30))
def test_sign_bit_compare(x, y):
    cs = ConstraintSystem()
    a, b = cs.public(), cs.public()
    s = sign_bit_compare(cs, a, b, 32)
    asg = cs.solve([x, y], {})
    assert cs.is_satisfied(asg) and asg.z()[s.index] == int(x >= y)


def test_gadget_sum():
    cs = ConstraintSystem()
    xs = cs.publics(3)
    out = cs.public()
    gadget_sum(cs, xs, out)
    assert cs.is_satisfied(cs.solve([1, 2, 3, 6], {}))
    assert not cs.is_satisfied(cs.solve([1, 2, 3, 7], {}))


def _merkle_cs(depth):
    cs = ConstraintSystem()
    root, y = cs.public(), cs.public()
    pos, sk = cs.witness(), cs.witness()
    sibs, bits = cs.witnesses(depth), cs.witnesses(depth)
    gadget_merkle(cs, y, pos, sk, sibs, bits, root)
    return cs, pos, sk, sibs, bits


def test_merkle_gadget_opens_and_binds_index():
    m = TokenPositionMap.random(8, 3, seed=2)
    tree = build_tree(m, 77)
    cs, pos, sk, sibs, bits = _merkle_cs(3)
    for y in range(8):
        path = open_path(tree, y)
        vals = {pos: m[y], sk: 77, **dict(zip(sibs, path.siblings)), **dict(zip(bits, path.path_bits))}
        assert cs.is_satisfied(cs.solve([tree.root, y], vals))
        # the same opening cannot be claimed for another token
        assert not cs.is_satisfied(cs.solve([tree.root, y ^ 1], vals))
