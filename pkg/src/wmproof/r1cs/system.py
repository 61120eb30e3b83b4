"""Rank-1 constraint systems, assignments and relaxed instances.

Column layout of the instance vector is ``Z = [u, w, c]`` with public inputs
first, then the witness, then the constant column. For a plain assignment the
constant column holds 1; in a relaxed instance it holds the scalar ``mu``.
While a system is being built the constant column is addressed as ``ONE = -1``,
which also indexes the last entry of a Python list.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import IndexOutOfRange, ShapeMismatch
from ..field import P

ONE = -1


class LC:
    """Sparse linear combination ``sum(coeff * Z[col])`` over the field."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    @staticmethod
    def of(x) -> "LC":
        if isinstance(x, LC):
            return x
        if isinstance(x, Var):
            return LC({x.index: 1})
        if isinstance(x, int):
            return LC({ONE: x % P}) if x % P else LC()
        raise TypeError(f"cannot build a linear combination from {type(x).__name__}")

    def copy(self) -> "LC":
        return LC(dict(self.terms))

    def __add__(self, other):
        other = LC.of(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            s = (t.get(k, 0) + v) % P
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return LC(t)

    __radd__ = __add__

    def __neg__(self):
        return LC({k: (-v) % P for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-LC.of(other))

    def __rsub__(self, other):
        return LC.of(other) + (-self)

    def __mul__(self, k):
        if not isinstance(k, int):
            raise TypeError("linear combinations scale by field constants only")
        k %= P
        if not k:
            return LC()
        return LC({j: v * k % P for j, v in self.terms.items()})

    __rmul__ = __mul__

    def __len__(self):
        return len(self.terms)

    def constant(self) -> int:
        return self.terms.get(ONE, 0)

    def is_constant(self) -> bool:
        return all(k == ONE for k in self.terms)

    def evaluate(self, z) -> int:
        return sum(v * z[k] for k, v in self.terms.items()) % P

    def __repr__(self):
        return f"LC({self.terms})"


@dataclass(frozen=True)
class Var:
    index: int

    def lc(self) -> LC:
        return LC({self.index: 1})

    def __add__(self, other):
        return self.lc() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self.lc() - other

    def __rsub__(self, other):
        return LC.of(other) - self.lc()

    def __neg__(self):
        return -self.lc()

    def __mul__(self, k):
        return self.lc() * k

    __rmul__ = __mul__


@dataclass
class Hint:
    """Witness generator step: ``outputs = fn(*[eval(i) for i in inputs])``."""
    fn: object
    outputs: list
    inputs: list


@dataclass
class Assignment:
    public: list
    witness: list

    def z(self) -> list:
        return list(self.public) + list(self.witness) + [1]


@dataclass
class RelaxedInstance:
    """``(A Z) * (B Z) = mu (C Z) + err`` with ``Z = [public, witness, mu]``."""
    public: list
    witness: list
    mu: int
    err: list

    def z(self) -> list:
        return list(self.public) + list(self.witness) + [self.mu]

    @classmethod
    def from_assignment(cls, asg: Assignment, rows: int) -> "RelaxedInstance":
        return cls(list(asg.public), list(asg.witness), 1, [0] * rows)


class ConstraintSystem:
    def __init__(self):
        self.a: list = []
        self.b: list = []
        self.c: list = []
        self.num_public = 0
        self.num_witness = 0
        self.public_names: list = []
        self.witness_names: dict = {}
        self.hints: list = []
        self.lookups: list = []          # (column, table name)
        self.tables: dict = {"byte": (0, 255)}
        self.lookup_rows = 0              # rows charged for table lookups

    # -- allocation -------------------------------------------------------
    def public(self, name: str = "") -> Var:
        if self.num_witness:
            raise RuntimeError("public inputs must be allocated before any witness")
        v = Var(self.num_public)
        self.num_public += 1
        self.public_names.append(name)
        return v

    def publics(self, n: int, name: str = "") -> list:
        return [self.public(f"{name}[{i}]") for i in range(n)]

    def witness(self, name: str = "") -> Var:
        v = Var(self.num_public + self.num_witness)
        self.num_witness += 1
        if name:
            self.witness_names[v.index] = name
        return v

    def witnesses(self, n: int, name: str = "") -> list:
        return [self.witness(f"{name}[{i}]" if name else "") for i in range(n)]

    @property
    def num_vars(self) -> int:
        return self.num_public + self.num_witness

    @property
    def num_rows(self) -> int:
        return len(self.a)

    @property
    def cost_rows(self) -> int:
        """Rows plus one charged row per table lookup."""
        return len(self.a) + self.lookup_rows

    # -- constraints -------------------------------------------------------
    def _row(self, x) -> tuple:
        lc = LC.of(x)
        n = self.num_vars
        for k in lc.terms:
            if k != ONE and not 0 <= k < n:
                raise IndexOutOfRange(f"column {k} not allocated")
        return tuple(lc.terms.items())

    def enforce(self, a, b, c) -> int:
        """Append the row ``a * b = c``; returns its index."""
        self.a.append(self._row(a))
        self.b.append(self._row(b))
        self.c.append(self._row(c))
        return len(self.a) - 1

    def enforce_zero(self, x) -> int:
        return self.enforce(x, ONE_LC, 0)

    def hint(self, fn, outputs, inputs) -> None:
        self.hints.append(Hint(fn, [o.index if isinstance(o, Var) else o for o in outputs],
                               [LC.of(i) for i in inputs]))

    def lookup(self, var: Var, table: str = "byte") -> None:
        self.lookups.append((var.index, table))
        self.lookup_rows += 1

    def materialize(self, x, name: str = "") -> Var:
        """Bind a linear combination to a fresh witness with one row."""
        lc = LC.of(x)
        v = self.witness(name)
        self.hint(lambda val: (val,), [v], [lc])
        self.enforce(lc, ONE_LC, v)
        return v

    def mul(self, x, y, name: str = "") -> Var:
        v = self.witness(name)
        self.hint(lambda p, q: (p * q % P,), [v], [x, y])
        self.enforce(x, y, v)
        return v

    # -- witness generation --------------------------------------------------
    def solve(self, public, inputs: dict, overrides: dict | None = None) -> Assignment:
        """Run the hints. ``inputs`` maps Var or index -> value for free witnesses.

        ``overrides`` replaces hint outputs after they are produced, which lets
        tests build adversarial witnesses that stay consistent downstream.
        """
        if len(public) != self.num_public:
            raise ShapeMismatch(f"expected {self.num_public} public values, got {len(public)}")
        z = [None] * (self.num_vars + 1)
        z[-1] = 1
        for i, v in enumerate(public):
            z[i] = int(v) % P
        for k, v in inputs.items():
            z[k.index if isinstance(k, Var) else k] = int(v) % P
        ov = {(k.index if isinstance(k, Var) else k): int(v) % P for k, v in (overrides or {}).items()}
        for h in self.hints:
            vals = h.fn(*[lc.evaluate(z) for lc in h.inputs])
            for idx, val in zip(h.outputs, vals):
                z[idx] = ov.get(idx, val % P)
        missing = [i for i in range(self.num_vars) if z[i] is None]
        if missing:
            raise ShapeMismatch(f"{len(missing)} witness values unassigned (first column {missing[0]})")
        return Assignment(z[:self.num_public], z[self.num_public:self.num_vars])

    # -- evaluation --------------------------------------------------------
    def _check_shape(self, public, witness):
        if len(public) != self.num_public or len(witness) != self.num_witness:
            raise ShapeMismatch(
                f"instance has {len(public)}+{len(witness)} entries, system expects "
                f"{self.num_public}+{self.num_witness}")

    def products(self, z) -> tuple:
        """(A Z, B Z, C Z) as lists of canonical ints."""
        def mv(rows):
            return [sum([c * z[j] for j, c in row]) % P for row in rows]
        return mv(self.a), mv(self.b), mv(self.c)

    def first_violation(self, asg: Assignment):
        """Index of the first unsatisfied row, -2 for a failed lookup, or None."""
        self._check_shape(asg.public, asg.witness)
        z = asg.z()
        for i, (ra, rb, rc) in enumerate(zip(self.a, self.b, self.c)):
            av = sum([c * z[j] for j, c in ra])
            if av % P == 0:
                if sum([c * z[j] for j, c in rc]) % P:
                    return i
                continue
            bv = sum([c * z[j] for j, c in rb])
            if (av * bv - sum([c * z[j] for j, c in rc])) % P:
                return i
        for col, table in self.lookups:
            lo, hi = self.tables[table]
            if not lo <= z[col] <= hi:
                return -2
        return None

    def is_satisfied(self, asg: Assignment) -> bool:
        return self.first_violation(asg) is None

    def is_relaxed_satisfied(self, inst: RelaxedInstance) -> bool:
        self._check_shape(inst.public, inst.witness)
        if len(inst.err) != self.num_rows:
            raise ShapeMismatch(f"err has {len(inst.err)} entries for {self.num_rows} rows")
        az, bz, cz = self.products(inst.z())
        mu = inst.mu % P
        for x, y, w, e in zip(az, bz, cz, inst.err):
            if (x * y - mu * w - e) % P:
                return False
        return True

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        n = self.num_vars

        def enc(row):
            return [[n if j == ONE else j, hex(c)] for j, c in row]

        return {"version": 1, "num_public": self.num_public, "num_witness": self.num_witness,
                "rows": [{"a": enc(a), "b": enc(b), "c": enc(c)} for a, b, c in zip(self.a, self.b, self.c)],
                "lookups": [[col, t] for col, t in self.lookups]}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintSystem":
        cs = cls()
        cs.num_public = d["num_public"]
        cs.num_witness = d["num_witness"]
        cs.public_names = [""] * cs.num_public
        n = cs.num_public + cs.num_witness

        def dec(row):
            return tuple((ONE if j == n else j, int(c, 16)) for j, c in row)

        for r in d["rows"]:
            cs.a.append(dec(r["a"]))
            cs.b.append(dec(r["b"]))
            cs.c.append(dec(r["c"]))
        cs.lookups = [(c, t) for c, t in d.get("lookups", [])]
        cs.lookup_rows = len(cs.lookups)
        return cs


ONE_LC = LC({ONE: 1})


def enforce(cs: ConstraintSystem, row) -> int:
    a, b, c = row
    return cs.enforce(a, b, c)


def is_satisfied(cs: ConstraintSystem, asg: Assignment):
    """(True, None) or (False, first failing row index)."""
    bad = cs.first_violation(asg)
    return bad is None, bad


def is_relaxed_satisfied(cs: ConstraintSystem, inst: RelaxedInstance) -> bool:
    return cs.is_relaxed_satisfied(inst)
