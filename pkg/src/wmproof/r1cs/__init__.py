"""Constraint systems and gadgets."""
from .gadgets import (BITWISE, BYTE_LOOKUP, field_flag, gadget_bit_decompose, gadget_compare,
                      gadget_flag, gadget_hash, gadget_merkle, gadget_sum, hash_lc, is_equal_const,
                      sign_bit_compare)
from .system import (LC, ONE, ONE_LC, Assignment, ConstraintSystem, RelaxedInstance, Var, enforce,
                     is_relaxed_satisfied, is_satisfied)

__all__ = [
    "BITWISE", "BYTE_LOOKUP", "field_flag", "gadget_bit_decompose", "gadget_compare", "gadget_flag",
    "gadget_hash", "gadget_merkle", "gadget_sum", "hash_lc", "is_equal_const", "sign_bit_compare",
    "LC", "ONE", "ONE_LC", "Assignment", "ConstraintSystem", "RelaxedInstance", "Var", "enforce",
    "is_relaxed_satisfied", "is_satisfied",
]
