"""Concrete value semantics shared by the interpreter, the abstract
interpreter (for constant folding) and the symbolic engine.

Arithmetic is C-like: operands are converted to the operation type and the
result wraps around.  Partial operations are made total: ``x / 0 == 0``,
``x % 0 == x`` and shift amounts are taken modulo 32.
"""
from __future__ import annotations

from . import ast as A


def convert(v: int, ty: A.IntType) -> int:
    return ty.wrap(v)


def truthy(v: int) -> bool:
    return v != 0


def xor_fault(v: int, f: int, ty: A.IntType) -> int:
    return ty.wrap((v & ty.mask) ^ (f & ty.mask))


def c_div(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_rem(a: int, b: int) -> int:
    if b == 0:
        return a
    return a - b * c_div(a, b)


def compare(op: str, a: int, b: int) -> int:
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    return int(a >= b)


def arith(op: str, a: int, b: int, ty: A.IntType) -> int:
    """Binary non-logical, non-comparison operator on values already
    converted to `ty`."""
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    elif op == "/":
        r = c_div(a, b)
    elif op == "%":
        r = c_rem(a, b)
    elif op == "&":
        r = (a & ty.mask) & (b & ty.mask)
    elif op == "|":
        r = (a & ty.mask) | (b & ty.mask)
    elif op == "^":
        r = (a & ty.mask) ^ (b & ty.mask)
    elif op == "<<":
        r = a << (b & 31)
    elif op == ">>":
        r = a >> (b & 31)  # arithmetic for signed values, logical otherwise
    else:
        raise ValueError(op)
    return ty.wrap(r)


def binary(op: str, a: int, b: int, operand_ty: A.IntType, ty: A.IntType) -> int:
    """Evaluate a strict binary operator. Logical operators are handled by
    callers because they short-circuit."""
    if op in A.COMPARISONS:
        return compare(op, operand_ty.wrap(a), operand_ty.wrap(b))
    if op in ("<<", ">>"):
        return arith(op, ty.wrap(a), b, ty)
    return arith(op, operand_ty.wrap(a), operand_ty.wrap(b), ty)


def unary(op: str, a: int, ty: A.IntType) -> int:
    if op == "!":
        return int(a == 0)
    a = ty.wrap(a)
    if op == "-":
        return ty.wrap(-a)
    if op == "~":
        return ty.wrap(~a)
    raise ValueError(op)


def input_name(param: str, fld=None, idx=None, arrow=True) -> str:
    """Canonical name of an input cell reached through an entry parameter."""
    name = param
    if fld is not None:
        name += ("->" if arrow else ".") + fld
    if idx is not None:
        name += f"[{idx}]"
    return name
