"""Runtime-error assertions for array subscripts and pointer-parameter reads."""
from __future__ import annotations

import copy

from .. import ast as A
from ..errors import UnsupportedConstruct

RTE_ORIGINS = ("rte-index-bound", "rte-read-valid")


def _lt(a, b):
    return A.Binary("<", a, b, A.I32, A.arith_type(a.ty, b.ty))


def _le(a, b):
    return A.Binary("<=", a, b, A.I32, A.arith_type(a.ty, b.ty))


def bound_condition(idx: A.Expr, length: int) -> A.Expr:
    idx = copy.deepcopy(idx)
    upper = _lt(idx, A.Const(length, A.I32))
    if idx.ty.signed:
        return A.Binary("&&", _le(A.Const(0, A.I32), copy.deepcopy(idx)), upper, A.I32)
    return upper


def _array_len(base) -> int:
    t = base.ty
    if isinstance(t, A.PointerType):
        t = t.target
    return t.length


def _through_pointer(e) -> bool:
    """True when the access dereferences a pointer parameter."""
    if isinstance(e, A.Index):
        e = e.base
    if isinstance(e, A.Field):
        return e.arrow
    return isinstance(e, A.Var) and isinstance(e.ty, A.PointerType)


def _guarded(guard, cond):
    if guard is None:
        return cond
    return A.Binary("||", A.Unary("!", copy.deepcopy(guard), A.I32), cond, A.I32)


def _conj(a, b):
    if a is None:
        return b
    return A.Binary("&&", copy.deepcopy(a), b, A.I32)


def _collect(e, guard, out, read: bool):
    """Append (origin, condition) pairs for accesses in `e`, innermost first."""
    if e is None:
        return
    if isinstance(e, A.Binary) and e.op in A.LOGICAL:
        _collect(e.left, guard, out, True)
        side = e.left if e.op == "&&" else A.Unary("!", e.left, A.I32)
        _collect(e.right, _conj(guard, side), out, True)
        return
    if isinstance(e, A.Index):
        _collect(e.index, guard, out, True)
        cond = bound_condition(e.index, _array_len(e.base))
        out.append(("rte-index-bound", _guarded(guard, cond)))
        if read and _through_pointer(e):
            out.append(("rte-read-valid", _guarded(guard, bound_condition(e.index, _array_len(e.base)))))
        return
    if isinstance(e, A.Field):
        # pointer parameters are never null, so a scalar field read needs no check
        return
    if isinstance(e, (A.Unary, A.Cast)):
        _collect(e.operand, guard, out, True)
    elif isinstance(e, A.Binary):
        _collect(e.left, guard, out, True)
        _collect(e.right, guard, out, True)
    elif isinstance(e, A.Fault):
        _collect(e.expr, guard, out, True)


def _accesses(s: A.Stmt) -> list:
    out: list = []
    if isinstance(s, A.Decl):
        _collect(s.init, None, out, True)
    elif isinstance(s, A.Assign):
        _collect(s.value, None, out, True)
        _collect(s.target, None, out, False)
    elif isinstance(s, A.Call):
        for a in s.args:
            if isinstance(a.ty, A.IntType):
                _collect(a, None, out, True)
        _collect(s.target, None, out, False)
    elif isinstance(s, A.If):
        _collect(s.cond, None, out, True)
    elif isinstance(s, A.While):
        _check_no_access(s.cond, "array access in a loop condition")
    elif isinstance(s, A.For):
        if s.init is not None:
            _collect(s.init.value, None, out, True)
            _collect(s.init.target, None, out, False)
        _check_no_access(s.cond, "array access in a loop condition")
        if s.step is not None:
            _check_no_access(s.step.value, "array access in a for-loop step")
            _check_no_access(s.step.target, "array access in a for-loop step")
    elif isinstance(s, A.Return):
        _collect(s.value, None, out, True)
    # de-duplicate identical checks within one statement, keep first position
    uniq: list = []
    for item in out:
        if item not in uniq:
            uniq.append(item)
    return uniq


def _check_no_access(e, what):
    if e is not None and any(isinstance(x, A.Index) for x in A.walk_expr(e)):
        raise UnsupportedConstruct(f"{what} (hoist it into a local first)", e.loc)


class _Gen:
    def __init__(self):
        self.n = 0

    def body(self, stmts: list) -> list:
        out = []
        for s in stmts:
            if isinstance(s, A.AssertStmt) and s.ref.origin in RTE_ORIGINS:
                continue
            for origin, cond in _accesses(s):
                ref = A.AssertionRef(f"r{self.n}", cond, origin, loc=s.loc)
                self.n += 1
                out.append(A.AssertStmt(ref, loc=s.loc))
            if isinstance(s, A.If):
                s.then = self.body(s.then)
                if s.orelse is not None:
                    s.orelse = self.body(s.orelse)
            elif isinstance(s, (A.While, A.For, A.Block)):
                s.body = self.body(s.body)
            out.append(s)
        return out


def generate_rte_assertions(p: A.TypedProgram) -> A.TypedProgram:
    """Return a copy of `p` with index-bound and read-valid assertions.

    Existing RTE assertions are dropped and regenerated, so applying this
    twice gives the same program.
    """
    p = copy.deepcopy(p)
    gen = _Gen()
    for f in p.functions:
        f.body = gen.body(f.body)
    return p
