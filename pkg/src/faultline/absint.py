"""Interval abstract interpreter for FIC.

Values are non-wrapped integer intervals ``(lo, hi)``; ``None`` is bottom.
Any operation that may leave its type's range yields the full range of
that type, unless the whole interval lies in a single wrap window.

Storage keys follow the concrete interpreter's cells. Scalars are keyed
``(root, field, None)``; arrays are keyed ``(root, field, "*")`` and hold an
:class:`ArrVal` with explicit cells (strong updates on singleton indexes)
over a summary interval (weak updates otherwise).  Calls are analyzed by
inlining up to ``max_depth`` nested frames.

Recorded states (``AbsResult.state_before``) use ``("L", func, name)`` roots
for locals of the frame executing the statement.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from . import semantics as S
from .frontend import cfg as C
from .instrument import FaultConfig
from .interp import lower_cached

PROVEN, UNPROVEN, UNREACHABLE = "proven", "unproven", "unreachable"


# ---------------------------------------------------------------- intervals


def full(ty: A.IntType):
    return (ty.min, ty.max)


def join(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return (min(a[0], b[0]), max(a[1], b[1]))


def meet(a, b):
    if a is None or b is None:
        return None
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


def leq(a, b) -> bool:
    if a is None:
        return True
    if b is None:
        return False
    return b[0] <= a[0] and a[1] <= b[1]


def convert(itv, ty: A.IntType):
    """Abstract two's-complement conversion into `ty`."""
    if itv is None:
        return None
    lo, hi = itv
    if ty.min <= lo and hi <= ty.max:
        return itv
    span = 1 << ty.width
    if hi - lo < span:
        a, b = ty.wrap(lo), ty.wrap(hi)
        if a <= b and b - a == hi - lo:
            return (a, b)
    return full(ty)


def truth(itv) -> Optional[bool]:
    """True / False when the interval decides a condition, else None."""
    if itv is None:
        return None
    if itv == (0, 0):
        return False
    if itv[0] > 0 or itv[1] < 0:
        return True
    return None


def _next_pow2_minus1(v: int) -> int:
    return (1 << v.bit_length()) - 1


def _corners(fn, a, b):
    vals = [fn(x, y) for x in a for y in b]
    return (min(vals), max(vals))


def arith(op: str, a, b, ty: A.IntType):
    """Interval counterpart of semantics.arith on already-converted operands."""
    if a is None or b is None:
        return None
    if op == "+":
        r = (a[0] + b[0], a[1] + b[1])
    elif op == "-":
        r = (a[0] - b[1], a[1] - b[0])
    elif op == "*":
        r = _corners(lambda x, y: x * y, a, b)
    elif op == "/":
        r = None
        if a[0] <= 0 <= a[1] or b[0] <= 0 <= b[1]:
            r = (0, 0)
        for part in ((b[0], min(b[1], -1)), (max(b[0], 1), b[1])):
            if part[0] <= part[1]:
                r = join(r, _corners(S.c_div, a, part))
    elif op == "%":
        r = a if b[0] <= 0 <= b[1] else None
        m = max(abs(b[0]), abs(b[1])) - 1
        if m >= 0 and not (b == (0, 0)):
            lo = 0 if a[0] >= 0 else max(a[0], -m)
            hi = 0 if a[1] <= 0 else min(a[1], m)
            r = join(r, (lo, hi))
    elif op == "&":
        if a[0] >= 0 and b[0] >= 0:
            r = (0, min(a[1], b[1]))
        elif a[0] == a[1] and a[0] >= 0:
            r = (0, a[0])
        elif b[0] == b[1] and b[0] >= 0:
            r = (0, b[0])
        elif a[0] == a[1] and b[0] == b[1]:
            r = (S.arith("&", a[0], b[0], ty),) * 2
        else:
            return full(ty)
    elif op in ("|", "^"):
        if a[0] == a[1] and b[0] == b[1]:
            v = S.arith(op, a[0], b[0], ty)
            r = (v, v)
        elif a[0] >= 0 and b[0] >= 0:
            lo = max(a[0], b[0]) if op == "|" else 0
            r = (lo, _next_pow2_minus1(max(a[1], b[1])))
        else:
            return full(ty)
    elif op == "<<":
        if b[0] < 0 or b[1] > 31:
            b = (0, 31)
        if a[0] < 0:
            return full(ty)
        r = (a[0] << b[0], a[1] << b[1])
    elif op == ">>":
        if b[0] < 0 or b[1] > 31:
            b = (0, 31)
        r = _corners(lambda x, y: x >> y, a, b)
    else:
        raise ValueError(op)
    return convert(r, ty)


def compare(op: str, a, b):
    if a is None or b is None:
        return None
    lo_a, hi_a = a
    lo_b, hi_b = b
    if op == "<":
        t, f = hi_a < lo_b, lo_a >= hi_b
    elif op == "<=":
        t, f = hi_a <= lo_b, lo_a > hi_b
    elif op == ">":
        t, f = lo_a > hi_b, hi_a <= lo_b
    elif op == ">=":
        t, f = lo_a >= hi_b, hi_a < lo_b
    elif op == "==":
        t, f = lo_a == hi_a == lo_b == hi_b, hi_a < lo_b or hi_b < lo_a
    else:
        t, f = hi_a < lo_b or hi_b < lo_a, lo_a == hi_a == lo_b == hi_b
    if t:
        return (1, 1)
    if f:
        return (0, 0)
    return (0, 1)


_NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
_SWAP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


def refine_cmp(op: str, x, c):
    """Narrow x so that `x op y` can hold for some y in c."""
    if x is None or c is None:
        return None
    if op == "<":
        return meet(x, (x[0], c[1] - 1))
    if op == "<=":
        return meet(x, (x[0], c[1]))
    if op == ">":
        return meet(x, (c[0] + 1, x[1]))
    if op == ">=":
        return meet(x, (c[0], x[1]))
    if op == "==":
        return meet(x, c)
    if c[0] == c[1]:
        if x == c:
            return None
        if x[0] == c[0]:
            return (x[0] + 1, x[1])
        if x[1] == c[0]:
            return (x[0], x[1] - 1)
    return x


# ---------------------------------------------------------------- arrays


class ArrVal:
    __slots__ = ("summary", "cells", "length")

    def __init__(self, summary, cells, length):
        self.summary = summary
        self.cells = cells
        self.length = length

    def read(self, idx):
        lo, hi = max(idx[0], 0), min(idx[1], self.length - 1)
        if lo > hi:
            return None
        r = None
        explicit = 0
        for i, v in self.cells.items():
            if lo <= i <= hi:
                r = join(r, v)
                explicit += 1
        if explicit < hi - lo + 1:
            r = join(r, self.summary)
        return r

    def write(self, idx, v):
        lo, hi = max(idx[0], 0), min(idx[1], self.length - 1)
        if lo > hi:
            return self
        cells = dict(self.cells)
        if idx[0] == idx[1]:
            cells[lo] = v
            return ArrVal(self.summary, cells, self.length)
        for i in list(cells):
            if lo <= i <= hi:
                cells[i] = join(cells[i], v)
        return ArrVal(join(self.summary, v), cells, self.length)

    def join(self, o: "ArrVal") -> "ArrVal":
        cells = {}
        for i in set(self.cells) | set(o.cells):
            cells[i] = join(self.cells.get(i, self.summary), o.cells.get(i, o.summary))
        return ArrVal(join(self.summary, o.summary), cells, self.length)

    def widen(self, o: "ArrVal", w) -> "ArrVal":
        cells = {}
        for i in set(self.cells) | set(o.cells):
            cells[i] = w(self.cells.get(i, self.summary), o.cells.get(i, o.summary))
        return ArrVal(w(self.summary, o.summary), cells, self.length)

    def leq(self, o: "ArrVal") -> bool:
        if not leq(self.summary, o.summary):
            return False
        for i in set(self.cells) | set(o.cells):
            if not leq(self.cells.get(i, self.summary), o.cells.get(i, o.summary)):
                return False
        return True

    def __eq__(self, o):
        return isinstance(o, ArrVal) and self.leq(o) and o.leq(self)

    def __repr__(self):
        return f"ArrVal({self.summary}, {self.cells})"


# ---------------------------------------------------------------- results


@dataclass
class AbsResult:
    state_before: dict = field(default_factory=dict)  # sid -> env
    assertion_status: dict = field(default_factory=dict)
    dead_blocks: set = field(default_factory=set)  # (function, block id)
    counter_max: dict = field(default_factory=dict)
    timed_out: bool = False
    instr_dead: set = field(default_factory=set)  # sids never reached
    cell_index: dict = field(default_factory=dict)  # sid -> {expr id: index interval}

    def value(self, sid: int, cell):
        """Interval of a concrete cell key in the state before `sid`."""
        env = self.state_before.get(sid)
        if env is None:
            return None
        root, fld, idx = cell
        if idx is None:
            return env.get(cell)
        arr = env.get((root, fld, "*"))
        if arr is None:
            return None
        return arr.read((idx, idx))

    def status(self, aid: str) -> str:
        return self.assertion_status.get(aid, UNREACHABLE)


class _Timeout(Exception):
    pass


@dataclass
class _Frame:
    depth: int
    func: A.Function
    ptr: dict


# ---------------------------------------------------------------- analyzer


class Analyzer:
    def __init__(self, p: A.TypedProgram, cfg: Optional[FaultConfig] = None, budget: float = 10.0,
                 inputs=None, max_depth: int = 8, widen_delay: int = 3):
        self.p = p
        self.cfg = cfg or FaultConfig()
        self.cfgs = lower_cached(p)
        self.funcs = {f.name: f for f in p.functions}
        self.deadline = time.monotonic() + budget if budget is not None else None
        self.inputs = dict(inputs or {})
        self.max_depth = max_depth
        self.widen_delay = widen_delay
        self.res = AbsResult()
        self.outcomes: dict = {}
        self.reached: set = set()
        self.thresholds = self._thresholds()
        self.types: dict = {}
        self.rec_sid = None
        self.rpo = {name: self._rpo(c) for name, c in self.cfgs.items()}

    # -- setup -------------------------------------------------------------------------

    def _thresholds(self):
        consts = set()
        for f in self.p.functions:
            for s in A.walk_stmts(f.body):
                for e in A.stmt_exprs(s):
                    for x in A.walk_expr(e):
                        if isinstance(x, A.Const):
                            consts.add(x.value)
        ts = set()
        for c in consts:
            ts.update((c - 1, c, c + 1))
        for t in A.INT_TYPES.values():
            ts.update((t.min, t.max))
        return sorted(ts)

    def _rpo(self, cfg: C.Cfg):
        succ = {b.id: [s for s, _ in b.succs] for b in cfg.blocks.values()}
        order = C.reverse_postorder(cfg.entry, succ)
        return {b: i for i, b in enumerate(order)}

    def check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout()

    def input_default(self, name: str, ty: A.IntType):
        v = self.inputs.get(name)
        if v is None:
            return full(ty)
        if isinstance(v, tuple):
            return meet(v, full(ty)) or full(ty)
        v = ty.wrap(v)
        return (v, v)

    def initial_value(self, root, fld, ty):
        """Default content of storage when first created."""
        if isinstance(ty, A.ArrayType):
            if root[0] == "I":
                cells = {}
                prefix = S.input_name(root[1], fld, None)
                for name, v in self.inputs.items():
                    if name.startswith(prefix + "[") and name.endswith("]"):
                        try:
                            i = int(name[len(prefix) + 1:-1])
                        except ValueError:
                            continue
                        if 0 <= i < ty.length:
                            cells[i] = self.input_default(name, ty.elem)
                return ArrVal(full(ty.elem), cells, ty.length)
            return ArrVal((0, 0), {}, ty.length)
        if root[0] == "I":
            return self.input_default(S.input_name(root[1], fld, None), ty)
        return (0, 0)

    def create(self, env: dict, root, ty):
        """Add fresh storage for an object of type `ty` rooted at `root`."""
        if isinstance(ty, A.RecordType):
            for fname, ftype in self.p.record(ty.name).fields:
                self._create_cell(env, root, fname, ftype)
        else:
            self._create_cell(env, root, None, ty)

    def _create_cell(self, env, root, fld, ty):
        if isinstance(ty, A.ArrayType):
            env[(root, fld, "*")] = self.initial_value(root, fld, ty)
            self.types[(root, fld, "*")] = ty.elem
        else:
            env[(root, fld, None)] = self.initial_value(root, fld, ty)
            self.types[(root, fld, None)] = ty

    # -- environment ops ---------------------------------------------------------------

    @staticmethod
    def env_join(a, b):
        if a is None:
            return b
        if b is None:
            return a
        out = dict(a)
        for k, v in b.items():
            if k in out:
                w = out[k]
                out[k] = w.join(v) if isinstance(w, ArrVal) else join(w, v)
            else:
                out[k] = v
        return out

    @staticmethod
    def env_leq(a, b) -> bool:
        if a is None:
            return True
        if b is None:
            return False
        for k, v in a.items():
            w = b.get(k)
            if w is None:
                return False
            if isinstance(v, ArrVal):
                if not v.leq(w):
                    return False
            elif not leq(v, w):
                return False
        return True

    def widen_itv(self, key, old, new):
        if old is None:
            return new
        if new is None:
            return old
        ty = self.types.get(key)
        tmin, tmax = (ty.min, ty.max) if ty is not None else (self.thresholds[0], self.thresholds[-1])
        lo, hi = old
        if new[0] < lo:
            cands = [t for t in self.thresholds if t <= new[0] and t >= tmin]
            lo = max(cands) if cands else tmin
        if new[1] > hi:
            cands = [t for t in self.thresholds if t >= new[1] and t <= tmax]
            hi = min(cands) if cands else tmax
        return (lo, hi)

    def env_widen(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        out = dict(a)
        for k, v in b.items():
            w = out.get(k)
            if w is None:
                out[k] = v
            elif isinstance(w, ArrVal):
                out[k] = w.widen(v, lambda x, y, k=k: self.widen_itv(k, x, y))
            else:
                out[k] = self.widen_itv(k, w, v)
        return out

    # -- lvalues ------------------------------------------------------------------------

    def root(self, v: A.Var, fr: _Frame):
        if v.scope == "global":
            return ("G", v.name)
        if v.scope == "param" and isinstance(v.ty, A.PointerType):
            return fr.ptr[v.name]
        return ("L", fr.depth, fr.func.name, v.name)

    def place(self, e: A.Expr, env, fr):
        """(key, index interval or None, array length or None)."""
        if isinstance(e, A.Var):
            return (self.root(e, fr), None, None), None, None
        if isinstance(e, A.Field):
            return (self.root(e.base, fr), e.name, None), None, None
        if isinstance(e, A.Index):
            if isinstance(e.base, A.Var):
                r, fld = self.root(e.base, fr), None
            else:
                r, fld = self.root(e.base.base, fr), e.base.name
            t = e.base.ty.target if isinstance(e.base.ty, A.PointerType) else e.base.ty
            idx = self.eval(e.index, env, fr)
            if self.rec_sid is not None and idx is not None:
                k = (self.rec_sid, id(e))
                self.res.cell_index[k] = join(self.res.cell_index.get(k), idx)
            return (r, fld, "*"), idx, t.length
        raise TypeError(e)

    def read(self, e, env, fr):
        key, idx, length = self.place(e, env, fr)
        if length is None:
            v = env.get(key)
            return v if v is not None else full(e.ty)
        if idx is None:
            return None
        if idx[1] < 0 or idx[0] >= length:
            return (0, 0)
        arr = env.get(key)
        r = arr.read(idx) if arr is not None else full(e.ty)
        if idx[0] < 0 or idx[1] >= length:
            r = join(r, (0, 0))  # out-of-bounds reads yield 0
        return r

    def write(self, e, v, env, fr):
        key, idx, length = self.place(e, env, fr)
        v = convert(v, e.ty)
        if length is None:
            env[key] = v
            return
        if idx is None:
            return
        arr = env.get(key)
        if arr is not None:
            env[key] = arr.write(idx, v)

    # -- expressions ---------------------------------------------------------------------

    def eval(self, e, env, fr):
        if isinstance(e, A.Const):
            return (e.value, e.value)
        if isinstance(e, (A.Var, A.Field, A.Index)):
            return self.read(e, env, fr)
        if isinstance(e, A.Binary):
            if e.op in A.LOGICAL:
                a = self.eval(e.left, env, fr)
                ta = truth(a)
                if e.op == "&&":
                    if ta is False:
                        return (0, 0)
                    env_r = self.refine(env, e.left, True, fr)
                    b = self.eval(e.right, env_r, fr) if env_r is not None else (0, 0)
                    tb = truth(b)
                    if ta is True and tb is not None:
                        return (1, 1) if tb else (0, 0)
                    if tb is False:
                        return (0, 0)
                    return (0, 1)
                if ta is True:
                    return (1, 1)
                env_r = self.refine(env, e.left, False, fr)
                b = self.eval(e.right, env_r, fr) if env_r is not None else (1, 1)
                tb = truth(b)
                if ta is False and tb is not None:
                    return (1, 1) if tb else (0, 0)
                if tb is True:
                    return (1, 1)
                return (0, 1)
            a = self.eval(e.left, env, fr)
            b = self.eval(e.right, env, fr)
            if a is None or b is None:
                return None
            if e.op in A.COMPARISONS:
                return compare(e.op, convert(a, e.operand_ty), convert(b, e.operand_ty))
            if e.op in ("<<", ">>"):
                return arith(e.op, convert(a, e.ty), b, e.ty)
            return arith(e.op, convert(a, e.operand_ty), convert(b, e.operand_ty), e.ty)
        if isinstance(e, A.Unary):
            a = self.eval(e.operand, env, fr)
            if a is None:
                return None
            if e.op == "!":
                t = truth(a)
                return (0, 1) if t is None else ((0, 0) if t else (1, 1))
            a = convert(a, e.ty)
            if e.op == "-":
                return convert((-a[1], -a[0]), e.ty)
            return convert((-a[1] - 1, -a[0] - 1), e.ty)
        if isinstance(e, A.Cast):
            return convert(self.eval(e.operand, env, fr), e.ty)
        if isinstance(e, A.Fault):
            inner = convert(self.eval(e.expr, env, fr), e.ty)
            v = self.cfg.value_of(e.site)
            if v == "sym":
                return full(e.ty) if inner is not None else None
            if v == 0 or inner is None:
                return inner
            return arith("^", inner, (e.ty.wrap(v), e.ty.wrap(v)), e.ty)
        if isinstance(e, A.SymInput):
            if e.lo is not None:
                return (e.lo, e.hi)
            return self.input_default(e.name, e.ty) if e.name in self.inputs else full(e.ty)
        raise TypeError(e)

    # -- refinement ----------------------------------------------------------------------

    def _transparent(self, e, ty) -> bool:
        """Conversion of e into ty is the identity on e's range."""
        t = e.ty
        return isinstance(t, A.IntType) and ty.min <= t.min and t.max <= ty.max

    def _refine_place(self, env, e, fn, fr):
        if not isinstance(e, (A.Var, A.Field, A.Index)):
            return env
        key, idx, length = self.place(e, env, fr)
        if length is None:
            cur = env.get(key)
            if cur is None:
                return env
            new = fn(cur)
            if new is None:
                return None
            if new != cur:
                env = dict(env)
                env[key] = new
            return env
        if idx is None or idx[0] != idx[1] or not 0 <= idx[0] < length:
            return env
        lo = idx[0]
        arr = env.get(key)
        if arr is None:
            return env
        cur = arr.read((lo, lo))
        new = fn(cur)
        if new is None:
            return None
        if new != cur:
            env = dict(env)
            env[key] = arr.write((lo, lo), new)
        return env

    def refine(self, env, e, want: bool, fr):
        """Restrict env to states where truth(e) == want (None if impossible)."""
        if env is None:
            return None
        v = self.eval(e, env, fr)
        t = truth(v)
        if v is None or (t is not None and t != want):
            return None
        if isinstance(e, A.Unary) and e.op == "!":
            return self.refine(env, e.operand, not want, fr)
        if isinstance(e, A.Binary) and e.op in A.LOGICAL:
            conj = (e.op == "&&") == want
            if conj:
                # both sides take the same truth value
                env = self.refine(env, e.left, want, fr)
                return self.refine(env, e.right, want, fr)
            left_only = self.refine(env, e.left, want, fr)
            right = self.refine(self.refine(env, e.left, not want, fr), e.right, want, fr)
            return self.env_join(left_only, right)
        if isinstance(e, A.Binary) and e.op in A.COMPARISONS:
            op = e.op if want else _NEGATE[e.op]
            ty = e.operand_ty
            lv = convert(self.eval(e.left, env, fr), ty)
            rv = convert(self.eval(e.right, env, fr), ty)
            if self._transparent(e.left, ty):
                env = self._refine_place(env, e.left, lambda x: refine_cmp(op, x, rv), fr)
            if env is not None and self._transparent(e.right, ty):
                env = self._refine_place(env, e.right, lambda x: refine_cmp(_SWAP[op], x, lv), fr)
            return env
        if isinstance(e, A.Fault) and self.cfg.value_of(e.site) == 0:
            return self.refine(env, e.expr, want, fr)
        if isinstance(e, (A.Var, A.Field, A.Index)):
            zero = (0, 0)
            return self._refine_place(env, e, (lambda x: refine_cmp("!=", x, zero)) if want else (lambda x: meet(x, zero)), fr)
        return env

    # -- transfer ------------------------------------------------------------------------

    def canon(self, env, fr: _Frame) -> dict:
        out = {}
        for (root, fld, tag), v in env.items():
            if root[0] == "L":
                if root[1] != fr.depth:
                    continue
                root = ("L", root[2], root[3])
            out[(root, fld, tag)] = v
        return out

    def record(self, sid, env, fr):
        c = self.canon(env, fr)
        prev = self.res.state_before.get(sid)
        self.res.state_before[sid] = c if prev is None else self.env_join(prev, c)

    def transfer(self, ins: C.Instr, env, fr, rec: bool):
        """State after instruction `ins` (None if the path ends there)."""
        self.rec_sid = ins.sid if rec else None
        if rec:
            self.record(ins.sid, env, fr)
        k = ins.kind
        if k == C.ASSIGN:
            v = self.eval(ins.value, env, fr)
            if v is None:
                return None
            env = dict(env)
            self.write(ins.target, v, env, fr)
            return env
        if k == C.ASSERT:
            v = self.eval(ins.ref.cond, env, fr)
            if rec:
                st = PROVEN if truth(v) is True else UNPROVEN
                prev = self.outcomes.get(ins.ref.id)
                self.outcomes[ins.ref.id] = UNPROVEN if UNPROVEN in (prev, st) else st
            return self.refine(env, ins.ref.cond, True, fr)
        if k == C.COUNTER:
            key = (("G", f"fault_{ins.site}_counter"), None, None)
            env = dict(env)
            env[key] = convert(arith("+", env.get(key, (0, 0)), (1, 1), A.U32), A.U32)
            return env
        if k == C.CALL:
            if ins.func == "__print":
                v = self.eval(ins.args[0], env, fr)
                return env if v is not None else None
            return self.call(ins, env, fr, rec)
        raise TypeError(ins)

    def call(self, ins, env, fr, rec):
        f = self.funcs[ins.func]
        env = dict(env)
        if fr.depth + 1 > self.max_depth:
            return self.havoc(ins, f, env, fr)
        callee = _Frame(fr.depth + 1, f, {})
        for q, a in zip(f.params, ins.args):
            if isinstance(q.ty, A.PointerType):
                callee.ptr[q.name] = self.root(a, fr)
        vals = [None if isinstance(q.ty, A.PointerType) else self.eval(a, env, fr) for q, a in zip(f.params, ins.args)]
        if any(v is None for q, v in zip(f.params, vals) if not isinstance(q.ty, A.PointerType)):
            return None
        # fresh frame: drop stale locals of an earlier activation at this depth
        for k in [k for k in env if k[0][0] == "L" and k[0][1] == callee.depth]:
            del env[k]
        for q, v in zip(f.params, vals):
            if v is not None:
                key = (("L", callee.depth, f.name, q.name), None, None)
                env[key] = convert(v, q.ty)
                self.types[key] = q.ty
        for s in A.walk_stmts(f.body):
            if isinstance(s, A.Decl):
                self.create(env, ("L", callee.depth, f.name, s.name), s.ty)
        saved = self.rec_sid
        out, ret = self.run_function(self.cfgs[f.name], env, callee, rec)
        self.rec_sid = saved
        if out is None:
            return None
        out = {k: v for k, v in out.items() if not (k[0][0] == "L" and k[0][1] == callee.depth)}
        if ins.target is not None:
            self.write(ins.target, ret if ret is not None else (0, 0), out, fr)
        return out

    def havoc(self, ins, f, env, fr):
        roots = {("G", g.name) for g in self.p.globals if g.kind in ("var", "counter")}
        for q, a in zip(f.params, ins.args):
            if isinstance(q.ty, A.PointerType):
                roots.add(self.root(a, fr))
        for k, v in list(env.items()):
            if k[0] in roots:
                ty = self.types.get(k)
                if isinstance(v, ArrVal):
                    env[k] = ArrVal(full(ty) if ty else (-(1 << 32), 1 << 32), {}, v.length)
                else:
                    env[k] = full(ty) if ty else v
        if ins.target is not None:
            self.write(ins.target, full(f.ret), env, fr)
        return env

    def run_function(self, cfg: C.Cfg, env, fr: _Frame, rec: bool):
        """Fixpoint over one function activation; returns (exit env, return interval)."""
        rpo = self.rpo[cfg.func.name]
        ins_state = {cfg.entry: env}
        visits: dict = {}
        heap = [(rpo[cfg.entry], cfg.entry)]
        queued = {cfg.entry}
        while heap:
            self.check_time()
            _, bid = heapq.heappop(heap)
            queued.discard(bid)
            for succ, out in self.block_out(cfg, bid, ins_state[bid], fr, False):
                if succ == cfg.exit:
                    continue
                old = ins_state.get(succ)
                if succ in cfg.loop_headers:
                    visits[succ] = visits.get(succ, 0) + 1
                    new = self.env_join(old, out) if visits[succ] <= self.widen_delay else self.env_widen(old, self.env_join(old, out))
                else:
                    new = self.env_join(old, out)
                if old is not None and self.env_leq(new, old):
                    continue
                ins_state[succ] = new
                if succ != cfg.exit and succ not in queued:
                    heapq.heappush(heap, (rpo.get(succ, 1 << 30), succ))
                    queued.add(succ)
        ins_state = self.narrow(cfg, ins_state, fr, rpo)
        exit_env, ret = None, None
        for bid in sorted(ins_state, key=lambda b: rpo.get(b, 1 << 30)):
            if bid == cfg.exit or ins_state[bid] is None:
                continue
            if rec:
                self.reached.add((cfg.func.name, bid))
            for succ, out in self.block_out(cfg, bid, ins_state[bid], fr, rec):
                if succ == cfg.exit and out is not None:
                    exit_env = self.env_join(exit_env, out[0])
                    ret = join(ret, out[1])
        return exit_env, ret

    def narrow(self, cfg, ins_state, fr, rpo):
        """Two descending (Jacobi) iterations from the post-fixpoint."""
        entry_env = ins_state[cfg.entry]
        for _ in range(2):
            new_state = {cfg.entry: entry_env}
            for bid, env in ins_state.items():
                if env is None or bid == cfg.exit:
                    continue
                for succ, out in self.block_out(cfg, bid, env, fr, False):
                    if succ == cfg.exit:
                        continue
                    new_state[succ] = self.env_join(new_state.get(succ), out)
            new_state[cfg.exit] = ins_state.get(cfg.exit)
            ins_state = new_state
        return ins_state

    def block_out(self, cfg, bid, env, fr, rec):
        """[(successor, out state)]; exit edges carry (env, return interval)."""
        b = cfg.blocks[bid]
        for ins in b.instrs:
            if env is None:
                return []
            self.check_time()
            env = self.transfer(ins, env, fr, rec)
        if env is None:
            return []
        t = b.term
        if t.kind == C.JUMP:
            return [(b.succs[0][0], env)]
        self.rec_sid = t.sid if rec else None
        if rec:
            self.record(t.sid, env, fr)
        if t.kind == C.BRANCH:
            out = []
            for succ, lab in b.succs:
                e2 = self.refine(env, t.value, lab == "T", fr)
                if e2 is not None:
                    out.append((succ, e2))
            return out
        if t.kind == C.RETURN:
            ret = None
            if t.value is not None and isinstance(cfg.func.ret, A.IntType):
                ret = convert(self.eval(t.value, env, fr), cfg.func.ret)
            return [(cfg.exit, (env, ret))]
        if t.kind == C.HALT:
            if rec:
                self.halts = self.env_join(getattr(self, "halts", None), env)
            return []
        raise TypeError(t)

    # -- driver ----------------------------------------------------------------------------

    def entry_env(self):
        env: dict = {}
        for g in self.p.globals:
            if g.kind == "fault":
                continue
            root = ("G", g.name)
            if g.init is not None and isinstance(g.ty, A.IntType):
                env[(root, None, None)] = (g.init[0], g.init[0])
                self.types[(root, None, None)] = g.ty
            elif g.init is not None:
                cells = {i: (v, v) for i, v in enumerate(g.init)}
                for i in range(len(g.init), g.ty.length):
                    cells[i] = (0, 0)
                env[(root, None, "*")] = ArrVal((0, 0), cells, g.ty.length)
                self.types[(root, None, "*")] = g.ty.elem
            else:
                self.create(env, root, g.ty)
        f = self.funcs[self.p.entry]
        fr = _Frame(0, f, {})
        for q in f.params:
            if isinstance(q.ty, A.PointerType):
                root = ("I", q.name)
                fr.ptr[q.name] = root
                self.create(env, root, q.ty.target)
            else:
                key = (("L", 0, f.name, q.name), None, None)
                env[key] = self.input_default(q.name, q.ty)
                self.types[key] = q.ty
        for s in A.walk_stmts(f.body):
            if isinstance(s, A.Decl):
                self.create(env, ("L", 0, f.name, s.name), s.ty)
        return env, fr

    def run(self) -> AbsResult:
        if self.p.entry is None:
            return self.res
        try:
            env, fr = self.entry_env()
            exit_env, _ = self.run_function(self.cfgs[self.p.entry], env, fr, True)
        except _Timeout:
            return AbsResult(timed_out=True, assertion_status={a.id: UNPROVEN for a in self.p.assertions})
        res = self.res
        for a in self.p.assertions:
            res.assertion_status[a.id] = self.outcomes.get(a.id, UNREACHABLE)
        all_sids = set()
        for name, c in self.cfgs.items():
            for b in c.blocks.values():
                if b.id != c.exit and (name, b.id) not in self.reached:
                    res.dead_blocks.add((name, b.id))
            for ins in c.instructions():
                if ins.sid >= 0:
                    all_sids.add(ins.sid)
        res.instr_dead = all_sids - set(res.state_before)
        finals = self.env_join(exit_env, getattr(self, "halts", None))
        for g in self.p.globals:
            if g.kind == "counter":
                key = (("G", g.name), None, None)
                m = (0, 0)
                for env in res.state_before.values():
                    m = join(m, env.get(key))
                if finals is not None:
                    m = join(m, finals.get(key))
                res.counter_max[g.name] = m
        return res


def analyze(p: A.TypedProgram, cfg: Optional[FaultConfig] = None, budget: float = 10.0, inputs=None, **kw) -> AbsResult:
    """Sound interval analysis of `p` under fault configuration `cfg`
    (symbolic sites range over their whole type)."""
    return Analyzer(p, cfg, budget, inputs, **kw).run()
