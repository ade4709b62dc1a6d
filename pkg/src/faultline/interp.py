"""Reference concrete interpreter over lowered FIC programs.

Memory is a map from cells to integers.  A cell is ``(root, field, index)``
where ``root`` is ``("G", name)`` for globals, ``("L", frame, name)`` for
locals and scalar parameters, and ``("I", param)`` for objects reached
through a pointer parameter of the entry function.  Unwritten input cells
read their value from the input map (missing names read as 0); every other
cell starts at 0.  Out-of-bounds reads yield 0 and out-of-bounds writes are
dropped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import ast as A
from . import semantics as S
from .frontend import cfg as C

NORMAL, VIOLATION, DETECTED, STEP_LIMIT = "normal", "violation", "detected", "step-limit"


class _Stop(Exception):
    def __init__(self, kind, assertion=None):
        self.kind = kind
        self.assertion = assertion


@dataclass
class Trace:
    kind: str
    assertion: Optional[str] = None
    visited: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    occurrences: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    faults: list = field(default_factory=list)  # (site, occurrence, value) actually applied
    ret: Optional[int] = None
    steps: int = 0


@dataclass
class Frame:
    fid: int
    func: A.Function
    ptr: dict = field(default_factory=dict)


def entry_inputs(p: A.TypedProgram) -> list:
    """Names of scalar entry parameters (pointer cells are created lazily)."""
    f = p.function(p.entry)
    return [q.name for q in f.params if isinstance(q.ty, A.IntType)]


class Machine:
    def __init__(self, p: A.TypedProgram, inputs=None, fault_trace=(), step_limit: int = 200_000,
                 cfgs: Optional[dict] = None, observer: Optional[Callable] = None, max_depth: int = 200):
        self.p = p
        self.cfgs = cfgs if cfgs is not None else lower_cached(p)
        self.inputs = dict(inputs or {})
        self.events = {(s, o): v for s, o, v in fault_trace}
        self.step_limit = step_limit
        self.observer = observer
        self.max_depth = max_depth
        self.mem: dict = {}
        self.trace = Trace(NORMAL)
        self.frames: list = []
        self.next_fid = 0
        self.funcs = {f.name: f for f in p.functions}
        self.gtypes = {g.name: g for g in p.globals}
        for g in p.globals:
            if g.init is not None:
                if isinstance(g.ty, A.ArrayType):
                    for i, v in enumerate(g.init):
                        self.mem[(("G", g.name), None, i)] = v
                else:
                    self.mem[(("G", g.name), None, None)] = g.init[0]

    # -- storage ----------------------------------------------------------------

    def root(self, v: A.Var):
        fr = self.frames[-1]
        if v.scope == "global":
            return ("G", v.name)
        if v.scope == "param" and isinstance(v.ty, A.PointerType):
            return fr.ptr[v.name]
        return ("L", fr.fid, v.name)

    def cell(self, e: A.Expr):
        """(cell, length or None) addressed by an lvalue-shaped expression."""
        if isinstance(e, A.Var):
            return (self.root(e), None, None), None
        if isinstance(e, A.Field):
            return (self.root(e.base), e.name, None), None
        if isinstance(e, A.Index):
            if isinstance(e.base, A.Var):
                r, fld = self.root(e.base), None
                t = e.base.ty
            else:
                r, fld = self.root(e.base.base), e.base.name
                t = e.base.ty
            if isinstance(t, A.PointerType):
                t = t.target
            i = self.eval(e.index)
            return (r, fld, i), t.length
        raise TypeError(e)

    def load(self, c, ty: A.IntType) -> int:
        v = self.mem.get(c)
        if v is not None:
            return v
        root, fld, idx = c
        if root[0] == "I":
            return ty.wrap(self.inputs.get(S.input_name(root[1], fld, idx), 0))
        return 0

    def read(self, e: A.Expr) -> int:
        c, length = self.cell(e)
        if length is not None and not 0 <= c[2] < length:
            return 0
        return self.load(c, e.ty)

    def write(self, e: A.Expr, v: int):
        c, length = self.cell(e)
        if length is not None and not 0 <= c[2] < length:
            return
        self.mem[c] = e.ty.wrap(v)

    # -- expressions ------------------------------------------------------------------

    def eval(self, e: A.Expr) -> int:
        if isinstance(e, A.Const):
            return e.value
        if isinstance(e, (A.Var, A.Field, A.Index)):
            return self.read(e)
        if isinstance(e, A.Binary):
            if e.op == "&&":
                return int(self.eval(e.left) != 0 and self.eval(e.right) != 0)
            if e.op == "||":
                return int(self.eval(e.left) != 0 or self.eval(e.right) != 0)
            return S.binary(e.op, self.eval(e.left), self.eval(e.right), e.operand_ty, e.ty)
        if isinstance(e, A.Unary):
            return S.unary(e.op, self.eval(e.operand), e.ty)
        if isinstance(e, A.Cast):
            return e.ty.wrap(self.eval(e.operand))
        if isinstance(e, A.Fault):
            v = e.ty.wrap(self.eval(e.expr))
            occ = self.trace.occurrences.get(e.site, 0)
            self.trace.occurrences[e.site] = occ + 1
            f = self.events.get((e.site, occ), 0)
            if f & e.ty.mask:
                self.trace.faults.append((e.site, occ, f))
                v = S.xor_fault(v, f, e.ty)
            return v
        if isinstance(e, A.SymInput):
            v = self.inputs.get(e.name)
            if v is None:
                v = e.lo if e.lo is not None and e.lo > 0 else 0
            return e.ty.wrap(v)
        raise TypeError(e)

    # -- statements -------------------------------------------------------------------

    def tick(self, sid: int):
        self.trace.steps += 1
        if self.trace.steps > self.step_limit:
            raise _Stop(STEP_LIMIT)
        self.trace.visited.append(sid)

    def call(self, f: A.Function, args: list, arg_exprs: list):
        if len(self.frames) >= self.max_depth:
            raise _Stop(STEP_LIMIT)
        caller = self.frames[-1] if self.frames else None
        fr = Frame(self.next_fid, f)
        self.next_fid += 1
        for q, a, ae in zip(f.params, args, arg_exprs):
            if isinstance(q.ty, A.PointerType):
                fr.ptr[q.name] = a
            else:
                self.mem[(("L", fr.fid, q.name), None, None)] = q.ty.wrap(a)
        self.frames.append(fr)
        try:
            return self.run_cfg(self.cfgs[f.name])
        finally:
            self.frames.pop()
            # drop the callee's locals so memory does not grow with call count
            dead = [c for c in self.mem if c[0][0] == "L" and c[0][1] == fr.fid]
            for c in dead:
                del self.mem[c]

    def arg_value(self, q: A.Param, a: A.Expr):
        if isinstance(q.ty, A.PointerType):
            return self.root(a)
        return self.eval(a)

    def exec(self, ins: C.Instr):
        k = ins.kind
        if k == C.ASSIGN:
            self.write(ins.target, self.eval(ins.value))
        elif k == C.CALL:
            if ins.func == "__print":
                self.trace.outputs.append(self.eval(ins.args[0]))
                return
            f = self.funcs[ins.func]
            args = [self.arg_value(q, a) for q, a in zip(f.params, ins.args)]
            r = self.call(f, args, ins.args)
            if ins.target is not None:
                self.write(ins.target, r if r is not None else 0)
        elif k == C.ASSERT:
            ok = self.eval(ins.ref.cond) != 0
            self.trace.verdicts.append((ins.ref.id, ok))
            if not ok:
                raise _Stop(VIOLATION, ins.ref.id)
        elif k == C.COUNTER:
            c = (("G", f"fault_{ins.site}_counter"), None, None)
            self.mem[c] = A.U32.wrap(self.mem.get(c, 0) + 1)
        else:
            raise TypeError(ins)

    def run_cfg(self, cfg: C.Cfg):
        b = cfg.blocks[cfg.entry]
        fname = cfg.func.name
        while True:
            for ins in b.instrs:
                if self.observer is not None:
                    self.observer(self, fname, ins.sid)
                self.tick(ins.sid)
                self.exec(ins)
            t = b.term
            if t.kind == C.JUMP:
                b = cfg.blocks[b.succs[0][0]]
                continue
            if self.observer is not None:
                self.observer(self, fname, t.sid)
            self.tick(t.sid)
            if t.kind == C.BRANCH:
                taken = self.eval(t.value) != 0
                b = cfg.blocks[b.succs[0][0] if taken else b.succs[1][0]]
            elif t.kind == C.RETURN:
                if t.value is None or isinstance(cfg.func.ret, A.PointerType):
                    return None
                return cfg.func.ret.wrap(self.eval(t.value))
            elif t.kind == C.HALT:
                raise _Stop(DETECTED)
            else:
                raise TypeError(t)

    def snapshot(self) -> dict:
        """Visible scalar state keyed as the abstract interpreter keys it."""
        fr = self.frames[-1]
        out = {}
        for (root, fld, idx), v in self.mem.items():
            if root[0] == "L":
                if root[1] != fr.fid:
                    continue
                root = ("L", fr.func.name, root[2])
            out[(root, fld, idx)] = v
        return out

    def run(self) -> Trace:
        f = self.funcs[self.p.entry]
        args = []
        for q in f.params:
            if isinstance(q.ty, A.PointerType):
                args.append(("I", q.name))
            else:
                args.append(q.ty.wrap(self.inputs.get(q.name, 0)))
        try:
            self.trace.ret = self.call(f, args, [None] * len(args))
        except _Stop as s:
            self.trace.kind, self.trace.assertion = s.kind, s.assertion
        for g in self.p.globals:
            if g.kind == "counter":
                self.trace.counters[g.name] = self.mem.get((("G", g.name), None, None), 0)
        return self.trace


_CFG_CACHE: dict = {}


def lower_cached(p: A.TypedProgram) -> dict:
    key = id(p)
    hit = _CFG_CACHE.get(key)
    if hit is not None and hit[0] is p:
        return hit[1]
    cfgs = C.lower_program(p)
    if len(_CFG_CACHE) > 64:
        _CFG_CACHE.clear()
    _CFG_CACHE[key] = (p, cfgs)
    return cfgs


def concrete_run(p: A.TypedProgram, inputs=None, fault_trace=(), step_limit: int = 200_000, **kw) -> Trace:
    """Run the entry function of `p` on concrete inputs, injecting the value
    v at the o-th evaluation of site s for every (s, o, v) in `fault_trace`."""
    if p.entry is None:
        return Trace(NORMAL)
    return Machine(p, inputs, fault_trace, step_limit, **kw).run()
