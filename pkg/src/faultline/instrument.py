"""Expression fault model: XOR a fresh fault variable into every faultable
top-level expression, and helpers that count or neutralize those faults.

Sites are numbered in three passes over the program, in source order:
assignment right-hand sides, branch conditions and returned values first
(a ``for`` header contributes init, step, then condition), then declaration
initializers, then call arguments.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .frontend.printer import expr_text

MODELS = ("data", "test-inversion", "both")
TEST, DATA = "test-condition", "data"


@dataclass(frozen=True)
class FaultSite:
    id: int
    function: str
    loc: tuple
    role: str  # assign | init | cond | return | arg<i> | for-init | for-step
    expr_type: A.IntType
    kind: str
    text: str = ""

    @property
    def var_name(self) -> str:
        return f"fault_{self.id}"

    @property
    def counter_name(self) -> str:
        return f"fault_{self.id}_counter"

    @property
    def location(self) -> str:
        line = self.loc[0] if self.loc else "?"
        return f"{self.function}:{line}:{self.role}"


@dataclass
class FaultRegistry:
    sites: list
    program: A.TypedProgram
    original: A.TypedProgram
    model: str = "both"
    originals: dict = field(default_factory=dict)  # site id -> un-faulted expression
    has_counters: bool = False

    def site(self, sid: int) -> FaultSite:
        return self.sites[sid]

    def by_name(self, name: str) -> FaultSite:
        if name.startswith("fault_") and name[6:].isdigit():
            i = int(name[6:])
            if 0 <= i < len(self.sites):
                return self.sites[i]
        raise KeyError(name)

    @property
    def names(self) -> list:
        return [s.var_name for s in self.sites]

    @property
    def ids(self) -> list:
        return [s.id for s in self.sites]


@dataclass
class FaultConfig:
    """Per-site activation. Sites that are neither symbolic nor fixed act as
    if fixed to 0."""

    symbolic: frozenset = frozenset()
    fixed: dict = field(default_factory=dict)
    model: str = "both"

    @classmethod
    def all_symbolic(cls, r: FaultRegistry, sites=None) -> "FaultConfig":
        return cls(frozenset(r.ids if sites is None else sites), {}, r.model)

    @classmethod
    def inactive(cls, r: Optional[FaultRegistry] = None) -> "FaultConfig":
        return cls(frozenset(), {}, r.model if r else "both")

    def value_of(self, site: int):
        """'sym' for symbolic sites, else the fixed integer value."""
        if site in self.symbolic:
            return "sym"
        return self.fixed.get(site, 0)

    def validate(self, r: FaultRegistry):
        for s in self.symbolic:
            st = r.site(s)
            if self.model == "test-inversion" and st.kind != TEST:
                raise ValueError(f"{st.var_name} is not a test condition")
        for s, v in self.fixed.items():
            ty = r.site(s).expr_type
            if not (ty.min <= v <= ty.max or 0 <= v <= ty.mask):
                raise ValueError(f"fixed value {v} does not fit {ty}")


# ---------------------------------------------------------------- enumeration


def _faultable(e) -> bool:
    return e is not None and not isinstance(e, A.SymInput) and isinstance(getattr(e, "ty", None), A.IntType)


def _as_condition(e: A.Expr) -> A.Expr:
    if A.is_boolean(e):
        return e
    return A.Binary("!=", e, A.Const(0, A.I32), A.I32, A.arith_type(e.ty, A.I32), loc=e.loc)


class _Slot:
    """A mutable reference to one faultable expression inside the AST."""

    def __init__(self, owner, attr, index, func, role, ty, kind, loc):
        self.owner, self.attr, self.index = owner, attr, index
        self.func, self.role, self.ty, self.kind, self.loc = func, role, ty, kind, loc

    def get(self):
        v = getattr(self.owner, self.attr)
        return v[self.index] if self.index is not None else v

    def set(self, e):
        if self.index is not None:
            getattr(self.owner, self.attr)[self.index] = e
        else:
            setattr(self.owner, self.attr, e)


def _slots(p: A.TypedProgram) -> list:
    funcs = {f.name: f for f in p.functions}
    first, decls, args = [], [], []

    def pass_a(body, f):
        for s in body:
            if isinstance(s, A.Assign) and _faultable(s.value):
                first.append(_Slot(s, "value", None, f.name, "assign", s.target.ty, DATA, s.loc))
            elif isinstance(s, A.If):
                first.append(_Slot(s, "cond", None, f.name, "cond", A.U8, TEST, s.loc))
                pass_a(s.then, f)
                if s.orelse is not None:
                    pass_a(s.orelse, f)
            elif isinstance(s, A.While):
                first.append(_Slot(s, "cond", None, f.name, "cond", A.U8, TEST, s.loc))
                pass_a(s.body, f)
            elif isinstance(s, A.For):
                if s.init is not None and _faultable(s.init.value):
                    first.append(_Slot(s.init, "value", None, f.name, "for-init", s.init.target.ty, DATA, s.init.loc))
                if s.step is not None and _faultable(s.step.value):
                    first.append(_Slot(s.step, "value", None, f.name, "for-step", s.step.target.ty, DATA, s.step.loc))
                if s.cond is not None:
                    first.append(_Slot(s, "cond", None, f.name, "cond", A.U8, TEST, s.loc))
                pass_a(s.body, f)
            elif isinstance(s, A.Block):
                pass_a(s.body, f)
            elif isinstance(s, A.Return) and _faultable(s.value) and isinstance(f.ret, A.IntType):
                first.append(_Slot(s, "value", None, f.name, "return", f.ret, DATA, s.loc))

    for f in p.functions:
        pass_a(f.body, f)
        for s in A.walk_stmts(f.body):
            if isinstance(s, A.Decl) and _faultable(s.init):
                decls.append(_Slot(s, "init", None, f.name, "init", s.ty, DATA, s.loc))
        for s in A.walk_stmts(f.body):
            if isinstance(s, A.Call):
                callee = funcs.get(s.func)
                for i, a in enumerate(s.args):
                    if not _faultable(a):
                        continue
                    ty = callee.params[i].ty if callee is not None else a.ty
                    if isinstance(ty, A.IntType):
                        args.append(_Slot(s, "args", i, f.name, f"arg{i}", ty, DATA, s.loc))
    return first + decls + args


def _model_slots(p, model: str) -> list:
    if model not in MODELS:
        raise ValueError(f"unknown fault model {model!r}")
    out = []
    for sl in _slots(p):
        if model == "data" and sl.kind == TEST:
            continue
        if model == "test-inversion" and sl.kind != TEST:
            continue
        out.append(sl)
    return out


def enumerate_faultable(p: A.TypedProgram, model: str = "both") -> list:
    """[(location, expression)] for every faultable top-level expression."""
    return [((sl.func, sl.loc, sl.role), sl.get()) for sl in _model_slots(p, model)]


def instrument(p: A.TypedProgram, model: str = "both") -> FaultRegistry:
    original = p
    q = copy.deepcopy(p)
    sites, originals = [], {}
    for i, sl in enumerate(_model_slots(q, model)):
        e = sl.get()
        originals[i] = copy.deepcopy(e)
        inner = _as_condition(e) if sl.kind == TEST else e
        sl.set(A.Fault(inner, i, sl.ty, loc=e.loc))
        sites.append(FaultSite(i, sl.func, sl.loc, sl.role, sl.ty, sl.kind, expr_text(e)))
    q.globals = [A.GlobalDecl(s.var_name, s.expr_type, None, "fault") for s in sites] + q.globals
    return FaultRegistry(sites, q, original, model, originals)


# ---------------------------------------------------------------- counters


def _sites_in(e) -> list:
    return [x.site for x in A.walk_expr(e) if isinstance(x, A.Fault)]


def _incr(sites, loc):
    return [A.CounterIncr(s, loc=loc) for s in sites]


def _not(e):
    return A.Unary("!", e, A.I32, loc=e.loc)


class _Counters:
    def body(self, stmts: list) -> list:
        out = []
        for s in stmts:
            out.extend(self.stmt(s))
        return out

    def stmt(self, s) -> list:
        if isinstance(s, A.If):
            s.then = self.body(s.then)
            if s.orelse is not None:
                s.orelse = self.body(s.orelse)
            return _incr(_sites_in(s.cond), s.loc) + [s]
        if isinstance(s, A.While):
            cs = _sites_in(s.cond)
            body = self.body(s.body)
            if not cs:
                s.body = body
                return [s]
            head = _incr(cs, s.loc) + [A.If(_not(s.cond), [A.Break(loc=s.loc)], None, loc=s.loc)]
            return [A.While(A.Const(1), head + body, loc=s.loc)]
        if isinstance(s, A.For):
            body = self.body(s.body)
            pre = []
            if s.init is not None:
                pre = _incr(_sites_in(s.init.value), s.loc) + [s.init]
            step = []
            if s.step is not None:
                step = _incr(_sites_in(s.step.value), s.loc) + [s.step]
            cs = _sites_in(s.cond) if s.cond is not None else []
            if not cs and not any(isinstance(x, A.CounterIncr) for x in step):
                s.body = body
                return [s]
            head = []
            if s.cond is not None:
                head = _incr(cs, s.loc) + [A.If(_not(s.cond), [A.Break(loc=s.loc)], None, loc=s.loc)]
            return pre + [A.While(A.Const(1), head + body + step, loc=s.loc)]
        if isinstance(s, A.Block):
            s.body = self.body(s.body)
            return [s]
        return _incr([x for e in A.stmt_exprs(s) for x in _sites_in(e)], s.loc) + [s]


def insert_counters(r: FaultRegistry) -> FaultRegistry:
    """Copy of `r` whose program increments `fault_<i>_counter` once per
    evaluation of site i. Loops whose header holds a site are rewritten to
    ``while (1) { ctr++; if (!cond) break; ... }`` so the count is exact."""
    q = copy.deepcopy(r.program)
    c = _Counters()
    for f in q.functions:
        f.body = c.body(f.body)
    q.globals = q.globals + [A.GlobalDecl(s.counter_name, A.U32, [0], "counter") for s in r.sites]
    return FaultRegistry(r.sites, q, r.original, r.model, r.originals, True)


# ---------------------------------------------------------------- simplification


def _literal(v: int, ty: A.IntType) -> A.Const:
    v &= ty.mask
    return A.Const(v, A.I32) if v <= A.I32.max else A.Const(v, A.U32)


def fix_and_simplify(r: FaultRegistry, cfg: FaultConfig) -> A.TypedProgram:
    """Program with fixed sites resolved: value 0 restores the original
    expression, any other value becomes an XOR with a literal. Symbolic
    sites keep their fault variable."""
    def rewrite(e):
        if isinstance(e, A.Fault) and e.site not in cfg.symbolic:
            v = cfg.fixed.get(e.site, 0)
            if v == 0:
                return copy.deepcopy(r.originals[e.site])
            lit = _literal(v, e.ty)
            inner = e.expr
            return A.Binary("^", inner, lit, A.arith_type(inner.ty, lit.ty), A.arith_type(inner.ty, lit.ty), loc=e.loc)
        return e

    q = copy.deepcopy(r.program)
    for f in q.functions:
        _map_body(f.body, rewrite)
    q.globals = [g for g in q.globals if not (g.kind == "fault" and int(g.name[6:]) not in cfg.symbolic)]
    return q


def _map_body(body, fn):
    for s in A.walk_stmts(body):
        if isinstance(s, A.Decl):
            s.init = A.map_expr(s.init, fn)
        elif isinstance(s, A.Assign):
            s.value = A.map_expr(s.value, fn)
        elif isinstance(s, A.Call):
            s.args = [A.map_expr(a, fn) for a in s.args]
        elif isinstance(s, (A.If, A.While)):
            s.cond = A.map_expr(s.cond, fn)
        elif isinstance(s, A.For):
            s.cond = A.map_expr(s.cond, fn)
            if s.init is not None:
                s.init.value = A.map_expr(s.init.value, fn)
            if s.step is not None:
                s.step.value = A.map_expr(s.step.value, fn)
        elif isinstance(s, A.Return):
            s.value = A.map_expr(s.value, fn)


def site_statements(r: FaultRegistry, cfgs: dict) -> dict:
    """site id -> (function, sid) of the CFG instruction evaluating it."""
    out = {}
    for fname, cfg in cfgs.items():
        for ins in cfg.instructions():
            for e in ins.exprs():
                for s in _sites_in(e):
                    out[s] = (fname, ins.sid)
    return out
