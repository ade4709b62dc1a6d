"""Dynamic symbolic execution with forking fault injection.

Each dynamic evaluation of an active fault site forks the current state: one
branch keeps the computed value, the other xors it with a fresh symbol that
must be nonzero.  At every assertion the engine asks whether the path
condition admits a violation; if it does, a concrete witness is extracted,
replayed on the reference interpreter and recorded as an attack path.
Exploration then continues under the assumption that the assertion held.
"""
from __future__ import annotations

import json
import sys
import time
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Union

from .. import ast as A
from .. import semantics as S
from ..errors import ReplayMismatch
from ..frontend import cfg as C
from ..instrument import FaultConfig, FaultRegistry, fix_and_simplify
from ..interp import VIOLATION, concrete_run, lower_cached
from . import terms as T
from .solver import SAT, UNSAT, Solver, SolverConfig

DFS, BFS = "dfs", "bfs"


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class AttackPath:
    assertion: str
    inputs: tuple        # sorted (name, value) pairs
    faults: tuple        # ((site, occurrence, value), ...) in injection order
    trace: tuple = ()    # visited statement ids

    @property
    def sites(self) -> tuple:
        return tuple(sorted(s for s, _o, _v in self.faults))

    @property
    def fault_count(self) -> int:
        return len(self.faults)

    @property
    def signature(self) -> tuple:
        return (self.assertion, self.sites, self.fault_count)

    @property
    def input_model(self) -> dict:
        return dict(self.inputs)

    def to_dict(self) -> dict:
        return {"assertion": self.assertion, "inputs": dict(self.inputs),
                "faults": [list(f) for f in self.faults], "fault_count": self.fault_count,
                "trace_length": len(self.trace)}


@dataclass
class ReportTable:
    sites: list                                     # active site ids, ascending
    counts: dict = field(default_factory=dict)      # (site, k) -> attack paths
    by_k: dict = field(default_factory=dict)        # k -> attack paths
    max_faults: int = 1
    explored_paths: int = 0
    early_traces: int = 0

    @property
    def total(self) -> int:
        return sum(self.by_k.values())

    def row(self, site: int) -> list:
        return [self.counts.get((site, k), 0) for k in range(self.max_faults + 1)]

    @classmethod
    def build(cls, sites, attacks, max_faults, explored, early) -> "ReportTable":
        t = cls(sorted(sites), {}, {}, max_faults, explored, early)
        for ap in attacks:
            k = ap.fault_count
            t.by_k[k] = t.by_k.get(k, 0) + 1
            for s in sorted(set(ap.sites)):
                t.counts[(s, k)] = t.counts.get((s, k), 0) + 1
        return t

    def render(self, names=None) -> str:
        names = names or {}
        head = ["Injection Point"] + [f"{k}-fault" for k in range(self.max_faults + 1)]
        rows = [[names.get(s, f"fault_{s}")] + [str(x) for x in self.row(s)] for s in self.sites]
        rows.append(["total"] + [str(self.by_k.get(k, 0)) for k in range(self.max_faults + 1)])
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        fmt = lambda r: " | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
        lines = ["Fault Count".rjust(len(fmt(head))), fmt(head), "-+-".join("-" * w for w in widths)]
        lines += [fmt(r) for r in rows]
        lines.append(f"explored paths: {self.explored_paths}   early traces: {self.early_traces}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"sites": self.sites, "max_faults": self.max_faults,
                "rows": {str(s): self.row(s) for s in self.sites},
                "totals": [self.by_k.get(k, 0) for k in range(self.max_faults + 1)],
                "explored_paths": self.explored_paths, "early_traces": self.early_traces}


@dataclass
class EarlyTrace:
    reason: str                 # budget | unroll | step-limit | unknown
    triggers: dict              # site -> faults injected on this path
    steps: int = 0

    def to_json(self) -> str:
        return json.dumps({"reason": self.reason, "triggers": {str(k): v for k, v in sorted(self.triggers.items())},
                           "steps": self.steps}, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "EarlyTrace":
        d = json.loads(line)
        return cls(d["reason"], {int(k): v for k, v in d["triggers"].items()}, d.get("steps", 0))


class EarlyTraces(list):
    def trigger_counts(self) -> dict:
        out = {}
        for t in self:
            for s, n in t.triggers.items():
                out[s] = out.get(s, 0) + n
        return out

    def dumps(self) -> str:
        return "".join(t.to_json() + "\n" for t in self)

    @classmethod
    def loads(cls, text: str) -> "EarlyTraces":
        return cls(EarlyTrace.from_json(l) for l in text.splitlines() if l.strip())


@dataclass
class ExploreResult:
    attacks: list
    table: ReportTable
    early: EarlyTraces
    complete: bool = True
    timed_out: bool = False
    replay_failures: int = 0
    unknown_queries: int = 0
    elapsed: float = 0.0
    program: Optional[A.TypedProgram] = None
    solver_stats: object = None

    def __iter__(self):
        return iter((self.attacks, self.table, self.early))

    @property
    def signatures(self) -> set:
        return {a.signature for a in self.attacks}


@dataclass
class ExploreConfig:
    max_faults: int = 1
    budget: float = 60.0
    search: str = DFS
    unroll_limit: int = 512
    path_step_limit: int = 2_000_000
    inputs: dict = field(default_factory=dict)   # inputs fixed to concrete values
    domains: dict = field(default_factory=dict)  # input name -> (lo, hi)
    replay: bool = True
    keep_traces: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig.from_env)


# ---------------------------------------------------------------- state


class _Frame:
    __slots__ = ("fid", "cfg", "block", "idx", "ptr", "call", "loops")

    def __init__(self, fid, cfg, ptr, call):
        self.fid, self.cfg, self.block, self.idx = fid, cfg, cfg.entry, 0
        self.ptr, self.call, self.loops = ptr, call, {}

    def copy(self):
        f = _Frame.__new__(_Frame)
        f.fid, f.cfg, f.block, f.idx = self.fid, self.cfg, self.block, self.idx
        f.ptr, f.call, f.loops = self.ptr, self.call, dict(self.loops)
        return f


class _State:
    __slots__ = ("mem", "stack", "pc", "model", "faults", "occ", "trace", "steps", "next_fid")

    def copy(self):
        s = _State.__new__(_State)
        s.mem = dict(self.mem)
        s.stack = [f.copy() for f in self.stack]
        s.pc, s.model = self.pc, self.model
        s.faults, s.occ = self.faults, dict(self.occ)
        s.trace, s.steps, s.next_fid = self.trace, self.steps, self.next_fid
        return s


class _Done(Exception):
    pass


# ---------------------------------------------------------------- engine


class Engine:
    def __init__(self, p: A.TypedProgram, cfg: ExploreConfig, active=None, fixed=None, model: str = "both"):
        self.p = p
        self.cfg = cfg
        self.cfgs = lower_cached(p)
        self.funcs = {f.name: f for f in p.functions}
        self.active = active          # None: every Fault node is active
        self.fixed = fixed or {}
        self.model = model
        self.solver = Solver(cfg.solver)
        self.inputs: dict = {}        # symbol -> (name, type)
        self.attacks: dict = {}       # signature -> AttackPath
        self.explored = 0
        self.early = EarlyTraces()
        self.replay_failures = 0
        self.unknown = 0
        self.timed_out = False
        self._fault_nodes = {}
        self._deadline = None

    # -- values ---------------------------------------------------------------------

    @staticmethod
    def conv(v, src: A.IntType, dst: A.IntType):
        return T.extend(v, src.width, dst.width, src.signed)

    def input_symbol(self, name: str, ty: A.IntType):
        if name in self.cfg.inputs:
            return self.cfg.inputs[name] & ty.mask
        s = T.sym(name, ty.width)
        self.inputs.setdefault(s, (name, ty))
        return s

    def root(self, st, v: A.Var):
        fr = st.stack[-1]
        if v.scope == "global":
            return ("G", v.name)
        if v.scope == "param" and isinstance(v.ty, A.PointerType):
            return fr.ptr[v.name]
        return ("L", fr.fid, v.name)

    def load(self, st, c, ty: A.IntType):
        v = st.mem.get(c)
        if v is not None:
            return v
        root, fld, idx = c
        if root[0] == "I":
            return self.input_symbol(S.input_name(root[1], fld, idx), ty)
        return 0

    def place(self, st, e):
        """(root, field, index value, length, element type)."""
        if isinstance(e, A.Var):
            return self.root(st, e), None, None, None
        if isinstance(e, A.Field):
            return self.root(st, e.base), e.name, None, None
        base = e.base
        if isinstance(base, A.Var):
            r, fld = self.root(st, base), None
        else:
            r, fld = self.root(st, base.base), base.name
        t = base.ty
        if isinstance(t, A.PointerType):
            t = t.target
        i = self.conv(self.eval(st, e.index), e.index.ty, A.U32)  # negative indexes become huge
        return r, fld, i, t.length

    def read(self, st, e):
        r, fld, i, n = self.place(st, e)
        if n is None:
            return self.load(st, (r, fld, None), e.ty)
        if isinstance(i, int):
            return self.load(st, (r, fld, i), e.ty) if i < n else 0
        elems = tuple(self.load(st, (r, fld, k), e.ty) for k in range(n))
        return T.select(i, elems, e.ty.width)

    def write(self, st, e, v):
        r, fld, i, n = self.place(st, e)
        if n is None:
            st.mem[(r, fld, None)] = v
        elif isinstance(i, int):
            if i < n:
                st.mem[(r, fld, i)] = v
        else:
            w = e.ty.width
            for k in range(n):
                c = (r, fld, k)
                st.mem[c] = T.ite(T.cmp("eq", i, k, 32), v, self.load(st, c, e.ty), w)

    def eval(self, st, e, choice=None):
        if isinstance(e, A.Const):
            return e.value & e.ty.mask
        if isinstance(e, (A.Var, A.Field, A.Index)):
            return self.read(st, e)
        if isinstance(e, A.Binary):
            return self.binary(st, e, choice)
        if isinstance(e, A.Unary):
            a = self.eval(st, e.operand, choice)
            if e.op == "!":
                return T.extend(T.lnot(T.truth(a, e.operand.ty.width)), 1, e.ty.width, False)
            a = self.conv(a, e.operand.ty, e.ty)
            return T.unop("neg" if e.op == "-" else "not", a, e.ty.width)
        if isinstance(e, A.Cast):
            return self.conv(self.eval(st, e.operand, choice), e.operand.ty, e.ty)
        if isinstance(e, A.Fault):
            v = self.conv(self.eval(st, e.expr, choice), e.expr.ty, e.ty)
            f = choice.get(id(e)) if choice else None
            if f is None:
                f = self.fixed.get(e.site, 0) & e.ty.mask
            return T.binop("xor", v, f, e.ty.width) if not (isinstance(f, int) and f == 0) else v
        if isinstance(e, A.SymInput):
            return self.input_symbol(e.name, e.ty)
        raise TypeError(e)

    def binary(self, st, e, choice):
        op = e.op
        if op in ("&&", "||"):
            a = T.truth(self.eval(st, e.left, choice), e.left.ty.width)
            b = T.truth(self.eval(st, e.right, choice), e.right.ty.width)
            r = T.land(a, b) if op == "&&" else T.lor(a, b)
            return T.extend(r, 1, e.ty.width, False)
        if op in ("<<", ">>"):
            a = self.conv(self.eval(st, e.left, choice), e.left.ty, e.ty)
            b = self.conv(self.eval(st, e.right, choice), e.right.ty, A.U32)
            b = T.extend(T.binop("and", b, 31, 32), 32, e.ty.width, False)
            kind = "shl" if op == "<<" else ("ashr" if e.ty.signed else "lshr")
            return T.binop(kind, a, b, e.ty.width)
        ot = e.operand_ty
        a = self.conv(self.eval(st, e.left, choice), e.left.ty, ot)
        b = self.conv(self.eval(st, e.right, choice), e.right.ty, ot)
        w = ot.width
        if op in A.COMPARISONS:
            lt, le = ("slt", "sle") if ot.signed else ("ult", "ule")
            r = {"==": lambda: T.cmp("eq", a, b, w), "!=": lambda: T.cmp("ne", a, b, w),
                 "<": lambda: T.cmp(lt, a, b, w), "<=": lambda: T.cmp(le, a, b, w),
                 ">": lambda: T.cmp(lt, b, a, w), ">=": lambda: T.cmp(le, b, a, w)}[op]()
            return T.extend(r, 1, e.ty.width, False)
        name = {"+": "add", "-": "sub", "*": "mul", "&": "and", "|": "or", "^": "xor",
                "/": "sdiv" if ot.signed else "udiv", "%": "srem" if ot.signed else "urem"}[op]
        return self.conv(T.binop(name, a, b, w), ot, e.ty)

    # -- constraint helpers -----------------------------------------------------------

    def feasible(self, st, conds):
        """Model of pc ∧ conds, or None when unsat/unknown."""
        status, model = self.solver.check_with(st.pc, conds, st.model)
        if status == SAT:
            return model
        if status != UNSAT:
            self.unknown += 1
        return None

    @staticmethod
    def assume(st, c, model):
        if not isinstance(c, int):
            st.pc = st.pc + (c,)
        st.model = model

    # -- attacks ----------------------------------------------------------------------

    def signature(self, st, aid):
        sites = tuple(sorted(s for s, _o, _v in st.faults))
        return (aid, sites, len(st.faults))

    def emit(self, st, aid, model):
        sig = self.signature(st, aid)
        if sig in self.attacks:
            return
        memo = {}
        faults = tuple((s, o, T.evaluate(v, model, memo)) for s, o, v in st.faults)
        inputs = {}
        for s, (name, ty) in self.inputs.items():
            if s in model:
                inputs[name] = ty.wrap(model[s])
            elif "[" not in name and "->" not in name:
                inputs[name] = 0    # unconstrained; replay reads it as 0 too
        for name, v in self.cfg.inputs.items():
            inputs[name] = v
        trace = []
        node = st.trace
        if self.cfg.keep_traces:
            while node is not None:
                trace.append(node[0])
                node = node[1]
            trace.reverse()
        ap = AttackPath(aid, tuple(sorted(inputs.items())), faults, tuple(trace))
        if self.cfg.replay:
            try:
                replay(ap, self.p)
            except ReplayMismatch:
                self.replay_failures += 1
                return
        self.attacks[sig] = ap

    # -- fault forking ----------------------------------------------------------------

    def fault_nodes(self, ins):
        key = id(ins)
        hit = self._fault_nodes.get(key)
        if hit is None:
            hit = []
            for e in ins.exprs():
                for x in A.walk_expr(e):
                    if isinstance(x, A.Fault) and (self.active is None or x.site in self.active):
                        hit.append(x)
            self._fault_nodes[key] = hit
        return hit

    def fork_faults(self, st, nodes):
        """[(state, choice)] for every admissible set of injected faults;
        the fault-free variant comes first."""
        room = self.cfg.max_faults - len(st.faults)
        subsets = [()]
        for k in range(1, min(room, len(nodes)) + 1):
            subsets += list(combinations(range(len(nodes)), k))
        out = []
        for n, sub in enumerate(subsets):
            s = st if n == len(subsets) - 1 else st.copy()
            choice = {}
            for i, node in enumerate(nodes):
                occ = s.occ.get(node.site, 0)
                s.occ[node.site] = occ + 1
                if i not in sub:
                    continue
                if self.model == "test-inversion":
                    f = 1  # flips a 0/1 condition
                else:
                    f = T.sym(f"fault_{node.site}@{occ}", node.ty.width)
                    model = dict(s.model)
                    model[f] = 1
                    self.assume(s, T.lnot(T.cmp("eq", f, 0, node.ty.width)), model)
                s.faults = s.faults + ((node.site, occ, f),)
                choice[id(node)] = f
            out.append((s, choice))
        return out

    # -- stepping ---------------------------------------------------------------------

    def start_state(self):
        st = _State()
        st.mem, st.stack, st.pc, st.model = {}, [], (), {}
        st.faults, st.occ, st.trace, st.steps, st.next_fid = (), {}, None, 0, 1
        for g in self.p.globals:
            if g.init is not None:
                if isinstance(g.ty, A.ArrayType):
                    for i, v in enumerate(g.init):
                        st.mem[(("G", g.name), None, i)] = v & g.ty.elem.mask
                else:
                    st.mem[(("G", g.name), None, None)] = g.init[0] & g.ty.mask
        f = self.funcs[self.p.entry]
        fr = _Frame(0, self.cfgs[f.name], {}, None)
        for q in f.params:
            if isinstance(q.ty, A.PointerType):
                fr.ptr[q.name] = ("I", q.name)
            else:
                st.mem[(("L", 0, q.name), None, None)] = self.input_symbol(q.name, q.ty)
        st.stack.append(fr)
        # declared input domains
        doms = dict(self.cfg.domains)
        for fn in self.p.functions:
            for s in A.walk_stmts(fn.body):
                for e in A.stmt_exprs(s):
                    for x in A.walk_expr(e):
                        if isinstance(x, A.SymInput) and (x.lo is not None or x.hi is not None):
                            doms.setdefault(x.name, (x.lo if x.lo is not None else x.ty.min,
                                                     x.hi if x.hi is not None else x.ty.max))
                            self.input_symbol(x.name, x.ty)
        for s, (name, ty) in list(self.inputs.items()):
            if name in doms:
                lo, hi = doms[name]
                cmp_le = "sle" if ty.signed else "ule"
                for c in (T.cmp(cmp_le, lo & ty.mask, s, ty.width), T.cmp(cmp_le, s, hi & ty.mask, ty.width)):
                    if not isinstance(c, int):
                        st.pc = st.pc + (c,)
        if st.pc:
            status, model = self.solver.check(list(st.pc), {})
            if status != SAT:
                return None
            st.model = model
        return st

    def advance(self, st) -> list:
        """Run `st` until it forks or ends; returns the successor states."""
        while True:
            fr = st.stack[-1]
            b = fr.cfg.blocks[fr.block]
            if fr.idx < len(b.instrs):
                ins = b.instrs[fr.idx]
                fr.idx += 1
            else:
                ins = b.term
            st.steps += 1
            if self.cfg.keep_traces:
                st.trace = (ins.sid, st.trace)
            if st.steps > self.cfg.path_step_limit:
                self.early_end(st, "step-limit")
                return []
            if st.steps & 1023 == 0 and time.monotonic() > self._deadline:
                raise _Budget(st)
            nodes = self.fault_nodes(ins)
            if nodes and len(st.faults) < self.cfg.max_faults:
                out = []
                for s, choice in self.fork_faults(st, nodes):
                    out.extend(self.execute(s, ins, choice))
                return out
            for node in nodes:  # no room left: count occurrences only
                st.occ[node.site] = st.occ.get(node.site, 0) + 1
            res = self.execute(st, ins, None)
            if len(res) != 1 or res[0] is not st:
                return res

    def execute(self, st, ins, choice) -> list:
        """Execute one instruction; returns successor states (possibly `st`
        itself, updated in place)."""
        k = ins.kind
        fr = st.stack[-1]
        if k == C.ASSIGN:
            self.write(st, ins.target, self.eval(st, ins.value, choice))
            return [st]
        if k == C.COUNTER:
            c = (("G", f"fault_{ins.site}_counter"), None, None)
            st.mem[c] = T.binop("add", st.mem.get(c, 0), 1, 32)
            return [st]
        if k == C.CALL:
            if ins.func == "__print":
                for a in ins.args:
                    self.eval(st, a, choice)
                return [st]
            f = self.funcs[ins.func]
            callee = _Frame(st.next_fid, self.cfgs[f.name], {}, ins)
            st.next_fid += 1
            vals = []
            for q, a in zip(f.params, ins.args):
                if isinstance(q.ty, A.PointerType):
                    callee.ptr[q.name] = self.root(st, a)
                else:
                    vals.append((q, self.conv(self.eval(st, a, choice), a.ty, q.ty)))
            for q, v in vals:
                st.mem[(("L", callee.fid, q.name), None, None)] = v
            if len(st.stack) >= 200:
                self.early_end(st, "step-limit")
                return []
            st.stack.append(callee)
            return [st]
        if k == C.ASSERT:
            return self.check_assert(st, ins, choice)
        if k == C.JUMP:
            self.goto(st, fr, ins, 0)
            return [st]
        if k == C.BRANCH:
            c = T.truth(self.eval(st, ins.value, choice), ins.value.ty.width)
            return self.branch(st, fr, ins, c)
        if k == C.RETURN:
            v = None
            f = fr.cfg.func
            if ins.value is not None and isinstance(f.ret, A.IntType):
                v = self.conv(self.eval(st, ins.value, choice), ins.value.ty, f.ret)
            self.pop(st)
            st.stack.pop()
            if not st.stack:
                self.explored += 1
                return []
            if fr.call.target is not None:
                self.write(st, fr.call.target, v if v is not None else 0)
            return [st]
        if k == C.HALT:
            self.explored += 1  # countermeasure detected the fault
            return []
        raise TypeError(ins)

    def pop(self, st):
        fid = st.stack[-1].fid
        dead = [c for c in st.mem if c[0][0] == "L" and c[0][1] == fid]
        for c in dead:
            del st.mem[c]

    def goto(self, st, fr, ins, i):
        b = fr.cfg.blocks[fr.block]
        fr.block, fr.idx = b.succs[i][0], 0

    def branch(self, st, fr, ins, c):
        if isinstance(c, int):
            self.goto(st, fr, ins, 0 if c else 1)
            return [st]
        n = fr.loops.get(ins.sid, 0) + 1
        if n > self.cfg.unroll_limit:
            self.early_end(st, "unroll")
            return []
        fr.loops[ins.sid] = n
        cur = T.evaluate(c, st.model)
        out = []
        for want in (1, 0):
            cond = c if want else T.lnot(c)
            model = st.model if cur == want else self.feasible(st, [cond])
            if model is None:
                continue
            out.append((want, cond, model))
        res = []
        for n_, (want, cond, model) in enumerate(out):
            s = st if n_ == len(out) - 1 else st.copy()
            self.assume(s, cond, model)
            self.goto(s, s.stack[-1], ins, 0 if want else 1)
            res.append(s)
        if not res:
            self.explored += 1
        return res

    def check_assert(self, st, ins, choice):
        aid = ins.ref.id
        c = T.truth(self.eval(st, ins.ref.cond, choice), ins.ref.cond.ty.width)
        if isinstance(c, int):
            if c:
                return [st]
            self.emit(st, aid, st.model)
            self.explored += 1
            return []
        cur = T.evaluate(c, st.model)
        if self.signature(st, aid) not in self.attacks:
            bad = st.model if cur == 0 else self.feasible(st, [T.lnot(c)])
            if bad is not None:
                self.emit(st, aid, bad)
        good = st.model if cur == 1 else self.feasible(st, [c])
        if good is None:
            self.explored += 1
            return []
        self.assume(st, c, good)
        return [st]

    def early_end(self, st, reason):
        trig = {}
        for s, _o, _v in st.faults:
            trig[s] = trig.get(s, 0) + 1
        self.early.append(EarlyTrace(reason, trig, st.steps))

    # -- driver -------------------------------------------------------------------------

    def run(self):
        self._deadline = time.monotonic() + self.cfg.budget
        st0 = self.start_state()
        if st0 is None:
            return
        frontier = deque([st0])
        take = frontier.pop if self.cfg.search == DFS else frontier.popleft
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 20000))
        try:
            while frontier:
                if time.monotonic() > self._deadline:
                    raise _Budget(None)
                st = take()
                succ = self.advance(st)
                if self.cfg.search == DFS:
                    frontier.extend(reversed(succ))
                else:
                    frontier.extend(succ)
        except _Budget as b:
            self.timed_out = True
            if b.state is not None:
                self.early_end(b.state, "budget")
            for s in frontier:
                self.early_end(s, "budget")
        finally:
            sys.setrecursionlimit(old)


class _Budget(Exception):
    def __init__(self, state):
        self.state = state


# ---------------------------------------------------------------- public API


def _prepare(target, strategy: Optional[FaultConfig]):
    """(program, active sites, fixed values, model)."""
    if isinstance(target, FaultRegistry):
        strategy = strategy or FaultConfig.all_symbolic(target)
        return fix_and_simplify(target, strategy), None, {}, strategy.model
    if strategy is None:
        return target, None, {}, "both"
    return target, frozenset(strategy.symbolic), dict(strategy.fixed), strategy.model


def explore(target: Union[FaultRegistry, A.TypedProgram], strategy: Optional[FaultConfig] = None,
            max_faults: int = 1, budget: float = 60.0, search: str = DFS, **kw) -> ExploreResult:
    """Search for assertion violations reachable with at most `max_faults`
    injected faults.  `target` is either a fault registry (its program is
    specialized to `strategy` first) or an instrumented program."""
    if max_faults < 0:
        raise ValueError("max_faults must be >= 0")
    if search not in (DFS, BFS):
        raise ValueError(f"unknown search order {search!r}")
    cfg = ExploreConfig(max_faults=max_faults, budget=budget, search=search, **kw)
    prog, active, fixed, model = _prepare(target, strategy)
    t0 = time.monotonic()
    eng = Engine(prog, cfg, active, fixed, model)
    if prog.entry is not None:
        eng.run()
    attacks = sorted(eng.attacks.values(), key=lambda a: (a.signature, a.faults))
    if isinstance(target, FaultRegistry):
        sites = sorted(strategy.symbolic) if strategy else target.ids
    else:
        sites = sorted(active) if active is not None else sorted(
            {x.site for f in prog.functions for s in A.walk_stmts(f.body) for e in A.stmt_exprs(s)
             for x in A.walk_expr(e) if isinstance(x, A.Fault)})
    early = eng.early
    table = ReportTable.build(sites, attacks, max_faults, eng.explored + len(early), len(early))
    complete = not eng.timed_out and eng.unknown == 0 and not early
    return ExploreResult(attacks, table, early, complete, eng.timed_out, eng.replay_failures, eng.unknown,
                         time.monotonic() - t0, prog, eng.solver.stats)


def replay(ap: AttackPath, p: A.TypedProgram, step_limit: int = 2_000_000):
    """Re-run an attack on the concrete interpreter; raises ReplayMismatch
    unless the recorded assertion is violated with exactly the recorded
    faults."""
    tr = concrete_run(p, dict(ap.inputs), ap.faults, step_limit=step_limit)
    if tr.kind != VIOLATION or tr.assertion != ap.assertion:
        raise ReplayMismatch(f"expected violation of {ap.assertion}, got {tr.kind}"
                             + (f" of {tr.assertion}" if tr.assertion else ""))
    if sorted((s, o) for s, o, _v in tr.faults) != sorted((s, o) for s, o, _v in ap.faults):
        raise ReplayMismatch("injected faults differ from the recorded ones")
    return tr
