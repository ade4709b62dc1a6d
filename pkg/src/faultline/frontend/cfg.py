"""Lowering of FIC functions to control-flow graphs, plus (post)dominators.

Every instruction carries a program-wide statement id (``sid``).  Ids are
assigned deterministically by :func:`lower_program`, so all analyses that
lower the same program agree on them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import ast as A

# instruction kinds; the last four only appear as block terminators
ASSIGN, CALL, ASSERT, COUNTER = "assign", "call", "assert", "counter"
JUMP, BRANCH, RETURN, HALT = "jump", "branch", "return", "halt"


@dataclass(eq=False)
class Instr:
    kind: str
    sid: int
    stmt: Optional[A.Stmt] = None
    target: Optional[A.Expr] = None
    value: Optional[A.Expr] = None  # assign rhs, return value, branch condition
    func: str = ""
    args: list = field(default_factory=list)
    ref: Optional[A.AssertionRef] = None
    site: int = -1

    def exprs(self) -> list:
        out = []
        if self.kind == ASSIGN:
            out = [self.target, self.value]
        elif self.kind == CALL:
            out = list(self.args) + ([self.target] if self.target is not None else [])
        elif self.kind == ASSERT:
            out = [self.ref.cond]
        elif self.kind in (BRANCH, RETURN) and self.value is not None:
            out = [self.value]
        return out

    def __repr__(self):
        return f"Instr({self.kind}, sid={self.sid})"


@dataclass(eq=False)
class BasicBlock:
    id: int
    instrs: list = field(default_factory=list)
    term: Optional[Instr] = None
    succs: list = field(default_factory=list)  # [(block id, "T" | "F" | None)]
    label: Optional[str] = None


@dataclass(eq=False)
class Cfg:
    func: A.Function
    blocks: dict
    entry: int
    exit: int
    idom: dict = field(default_factory=dict)
    ipostdom: dict = field(default_factory=dict)
    back_edges: set = field(default_factory=set)
    loop_headers: set = field(default_factory=set)
    preds: dict = field(default_factory=dict)

    @property
    def edges(self) -> list:
        return [(b.id, s, lab) for b in self.blocks.values() for s, lab in b.succs]

    def instructions(self):
        for b in self.blocks.values():
            yield from b.instrs
            if b.term is not None:
                yield b.term

    def block_of(self) -> dict:
        """sid -> block id."""
        out = {}
        for b in self.blocks.values():
            for ins in b.instrs:
                out[ins.sid] = b.id
            if b.term is not None:
                out[b.term.sid] = b.id
        return out

    def dominates(self, a: int, b: int) -> bool:
        while b is not None:
            if a == b:
                return True
            b = self.idom.get(b)
        return False

    def postdominates(self, a: int, b: int) -> bool:
        while b is not None:
            if a == b:
                return True
            b = self.ipostdom.get(b)
        return False


class _Lowering:
    def __init__(self, func: A.Function, next_sid):
        self.func = func
        self.next_sid = next_sid
        self.blocks: dict[int, BasicBlock] = {}
        self.entry = self.new_block().id
        self.exit = self.new_block().id
        self.cur = self.blocks[self.entry]
        self.labels: dict[str, int] = {}
        self.break_targets: list[int] = []

    def new_block(self) -> BasicBlock:
        b = BasicBlock(len(self.blocks))
        self.blocks[b.id] = b
        return b

    def sid(self) -> int:
        return next(self.next_sid)

    def label_block(self, name: str) -> int:
        if name not in self.labels:
            b = self.new_block()
            b.label = name
            self.labels[name] = b.id
        return self.labels[name]

    def terminate(self, term: Instr, succs: list):
        if self.cur.term is None:
            self.cur.term = term
            self.cur.succs = succs

    def jump(self, target: int):
        self.terminate(Instr(JUMP, -1), [(target, None)])

    def start(self, block: BasicBlock):
        self.cur = block

    def emit(self, ins: Instr):
        if self.cur.term is not None:
            # code after a terminator lands in a fresh (unreachable) block
            self.start(self.new_block())
        self.cur.instrs.append(ins)

    def run(self) -> Cfg:
        self.body(self.func.body)
        self.terminate(Instr(RETURN, self.sid(), None), [(self.exit, None)])
        return self.finish()

    def body(self, stmts):
        for s in stmts:
            self.stmt(s)

    def branch(self, cond: A.Expr, stmt: A.Stmt, t: int, f: int):
        if self.cur.term is not None:
            self.start(self.new_block())
        self.terminate(Instr(BRANCH, self.sid(), stmt, value=cond), [(t, "T"), (f, "F")])

    def stmt(self, s: A.Stmt):
        if isinstance(s, A.Decl):
            if s.init is not None:
                self.emit(Instr(ASSIGN, self.sid(), s, target=A.Var(s.name, s.ty, "local", loc=s.loc), value=s.init))
        elif isinstance(s, A.Assign):
            self.emit(Instr(ASSIGN, self.sid(), s, target=s.target, value=s.value))
        elif isinstance(s, A.Call):
            self.emit(Instr(CALL, self.sid(), s, target=s.target, func=s.func, args=list(s.args)))
        elif isinstance(s, A.AssertStmt):
            self.emit(Instr(ASSERT, self.sid(), s, ref=s.ref))
        elif isinstance(s, A.CounterIncr):
            self.emit(Instr(COUNTER, self.sid(), s, site=s.site))
        elif isinstance(s, A.Countermeasure):
            if self.cur.term is not None:
                self.start(self.new_block())
            self.terminate(Instr(HALT, self.sid(), s), [(self.exit, None)])
        elif isinstance(s, A.Return):
            if self.cur.term is not None:
                self.start(self.new_block())
            self.terminate(Instr(RETURN, self.sid(), s, value=s.value), [(self.exit, None)])
        elif isinstance(s, A.Block):
            self.body(s.body)
        elif isinstance(s, A.If):
            then_b, join = self.new_block(), self.new_block()
            else_b = self.new_block() if s.orelse is not None else join
            self.branch(s.cond, s, then_b.id, else_b.id)
            self.start(then_b)
            self.body(s.then)
            self.jump(join.id)
            if s.orelse is not None:
                self.start(else_b)
                self.body(s.orelse)
                self.jump(join.id)
            self.start(join)
        elif isinstance(s, A.While):
            header, body, after = self.new_block(), self.new_block(), self.new_block()
            self.jump(header.id)
            self.start(header)
            self.branch(s.cond, s, body.id, after.id)
            self.break_targets.append(after.id)
            self.start(body)
            self.body(s.body)
            self.jump(header.id)
            self.break_targets.pop()
            self.start(after)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.emit(Instr(ASSIGN, self.sid(), s.init, target=s.init.target, value=s.init.value))
            header, body, after = self.new_block(), self.new_block(), self.new_block()
            self.jump(header.id)
            self.start(header)
            if s.cond is not None:
                self.branch(s.cond, s, body.id, after.id)
            else:
                self.jump(body.id)
            self.break_targets.append(after.id)
            self.start(body)
            self.body(s.body)
            if s.step is not None:
                self.emit(Instr(ASSIGN, self.sid(), s.step, target=s.step.target, value=s.step.value))
            self.jump(header.id)
            self.break_targets.pop()
            self.start(after)
        elif isinstance(s, A.Break):
            self.jump(self.break_targets[-1])
        elif isinstance(s, A.Goto):
            self.jump(self.label_block(s.label))
        elif isinstance(s, A.Label):
            target = self.label_block(s.name)
            self.jump(target)
            self.start(self.blocks[target])
        else:
            raise TypeError(f"cannot lower {s!r}")

    def finish(self) -> Cfg:
        for b in self.blocks.values():
            if b.term is None and b.id != self.exit:
                b.term = Instr(JUMP, -1)
                b.succs = [(self.exit, None)]
        reach = _reachable(self.entry, {b.id: [s for s, _ in b.succs] for b in self.blocks.values()})
        reach.add(self.exit)
        blocks = {i: b for i, b in self.blocks.items() if i in reach}
        cfg = Cfg(self.func, blocks, self.entry, self.exit)
        compute_dominance(cfg)
        return cfg


def _reachable(start, succ: dict) -> set:
    seen, stack = {start}, [start]
    while stack:
        n = stack.pop()
        for s in succ.get(n, ()):
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def reverse_postorder(start, succ: dict) -> list:
    seen, order = set(), []
    stack = [(start, iter(succ.get(start, ())))]
    seen.add(start)
    while stack:
        node, it = stack[-1]
        for s in it:
            if s not in seen:
                seen.add(s)
                stack.append((s, iter(succ.get(s, ()))))
                break
        else:
            stack.pop()
            order.append(node)
    return order[::-1]


def immediate_dominators(start, succ: dict) -> dict:
    """Cooper-Harvey-Kennedy iterative algorithm. Returns node -> idom
    (the start node maps to None); unreachable nodes are absent."""
    order = reverse_postorder(start, succ)
    index = {n: i for i, n in enumerate(order)}
    preds: dict = {n: [] for n in order}
    for n in order:
        for s in succ.get(n, ()):
            if s in preds:
                preds[s].append(n)
    idom = {start: start}

    def intersect(a, b):
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in order[1:]:
            done = [p for p in preds[n] if p in idom]
            if not done:
                continue
            new = done[0]
            for p in done[1:]:
                new = intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    idom[start] = None
    return idom


def compute_dominance(cfg: Cfg):
    succ = {b.id: [s for s, _ in b.succs] for b in cfg.blocks.values()}
    preds: dict = {b: [] for b in cfg.blocks}
    for a, ss in succ.items():
        for s in ss:
            preds[s].append(a)
    cfg.preds = preds
    cfg.idom = immediate_dominators(cfg.entry, succ)
    cfg.ipostdom = immediate_dominators(cfg.exit, preds)
    # retreating edges of a DFS from the entry mark loop heads
    back, on_stack, seen = set(), set(), set()
    stack = [(cfg.entry, iter(succ[cfg.entry]))]
    on_stack.add(cfg.entry)
    seen.add(cfg.entry)
    while stack:
        node, it = stack[-1]
        for s in it:
            if s in on_stack:
                back.add((node, s))
            elif s not in seen:
                seen.add(s)
                on_stack.add(s)
                stack.append((s, iter(succ[s])))
                break
        else:
            stack.pop()
            on_stack.discard(node)
    cfg.back_edges = back
    cfg.loop_headers = {h for _, h in back}


def build_cfg(f: A.Function, next_sid=None) -> Cfg:
    import itertools

    return _Lowering(f, next_sid or itertools.count()).run()


def lower_program(p: A.TypedProgram) -> dict:
    """Function name -> Cfg, with program-wide unique statement ids."""
    import itertools

    counter = itertools.count()
    return {f.name: _Lowering(f, counter).run() for f in p.functions}


def control_dependences(cfg: Cfg) -> dict:
    """Block id -> set of (branching block id, edge label).

    The graph is augmented with a virtual START node (id -1) that branches to
    the entry and to the exit, so unconditionally executed blocks depend on
    START, and blocks after halting checks depend on those checks.
    """
    START = -1
    succ = {b.id: list(b.succs) for b in cfg.blocks.values()}
    succ[START] = [(cfg.entry, "T"), (cfg.exit, "F")]
    preds: dict = {n: [] for n in succ}
    for a, ss in succ.items():
        for s, _ in ss:
            preds[s].append(a)
    # nodes that cannot reach the exit (infinite loops) get a pseudo edge to it
    can_exit = _reachable(cfg.exit, preds)
    for n in list(succ):
        if n not in can_exit:
            preds[cfg.exit].append(n)
    ipdom = immediate_dominators(cfg.exit, preds)
    deps: dict = {n: set() for n in cfg.blocks}
    for a, ss in succ.items():
        for b, lab in ss:
            if b == ipdom.get(a):
                continue
            runner = b
            stop = ipdom.get(a)
            while runner is not None and runner != stop:
                if runner in deps:
                    deps[runner].add((a, lab))
                runner = ipdom.get(runner)
    return deps
