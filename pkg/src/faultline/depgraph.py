"""Program dependence graphs over lowered FIC functions.

Node ids are tuples:

* ``("stmt", sid)``: one CFG instruction (assignment, call, assertion, branch, return, halt)
* ``("assert", id)``: one assertion, fed by its statement
* ``("fentry", f)``: activation of function f (root of its control dependences)
* ``("fin", f, obj)`` and ``("fout", f, obj)``: function inputs and outputs. ``obj`` is a
  storage object ``(root, field)``, ``("param", name)`` or ``"ret"``.
* ``("cin", sid, obj)`` and ``("cout", sid, obj)``: the same objects at one call site
* ``("chalt", sid)``: "the callee may stop the program" at one call site

An edge ``(a, b)`` means that b depends on a.  Dependence locations are
``(root, field, index)`` where index is None for scalars, an int for a cell
that the abstract interpreter pins to one index, or ``"*"`` for the whole array.
Roots are ``("G", name)``, ``("L", func, name)`` and ``("P", func, param)``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from . import ast as A
from .absint import AbsResult
from .errors import UnknownAssertion
from .frontend import cfg as C
from .interp import lower_cached

WHOLE = "*"


@dataclass(frozen=True)
class PdgNode:
    id: tuple
    kind: str
    function: str
    sid: int = -1
    label: str = ""


@dataclass
class Pdg:
    nodes: dict = field(default_factory=dict)
    data_edges: set = field(default_factory=set)
    control_edges: set = field(default_factory=set)
    interproc_edges: set = field(default_factory=set)
    summary_edges: set = field(default_factory=set)
    site_nodes: dict = field(default_factory=dict)  # site id -> node id
    assertion_nodes: dict = field(default_factory=dict)  # assertion id -> node id

    def add(self, nid, kind, function, sid=-1, label=""):
        if nid not in self.nodes:
            self.nodes[nid] = PdgNode(nid, kind, function, sid, label)
        return nid

    def all_edges(self):
        yield from self.data_edges
        yield from self.control_edges
        yield from self.interproc_edges
        yield from self.summary_edges

    def predecessors(self) -> dict:
        preds = defaultdict(set)
        for a, b in self.all_edges():
            preds[b].add(a)
        return preds

    def backward(self, starts) -> set:
        preds = self.predecessors()
        seen = set(starts)
        stack = list(starts)
        while stack:
            n = stack.pop()
            for m in preds.get(n, ()):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return seen

    def to_dot(self) -> str:
        ids = {n: i for i, n in enumerate(self.nodes)}
        lines = ["digraph pdg {"]
        for n, node in self.nodes.items():
            label = (node.label or str(n)).replace('"', "'")
            lines.append(f'  n{ids[n]} [label="{label}"];')
        styles = [(self.data_edges, "solid"), (self.control_edges, "dashed"),
                  (self.interproc_edges, "bold"), (self.summary_edges, "dotted")]
        for edges, style in styles:
            for a, b in sorted(edges, key=lambda e: (ids.get(e[0], -1), ids.get(e[1], -1))):
                if a in ids and b in ids:
                    lines.append(f"  n{ids[a]} -> n{ids[b]} [style={style}];")
        lines.append("}")
        return "\n".join(lines)


# ---------------------------------------------------------------- locations


class _Locs:
    """Dependence locations read or written by expressions of one function."""

    def __init__(self, f: A.Function, absres: AbsResult):
        self.f = f
        self.res = absres

    def root(self, v: A.Var):
        if v.scope == "global":
            return ("G", v.name)
        if v.scope == "param" and isinstance(v.ty, A.PointerType):
            return ("P", self.f.name, v.name)
        return ("L", self.f.name, v.name)

    def place(self, e, sid):
        if isinstance(e, A.Var):
            return (self.root(e), None, None)
        if isinstance(e, A.Field):
            return (self.root(e.base), e.name, None)
        if isinstance(e, A.Index):
            if isinstance(e.base, A.Var):
                r, fld = self.root(e.base), None
            else:
                r, fld = self.root(e.base.base), e.base.name
            itv = self.res.cell_index.get((sid, id(e)))
            idx = itv[0] if itv is not None and itv[0] == itv[1] else WHOLE
            return (r, fld, idx)
        raise TypeError(e)

    def uses(self, e, sid) -> set:
        out = set()
        if e is None:
            return out
        for x in A.walk_expr(e):
            if isinstance(x, (A.Var, A.Field, A.Index)):
                if isinstance(x, A.Var) and not isinstance(x.ty, A.IntType):
                    continue  # base of a field or subscript
                if isinstance(x, A.Field) and not isinstance(x.ty, A.IntType):
                    continue
                out.add(self.place(x, sid))
        return out

    def target_uses(self, t, sid) -> set:
        """Locations read while computing the address of an lvalue."""
        if isinstance(t, A.Index):
            return self.uses(t.index, sid)
        return set()


def _obj(loc):
    return (loc[0], loc[1])


def _matches(d, u) -> bool:
    if d[0] != u[0] or d[1] != u[1]:
        return False
    return d[2] == u[2] or d[2] == WHOLE or u[2] == WHOLE


# ---------------------------------------------------------------- builder


class _Builder:
    def __init__(self, p: A.TypedProgram, a: AbsResult):
        self.p = p
        self.a = a
        self.cfgs = lower_cached(p)
        self.funcs = {f.name: f for f in p.functions}
        self.g = Pdg()
        self.dead = a.instr_dead
        self.locs = {f.name: _Locs(f, a) for f in p.functions}
        self.iface: dict = {}  # function -> set of non-local objects read or written
        self.writes: dict = {}
        self.halts: dict = {}  # function -> may halt (transitively)

    # -- interfaces ----------------------------------------------------------------

    def map_obj(self, obj, call: C.Instr, caller: str):
        """Translate a callee object into the caller's namespace (None if local)."""
        root, fld = obj
        if root[0] == "G":
            return obj
        if root[0] == "P":
            callee = self.funcs[call.func]
            for q, arg in zip(callee.params, call.args):
                if q.name == root[2]:
                    return (self.locs[caller].root(arg), fld)
        return None

    def live(self, ins) -> bool:
        return ins.sid not in self.dead

    def interfaces(self):
        reads, writes, halts = defaultdict(set), defaultdict(set), defaultdict(bool)
        for name, cfg in self.cfgs.items():
            L = self.locs[name]
            for ins in cfg.instructions():
                if not self.live(ins):
                    continue
                for e in ins.exprs():
                    if ins.kind in (C.ASSIGN, C.CALL) and e is ins.target:
                        continue
                    for u in L.uses(e, ins.sid):
                        if u[0][0] != "L":
                            reads[name].add(_obj(u))
                if ins.target is not None and ins.kind in (C.ASSIGN, C.CALL):
                    d = L.place(ins.target, ins.sid)
                    for u in L.target_uses(ins.target, ins.sid):
                        if u[0][0] != "L":
                            reads[name].add(_obj(u))
                    if d[0][0] != "L":
                        writes[name].add(_obj(d))
                if ins.kind == C.HALT:
                    halts[name] = True
        changed = True
        while changed:
            changed = False
            for name, cfg in self.cfgs.items():
                for ins in cfg.instructions():
                    if ins.kind != C.CALL or ins.func == "__print" or not self.live(ins):
                        continue
                    for src, dst in ((reads, reads), (writes, writes)):
                        for o in list(src[ins.func]):
                            m = self.map_obj(o, ins, name)
                            if m is not None and m[0][0] != "L" and m not in dst[name]:
                                dst[name].add(m)
                                changed = True
                    if halts[ins.func] and not halts[name]:
                        halts[name] = True
                        changed = True
        for name in self.cfgs:
            self.iface[name] = reads[name] | writes[name]
            self.writes[name] = writes[name]
            self.halts[name] = halts[name]

    # -- per function ----------------------------------------------------------------

    def function(self, name: str):
        g = self.g
        cfg = self.cfgs[name]
        f = self.funcs[name]
        L = self.locs[name]
        entry = g.add(("fentry", name), "function-entry", name, label=f"entry {name}")

        # definitions and uses per instruction, in block order
        defs_of: dict = {}  # block -> list of (node, loc, strong, use-sets...)
        events: dict = defaultdict(list)  # block -> [("use", node, locs) | ("def", node, loc, strong)]
        stmt_of_block: dict = defaultdict(list)
        for b in cfg.blocks.values():
            items = list(b.instrs) + ([b.term] if b.term is not None and b.term.kind != C.JUMP else [])
            for ins in items:
                if not self.live(ins):
                    continue
                nid = g.add(("stmt", ins.sid), ins.kind, name, ins.sid, _label(ins))
                stmt_of_block[b.id].append(nid)
                ev = events[b.id]
                if ins.kind == C.ASSIGN:
                    ev.append(("use", nid, L.uses(ins.value, ins.sid) | L.target_uses(ins.target, ins.sid)))
                    d = L.place(ins.target, ins.sid)
                    ev.append(("def", nid, d, d[2] != WHOLE))
                elif ins.kind in (C.BRANCH, C.RETURN) and ins.value is not None:
                    ev.append(("use", nid, L.uses(ins.value, ins.sid)))
                    if ins.kind == C.RETURN and isinstance(f.ret, A.IntType):
                        out = g.add(("fout", name, "ret"), "function-output", name, label=f"{name} return")
                        g.data_edges.add((nid, out))
                elif ins.kind == C.ASSERT:
                    ev.append(("use", nid, L.uses(ins.ref.cond, ins.sid)))
                    an = g.add(("assert", ins.ref.id), "assertion", name, ins.sid, f"assert {ins.ref.id}")
                    g.data_edges.add((nid, an))
                    g.assertion_nodes[ins.ref.id] = an
                elif ins.kind == C.CALL and ins.func == "__print":
                    ev.append(("use", nid, L.uses(ins.args[0], ins.sid)))
                elif ins.kind == C.CALL:
                    self.call_site(ins, name, nid, ev, stmt_of_block[b.id])
                elif ins.kind == C.HALT:
                    pass

        # entry pseudo-definitions
        entry_defs = []
        for q in f.params:
            if isinstance(q.ty, A.IntType):
                n = g.add(("fin", name, ("param", q.name)), "function-input", name, label=f"{name} param {q.name}")
                entry_defs.append((n, (("L", name, q.name), None, None), True))
        for obj in sorted(self.iface[name], key=repr):
            n = g.add(("fin", name, obj), "function-input", name, label=f"{name} in {_objtext(obj)}")
            entry_defs.append((n, (obj[0], obj[1], WHOLE), False))
            entry_defs.append((n, (obj[0], obj[1], None), False))

        # reaching definitions
        rd_in = {b: set() for b in cfg.blocks}
        rd_in[cfg.entry] = set(entry_defs)
        order = C.reverse_postorder(cfg.entry, {b.id: [s for s, _ in b.succs] for b in cfg.blocks.values()})

        def transfer(bid, state, emit=False):
            state = set(state)
            for ev in events.get(bid, ()):
                if ev[0] == "use":
                    if emit:
                        for u in ev[2]:
                            for dn, dl, _ in state:
                                if _matches(dl, u):
                                    g.data_edges.add((dn, ev[1]))
                else:
                    _, dn, dl, strong = ev
                    if strong:
                        state = {d for d in state if d[1] != dl}
                    state.add((dn, dl, strong))
            return state

        changed = True
        while changed:
            changed = False
            for bid in order:
                out = transfer(bid, rd_in[bid])
                for s, _ in cfg.blocks[bid].succs:
                    if not out <= rd_in[s]:
                        rd_in[s] |= out
                        changed = True
        for bid in order:
            transfer(bid, rd_in[bid], emit=True)

        # outputs: definitions of non-local objects reaching the exit
        for obj in self.writes[name]:
            on = g.add(("fout", name, obj), "function-output", name, label=f"{name} out {_objtext(obj)}")
            for dn, dl, _ in rd_in[cfg.exit]:
                if _obj(dl) == obj:
                    g.data_edges.add((dn, on))

        # control dependences
        cd = C.control_dependences(cfg)
        for bid, nodes in stmt_of_block.items():
            srcs = set()
            for (cb, _lab) in cd.get(bid, ()):
                if cb == -1:
                    srcs.add(entry)
                else:
                    t = cfg.blocks[cb].term
                    if t is not None and t.kind == C.BRANCH and self.live(t):
                        srcs.add(("stmt", t.sid))
            if not srcs:
                srcs.add(entry)
            for n in nodes:
                for s in srcs:
                    g.control_edges.add((s, n))

        # a callee that may halt guards everything after the call
        for b in cfg.blocks.values():
            for i, ins in enumerate(b.instrs):
                if ins.kind == C.CALL and ins.func != "__print" and self.halts.get(ins.func) and self.live(ins):
                    h = g.add(("chalt", ins.sid), "call-output", name, ins.sid, f"{ins.func} may halt")
                    g.control_edges.add((("stmt", ins.sid), h))
                    after = [("stmt", x.sid) for x in b.instrs[i + 1:] if self.live(x)]
                    if b.term is not None and b.term.kind != C.JUMP and self.live(b.term):
                        after.append(("stmt", b.term.sid))
                    reach = C._reachable(b.id, {x.id: [s for s, _ in x.succs] for x in cfg.blocks.values()})
                    for rb in reach:
                        if rb != b.id:
                            after.extend(stmt_of_block.get(rb, []))
                    for n in after:
                        if n in g.nodes:
                            g.control_edges.add((h, n))

    def call_site(self, ins, caller, nid, ev, block_nodes):
        g = self.g
        L = self.locs[caller]
        callee = self.funcs[ins.func]
        g.interproc_edges.add((nid, ("fentry", ins.func)))
        cins, couts = {}, {}
        for i, (q, a) in enumerate(zip(callee.params, ins.args)):
            if isinstance(q.ty, A.IntType):
                cn = g.add(("cin", ins.sid, ("arg", i)), "call-input", caller, ins.sid, f"{ins.func} arg {i}")
                g.control_edges.add((nid, cn))
                ev.append(("use", cn, L.uses(a, ins.sid)))
                g.interproc_edges.add((cn, ("fin", ins.func, ("param", q.name))))
                cins[("param", q.name)] = cn
        for obj in sorted(self.iface[ins.func], key=repr):
            m = self.map_obj(obj, ins, caller)
            if m is None:
                continue
            cn = g.add(("cin", ins.sid, m), "call-input", caller, ins.sid, f"{ins.func} in {_objtext(m)}")
            g.control_edges.add((nid, cn))
            ev.append(("use", cn, {(m[0], m[1], WHOLE), (m[0], m[1], None)}))
            g.interproc_edges.add((cn, ("fin", ins.func, obj)))
            cins[obj] = cn
        for obj in sorted(self.writes[ins.func], key=repr):
            m = self.map_obj(obj, ins, caller)
            if m is None:
                continue
            on = g.add(("cout", ins.sid, m), "call-output", caller, ins.sid, f"{ins.func} out {_objtext(m)}")
            g.control_edges.add((nid, on))
            g.interproc_edges.add((("fout", ins.func, obj), on))
            couts[obj] = on
            # a scalar is overwritten wholesale; arrays and records only partially
            ev.append(("def", on, (m[0], m[1], WHOLE), False))
            ev.append(("def", on, (m[0], m[1], None), False))
        if ins.target is not None:
            rn = g.add(("cout", ins.sid, "ret"), "call-output", caller, ins.sid, f"{ins.func} result")
            g.control_edges.add((nid, rn))
            g.interproc_edges.add((("fout", ins.func, "ret"), rn))
            ev.append(("use", rn, L.target_uses(ins.target, ins.sid)))
            d = L.place(ins.target, ins.sid)
            ev.append(("def", rn, d, d[2] != WHOLE))
            couts["ret"] = rn
        self.pending_summaries.append((ins.func, cins, couts))

    def summaries(self):
        """Summary edges call-input -> call-output from intra-callee closure."""
        preds = self.g.predecessors()
        cache = {}
        for func, cins, couts in self.pending_summaries:
            for oobj, on in couts.items():
                key = (func, oobj)
                if key not in cache:
                    start = ("fout", func, oobj)
                    seen, stack = {start}, [start]
                    while stack:
                        n = stack.pop()
                        for m in preds.get(n, ()):
                            if m not in seen and self.g.nodes.get(m) is not None and self.g.nodes[m].function == func:
                                seen.add(m)
                                stack.append(m)
                    cache[key] = {n[2] for n in seen if n[0] == "fin" and n[1] == func}
                for iobj in cache[key]:
                    if iobj in cins:
                        self.g.summary_edges.add((cins[iobj], on))

    def build(self) -> Pdg:
        self.pending_summaries = []
        self.interfaces()
        for f in self.p.functions:
            self.function(f.name)
        # make sure every interface node exists so interprocedural edges resolve
        for f in self.p.functions:
            self.g.add(("fentry", f.name), "function-entry", f.name, label=f"entry {f.name}")
            for q in f.params:
                if isinstance(q.ty, A.IntType):
                    self.g.add(("fin", f.name, ("param", q.name)), "function-input", f.name, label=f"{f.name} param {q.name}")
            if isinstance(f.ret, A.IntType):
                self.g.add(("fout", f.name, "ret"), "function-output", f.name, label=f"{f.name} return")
            for obj in self.writes[f.name]:
                self.g.add(("fout", f.name, obj), "function-output", f.name, label=f"{f.name} out {_objtext(obj)}")
        self.summaries()
        for a in self.p.assertions:
            self.g.assertion_nodes.setdefault(a.id, self.g.add(("assert", a.id), "assertion", "", -1, f"assert {a.id}"))
        # fault sites
        for name, cfg in self.cfgs.items():
            for ins in cfg.instructions():
                if not self.live(ins):
                    continue
                if ins.kind == C.CALL and ins.func != "__print":
                    callee = self.funcs[ins.func]
                    for i, a in enumerate(ins.args):
                        for x in A.walk_expr(a):
                            if isinstance(x, A.Fault) and isinstance(callee.params[i].ty, A.IntType):
                                self.g.site_nodes[x.site] = ("cin", ins.sid, ("arg", i))
                    continue
                for e in ins.exprs():
                    for x in A.walk_expr(e):
                        if isinstance(x, A.Fault):
                            self.g.site_nodes[x.site] = ("stmt", ins.sid)
        return self.g


def _objtext(obj) -> str:
    root, fld = obj
    base = root[-1]
    return base + (f".{fld}" if fld else "")


def _label(ins: C.Instr) -> str:
    from .frontend.printer import expr_text

    if ins.kind == C.ASSIGN:
        return f"{expr_text(ins.target)} = {expr_text(ins.value)}"
    if ins.kind == C.BRANCH:
        return f"if ({expr_text(ins.value)})"
    if ins.kind == C.RETURN:
        return "return" + (f" {expr_text(ins.value)}" if ins.value is not None else "")
    if ins.kind == C.ASSERT:
        return f"assert {ins.ref.id}: {expr_text(ins.ref.cond)}"
    if ins.kind == C.CALL:
        return f"{ins.func}(...)"
    if ins.kind == C.HALT:
        return "countermeasure"
    return ins.kind


def build_pdg(p: A.TypedProgram, a: AbsResult) -> Pdg:
    """Dependence graph of the instrumented program `p`; `a` should come from
    an analysis with every fault site symbolic."""
    return _Builder(p, a).build()


def dependent_sites(g: Pdg, targets, r=None) -> set:
    """Sites whose evaluation lies in the backward closure of the targets."""
    starts = []
    for t in targets:
        if t not in g.assertion_nodes:
            raise UnknownAssertion(t)
        starts.append(g.assertion_nodes[t])
    if not starts:
        return set()
    closure = g.backward(starts)
    sites = {s for s, n in g.site_nodes.items() if n in closure}
    if r is not None:
        sites &= set(r.ids)
    return sites
