"""Injection-point selection.

The sound steps (dependency selection, proven-assertion elimination and the
single-fault brute-force filter) only remove sites that cannot contribute to
an assertion violation.  The heuristic steps (occurrence limit, growing and
shrinking) trade completeness for run time and mark the selection as
incomplete.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import ast as A
from .absint import PROVEN, UNREACHABLE, AbsResult, analyze
from .depgraph import Pdg, build_pdg, dependent_sites
from .errors import MultiFaultContext, NonTerminating, UnknownAssertion
from .frontend import cfg as C
from .instrument import FaultConfig, FaultRegistry, fix_and_simplify, insert_counters, site_statements
from .interp import STEP_LIMIT, concrete_run, lower_cached

U32_MAX = A.U32.max


@dataclass
class Selection:
    sites: tuple
    provenance: dict = field(default_factory=dict)   # site -> [step tags]
    targets: frozenset = frozenset()
    complete: bool = True
    steps: list = field(default_factory=list)       # (tag, sites before, sites after, seconds)
    graph: Optional[Pdg] = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.sites)

    def __contains__(self, s):
        return s in self.sites

    def derive(self, keep, tag: str, seconds: float, targets=None, complete=None) -> "Selection":
        keep = tuple(sorted(set(keep) & set(self.sites)))
        prov = {s: self.provenance.get(s, []) + [tag] for s in keep}
        return Selection(keep, prov, self.targets if targets is None else frozenset(targets),
                         self.complete if complete is None else complete,
                         self.steps + [(tag, len(self.sites), len(keep), round(seconds, 3))], self.graph)

    def config(self, model: str = "both") -> FaultConfig:
        return FaultConfig(frozenset(self.sites), {}, model)


@dataclass
class OccurrenceMap:
    exact: dict = field(default_factory=dict)       # site -> count
    projected: dict = field(default_factory=dict)   # site -> count (nominally dead sites)
    source: dict = field(default_factory=dict)      # site -> "absint" | "concrete"

    def count(self, site: int):
        if site in self.exact:
            return self.exact[site]
        return self.projected.get(site)


def all_sites(r: FaultRegistry) -> Selection:
    return Selection(tuple(r.ids), {s: ["all"] for s in r.ids}, frozenset(a.id for a in r.program.assertions))


# ---------------------------------------------------------------- sound steps


def select_by_dependency(r: FaultRegistry, g: Optional[Pdg] = None, targets=None, budget: float = 10.0) -> Selection:
    t0 = time.monotonic()
    if g is None:
        a = analyze(r.program, FaultConfig.all_symbolic(r), budget)
        g = build_pdg(r.program, a)
    ids = [x.id for x in r.program.assertions]
    targets = list(ids if targets is None else targets)
    for t in targets:
        if t not in ids:
            raise UnknownAssertion(t)
    sites = dependent_sites(g, targets, r)
    base = all_sites(r)
    base.graph = g
    out = base.derive(sites, "deps", time.monotonic() - t0, targets)
    out.steps[-1] = ("deps", len(r.sites), len(out.sites), out.steps[-1][3])
    return out


def eliminate_proven(sel: Selection, r: FaultRegistry, budget: float = 10.0) -> Selection:
    """Drop assertions proven with the selected sites symbolic, and the sites
    that only they depended on."""
    t0 = time.monotonic()
    a = analyze(r.program, FaultConfig(frozenset(sel.sites), {}, r.model), budget)
    if a.timed_out:
        return sel.derive(sel.sites, "prove", time.monotonic() - t0)
    left = [t for t in sorted(sel.targets) if a.status(t) not in (PROVEN, UNREACHABLE)]
    g = sel.graph
    if g is None:
        g = build_pdg(r.program, analyze(r.program, FaultConfig.all_symbolic(r), budget))
    keep = dependent_sites(g, left, r) if left else set()
    return sel.derive(keep, "prove", time.monotonic() - t0, left)


def brute_force_filter(sel: Selection, r: FaultRegistry, budget_per_site: float = 10.0,
                       max_faults: int = 1) -> Selection:
    """Keep a site unless the analysis with only that site faulted proves
    every target assertion.  Valid for single faults only."""
    if max_faults > 1:
        raise MultiFaultContext("brute-force filtering only holds for a single fault")
    t0 = time.monotonic()
    keep = []
    for s in sel.sites:
        cfg = FaultConfig(frozenset([s]), {}, r.model)
        prog = fix_and_simplify(r, cfg)
        a = analyze(prog, cfg, budget_per_site)
        if a.timed_out or any(a.status(t) not in (PROVEN, UNREACHABLE) for t in sel.targets):
            keep.append(s)
    return sel.derive(keep, "brute-force", time.monotonic() - t0)


# ---------------------------------------------------------------- occurrences


def count_occurrences(r: FaultRegistry, inputs=None, budget: float = 10.0, step_limit: int = 2_000_000) -> OccurrenceMap:
    """Nominal evaluation count of every site, from counter bounds computed by
    the interval analysis, or from a concrete run where those are too coarse."""
    rc = r if r.has_counters else insert_counters(r)
    a = analyze(rc.program, FaultConfig.inactive(r), budget, inputs)
    occ = OccurrenceMap()
    vague = []
    for s in r.sites:
        itv = None if a.timed_out else a.counter_max.get(s.counter_name)
        if itv is None or itv[1] >= U32_MAX:
            vague.append(s.id)
        elif itv[1] > 0:
            occ.exact[s.id] = itv[1]
            occ.source[s.id] = "absint"
    if vague:
        tr = concrete_run(rc.program, _concrete_inputs(inputs), step_limit=step_limit)
        if tr.kind == STEP_LIMIT:
            raise NonTerminating(f"nominal run exceeded {step_limit} steps")
        for s in vague:
            n = tr.counters.get(r.site(s).counter_name, 0)
            if n > 0:
                occ.exact[s] = n
                occ.source[s] = "concrete"
    return occ


def _concrete_inputs(inputs):
    out = {}
    for k, v in (inputs or {}).items():
        out[k] = v[0] if isinstance(v, tuple) else v
    return out


def _cyclic_blocks(cfg: C.Cfg, region: set) -> set:
    """Blocks of `region` lying on a cycle of the CFG restricted to it."""
    succ = {b: [s for s, _l in cfg.blocks[b].succs if s in region] for b in region}
    out = set()
    for start in region:
        seen, stack = set(), list(succ[start])
        while stack:
            b = stack.pop()
            if b == start:
                out.add(start)
                break
            if b in seen:
                continue
            seen.add(b)
            stack.extend(succ[b])
    return out


def project_occurrences(r: FaultRegistry, occ: OccurrenceMap, a_nominal: Optional[AbsResult] = None,
                        inputs=None, budget: float = 10.0) -> OccurrenceMap:
    """Give sites in nominally dead code the count of the branch leading
    there, unless they sit on a cycle inside the dead region."""
    p = r.program
    if a_nominal is None:
        a_nominal = analyze(p, FaultConfig.inactive(r), budget, inputs)
    cfgs = lower_cached(p)
    where = site_statements(r, cfgs)
    visits = None
    projected = {}
    for fname, cfg in cfgs.items():
        dead = {b for (f, b) in a_nominal.dead_blocks if f == fname}
        if not dead:
            continue
        block_of = cfg.block_of()
        for b in cfg.blocks.values():
            if (fname, b.id) in a_nominal.dead_blocks or b.term is None or b.term.kind != C.BRANCH:
                continue
            dsucc = [s for s, _l in b.succs if s in dead]
            if len(dsucc) != 1 or len(b.succs) != 2:
                continue
            # branch executions: the condition's own site count, else a nominal run
            n = None
            for x in A.walk_expr(b.term.value):
                if isinstance(x, A.Fault) and x.site in occ.exact:
                    n = occ.exact[x.site]
            if n is None:
                if visits is None:
                    tr = concrete_run(p, _concrete_inputs(inputs))
                    visits = {}
                    for sid in tr.visited:
                        visits[sid] = visits.get(sid, 0) + 1
                n = visits.get(b.term.sid, 0)
            if n == 0:
                continue
            region, stack = set(), [dsucc[0]]
            while stack:
                x = stack.pop()
                if x in region or x not in dead:
                    continue
                region.add(x)
                stack.extend(s for s, _l in cfg.blocks[x].succs)
            cyc = _cyclic_blocks(cfg, region)
            for site, (f, sid) in where.items():
                if f != fname or site in occ.exact:
                    continue
                blk = block_of.get(sid)
                if blk in region and blk not in cyc:
                    projected[site] = projected.get(site, 0) + n
    return OccurrenceMap(dict(occ.exact), projected, dict(occ.source))


def filter_by_occurrence(sel: Selection, occ: OccurrenceMap, limit: int) -> Selection:
    t0 = time.monotonic()
    keep = [s for s in sel.sites if occ.count(s) is not None and occ.count(s) <= limit]
    return sel.derive(keep, f"occ<={limit}", time.monotonic() - t0, complete=False)


# ---------------------------------------------------------------- growing / shrinking


def make_runner(r: FaultRegistry, max_faults: int = 1, model: Optional[str] = None, **explore_kw) -> Callable:
    """runner(sites, budget) -> ExploreResult over the registry."""
    from .symex.engine import explore

    def runner(sites, budget):
        cfg = FaultConfig(frozenset(sites), {}, model or r.model)
        return explore(r, cfg, max_faults=max_faults, budget=budget, **explore_kw)

    return runner


def _finished(res) -> bool:
    return not res.timed_out


def strategy_grow(sel: Selection, runner: Callable, per_run_timeout: float = 60.0, order=None,
                  occ: Optional[OccurrenceMap] = None) -> Selection:
    """Add sites one at a time, keeping each one only if the run with it
    still finishes within `per_run_timeout` seconds.  The default order is
    by ascending occurrence count, then by site id."""
    t0 = time.monotonic()
    if order is None:
        def key(s):
            c = occ.count(s) if occ is not None else None
            return (c if c is not None else float("inf"), s)
        order = sorted(sel.sites, key=key)
    kept = []
    for s in order:
        if s not in sel.sites:
            continue
        if _finished(runner(kept + [s], per_run_timeout)):
            kept.append(s)
    return sel.derive(kept, "grow", time.monotonic() - t0, complete=False)


def strategy_shrink(sel: Selection, runner: Callable, run_budget: float = 60.0, max_faults: int = 1) -> Selection:
    """Remove the site injected most often on unfinished paths until a run
    finishes within `run_budget`.  Ties go to the lower site id."""
    if max_faults > 1:
        raise MultiFaultContext("trace-guided shrinking only holds for a single fault")
    t0 = time.monotonic()
    sites = list(sel.sites)
    while sites:
        res = runner(sites, run_budget)
        if _finished(res):
            break
        counts = res.early.trigger_counts()
        victim = min(sites, key=lambda s: (-counts.get(s, 0), s))
        sites.remove(victim)
    return sel.derive(sites, "shrink", time.monotonic() - t0, complete=False)
