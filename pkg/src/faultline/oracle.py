"""Exhaustive concrete attack oracle.

Enumerates every input in the declared finite domains and every placement
of up to ``max_faults`` faults on dynamic site occurrences, with fault
values drawn from a small fixed set, and runs each combination on the
reference interpreter.  It is slow by design and only meant for
cross-checking the symbolic engine on desk-sized programs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from .instrument import TEST, FaultConfig, FaultRegistry, fix_and_simplify
from .interp import VIOLATION, concrete_run


@dataclass
class OracleResult:
    signatures: set = field(default_factory=set)
    witnesses: dict = field(default_factory=dict)   # signature -> (inputs, faults)
    runs: int = 0
    step_limited: int = 0


def declared_domains(p: A.TypedProgram) -> dict:
    """name -> (lo, hi) for every `__sym_input` carrying explicit bounds."""
    out = {}
    for f in p.functions:
        for s in A.walk_stmts(f.body):
            for e in A.stmt_exprs(s):
                for x in A.walk_expr(e):
                    if isinstance(x, A.SymInput) and x.lo is not None:
                        out.setdefault(x.name, (x.lo, x.hi))
    return out


def fault_values(ty: A.IntType, kind: str, model: str) -> list:
    """1 (which also flips a 0/1 condition) and the all-ones pattern."""
    if model == "test-inversion":
        return [1]
    return [1, ty.mask]


def _input_space(p, inputs, domains, limit):
    doms = declared_domains(p)
    doms.update(domains or {})
    names = sorted(n for n in doms if n not in (inputs or {}))
    size = 1
    for n in names:
        lo, hi = doms[n]
        size *= hi - lo + 1
    if size > limit:
        raise ValueError(f"input space of {size} points exceeds the oracle limit {limit}")
    for combo in itertools.product(*(range(doms[n][0], doms[n][1] + 1) for n in names)):
        env = dict(inputs or {})
        env.update(zip(names, combo))
        yield env


def oracle(target, strategy: Optional[FaultConfig] = None, max_faults: int = 1, inputs=None,
           domains=None, step_limit: int = 100_000, input_limit: int = 4096) -> OracleResult:
    """Attack signatures (assertion, sorted fault sites, fault count) found by
    exhaustive concrete enumeration."""
    if isinstance(target, FaultRegistry):
        strategy = strategy or FaultConfig.all_symbolic(target)
        prog = fix_and_simplify(target, strategy)
        kinds = {s.id: (s.expr_type, s.kind) for s in target.sites}
        model = strategy.model
    else:
        prog = target
        kinds = {}
        for f in prog.functions:
            for s in A.walk_stmts(f.body):
                for e in A.stmt_exprs(s):
                    for x in A.walk_expr(e):
                        if isinstance(x, A.Fault):
                            kinds[x.site] = (x.ty, TEST if x.ty == A.U8 and A.is_boolean(x.expr) else "data")
        model = strategy.model if strategy else "both"
    active = {s for f in prog.functions for st in A.walk_stmts(f.body) for e in A.stmt_exprs(st)
              for s in (x.site for x in A.walk_expr(e) if isinstance(x, A.Fault))}
    res = OracleResult()

    def run(env, events):
        res.runs += 1
        tr = concrete_run(prog, env, events, step_limit=step_limit)
        if tr.kind == "step-limit":
            res.step_limited += 1
        if tr.kind == VIOLATION:
            sig = (tr.assertion, tuple(sorted(s for s, _o, _v in tr.faults)), len(tr.faults))
            if sig not in res.signatures:
                res.signatures.add(sig)
                res.witnesses[sig] = (dict(env), tuple(tr.faults))
        return tr

    def extend(env, events, depth):
        tr = run(env, events)
        if depth == max_faults:
            return
        used = {(s, o) for s, o, _v in events}
        for site in sorted(tr.occurrences):
            if site not in active:
                continue
            ty, kind = kinds.get(site, (A.U32, "data"))
            for occ in range(tr.occurrences[site]):
                if (site, occ) in used:
                    continue
                for v in fault_values(ty, kind, model):
                    extend(env, events + ((site, occ, v),), depth + 1)

    for env in _input_space(prog, inputs, domains, input_limit):
        extend(env, (), 0)
    return res
