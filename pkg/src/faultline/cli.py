"""faultline command line: instrument | select | attack | report."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import corpus
from . import report as R
from . import selection as S
from .absint import PROVEN, UNREACHABLE, analyze
from .errors import FaultlineError, FlagConflict
from .frontend import generate_rte_assertions, load, program_text
from .instrument import MODELS, FaultConfig, instrument
from .strategy import Strategy

log = logging.getLogger("faultline")


@dataclass
class Harness:
    """Everything needed to rebuild the same registry and run it."""
    source: str
    name: str
    defines: frozenset = frozenset()
    model: str = "both"
    entry: str = None
    rte: bool = False
    inputs: dict = field(default_factory=dict)
    count_inputs: dict = field(default_factory=dict)
    domains: dict = field(default_factory=dict)

    def registry(self):
        p = load(self.path, self.entry, self.defines)
        if self.rte:
            p = generate_rte_assertions(p)
        return instrument(p, self.model)

    @property
    def path(self):
        e = corpus.find(self.source)
        return e.path if e is not None else Path(self.source)


def _kv(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), int(v, 0)


def _domain(text: str):
    k, v = _kv_raw(text)
    lo, _, hi = v.partition(":")
    try:
        return k, (int(lo, 0), int(hi, 0))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=LO:HI, got {text!r}") from None


def _kv_raw(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=..., got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v


def harness(args) -> Harness:
    e = corpus.find(args.source)
    h = Harness(args.source, e.name if e else Path(args.source).stem)
    if e is not None:
        h.defines, h.model = e.defines, e.model
        h.inputs, h.count_inputs = dict(e.inputs), dict(e.count_inputs)
    if getattr(args, "define", None) is not None:
        h.defines = frozenset(args.define)
    if getattr(args, "model", None):
        h.model = args.model
    h.entry = getattr(args, "entry", None)
    h.rte = getattr(args, "rte", False)
    for k, v in getattr(args, "input", None) or []:
        h.inputs[k] = v
        h.count_inputs[k] = v
    h.domains = dict(getattr(args, "domain", None) or [])
    return h


# ---------------------------------------------------------------- commands


def cmd_instrument(args) -> int:
    h = harness(args)
    r = h.registry()
    text = program_text(r.program)
    reg = [{"name": s.var_name, "function": s.function, "line": s.loc[0] if s.loc else None,
            "role": s.role, "type": s.expr_type.name, "kind": s.kind, "expr": s.text} for s in r.sites]
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    reg_path = args.registry or (str(Path(args.output).with_suffix(".registry.yaml")) if args.output else None)
    doc = yaml.safe_dump({"model": r.model, "sites": reg}, sort_keys=False)
    if reg_path:
        Path(reg_path).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write("\n// registry\n" + "".join("// " + line + "\n" for line in doc.splitlines()))
    return 0


def check_flags(args):
    if args.max_faults > 1 and args.brute_force:
        raise FlagConflict("--brute-force only holds for a single fault (use --max-faults 1)")
    if args.max_faults > 1 and args.shrink:
        raise FlagConflict("--shrink only holds for a single fault (use --max-faults 1)")
    if args.grow and args.shrink:
        raise FlagConflict("--grow and --shrink are alternatives")


def run_select(h: Harness, args, r=None):
    """The configured selection pipeline; returns (registry, Selection)."""
    check_flags(args)
    r = r or h.registry()
    if not r.program.assertions:
        log.warning("program has no assertions; the strategy is empty")
        sel = S.all_sites(r).derive((), "no-assertions", 0.0, ())
        return r, sel
    sel = S.select_by_dependency(r, budget=args.analysis_budget) if args.deps else S.all_sites(r)
    if args.prove:
        sel = S.eliminate_proven(sel, r, args.analysis_budget)
    if args.brute_force:
        sel = S.brute_force_filter(sel, r, args.analysis_budget, args.max_faults)
    occ = None
    if args.occ_limit is not None or args.grow:
        occ = S.count_occurrences(r, h.count_inputs or h.inputs, args.analysis_budget)
        occ = S.project_occurrences(r, occ, inputs=h.count_inputs or h.inputs, budget=args.analysis_budget)
    if args.occ_limit is not None:
        sel = S.filter_by_occurrence(sel, occ, args.occ_limit)
    if args.grow or args.shrink:
        runner = S.make_runner(r, args.max_faults, inputs=h.inputs, domains=h.domains, search=args.search)
        if args.grow:
            sel = S.strategy_grow(sel, runner, args.run_timeout, occ=occ)
        else:
            sel = S.strategy_shrink(sel, runner, args.run_timeout, args.max_faults)
    return r, sel


def cmd_select(args) -> int:
    h = harness(args)
    _r, sel = run_select(h, args)
    st = Strategy.from_selection(sel, h.model, args.max_faults)
    text = st.dumps()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for tag, before, after, secs in sel.steps:
        log.info("%s: %d -> %d sites (%.2fs)", tag, before, after, secs)
    return 0


def assertion_stats(r, cfg: FaultConfig, budget: float):
    total = len(r.program.assertions)
    a = analyze(r.program, cfg, budget)
    if a.timed_out:
        return total, total
    return total, sum(1 for x in r.program.assertions if a.status(x.id) not in (PROVEN, UNREACHABLE))


def run_attack(h: Harness, st: Strategy, args, r=None, label: str = ""):
    from .symex.engine import explore
    r = r or h.registry()
    st.check(r)
    max_faults = st.max_faults if args.max_faults is None else args.max_faults
    res = explore(r, st.config(), max_faults=max_faults, budget=args.budget, search=args.search,
                  inputs=h.inputs, domains=h.domains)
    stats = assertion_stats(r, st.config(), args.analysis_budget)
    steps = [p for p in st.provenance]
    return R.RunReport.from_result(h.name, st, res, steps, stats, label)


def cmd_attack(args) -> int:
    h = harness(args)
    r = h.registry()
    if args.strategy:
        st = Strategy.load(args.strategy, r)
        if args.max_faults is not None:
            st.max_faults = args.max_faults
    else:
        sel_args = argparse.Namespace(**vars(args))
        sel_args.max_faults = args.max_faults if args.max_faults is not None else 1
        _r, sel = run_select(h, sel_args, r)
        st = Strategy.from_selection(sel, h.model, sel_args.max_faults)
    rep = run_attack(h, st, args, r, args.label or "")
    if args.json:
        Path(args.json).write_text(rep.dumps(), encoding="utf-8")
    print(rep.dumps() if args.format == "json" else rep.render())
    return rep.exit_code


def cmd_report(args) -> int:
    reps = [R.load(p) for p in args.reports]
    if len(reps) == 1 and not args.compare:
        print(reps[0].render())
    else:
        print(R.compare(reps))
    return 0


# ---------------------------------------------------------------- parser


def _common(p, with_inputs=True):
    p.add_argument("source", help="FIC file, or the name of a bundled program")
    p.add_argument("-D", "--define", action="append", help="preprocessor symbol (repeatable)")
    p.add_argument("--model", choices=MODELS, help="fault model (default: both)")
    p.add_argument("--entry", help="entry function")
    p.add_argument("--rte", action="store_true", help="add bounds-check assertions for array accesses")
    if with_inputs:
        p.add_argument("--input", type=_kv, action="append", metavar="NAME=VALUE", help="pin an input")
        p.add_argument("--domain", type=_domain, action="append", metavar="NAME=LO:HI",
                       help="finite domain for an input")


def _selection_flags(p, default_faults):
    p.add_argument("--deps", action="store_true", help="keep sites the assertions depend on")
    p.add_argument("--prove", action="store_true", help="drop sites of assertions proven safe")
    p.add_argument("--brute-force", action="store_true", help="per-site interval check (single fault)")
    p.add_argument("--occ-limit", type=int, metavar="N", help="keep sites executed at most N times")
    p.add_argument("--grow", action="store_true", help="add sites while runs finish in time")
    p.add_argument("--shrink", action="store_true", help="remove hot sites until a run finishes")
    p.add_argument("--max-faults", type=int, default=default_faults)
    p.add_argument("--run-timeout", type=float, default=60.0, help="per-run timeout for --grow/--shrink")
    p.add_argument("--analysis-budget", type=float, default=30.0, help="seconds per static analysis")
    p.add_argument("--search", choices=("dfs", "bfs"), default="dfs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="faultline", description="Fault injection attack search for FIC programs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("instrument", help="print the instrumented program and its fault registry")
    _common(p, with_inputs=False)
    p.add_argument("-o", "--output", help="instrumented source file")
    p.add_argument("--registry", help="registry file (YAML)")
    p.set_defaults(func=cmd_instrument)

    p = sub.add_parser("select", help="choose injection points and write a strategy file")
    _common(p)
    _selection_flags(p, 1)
    p.add_argument("-o", "--output", help="strategy file (default: stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("attack", help="search for attacks; exit 0 safe, 1 attacks, 2 incomplete")
    _common(p)
    _selection_flags(p, None)
    p.add_argument("--strategy", help="strategy file (default: run the selection flags)")
    p.add_argument("--budget", type=float, default=300.0, help="symbolic execution time budget")
    p.add_argument("--json", help="also write the JSON report here")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--label", help="row label used by `report`")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("report", help="render or compare JSON reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--compare", action="store_true", help="comparison table even for one report")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except FaultlineError as e:
        print(f"faultline: error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"faultline: error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
