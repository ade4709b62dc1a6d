"""Table of injection points, attack signatures and explored paths per
bundled program, for all sites versus the dependency selection (+ proofs).

    python3 scripts/compare_selections.py [--max-faults 1] [--model both]
"""
import argparse
import time

from faultline import corpus
from faultline.instrument import FaultConfig
from faultline.selection import eliminate_proven, select_by_dependency
from faultline.symex.engine import explore


def run(r, cfg, e, k, budget):
    t0 = time.monotonic()
    res = explore(r, cfg, max_faults=k, budget=budget, inputs=e.inputs)
    return res, time.monotonic() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-faults", type=int, default=1)
    ap.add_argument("--model", default="both")
    ap.add_argument("--budget", type=float, default=300.0)
    args = ap.parse_args()
    head = f"{'program':<18} {'IP all':>6} {'IP deps':>7} {'AP all':>6} {'AP deps':>7} {'EP all':>7} {'EP deps':>7} {'t all':>6} {'t deps':>6} same"
    print(head)
    print("-" * len(head))
    for name in corpus.names(suite_only=True):
        e = corpus.get(name)
        r = e.registry(args.model)
        full, tf = run(r, FaultConfig.all_symbolic(r), e, args.max_faults, args.budget)
        sel = eliminate_proven(select_by_dependency(r), r)
        part, tp = run(r, sel.config(r.model), e, args.max_faults, args.budget)
        ep = lambda x: x.table.explored_paths + x.table.early_traces
        print(f"{name:<18} {len(r.sites):>6} {len(sel.sites):>7} {len(full.signatures):>6} {len(part.signatures):>7} "
              f"{ep(full):>7} {ep(part):>7} {tf:>6.2f} {tp:>6.2f} {'yes' if full.signatures == part.signatures else 'no'}")


if __name__ == "__main__":
    main()
