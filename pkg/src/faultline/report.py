"""Run reports: JSON documents plus the text renderings used by the CLI."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import SchemaMismatch

REPORT_VERSION = "1.0"

EXIT_SAFE, EXIT_ATTACKS, EXIT_INCOMPLETE = 0, 1, 2


@dataclass
class RunReport:
    program: str
    strategy: dict
    table: dict                                   # ReportTable.to_dict()
    attacks: list = field(default_factory=list)   # AttackPath.to_dict() each
    steps: list = field(default_factory=list)     # [tag, sites before, sites after, seconds]
    assertions_total: int = 0
    assertions_unproven: int = 0
    complete: bool = True
    unknown_queries: int = 0
    replay_failures: int = 0
    elapsed: float = 0.0
    label: str = ""
    version: str = REPORT_VERSION

    @classmethod
    def from_result(cls, program: str, strategy, res, steps=(), assertions=(0, 0), label: str = ""):
        complete = bool(res.complete and strategy.complete)
        return cls(program, strategy.to_dict(), res.table.to_dict(),
                   [a.to_dict() for a in res.attacks], [list(s) for s in steps],
                   assertions[0], assertions[1], complete, res.unknown_queries, res.replay_failures,
                   round(res.elapsed, 3), label)

    @property
    def attack_count(self) -> int:
        return len(self.attacks)

    @property
    def exit_code(self) -> int:
        if self.attacks:
            return EXIT_ATTACKS
        return EXIT_SAFE if self.complete else EXIT_INCOMPLETE

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "RunReport":
        d = json.loads(text)
        v = str(d.get("version", ""))
        if v != REPORT_VERSION:
            raise SchemaMismatch(f"report schema {v!r}, expected {REPORT_VERSION!r}")
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def golden(self) -> dict:
        """The timing-free part compared against committed expectations."""
        t = dict(self.table)
        sigs = sorted({(a["assertion"], tuple(sorted({f[0] for f in a["faults"]})), a["fault_count"])
                       for a in self.attacks})
        return {"sites": t["sites"], "rows": t["rows"], "totals": t["totals"],
                "signatures": [[s[0], list(s[1]), s[2]] for s in sigs]}

    def render(self) -> str:
        t = self.table
        k = t["max_faults"]
        head = ["Injection Point"] + [f"{i}-fault" for i in range(k + 1)]
        rows = [[f"fault_{s}"] + [str(x) for x in t["rows"][str(s)]] for s in t["sites"]]
        rows.append(["total"] + [str(x) for x in t["totals"]])
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]

        def fmt(r):
            return " | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()

        lines = [f"program: {self.program}"]
        for tag, before, after, secs in self.steps:
            lines.append(f"  {tag}: {before} -> {after} sites ({secs:.2f}s)")
        lines.append(f"assertions: {self.assertions_total} total, {self.assertions_unproven} unproven")
        lines += ["Fault Count".rjust(len(fmt(head))), fmt(head), "-+-".join("-" * w for w in widths)]
        lines += [fmt(r) for r in rows]
        lines.append(f"explored paths: {t['explored_paths']}   early traces: {t['early_traces']}")
        for a in self.attacks:
            faults = ", ".join(f"fault_{s}@{o}={v:#x}" for s, o, v in a["faults"]) or "none"
            ins = ", ".join(f"{n}={v}" for n, v in sorted(a["inputs"].items())) or "-"
            lines.append(f"attack on {a['assertion']}: {faults}  inputs: {ins}")
        if not self.complete:
            lines.append("result is INCOMPLETE (heuristic selection, timeout or unknown solver query)")
        return "\n".join(lines)


def compare(reports) -> str:
    """Side-by-side injection points, attack paths, explored paths and time."""
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report")
    versions = {r.version for r in reports}
    if len(versions) > 1:
        raise SchemaMismatch(f"reports from different schema versions: {sorted(versions)}")
    head = ["run", "IP", "AP", "EP", "time", "complete"]
    rows = []
    for i, r in enumerate(reports):
        rows.append([r.label or f"{r.program}#{i}", str(len(r.table["sites"])), str(r.attack_count),
                     str(r.table["explored_paths"] + r.table["early_traces"]), f"{r.elapsed:.2f}",
                     "yes" if r.complete else "no"])
    widths = [max(len(x[i]) for x in [head] + rows) for i in range(len(head))]
    out = [" | ".join(c.ljust(w) for c, w in zip(head, widths)).rstrip(),
           "-+-".join("-" * w for w in widths)]
    out += [" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(out)


def load(path) -> RunReport:
    with open(path, encoding="utf-8") as f:
        return RunReport.loads(f.read())
