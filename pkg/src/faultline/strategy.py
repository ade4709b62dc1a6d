"""Strategy files: which fault variables are symbolic, which are pinned.

A strategy is a small YAML document::

    version: "1.0"
    model: both
    max_faults: 1
    sites: [fault_4]
    fixed: {fault_2: 7}
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import SchemaMismatch, StrategyError
from .instrument import MODELS, FaultConfig, FaultRegistry

SCHEMA_VERSION = "1.0"
_NAME = re.compile(r"fault_(\d+)$")


def site_name(i: int) -> str:
    return f"fault_{i}"


def site_id(name: str) -> int:
    m = _NAME.match(name)
    if not m:
        raise StrategyError(f"not a fault variable: {name!r}")
    return int(m.group(1))


@dataclass
class Strategy:
    sites: tuple = ()
    fixed: dict = field(default_factory=dict)
    model: str = "both"
    max_faults: int = 1
    version: str = SCHEMA_VERSION
    # informational, never parsed back into the fault configuration
    complete: bool = True
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        self.sites = tuple(sorted(set(self.sites)))
        self.fixed = {int(k): int(v) for k, v in dict(self.fixed).items()}
        if self.model not in MODELS:
            raise StrategyError(f"unknown fault model {self.model!r}")
        if self.max_faults < 0:
            raise StrategyError("max_faults must be non-negative")
        both = set(self.sites) & set(self.fixed)
        if both:
            raise StrategyError(f"sites both symbolic and fixed: {sorted(both)}")

    @classmethod
    def from_selection(cls, sel, model: str = "both", max_faults: int = 1) -> "Strategy":
        return cls(tuple(sel.sites), {}, model, max_faults, complete=sel.complete,
                   provenance=[list(s) for s in sel.steps])

    def config(self) -> FaultConfig:
        return FaultConfig(frozenset(self.sites), dict(self.fixed), self.model)

    def check(self, r: FaultRegistry):
        known = set(r.ids)
        bad = [i for i in list(self.sites) + list(self.fixed) if i not in known]
        if bad:
            raise StrategyError("unknown fault variables: " + ", ".join(site_name(i) for i in sorted(bad)))
        if self.model != r.model:
            raise StrategyError(f"strategy model {self.model!r} differs from the registry's {r.model!r}")
        return self

    def to_dict(self) -> dict:
        d = {
            "version": self.version,
            "model": self.model,
            "max_faults": self.max_faults,
            "sites": [site_name(i) for i in self.sites],
            "fixed": {site_name(i): v for i, v in sorted(self.fixed.items())},
        }
        if not self.complete or self.provenance:
            d["complete"] = self.complete
            d["provenance"] = [list(p) for p in self.provenance]
        return d

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @classmethod
    def loads(cls, text: str) -> "Strategy":
        try:
            d = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise StrategyError(f"malformed strategy file: {e}") from None
        if not isinstance(d, dict):
            raise StrategyError("strategy file must be a mapping")
        version = str(d.get("version", ""))
        if version != SCHEMA_VERSION:
            raise SchemaMismatch(f"strategy schema {version!r}, expected {SCHEMA_VERSION!r}")
        unknown = set(d) - {"version", "model", "max_faults", "sites", "fixed", "complete", "provenance"}
        if unknown:
            raise StrategyError(f"unknown strategy keys: {sorted(unknown)}")
        sites = d.get("sites") or []
        fixed = d.get("fixed") or {}
        if not isinstance(sites, list) or not isinstance(fixed, dict):
            raise StrategyError("`sites` must be a list and `fixed` a mapping")
        try:
            max_faults = int(d.get("max_faults", 1))
            fixed_ids = {site_id(k): int(v) for k, v in fixed.items()}
        except (TypeError, ValueError):
            raise StrategyError("non-integer max_faults or fixed value") from None
        return cls(tuple(site_id(s) for s in sites), fixed_ids, str(d.get("model", "both")), max_faults,
                   version, bool(d.get("complete", True)),
                   [list(p) for p in d.get("provenance") or []])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())

    @classmethod
    def load(cls, path, registry: Optional[FaultRegistry] = None) -> "Strategy":
        with open(path, encoding="utf-8") as f:
            s = cls.loads(f.read())
        return s.check(registry) if registry is not None else s
