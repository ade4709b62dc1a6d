"""Bundled FIC programs and their harness settings."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import yaml

HERE = Path(__file__).parent


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    path: Path
    inputs: dict = field(default_factory=dict)
    count_inputs: dict = field(default_factory=dict)
    defines: frozenset = frozenset()
    model: str = "both"
    suite: bool = True

    def load(self, defines=None):
        from ..frontend import load
        return load(self.path, defines=self.defines if defines is None else frozenset(defines))

    def registry(self, model=None, defines=None):
        from ..instrument import instrument
        return instrument(self.load(defines), model or self.model)


@lru_cache(maxsize=None)
def _manifest() -> dict:
    with open(HERE / "manifest.yaml", encoding="utf-8") as f:
        return yaml.safe_load(f)


def get(name: str) -> CorpusEntry:
    d = _manifest().get(name)
    if d is None:
        raise KeyError(f"no corpus program named {name!r}")
    return CorpusEntry(name, HERE / d["file"], dict(d.get("inputs") or {}), dict(d.get("count_inputs") or {}),
                       frozenset(d.get("defines") or ()), d.get("model", "both"), bool(d.get("suite", True)))


def names(suite_only: bool = False) -> list:
    return [n for n in _manifest() if not suite_only or _manifest()[n].get("suite", True)]


def find(source: str):
    """Corpus entry for a bare program name or a path to a bundled file."""
    for n in names():
        e = get(n)
        if source == n or Path(source).resolve() == e.path.resolve():
            return e
    return None
