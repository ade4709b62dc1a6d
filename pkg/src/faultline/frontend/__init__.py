"""FIC frontend: parsing, checking, printing, CFG lowering and RTE assertions."""
from __future__ import annotations

from .. import ast as A
from .cfg import Cfg, build_cfg, lower_program
from .checker import check
from .parser import parse_syntax
from .printer import expr_text, pretty_print, program_text
from .rte import generate_rte_assertions


def parse(unit: A.SourceUnit) -> A.TypedProgram:
    return check(parse_syntax(unit.text, unit.path, unit.defines), unit.entry, unit.path)


def parse_text(text: str, entry=None, path: str = "<fic>", defines=frozenset()) -> A.TypedProgram:
    return parse(A.SourceUnit(path, text, entry, frozenset(defines)))


def load(path, entry=None, defines=frozenset()) -> A.TypedProgram:
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), entry, str(path), defines)


__all__ = [
    "Cfg", "build_cfg", "lower_program", "check", "parse_syntax", "parse", "parse_text", "load",
    "expr_text", "pretty_print", "program_text", "generate_rte_assertions",
]
