"""Pretty printer producing FIC source that parses back to an equal program."""
from __future__ import annotations

from .. import ast as A

_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}
_UNARY = 11
_ATOM = 12

_RTE_TAG = {"rte-index-bound": "index_bound", "rte-read-valid": "read_valid"}


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, A.Fault):
        return _PREC["^"]
    if isinstance(e, (A.Unary, A.Cast)):
        return _UNARY
    return _ATOM


def const_text(c: A.Const) -> str:
    if c.ty == A.U32:
        return f"{c.value}u" if c.value < 256 else f"0x{c.value:x}u"
    if c.value < 0:
        return f"({c.value})"
    return str(c.value)


def expr_text(e: A.Expr) -> str:
    if isinstance(e, A.Const):
        return const_text(e)
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Field):
        return f"{expr_text(e.base)}{'->' if e.arrow else '.'}{e.name}"
    if isinstance(e, A.Index):
        return f"{expr_text(e.base)}[{expr_text(e.index)}]"
    if isinstance(e, A.Unary):
        inner = expr_text(e.operand)
        if _prec(e.operand) < _UNARY or (e.op == "-" and inner.startswith("-")):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, A.Cast):
        inner = expr_text(e.operand)
        if _prec(e.operand) < _UNARY:
            inner = f"({inner})"
        return f"({e.ty}){inner}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        left, right = expr_text(e.left), expr_text(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, A.Fault):
        inner = expr_text(e.expr)
        if _prec(e.expr) < _ATOM:
            inner = f"({inner})"
        return f"{inner} ^ fault_{e.site}"
    if isinstance(e, A.SymInput):
        dom = f", {e.lo}, {e.hi}" if e.lo is not None else ""
        return f'__sym_input_{e.ty}("{e.name}"{dom})'
    raise TypeError(f"cannot print {e!r}")


def _decl(ty, name: str) -> str:
    if isinstance(ty, A.ArrayType):
        return f"{ty.elem} {name}[{ty.length}]"
    if isinstance(ty, A.PointerType):
        if isinstance(ty.target, A.ArrayType):
            return _decl(ty.target, name)
        return f"{ty.target} *{name}"
    return f"{ty} {name}"


class _Writer:
    def __init__(self):
        self.lines: list[str] = []

    def emit(self, depth: int, text: str):
        self.lines.append("    " * depth + text)

    def body(self, stmts: list, depth: int):
        for s in stmts:
            self.stmt(s, depth)

    def stmt(self, s: A.Stmt, d: int):
        if isinstance(s, A.Decl):
            init = f" = {expr_text(s.init)}" if s.init is not None else ""
            self.emit(d, f"{_decl(s.ty, s.name)}{init};")
        elif isinstance(s, A.Assign):
            self.emit(d, f"{expr_text(s.target)} = {expr_text(s.value)};")
        elif isinstance(s, A.Call):
            call = f"{s.func}({', '.join(expr_text(a) for a in s.args)})"
            if s.target is not None:
                call = f"{expr_text(s.target)} = {call}"
            self.emit(d, call + ";")
        elif isinstance(s, A.If):
            self.emit(d, f"if ({expr_text(s.cond)}) {{")
            self.body(s.then, d + 1)
            if s.orelse is not None:
                self.emit(d, "} else {")
                self.body(s.orelse, d + 1)
            self.emit(d, "}")
        elif isinstance(s, A.While):
            self.emit(d, f"while ({expr_text(s.cond)}) {{")
            self.body(s.body, d + 1)
            self.emit(d, "}")
        elif isinstance(s, A.For):
            init = f"{expr_text(s.init.target)} = {expr_text(s.init.value)}" if s.init else ""
            cond = expr_text(s.cond) if s.cond is not None else ""
            step = f"{expr_text(s.step.target)} = {expr_text(s.step.value)}" if s.step else ""
            self.emit(d, f"for ({init}; {cond}; {step}) {{")
            self.body(s.body, d + 1)
            self.emit(d, "}")
        elif isinstance(s, A.Break):
            self.emit(d, "break;")
        elif isinstance(s, A.Goto):
            self.emit(d, f"goto {s.label};")
        elif isinstance(s, A.Label):
            self.emit(max(d - 1, 0), f"{s.name}:")
        elif isinstance(s, A.Return):
            self.emit(d, "return;" if s.value is None else f"return {expr_text(s.value)};")
        elif isinstance(s, A.Block):
            self.emit(d, "{")
            self.body(s.body, d + 1)
            self.emit(d, "}")
        elif isinstance(s, A.Countermeasure):
            self.emit(d, "__countermeasure();")
        elif isinstance(s, A.AssertStmt):
            tag = f"rte: {_RTE_TAG[s.ref.origin]}: " if s.ref.origin != "user" else ""
            self.emit(d, f"//@ assert {tag}{expr_text(s.ref.cond)};")
        elif isinstance(s, A.CounterIncr):
            self.emit(d, f"fault_{s.site}_counter ++;")
        else:
            raise TypeError(f"cannot print {s!r}")


def program_text(p: A.TypedProgram) -> str:
    w = _Writer()
    for r in p.records:
        w.emit(0, f"typedef struct {r.name} {{")
        for name, ty in r.fields:
            w.emit(1, f"{_decl(ty, name)};")
        w.emit(0, f"}} {r.name};")
        w.emit(0, "")
    for g in p.globals:
        if g.kind == "fault":
            w.emit(0, f"extern {g.ty} {g.name};")
        elif g.init is not None:
            vals = ", ".join(str(v) for v in g.init)
            w.emit(0, f"{_decl(g.ty, g.name)} = {{{vals}}};" if isinstance(g.ty, A.ArrayType) else f"{_decl(g.ty, g.name)} = {vals};")
        else:
            w.emit(0, f"{_decl(g.ty, g.name)};")
    if p.globals:
        w.emit(0, "")
    for f in p.functions:
        params = ", ".join(_decl(q.ty, q.name) for q in f.params) or "void"
        ret = f"{f.ret.target} *" if isinstance(f.ret, A.PointerType) else f"{f.ret} "
        w.emit(0, f"{ret}{f.name}({params})")
        w.emit(0, "{")
        w.body(f.body, 1)
        w.emit(0, "}")
        w.emit(0, "")
    return "\n".join(w.lines)


def pretty_print(p: A.TypedProgram, path: str = "<printed>") -> A.SourceUnit:
    return A.SourceUnit(path=path, text=program_text(p), entry=p.entry)
