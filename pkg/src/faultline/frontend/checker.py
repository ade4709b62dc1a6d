"""Name resolution and type checking of parsed FIC programs."""
from __future__ import annotations

import re

from .. import ast as A
from ..errors import TypeCheckError, UnsupportedConstruct
from .parser import Increment

FAULT_RE = re.compile(r"fault_(\d+)$")
COUNTER_RE = re.compile(r"fault_(\d+)_counter$")

BUILTINS = {"__print"}


def _scalar(t) -> bool:
    return isinstance(t, A.IntType)


class Checker:
    def __init__(self, prog: A.TypedProgram, path: str = "<fic>"):
        self.prog = prog
        self.path = path
        self.records: dict[str, A.RecordDef] = {}
        self.globals: dict[str, A.GlobalDecl] = {}
        self.funcs: dict[str, A.Function] = {}
        self.fault_types: dict[str, A.IntType] = {}
        self.n_user = 0
        self.n_rte = 0

    def fail(self, msg, loc=None):
        raise TypeCheckError(msg, loc, self.path)

    # -- declarations ------------------------------------------------------------

    def run(self, entry=None) -> A.TypedProgram:
        for r in self.prog.records:
            if r.name in self.records:
                self.fail(f"duplicate record type {r.name!r}", r.loc)
            seen = set()
            for fname, ftype in r.fields:
                if fname in seen:
                    self.fail(f"duplicate field {fname!r} in {r.name}", r.loc)
                seen.add(fname)
                if not isinstance(ftype, (A.IntType, A.ArrayType)):
                    raise UnsupportedConstruct("record fields must be integers or integer arrays", r.loc, self.path)
            self.records[r.name] = r
        for g in self.prog.globals:
            self.declare_global(g)
        for f in self.prog.functions:
            if f.name in self.funcs or f.name in BUILTINS:
                self.fail(f"duplicate function {f.name!r}", f.loc)
            self.check_type(f.ret, f.loc, allow_void=True, allow_pointer=True)
            for p in f.params:
                self.check_type(p.ty, p.loc)
            self.funcs[f.name] = f
        for f in self.prog.functions:
            self.check_function(f)
        self.prog.entry = self.resolve_entry(entry)
        return self.prog

    def resolve_entry(self, entry):
        if not self.prog.functions:
            return entry
        if entry is None:
            entry = "main" if "main" in self.funcs else self.prog.functions[-1].name
        if entry not in self.funcs:
            self.fail(f"entry function {entry!r} is not defined")
        ret = self.funcs[entry].ret
        if not (ret == A.VOID or _scalar(ret)):
            self.fail(f"entry function {entry!r} must return void or an integer")
        return entry

    def check_type(self, t, loc, allow_void=False, allow_pointer=True):
        if t == A.VOID:
            if not allow_void:
                self.fail("void is only allowed as a return type", loc)
            return
        if isinstance(t, A.PointerType):
            if not allow_pointer:
                raise UnsupportedConstruct("pointer types outside parameter position", loc, self.path)
            t = t.target
        if isinstance(t, A.RecordType) and t.name not in self.records:
            self.fail(f"unknown record type {t.name!r}", loc)

    def declare_global(self, g: A.GlobalDecl):
        if g.name in self.globals:
            self.fail(f"duplicate global {g.name!r}", g.loc)
        if g.kind == "fault":
            if not FAULT_RE.match(g.name) or not _scalar(g.ty):
                raise UnsupportedConstruct("extern declarations other than integer fault variables", g.loc, self.path)
            self.fault_types[g.name] = g.ty
        elif COUNTER_RE.match(g.name):
            if g.ty != A.U32:
                self.fail("fault counters must be u32", g.loc)
            g.kind = "counter"
        self.check_type(g.ty, g.loc, allow_pointer=False)
        if g.init is not None:
            if isinstance(g.ty, A.IntType):
                if len(g.init) != 1:
                    self.fail(f"scalar {g.name!r} initialized with a list", g.loc)
                g.init = [g.ty.wrap(g.init[0])]
            elif isinstance(g.ty, A.ArrayType):
                if len(g.init) > g.ty.length:
                    self.fail(f"too many initializers for {g.name!r}", g.loc)
                g.init = [g.ty.elem.wrap(v) for v in g.init]
            else:
                self.fail(f"record {g.name!r} cannot have an initializer", g.loc)
        self.globals[g.name] = g

    # -- functions -----------------------------------------------------------------

    def check_function(self, f: A.Function):
        self.fn = f
        self.params = {}
        for p in f.params:
            if p.name in self.params:
                self.fail(f"duplicate parameter {p.name!r}", p.loc)
            self.params[p.name] = p.ty
        self.locals: dict[str, A.Type] = {}
        self.labels: set[str] = set()
        for s in A.walk_stmts(f.body):
            if isinstance(s, A.Label):
                if s.name in self.labels:
                    self.fail(f"duplicate label {s.name!r}", s.loc)
                self.labels.add(s.name)
            elif isinstance(s, A.Decl):
                if s.name in self.locals or s.name in self.params:
                    self.fail(f"duplicate local {s.name!r}", s.loc)
                self.check_type(s.ty, s.loc, allow_pointer=False)
                self.locals[s.name] = s.ty
        f.body = self.block(f.body, loop_depth=0)

    def block(self, body: list, loop_depth: int) -> list:
        return [self.stmt(s, loop_depth) for s in body]

    def stmt(self, s: A.Stmt, loop_depth: int) -> A.Stmt:
        if isinstance(s, A.Decl):
            if s.init is not None:
                if not _scalar(s.ty):
                    self.fail("only scalar locals can be initialized", s.loc)
                s.init = self.rhs(s.init)
            return s
        if isinstance(s, A.Assign):
            s.target = self.lvalue(s.target)
            s.value = self.rhs(s.value)
            return s
        if isinstance(s, Increment):
            t = s.target
            if isinstance(t, A.Var) and t.name in self.params and isinstance(self.params[t.name], A.PointerType):
                raise UnsupportedConstruct("pointer arithmetic", s.loc, self.path)
            if isinstance(t, A.Var) and t.name not in self.locals and t.name not in self.params:
                g = self.globals.get(t.name)
                if g is not None and g.kind == "counter":
                    return A.CounterIncr(int(COUNTER_RE.match(t.name).group(1)), loc=s.loc)
            target = self.lvalue(t)
            one = A.Binary("+", target, A.Const(1), loc=s.loc)
            return A.Assign(target, self.expr(one), loc=s.loc)
        if isinstance(s, A.Call):
            return self.call(s)
        if isinstance(s, A.If):
            s.cond = self.cond(s.cond)
            s.then = self.block(s.then, loop_depth)
            if s.orelse is not None:
                s.orelse = self.block(s.orelse, loop_depth)
            return s
        if isinstance(s, A.While):
            s.cond = self.cond(s.cond)
            s.body = self.block(s.body, loop_depth + 1)
            return s
        if isinstance(s, A.For):
            for part in ("init", "step"):
                a = getattr(s, part)
                if a is not None:
                    a = self.stmt(a, loop_depth)
                    if not isinstance(a, A.Assign):
                        self.fail("for-loop header clauses must be assignments", s.loc)
                    setattr(s, part, a)
            if s.cond is not None:
                s.cond = self.cond(s.cond)
            s.body = self.block(s.body, loop_depth + 1)
            return s
        if isinstance(s, A.Break):
            if loop_depth == 0:
                self.fail("break outside of a loop", s.loc)
            return s
        if isinstance(s, A.Goto):
            if s.label not in self.labels:
                self.fail(f"undefined label {s.label!r}", s.loc)
            return s
        if isinstance(s, A.Return):
            ret = self.fn.ret
            if s.value is None:
                if ret != A.VOID:
                    self.fail(f"{self.fn.name} must return a value", s.loc)
            elif ret == A.VOID:
                self.fail(f"{self.fn.name} returns void", s.loc)
            elif isinstance(ret, A.PointerType):
                v = s.value
                if not (isinstance(v, A.Var) and self.params.get(v.name) == ret):
                    raise UnsupportedConstruct("pointer returns must name a pointer parameter of the same type", s.loc, self.path)
                s.value = self.expr(v)
            else:
                s.value = self.rhs(s.value)
            return s
        if isinstance(s, A.Block):
            s.body = self.block(s.body, loop_depth)
            return s
        if isinstance(s, A.AssertStmt):
            s.ref.cond = self.cond(s.ref.cond)
            if s.ref.origin == "user":
                s.ref.id = f"a{self.n_user}"
                self.n_user += 1
            else:
                s.ref.id = f"r{self.n_rte}"
                self.n_rte += 1
            return s
        if isinstance(s, (A.Label, A.Countermeasure, A.CounterIncr)):
            return s
        self.fail(f"unsupported statement {type(s).__name__}", getattr(s, "loc", None))

    def call(self, s: A.Call) -> A.Call:
        if s.func == "__print":
            if len(s.args) != 1 or s.target is not None:
                self.fail("__print takes exactly one argument and returns nothing", s.loc)
            s.args = [self.rhs(s.args[0])]
            return s
        callee = self.funcs.get(s.func)
        if callee is None:
            self.fail(f"call to undefined function {s.func!r}", s.loc)
        if len(s.args) != len(callee.params):
            self.fail(f"{s.func} expects {len(callee.params)} arguments, got {len(s.args)}", s.loc)
        args = []
        for a, p in zip(s.args, callee.params):
            if isinstance(p.ty, A.PointerType):
                if not isinstance(a, A.Var):
                    raise UnsupportedConstruct("pointer arguments must be plain variable names", s.loc, self.path)
                a = self.expr(a)
                at = a.ty.target if isinstance(a.ty, A.PointerType) else a.ty
                if at != p.ty.target:
                    self.fail(f"argument {a.name!r} has type {a.ty}, expected {p.ty}", s.loc)
            else:
                a = self.rhs(a)
            args.append(a)
        s.args = args
        if s.target is not None:
            if not _scalar(callee.ret):
                self.fail(f"{s.func} does not return an integer", s.loc)
            s.target = self.lvalue(s.target)
        return s

    # -- expressions -----------------------------------------------------------------

    def rhs(self, e: A.Expr) -> A.Expr:
        """Top-level right-hand side: symbolic inputs are only allowed here."""
        if isinstance(e, A.SymInput):
            if e.lo is not None:
                if e.lo > e.hi or e.lo < e.ty.min or e.hi > e.ty.max:
                    self.fail(f"invalid domain for input {e.name!r}", e.loc)
            return e
        e = self.expr(e)
        if not _scalar(e.ty):
            self.fail("expected an integer expression", e.loc)
        return e

    def cond(self, e: A.Expr) -> A.Expr:
        e = self.expr(e)
        if not _scalar(e.ty):
            self.fail("condition must be an integer expression", e.loc)
        return e

    def lvalue(self, e: A.Expr) -> A.Expr:
        if not isinstance(e, (A.Var, A.Field, A.Index)):
            self.fail("invalid assignment target", e.loc)
        e = self.expr(e)
        if not _scalar(e.ty):
            self.fail("assignment target must be an integer location", e.loc)
        if isinstance(e, A.Var) and e.scope == "global" and self.globals[e.name].kind != "var":
            self.fail(f"cannot assign to {e.name!r}", e.loc)
        return e

    def expr(self, e: A.Expr) -> A.Expr:
        if isinstance(e, A.Const):
            return e
        if isinstance(e, A.Var):
            if e.name in self.locals:
                e.ty, e.scope = self.locals[e.name], "local"
            elif e.name in self.params:
                e.ty, e.scope = self.params[e.name], "param"
            elif e.name in self.globals:
                g = self.globals[e.name]
                if g.kind == "fault":
                    self.fail(f"fault variable {e.name!r} may only appear as `(expr) ^ {e.name}`", e.loc)
                e.ty, e.scope = g.ty, "global"
            else:
                self.fail(f"undefined name {e.name!r}", e.loc)
            return e
        if isinstance(e, A.Field):
            e.base = self.expr(e.base)
            bt = e.base.ty
            if isinstance(bt, A.PointerType) and isinstance(bt.target, A.RecordType):
                if not e.arrow:
                    self.fail(f"use '->' to access fields through pointer {e.base.name!r}", e.loc)
                rec = bt.target
            elif isinstance(bt, A.RecordType):
                if e.arrow:
                    self.fail(f"{e.base.name!r} is not a pointer", e.loc)
                rec = bt
            else:
                self.fail("field access on a non-record", e.loc)
            ft = self.records[rec.name].field_type(e.name)
            if ft is None:
                self.fail(f"record {rec.name} has no field {e.name!r}", e.loc)
            e.ty = ft
            return e
        if isinstance(e, A.Index):
            if isinstance(e.base, A.Index):
                raise UnsupportedConstruct("nested arrays", e.loc, self.path)
            e.base = self.expr(e.base)
            bt = e.base.ty
            if isinstance(bt, A.PointerType):
                bt = bt.target
            if not isinstance(bt, A.ArrayType):
                self.fail("subscript of a non-array", e.loc)
            e.index = self.expr(e.index)
            if not _scalar(e.index.ty):
                self.fail("array index must be an integer", e.loc)
            e.ty = bt.elem
            return e
        if isinstance(e, A.Unary):
            e.operand = self.scalar(e.operand)
            e.ty = A.I32 if e.op == "!" else A.promote(e.operand.ty)
            return e
        if isinstance(e, A.Cast):
            e.operand = self.scalar(e.operand)
            return e
        if isinstance(e, A.Binary):
            if e.op == "^" and isinstance(e.right, A.Var) and e.right.name in self.fault_types:
                site = int(FAULT_RE.match(e.right.name).group(1))
                return A.Fault(self.scalar(e.left), site, self.fault_types[e.right.name], loc=e.loc)
            e.left = self.scalar(e.left)
            e.right = self.scalar(e.right)
            lt, rt = e.left.ty, e.right.ty
            if e.op in A.LOGICAL:
                e.ty, e.operand_ty = A.I32, None
            elif e.op in A.COMPARISONS:
                e.ty, e.operand_ty = A.I32, A.arith_type(lt, rt)
            elif e.op in ("<<", ">>"):
                e.ty = e.operand_ty = A.promote(lt)
            else:
                e.ty = e.operand_ty = A.arith_type(lt, rt)
            return e
        if isinstance(e, A.Fault):
            e.expr = self.scalar(e.expr)
            return e
        if isinstance(e, A.SymInput):
            raise UnsupportedConstruct("symbolic inputs must be the whole right-hand side of an assignment", e.loc, self.path)
        self.fail(f"unsupported expression {type(e).__name__}", getattr(e, "loc", None))

    def scalar(self, e: A.Expr) -> A.Expr:
        e = self.expr(e)
        if not _scalar(e.ty):
            self.fail("expected an integer expression", e.loc)
        return e


def check(prog: A.TypedProgram, entry=None, path: str = "<fic>") -> A.TypedProgram:
    return Checker(prog, path).run(entry)
