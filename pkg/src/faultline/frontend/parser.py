"""Recursive-descent parser for FIC.

The parser only builds the syntax tree; names, types and the fault/counter
conventions are resolved afterwards by :mod:`faultline.frontend.checker`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .. import ast as A
from ..errors import ParseError, UnsupportedConstruct
from .lexer import Token, tokenize

_BINARY_PREC = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]

_COMPOUND_ASSIGN = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%", "&=": "&", "|=": "|", "^=": "^", "<<=": "<<", ">>=": ">>"}

_ORIGIN_TAGS = {"index_bound": "rte-index-bound", "read_valid": "rte-read-valid"}


@dataclass(eq=True)
class Increment(A.Stmt):
    """`x++`; the checker turns it into a counter increment or an assignment."""

    target: A.Expr
    loc: A.Loc = field(default=None, compare=False, repr=False)


class Parser:
    def __init__(self, tokens: list[Token], path: str = "<fic>"):
        self.toks = tokens
        self.i = 0
        self.path = path
        self.typedefs: set[str] = set()

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, msg: str, tok: Token = None):
        raise ParseError(msg, (tok or self.tok).loc, self.path)

    def unsupported(self, msg: str, tok: Token = None):
        raise UnsupportedConstruct(msg, (tok or self.tok).loc, self.path)

    # -- types -------------------------------------------------------------

    def at_type(self, k: int = 0) -> bool:
        t = self.peek(k)
        if t.kind != "ident":
            return False
        return (
            t.text in A.INT_TYPES
            or t.text in A.TYPE_ALIASES
            or t.text in ("unsigned", "signed", "void", "struct", "const")
            or t.text in self.typedefs
        )

    def base_type(self):
        start = self.tok
        self.accept("const")
        if self.accept("struct"):
            return A.RecordType(self.ident().text)
        if self.accept("void"):
            return A.VOID
        if self.at("unsigned") or self.at("signed"):
            signed = self.advance().text == "signed"
            width = 32
            if self.accept("char"):
                width = 8
            elif self.accept("short"):
                width = 16
                self.accept("int")
            else:
                self.accept("int")
            return {(8, False): A.U8, (16, False): A.U16, (32, False): A.U32,
                    (8, True): A.I8, (16, True): A.I16, (32, True): A.I32}[(width, signed)]
        name = self.ident().text
        if name in A.INT_TYPES:
            return A.INT_TYPES[name]
        if name in A.TYPE_ALIASES:
            if name == "short":
                self.accept("int")
            return A.TYPE_ALIASES[name]
        if name in self.typedefs:
            return A.RecordType(name)
        if name in ("long", "float", "double"):
            self.unsupported(f"type {name!r}", start)
        self.error(f"unknown type {name!r}", start)

    def array_suffix(self, ty):
        if self.accept("["):
            if self.tok.kind != "int":
                self.error("array length must be an integer literal")
            n = self.advance().value
            self.expect("]")
            if self.at("["):
                self.unsupported("nested arrays")
            if not isinstance(ty, A.IntType):
                self.unsupported("arrays of non-integer elements")
            if n < 1:
                self.error("array length must be at least 1")
            return A.ArrayType(ty, n)
        return ty

    # -- top level -----------------------------------------------------------

    def program(self) -> A.TypedProgram:
        prog = A.TypedProgram()
        while self.tok.kind != "eof":
            if self.at("typedef"):
                prog.records.append(self.typedef())
            elif self.at("struct") and self.peek(2).text == "{":
                prog.records.append(self.struct_def())
            elif self.at("extern"):
                prog.globals.append(self.extern_decl())
            elif self.at_type():
                self.toplevel_decl(prog)
            else:
                self.error(f"unexpected {self.tok.text!r} at top level")
        return prog

    def fields(self) -> list:
        self.expect("{")
        fields = []
        while not self.accept("}"):
            ty = self.base_type()
            if self.at("*"):
                self.unsupported("pointer-typed record fields")
            name = self.ident().text
            fields.append((name, self.array_suffix(ty)))
            self.expect(";")
        return fields

    def typedef(self) -> A.RecordDef:
        start = self.expect("typedef")
        if not self.accept("struct"):
            self.unsupported("typedef of non-struct types", start)
        if self.tok.kind == "ident":
            self.advance()
        fields = self.fields()
        name = self.ident().text
        self.expect(";")
        self.typedefs.add(name)
        return A.RecordDef(name, fields, loc=start.loc)

    def struct_def(self) -> A.RecordDef:
        start = self.expect("struct")
        name = self.ident().text
        fields = self.fields()
        self.expect(";")
        self.typedefs.add(name)
        return A.RecordDef(name, fields, loc=start.loc)

    def extern_decl(self) -> A.GlobalDecl:
        start = self.expect("extern")
        ty = self.base_type()
        name = self.ident().text
        self.expect(";")
        return A.GlobalDecl(name, ty, None, kind="fault", loc=start.loc)

    def toplevel_decl(self, prog: A.TypedProgram):
        start = self.tok
        ty = self.base_type()
        if self.accept("*"):
            ty = A.PointerType(ty)
        name = self.ident()
        if self.at("("):
            prog.functions.append(self.function(ty, name.text, start))
            return
        if isinstance(ty, A.PointerType):
            self.unsupported("pointer-typed globals", start)
        ty = self.array_suffix(ty)
        init = None
        if self.accept("="):
            init = self.initializer()
        self.expect(";")
        prog.globals.append(A.GlobalDecl(name.text, ty, init, loc=start.loc))

    def initializer(self) -> list:
        if self.accept("{"):
            vals = []
            if not self.at("}"):
                vals.append(self.const_int())
                while self.accept(","):
                    if self.at("}"):
                        break
                    vals.append(self.const_int())
            self.expect("}")
            return vals
        return [self.const_int()]

    def const_int(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "int":
            self.error("global initializers must be integer literals")
        v = self.advance().value
        return -v if neg else v

    def function(self, ret, name: str, start: Token) -> A.Function:
        self.expect("(")
        params = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        elif not self.at(")"):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
        self.expect(")")
        body = self.block()
        return A.Function(name, ret, params, body, loc=start.loc)

    def param(self) -> A.Param:
        start = self.tok
        ty = self.base_type()
        if self.accept("*"):
            name = self.ident().text
            if isinstance(ty, A.RecordType):
                return A.Param(name, A.PointerType(ty), loc=start.loc)
            self.unsupported("pointers to scalars; declare the parameter as a sized array instead", start)
        name = self.ident().text
        ty = self.array_suffix(ty)
        if isinstance(ty, A.ArrayType):
            ty = A.PointerType(ty)
        elif isinstance(ty, A.RecordType):
            self.unsupported("records passed by value", start)
        return A.Param(name, ty, loc=start.loc)

    # -- statements ----------------------------------------------------------

    def block(self) -> list:
        self.expect("{")
        body = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            body.extend(self.statement())
        return body

    def statement(self) -> list:
        t = self.tok
        if self.at("@"):
            return [self.annotation()]
        if self.at("{"):
            return [A.Block(self.block(), loc=t.loc)]
        if self.accept(";"):
            return []
        if self.at("if"):
            return [self.if_stmt()]
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return [A.While(cond, self.body(), loc=t.loc)]
        if self.at("for"):
            return [self.for_stmt()]
        if self.at("do") or self.at("switch") or self.at("continue"):
            self.unsupported(f"{t.text!r} statements")
        if self.accept("break"):
            self.expect(";")
            return [A.Break(loc=t.loc)]
        if self.accept("goto"):
            label = self.ident().text
            self.expect(";")
            return [A.Goto(label, loc=t.loc)]
        if self.accept("return"):
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return [A.Return(value, loc=t.loc)]
        if t.kind == "ident" and self.peek().text == ":" and not self.at_type():
            self.advance()
            self.advance()
            return [A.Label(t.text, loc=t.loc)]
        if self.at_type():
            return [self.local_decl()]
        if self.at("__countermeasure") or self.at("exit"):
            self.advance()
            self.expect("(")
            if not self.at(")"):
                self.expr()
            self.expect(")")
            self.expect(";")
            return [A.Countermeasure(loc=t.loc)]
        if self.at("__assert") or self.at("assert"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect(";")
            return [A.AssertStmt(A.AssertionRef("", cond, "user", loc=t.loc), loc=t.loc)]
        s = self.simple_statement()
        self.expect(";")
        return [s]

    def body(self) -> list:
        if self.at("{"):
            return self.block()
        return self.statement()

    def annotation(self) -> A.AssertStmt:
        t = self.expect("@")
        self.expect("assert")
        origin = "user"
        if self.at("rte") and self.peek().text == ":":
            self.advance()
            self.advance()
            tag = self.ident()
            if tag.text not in _ORIGIN_TAGS:
                self.error(f"unknown rte assertion kind {tag.text!r}", tag)
            origin = _ORIGIN_TAGS[tag.text]
            self.expect(":")
        cond = self.expr()
        self.expect(";")
        return A.AssertStmt(A.AssertionRef("", cond, origin, loc=t.loc), loc=t.loc)

    def if_stmt(self) -> A.If:
        t = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.body()
        orelse = None
        if self.accept("else"):
            orelse = self.body()
        return A.If(cond, then, orelse, loc=t.loc)

    def for_stmt(self) -> A.For:
        t = self.expect("for")
        self.expect("(")
        if self.at_type():
            self.unsupported("declarations in for-loop headers; declare the variable before the loop")
        init = None if self.at(";") else self.simple_statement()
        self.expect(";")
        cond = None if self.at(";") else self.expr()
        self.expect(";")
        step = None if self.at(")") else self.simple_statement()
        self.expect(")")
        if isinstance(step, Increment):
            step = A.Assign(step.target, A.Binary("+", step.target, A.Const(1), loc=step.loc), loc=step.loc)
        for part in (init, step):
            if part is not None and not isinstance(part, A.Assign):
                self.error("for-loop header clauses must be assignments", t)
        return A.For(init, cond, step, self.body(), loc=t.loc)

    def local_decl(self) -> A.Decl:
        t = self.tok
        ty = self.base_type()
        if self.at("*"):
            self.unsupported("pointer-typed local variables")
        name = self.ident().text
        ty = self.array_suffix(ty)
        init = None
        if self.accept("="):
            if isinstance(ty, A.ArrayType):
                self.unsupported("local array initializers")
            if self.tok.kind == "ident" and self.peek().text == "(" and not self.tok.text.startswith("__sym_input"):
                self.unsupported("calls in declaration initializers; assign the call result separately")
            init = self.expr()
        self.expect(";")
        return A.Decl(name, ty, init, loc=t.loc)

    def simple_statement(self) -> A.Stmt:
        """Assignment, `x++`, or call statement (without the trailing `;`)."""
        t = self.tok
        if t.kind == "ident" and self.peek().text == "(" and not t.text.startswith("__sym_input"):
            return self.call(None)
        target = self.postfix()
        if self.accept("++") or self.accept("--"):
            op = self.toks[self.i - 1].text
            if op == "--":
                return A.Assign(target, A.Binary("-", target, A.Const(1), loc=t.loc), loc=t.loc)
            return Increment(target, loc=t.loc)
        if self.tok.text in _COMPOUND_ASSIGN:
            op = _COMPOUND_ASSIGN[self.advance().text]
            return A.Assign(target, A.Binary(op, target, self.expr(), loc=t.loc), loc=t.loc)
        self.expect("=")
        if self.tok.kind == "ident" and self.peek().text == "(" and not self.tok.text.startswith("__sym_input"):
            return self.call(target)
        return A.Assign(target, self.expr(), loc=t.loc)

    def call(self, target) -> A.Call:
        t = self.ident()
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        self.expect(")")
        name = "__print" if t.text == "printf" else t.text
        return A.Call(name, args, target, loc=t.loc)

    # -- expressions ---------------------------------------------------------

    def expr(self, level: int = 0) -> A.Expr:
        if self.at("?"):
            self.unsupported("conditional expressions")
        if level == len(_BINARY_PREC):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_PREC[level]:
            op = self.advance()
            right = self.expr(level + 1)
            left = A.Binary(op.text, left, right, loc=op.loc)
        if level == 0 and self.at("?"):
            self.unsupported("conditional expressions")
        if level == 0 and self.tok.text in ("=",) + tuple(_COMPOUND_ASSIGN):
            self.unsupported("assignments inside expressions")
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if self.tok.text in ("-", "~", "!") and self.tok.kind == "op":
            self.advance()
            return A.Unary(t.text, self.unary(), loc=t.loc)
        if self.at("&") or self.at("*"):
            self.unsupported("address-of and dereference in expressions")
        if self.at("++") or self.at("--"):
            self.unsupported("increment inside expressions")
        if self.at("(") and self.at_type(1):
            self.advance()
            ty = self.base_type()
            if self.at("*"):
                self.unsupported("pointer casts")
            self.expect(")")
            if not isinstance(ty, A.IntType):
                self.error("casts must target integer types", t)
            return A.Cast(ty, self.unary(), loc=t.loc)
        return self.postfix()

    def postfix(self) -> A.Expr:
        e = self.primary()
        while True:
            t = self.tok
            if self.accept("["):
                idx = self.expr()
                self.expect("]")
                e = A.Index(e, idx, loc=t.loc)
            elif self.accept("."):
                e = A.Field(e, self.ident().text, False, loc=t.loc)
            elif self.accept("->"):
                e = A.Field(e, self.ident().text, True, loc=t.loc)
            else:
                return e

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            if t.unsigned or t.value > A.I32.max:
                if t.value > A.U32.max:
                    self.error("integer literal out of range", t)
                return A.Const(t.value, A.U32, loc=t.loc)
            return A.Const(t.value, A.I32, loc=t.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if t.text in ("true", "false"):
                return A.Const(1 if t.text == "true" else 0, A.I32, loc=t.loc)
            if t.text.startswith("__sym_input"):
                return self.sym_input(t)
            if self.at("("):
                self.unsupported("calls inside expressions; assign the call result to a variable", t)
            return A.Var(t.text, loc=t.loc)
        self.error(f"unexpected {t.text or 'end of input'!r} in expression")

    def sym_input(self, t: Token) -> A.SymInput:
        suffix = t.text[len("__sym_input_"):]
        ty = A.INT_TYPES.get(suffix) or A.TYPE_ALIASES.get(suffix)
        if ty is None:
            self.error(f"unknown symbolic input type in {t.text!r}", t)
        self.expect("(")
        if self.tok.kind != "string":
            self.error("symbolic input name must be a string literal")
        name = self.advance().text
        lo = hi = None
        if self.accept(","):
            lo = self.const_int()
            self.expect(",")
            hi = self.const_int()
        self.expect(")")
        return A.SymInput(name, ty, lo, hi, loc=t.loc)


def parse_syntax(text: str, path: str = "<fic>", defines=frozenset()) -> A.TypedProgram:
    """Parse without name/type resolution."""
    return Parser(tokenize(text, path, defines), path).program()
