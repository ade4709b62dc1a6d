"""Typed syntax tree for FIC, the small C-like language analyzed by faultline.

Node equality is structural: source locations are carried on every node but
excluded from comparisons, so a program re-parsed from its printed form
compares equal to the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class IntType:
    name: str
    width: int
    signed: bool

    @property
    def min(self) -> int:
        return -(1 << (self.width - 1)) if self.signed else 0

    @property
    def max(self) -> int:
        return (1 << (self.width - 1)) - 1 if self.signed else (1 << self.width) - 1

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    def wrap(self, v: int) -> int:
        """Reduce a mathematical integer to this type (two's complement)."""
        v &= self.mask
        if self.signed and v >> (self.width - 1):
            v -= 1 << self.width
        return v

    def __str__(self) -> str:
        return self.name


I8 = IntType("i8", 8, True)
U8 = IntType("u8", 8, False)
I16 = IntType("i16", 16, True)
U16 = IntType("u16", 16, False)
I32 = IntType("i32", 32, True)
U32 = IntType("u32", 32, False)

INT_TYPES = {t.name: t for t in (I8, U8, I16, U16, I32, U32)}

# C spellings accepted by the parser; the printer always emits canonical names.
TYPE_ALIASES = {
    "int": I32,
    "unsigned": U32,
    "char": I8,
    "short": I16,
    "size_t": U32,
    "int8_t": I8,
    "uint8_t": U8,
    "int16_t": I16,
    "uint16_t": U16,
    "int32_t": I32,
    "uint32_t": U32,
}


@dataclass(frozen=True)
class ArrayType:
    elem: IntType
    length: int

    def __str__(self) -> str:
        return f"{self.elem}[{self.length}]"


@dataclass(frozen=True)
class RecordType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class PointerType:
    target: Union[ArrayType, RecordType]

    def __str__(self) -> str:
        return f"{self.target}*"


@dataclass(frozen=True)
class VoidType:
    def __str__(self) -> str:
        return "void"


VOID = VoidType()

Type = Union[IntType, ArrayType, RecordType, PointerType, VoidType]


def promote(t: IntType) -> IntType:
    """Integer promotion: everything narrower than 32 bits computes as i32."""
    return t if t.width == 32 else I32


def arith_type(a: IntType, b: IntType) -> IntType:
    """Usual arithmetic conversions on a 32-bit-int target."""
    a, b = promote(a), promote(b)
    return U32 if U32 in (a, b) else I32


# ---------------------------------------------------------------- expressions

Loc = Optional[tuple]


def _loc() -> Loc:
    return field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Expr:
    pass


@dataclass(eq=True)
class Const(Expr):
    value: int
    ty: IntType = I32
    loc: Loc = _loc()


@dataclass(eq=True)
class Var(Expr):
    name: str
    ty: Optional[Type] = None
    scope: str = ""  # "global" | "local" | "param"
    loc: Loc = _loc()


@dataclass(eq=True)
class Field(Expr):
    base: Var
    name: str
    arrow: bool = False
    ty: Optional[Type] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class Index(Expr):
    base: Union[Var, Field]
    index: Expr
    ty: Optional[IntType] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class Unary(Expr):
    op: str  # "-", "~", "!"
    operand: Expr
    ty: Optional[IntType] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    ty: Optional[IntType] = None
    # type both operands are converted to before the operation
    operand_ty: Optional[IntType] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class Cast(Expr):
    ty: IntType
    operand: Expr
    loc: Loc = _loc()


@dataclass(eq=True)
class Fault(Expr):
    """`(expr) ^ fault_<site>`: the expression converted to `ty`, xored with
    the site's fault variable."""

    expr: Expr
    site: int
    ty: IntType = U32
    loc: Loc = _loc()


@dataclass(eq=True)
class SymInput(Expr):
    name: str
    ty: IntType = U32
    lo: Optional[int] = None
    hi: Optional[int] = None
    loc: Loc = _loc()


COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")
LOGICAL = ("&&", "||")


def is_boolean(e: Expr) -> bool:
    """True when `e` can only evaluate to 0 or 1."""
    if isinstance(e, Binary):
        return e.op in COMPARISONS or e.op in LOGICAL
    if isinstance(e, Unary):
        return e.op == "!"
    return False


# ---------------------------------------------------------------- statements


@dataclass(eq=True)
class Stmt:
    pass


@dataclass(eq=True)
class Decl(Stmt):
    name: str
    ty: Type
    init: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class Assign(Stmt):
    target: Expr
    value: Expr
    loc: Loc = _loc()


@dataclass(eq=True)
class Call(Stmt):
    func: str
    args: list
    target: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class If(Stmt):
    cond: Expr
    then: list
    orelse: Optional[list] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class While(Stmt):
    cond: Expr
    body: list
    loc: Loc = _loc()


@dataclass(eq=True)
class For(Stmt):
    init: Optional[Assign]
    cond: Optional[Expr]
    step: Optional[Assign]
    body: list
    loc: Loc = _loc()


@dataclass(eq=True)
class Break(Stmt):
    loc: Loc = _loc()


@dataclass(eq=True)
class Goto(Stmt):
    label: str
    loc: Loc = _loc()


@dataclass(eq=True)
class Label(Stmt):
    name: str
    loc: Loc = _loc()


@dataclass(eq=True)
class Return(Stmt):
    value: Optional[Expr] = None
    loc: Loc = _loc()


@dataclass(eq=True)
class Block(Stmt):
    body: list
    loc: Loc = _loc()


@dataclass(eq=True)
class Countermeasure(Stmt):
    loc: Loc = _loc()


ORIGINS = ("user", "rte-index-bound", "rte-read-valid")


@dataclass(eq=True)
class AssertionRef:
    id: str
    cond: Expr
    origin: str = "user"
    loc: Loc = _loc()


@dataclass(eq=True)
class AssertStmt(Stmt):
    ref: AssertionRef
    loc: Loc = _loc()


@dataclass(eq=True)
class CounterIncr(Stmt):
    site: int
    loc: Loc = _loc()


# ---------------------------------------------------------------- top level


@dataclass(eq=True)
class RecordDef:
    name: str
    fields: list  # [(name, IntType | ArrayType)]
    loc: Loc = _loc()

    def field_type(self, name: str):
        for n, t in self.fields:
            if n == name:
                return t
        return None


@dataclass(eq=True)
class GlobalDecl:
    name: str
    ty: Type
    init: Optional[list] = None  # scalar: [v]; array: [v0, v1, ...]
    kind: str = "var"  # "var" | "fault" | "counter"
    loc: Loc = _loc()


@dataclass(eq=True)
class Param:
    name: str
    ty: Type
    loc: Loc = _loc()


@dataclass(eq=True)
class Function:
    name: str
    ret: Type
    params: list
    body: list
    loc: Loc = _loc()


@dataclass(eq=True)
class TypedProgram:
    records: list = field(default_factory=list)
    globals: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    entry: Optional[str] = None

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def record(self, name: str) -> RecordDef:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def global_decl(self, name: str) -> Optional[GlobalDecl]:
        for g in self.globals:
            if g.name == name:
                return g
        return None

    @property
    def assertions(self) -> list:
        return [s.ref for f in self.functions for s in walk_stmts(f.body) if isinstance(s, AssertStmt)]

    def assertion(self, aid: str) -> AssertionRef:
        for a in self.assertions:
            if a.id == aid:
                return a
        raise KeyError(aid)


@dataclass
class SourceUnit:
    path: str
    text: str
    entry: Optional[str] = None
    defines: frozenset = frozenset()


# ---------------------------------------------------------------- traversal


def child_blocks(s: Stmt) -> list:
    if isinstance(s, If):
        return [s.then] + ([s.orelse] if s.orelse is not None else [])
    if isinstance(s, (While, For, Block)):
        return [s.body]
    return []


def walk_stmts(body: list) -> Iterator[Stmt]:
    """Pre-order over statements, descending into nested blocks."""
    for s in body:
        yield s
        for b in child_blocks(s):
            yield from walk_stmts(b)


def walk_expr(e: Optional[Expr]) -> Iterator[Expr]:
    if e is None:
        return
    yield e
    if isinstance(e, Field):
        yield from walk_expr(e.base)
    elif isinstance(e, Index):
        yield from walk_expr(e.base)
        yield from walk_expr(e.index)
    elif isinstance(e, (Unary, Cast)):
        yield from walk_expr(e.operand)
    elif isinstance(e, Binary):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, Fault):
        yield from walk_expr(e.expr)


def stmt_exprs(s: Stmt) -> list:
    """Expressions evaluated directly by a statement (not by nested blocks)."""
    if isinstance(s, Decl):
        return [s.init] if s.init is not None else []
    if isinstance(s, Assign):
        return [s.target, s.value]
    if isinstance(s, Call):
        return list(s.args) + ([s.target] if s.target is not None else [])
    if isinstance(s, (If, While)):
        return [s.cond]
    if isinstance(s, For):
        out = []
        if s.init is not None:
            out += [s.init.target, s.init.value]
        if s.cond is not None:
            out.append(s.cond)
        if s.step is not None:
            out += [s.step.target, s.step.value]
        return out
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, AssertStmt):
        return [s.ref.cond]
    return []


def map_expr(e: Optional[Expr], fn) -> Optional[Expr]:
    """Bottom-up rebuild of an expression; `fn` sees already-mapped children."""
    if e is None:
        return None
    if isinstance(e, Field):
        e = Field(map_expr(e.base, fn), e.name, e.arrow, e.ty, loc=e.loc)
    elif isinstance(e, Index):
        e = Index(map_expr(e.base, fn), map_expr(e.index, fn), e.ty, loc=e.loc)
    elif isinstance(e, Unary):
        e = Unary(e.op, map_expr(e.operand, fn), e.ty, loc=e.loc)
    elif isinstance(e, Cast):
        e = Cast(e.ty, map_expr(e.operand, fn), loc=e.loc)
    elif isinstance(e, Binary):
        e = Binary(e.op, map_expr(e.left, fn), map_expr(e.right, fn), e.ty, e.operand_ty, loc=e.loc)
    elif isinstance(e, Fault):
        e = Fault(map_expr(e.expr, fn), e.site, e.ty, loc=e.loc)
    return fn(e)


def expr_type(e: Expr):
    return e.ty
