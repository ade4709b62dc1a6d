"""Hash-consed fixed-width bit-vector terms.

Values handled by the symbolic engine are either Python ints (unsigned bit
patterns of the relevant width) or :class:`Term` nodes.  Smart constructors
fold constants and apply a few local rewrites, so a term whose operands are
all concrete is never built.
"""
from __future__ import annotations

from typing import Union

COMPARE_OPS = ("eq", "ne", "ult", "ule", "slt", "sle")


class Term:
    __slots__ = ("op", "args", "width", "_hash", "_syms", "has_select", "__weakref__")

    def __init__(self, op, args, width):
        self.op = op
        self.args = args
        self.width = width
        self._hash = hash((op, args, width))
        self._syms = None
        self.has_select = op == "select" or any(isinstance(a, Term) and a.has_select for a in args)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return to_text(self)

    @property
    def symbols(self) -> frozenset:
        if self._syms is None:
            if self.op == "sym":
                self._syms = frozenset([self])
            else:
                out = set()
                for a in self.args:
                    if isinstance(a, Term):
                        out |= a.symbols
                    elif isinstance(a, tuple):
                        for x in a:
                            if isinstance(x, Term):
                                out |= x.symbols
                self._syms = frozenset(out)
        return self._syms

    @property
    def name(self) -> str:
        assert self.op == "sym"
        return self.args[0]


Value = Union[int, Term]

_TABLE: dict = {}


def _key(a):
    return ("T", id(a)) if isinstance(a, Term) else a


def intern(op, args, width) -> Term:
    key = (op, tuple(_key(a) if not isinstance(a, tuple) else tuple(_key(x) for x in a) for a in args), width)
    t = _TABLE.get(key)
    if t is None:
        t = Term(op, tuple(args), width)
        _TABLE[key] = t
    return t


def clear_table():
    _TABLE.clear()


def mask(w: int) -> int:
    return (1 << w) - 1


def signed(v: int, w: int) -> int:
    return v - (1 << w) if v >> (w - 1) & 1 else v


def sym(name: str, width: int) -> Term:
    return intern("sym", (name,), width)


def is_const(v) -> bool:
    return isinstance(v, int)


def width_of(v, default: int) -> int:
    return v.width if isinstance(v, Term) else default


# ---------------------------------------------------------------- concrete ops


def _cdiv(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def apply(op: str, args: tuple, width: int, aw: int = 0) -> int:
    """Concrete semantics on bit patterns (`aw` is the operand width of
    comparisons and extensions)."""
    m = mask(width)
    if op == "add":
        return (args[0] + args[1]) & m
    if op == "sub":
        return (args[0] - args[1]) & m
    if op == "mul":
        return (args[0] * args[1]) & m
    if op == "udiv":
        return 0 if args[1] == 0 else args[0] // args[1]
    if op == "urem":
        return args[0] if args[1] == 0 else args[0] % args[1]
    if op == "sdiv":
        if args[1] == 0:
            return 0
        return _cdiv(signed(args[0], width), signed(args[1], width)) & m
    if op == "srem":
        if args[1] == 0:
            return args[0]
        a, b = signed(args[0], width), signed(args[1], width)
        return (a - b * _cdiv(a, b)) & m
    if op == "and":
        return args[0] & args[1]
    if op == "or":
        return args[0] | args[1]
    if op == "xor":
        return args[0] ^ args[1]
    if op == "shl":
        return (args[0] << args[1]) & m if args[1] < width else 0
    if op == "lshr":
        return args[0] >> args[1] if args[1] < width else 0
    if op == "ashr":
        s = min(args[1], width - 1)
        return (signed(args[0], width) >> s) & m
    if op == "not":
        return ~args[0] & m
    if op == "neg":
        return -args[0] & m
    if op == "eq":
        return int(args[0] == args[1])
    if op == "ne":
        return int(args[0] != args[1])
    if op == "ult":
        return int(args[0] < args[1])
    if op == "ule":
        return int(args[0] <= args[1])
    if op == "slt":
        return int(signed(args[0], aw) < signed(args[1], aw))
    if op == "sle":
        return int(signed(args[0], aw) <= signed(args[1], aw))
    if op == "zext":
        return args[0]
    if op == "sext":
        return signed(args[0], aw) & m
    if op == "trunc":
        return args[0] & m
    if op == "ite":
        return args[1] if args[0] else args[2]
    raise ValueError(op)


# ---------------------------------------------------------------- constructors


def binop(op: str, a: Value, b: Value, width: int) -> Value:
    """Same-width binary operation (non-comparison)."""
    ca, cb = isinstance(a, int), isinstance(b, int)
    if ca and cb:
        return apply(op, (a, b), width)
    m = mask(width)
    if op in ("add", "or", "xor") and cb and b == 0:
        return a
    if op in ("add", "or", "xor") and ca and a == 0:
        return b
    if op == "sub" and cb and b == 0:
        return a
    if op == "and":
        if (ca and a == 0) or (cb and b == 0):
            return 0
        if cb and b == m:
            return a
        if ca and a == m:
            return b
    if op == "mul":
        if (ca and a == 0) or (cb and b == 0):
            return 0
        if cb and b == 1:
            return a
        if ca and a == 1:
            return b
    if op in ("shl", "lshr", "ashr") and cb and b == 0:
        return a
    if op == "xor" and a is b:
        return 0
    if op == "xor" and cb and isinstance(a, Term) and a.op == "xor" and isinstance(a.args[1], int):
        return binop("xor", a.args[0], a.args[1] ^ b, width)
    if op in ("add", "sub") and cb and isinstance(a, Term) and a.op in ("add", "sub") and isinstance(a.args[1], int):
        d = (b if op == "add" else -b) + (a.args[1] if a.op == "add" else -a.args[1])
        return binop("add", a.args[0], d & m, width)
    if op == "sub" and cb:
        return binop("add", a, -b & m, width)
    if op in ("add", "mul", "and", "or", "xor") and ca and not cb:
        a, b = b, a  # constants on the right
    return intern(op, (a, b), width)


def unop(op: str, a: Value, width: int) -> Value:
    if isinstance(a, int):
        return apply(op, (a,), width)
    if a.op == op:
        return a.args[0]  # ~~x, --x
    return intern(op, (a,), width)


def cmp(op: str, a: Value, b: Value, aw: int) -> Value:
    if isinstance(a, int) and isinstance(b, int):
        return apply(op, (a, b), 1, aw)
    if a is b:
        return int(op in ("eq", "ule", "sle"))
    if op == "ne":
        return lnot(cmp("eq", a, b, aw))
    if op == "eq" and isinstance(b, int) and isinstance(a, Term):
        if a.width == 1 and a.op != "sym" and aw == 1:
            return a if b == 1 else lnot(a)
        if a.op == "xor" and isinstance(a.args[1], int):
            return cmp("eq", a.args[0], a.args[1] ^ b, aw)
        if a.op == "zext" and b >> a.args[1]:
            return 0
        if a.op == "zext":
            if a.args[1] == 1:
                return a.args[0] if b == 1 else lnot(a.args[0])
            return cmp("eq", a.args[0], b, a.args[1])
    if op == "eq" and isinstance(a, int) and not isinstance(b, int):
        return cmp("eq", b, a, aw)
    if op == "ult" and isinstance(b, int) and b == 0:
        return 0
    if op == "ule" and isinstance(a, int) and a == 0:
        return 1
    return intern(op, (a, b, aw), 1)


def lnot(c: Value) -> Value:
    if isinstance(c, int):
        return 1 - c
    if c.op == "lnot":
        return c.args[0]
    return intern("lnot", (c,), 1)


def land(a: Value, b: Value) -> Value:
    if isinstance(a, int):
        return b if a else 0
    if isinstance(b, int):
        return a if b else 0
    if a is b:
        return a
    return intern("land", (a, b), 1)


def lor(a: Value, b: Value) -> Value:
    if isinstance(a, int):
        return 1 if a else b
    if isinstance(b, int):
        return 1 if b else a
    if a is b:
        return a
    return intern("lor", (a, b), 1)


def extend(a: Value, from_w: int, to_w: int, signed_src: bool) -> Value:
    """Convert a `from_w`-bit pattern to `to_w` bits (C integer conversion)."""
    if from_w == to_w:
        return a
    if to_w < from_w:
        if isinstance(a, int):
            return a & mask(to_w)
        if a.op in ("zext", "sext"):
            inner = a.args[1]
            if inner == to_w:
                return a.args[0]
            if inner < to_w:
                return extend(a.args[0], inner, to_w, a.op == "sext")
        return intern("trunc", (a, from_w), to_w)
    if isinstance(a, int):
        return (signed(a, from_w) & mask(to_w)) if signed_src else a
    return intern("sext" if signed_src else "zext", (a, from_w), to_w)


def ite(c: Value, a: Value, b: Value, width: int) -> Value:
    if isinstance(c, int):
        return a if c else b
    if a is b or (isinstance(a, int) and isinstance(b, int) and a == b):
        return a
    if width == 1 and a == 1 and b == 0:
        return c
    if width == 1 and a == 0 and b == 1:
        return lnot(c)
    return intern("ite", (c, a, b), width)


def truth(v: Value, width: int) -> Value:
    """Width-1 value that is 1 iff v is nonzero."""
    if isinstance(v, int):
        return int(v != 0)
    if v.width == 1:
        return v
    if v.op == "zext" and isinstance(v.args[0], Term) and v.args[0].width == 1:
        return v.args[0]
    return cmp("ne", v, 0, width)


def select(idx: Value, elems: tuple, width: int) -> Value:
    """elems[idx] with out-of-range indexes reading 0 (idx is a 32-bit pattern)."""
    if isinstance(idx, int):
        return elems[idx] if idx < len(elems) else 0
    return intern("select", (idx, tuple(elems)), width)


# ---------------------------------------------------------------- evaluation


def evaluate(t: Value, model: dict, memo=None) -> int:
    """Concrete value of t; symbols missing from `model` read as 0."""
    if isinstance(t, int):
        return t
    if memo is None:
        memo = {}
    return _eval(t, model, memo)


def _eval(t, model, memo):
    if isinstance(t, int):
        return t
    r = memo.get(t)
    if r is not None:
        return r
    op = t.op
    if op == "sym":
        r = model.get(t, 0) & mask(t.width)
    elif op == "land":
        r = int(bool(_eval(t.args[0], model, memo)) and bool(_eval(t.args[1], model, memo)))
    elif op == "lor":
        r = int(bool(_eval(t.args[0], model, memo)) or bool(_eval(t.args[1], model, memo)))
    elif op == "lnot":
        r = 1 - _eval(t.args[0], model, memo)
    elif op == "ite":
        r = _eval(t.args[1], model, memo) if _eval(t.args[0], model, memo) else _eval(t.args[2], model, memo)
    elif op == "select":
        i = _eval(t.args[0], model, memo)
        elems = t.args[1]
        r = _eval(elems[i], model, memo) if i < len(elems) else 0
    elif op in COMPARE_OPS:
        r = apply(op, (_eval(t.args[0], model, memo), _eval(t.args[1], model, memo)), 1, t.args[2])
    elif op in ("zext", "sext", "trunc"):
        r = apply(op, (_eval(t.args[0], model, memo),), t.width, t.args[1])
    else:
        r = apply(op, tuple(_eval(a, model, memo) for a in t.args), t.width)
    memo[t] = r
    return r


# ---------------------------------------------------------------- printing


_INFIX = {"add": "+", "sub": "-", "mul": "*", "udiv": "/u", "sdiv": "/s", "urem": "%u", "srem": "%s",
          "and": "&", "or": "|", "xor": "^", "shl": "<<", "lshr": ">>u", "ashr": ">>s",
          "eq": "==", "ne": "!=", "ult": "<u", "ule": "<=u", "slt": "<s", "sle": "<=s",
          "land": "&&", "lor": "||"}


def to_text(t: Value, depth: int = 0) -> str:
    if isinstance(t, int):
        return hex(t) if t > 255 else str(t)
    if depth > 12:
        return "..."
    if t.op == "sym":
        return t.name
    if t.op in _INFIX:
        return f"({to_text(t.args[0], depth + 1)} {_INFIX[t.op]} {to_text(t.args[1], depth + 1)})"
    if t.op == "select":
        return f"select({to_text(t.args[0], depth + 1)}, [{len(t.args[1])}])"
    inner = ", ".join(to_text(a, depth + 1) for a in t.args if not isinstance(a, tuple))
    return f"{t.op}{t.width}({inner})"
