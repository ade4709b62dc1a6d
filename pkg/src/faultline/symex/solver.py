"""Constraint solving for path conditions.

A query is a conjunction of width-1 terms.  The portfolio runs in layers:

1. constant folding (done by the term constructors) and flattening;
2. range extraction: comparisons of a term against a constant become an
   interval on that term, and empty intervals refute the query at once;
3. branch and bound over the symbols' value ranges.  Each box is evaluated
   with intervals and known bits; boxes where some conjunct is definitely
   false are pruned.  The search is exhaustive, so running out of boxes
   proves unsatisfiability;
4. optionally an external SMT-LIB2 solver when the node budget runs out.

Every model returned as ``sat`` has been checked by concrete evaluation.
"""
from __future__ import annotations

import os
import shlex
import subprocess
import weakref
from dataclasses import dataclass, field
from typing import Optional

from .terms import COMPARE_OPS, Term, evaluate, mask, signed

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"

ENV_EXTERNAL = "FAULTLINE_SMT"


@dataclass
class SolverConfig:
    node_limit: int = 20000
    external: Optional[str] = None  # command line of an SMT-LIB2 solver reading stdin
    external_timeout: float = 10.0
    cache_size: int = 50000

    @classmethod
    def from_env(cls, **kw) -> "SolverConfig":
        cfg = cls(**kw)
        if cfg.external is None:
            cfg.external = os.environ.get(ENV_EXTERNAL) or None
        return cfg


@dataclass
class SolverStats:
    queries: int = 0
    cache_hits: int = 0
    trivial: int = 0
    refuted_by_ranges: int = 0
    nodes: int = 0
    sat: int = 0
    unsat: int = 0
    unknown: int = 0
    external_calls: int = 0


# ---------------------------------------------------------------- abstract values
# An abstract value is (lo, hi, z, o): an unsigned interval of bit patterns
# plus masks of bits known to be zero and known to be one.


def _norm(lo, hi, z, o, w):
    m = mask(w)
    d = lo ^ hi
    pre = m & ~((1 << d.bit_length()) - 1)
    z |= pre & ~lo
    o |= pre & lo
    if z & o:
        z, o = pre & ~lo, pre & lo
    lo2, hi2 = max(lo, o), min(hi, m & ~z)
    if lo2 <= hi2:
        lo, hi = lo2, hi2
    return (lo, hi, z & m, o & m)


def _pdep(n, free):
    out, bit = 0, 0
    while free:
        low = free & -free
        if (n >> bit) & 1:
            out |= low
        free ^= low
        bit += 1
    return out


def _fit(lo, hi, z, o, w):
    """Smallest and largest values in [lo, hi] with the known bits, or None."""
    free = mask(w) & ~z & ~o
    top = (1 << bin(free).count("1")) - 1
    a, b = 0, top + 1
    while a < b:
        mid = (a + b) // 2
        if o | _pdep(mid, free) >= lo:
            b = mid
        else:
            a = mid + 1
    if a > top or (o | _pdep(a, free)) > hi:
        return None
    c, d = a, top
    while c < d:
        mid = (c + d + 1) // 2
        if o | _pdep(mid, free) <= hi:
            c = mid
        else:
            d = mid - 1
    return o | _pdep(a, free), o | _pdep(c, free)


def _rng(lo, hi, w):
    return _norm(lo, hi, 0, 0, w)


def _const(v, w):
    return (v, v, mask(w) & ~v, v)


def _full(w):
    return (0, mask(w), 0, 0)


def _join(a, b, w):
    return _norm(min(a[0], b[0]), max(a[1], b[1]), a[2] & b[2], a[3] & b[3], w)


BOOL_T, BOOL_F, BOOL_U = (1, 1, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0)


def _bool(lo, hi):
    return BOOL_T if lo == 1 else BOOL_F if hi == 0 else BOOL_U


def _signed_range(a, w):
    half = 1 << (w - 1)
    if a[1] < half or a[0] >= half:
        return signed(a[0], w), signed(a[1], w)
    return -half, half - 1


def _abs_cmp(op, a, b, w):
    if op in ("slt", "sle"):
        al, ah = _signed_range(a, w)
        bl, bh = _signed_range(b, w)
        op = "ult" if op == "slt" else "ule"
    else:
        al, ah, bl, bh = a[0], a[1], b[0], b[1]
    if op == "eq":
        if al == ah == bl == bh:
            return BOOL_T
        if ah < bl or bh < al or (a[3] & b[2]) or (a[2] & b[3]):
            return BOOL_F
        return BOOL_U
    if op == "ult":
        if ah < bl:
            return BOOL_T
        if al >= bh:
            return BOOL_F
        return BOOL_U
    if op == "ule":
        if ah <= bl:
            return BOOL_T
        if al > bh:
            return BOOL_F
        return BOOL_U
    raise ValueError(op)


def _abs_op(op, args, w):
    m = mask(w)
    a = args[0]
    if op == "not":
        return _norm(m - a[1], m - a[0], a[3], a[2], w)
    if op == "neg":
        op, args = "sub", (_const(0, w), a)
        a = args[0]
    b = args[1]
    if op == "add":
        lo, hi = a[0] + b[0], a[1] + b[1]
        if hi <= m:
            return _rng(lo, hi, w)
        if lo > m:
            return _rng(lo - m - 1, hi - m - 1, w)
        return _full(w)
    if op == "sub":
        lo, hi = a[0] - b[1], a[1] - b[0]
        if lo >= 0:
            return _rng(lo, hi, w)
        if hi < 0:
            return _rng(lo + m + 1, hi + m + 1, w)
        return _full(w)
    if op == "mul":
        if a[1] * b[1] <= m:
            return _rng(a[0] * b[0], a[1] * b[1], w)
        return _full(w)
    if op == "and":
        z, o = a[2] | b[2], a[3] & b[3]
        if b[0] == b[1] and b[0] & (b[0] + 1) == 0:
            k = b[0].bit_length()
            if a[0] >> k == a[1] >> k:   # the mask keeps a contiguous range
                return _norm(a[0] & b[0], a[1] & b[0], z, o, w)
        return _norm(0, min(a[1], b[1]), z, o, w)
    if op == "or":
        z, o = a[2] & b[2], a[3] | b[3]
        return _norm(max(a[0], b[0]), m, z, o, w)
    if op == "xor":
        known = (a[2] | a[3]) & (b[2] | b[3])
        v = a[3] ^ b[3]
        return _norm(0, m, known & ~v, known & v, w)
    if op == "udiv":
        if b[0] > 0:
            return _rng(a[0] // b[1], a[1] // b[0], w)
        return _rng(0, a[1], w)
    if op == "urem":
        if b[0] > 0:
            if a[1] < b[0]:
                return a
            return _rng(0, min(a[1], b[1] - 1), w)
        return _rng(0, a[1], w)
    half = 1 << (w - 1)
    if op in ("sdiv", "srem") and a[1] < half and b[1] < half:
        return _abs_op("udiv" if op == "sdiv" else "urem", args, w)
    if op in ("shl", "lshr", "ashr") and b[0] == b[1]:
        s = b[0]
        if s >= w:
            if op == "ashr":
                return _abs_op("ashr", (a, _const(w - 1, w)), w)
            return _const(0, w)
        if op == "shl":
            low = (1 << s) - 1
            z, o = ((a[2] << s) | low) & m, (a[3] << s) & m
            if a[1] << s <= m:
                return _norm(a[0] << s, a[1] << s, z, o, w)
            return _norm(0, m, z, o, w)
        if op == "lshr":
            high = m & ~(m >> s)
            return _norm(a[0] >> s, a[1] >> s, (a[2] >> s) | high, a[3] >> s, w)
        if a[1] < half:
            return _rng(a[0] >> s, a[1] >> s, w)
        if a[0] >= half:
            return _rng(((a[0] - m - 1) >> s) & m, ((a[1] - m - 1) >> s) & m, w)
        return _full(w)
    if op == "lshr":
        return _rng(0, a[1], w)
    return _full(w)


class _Abs:
    """Abstract evaluator for one box (symbol -> (lo, hi))."""

    def __init__(self, box, bits=None):
        self.box = box
        self.bits = bits or {}
        self.memo = {}
        self.rel = {}

    def ev(self, t):
        if isinstance(t, int):
            return None  # callers supply the width
        r = self.memo.get(t)
        if r is None:
            r = self._ev(t)
            self.memo[t] = r
        return r

    def val(self, x, w):
        return _const(x, w) if isinstance(x, int) else self.ev(x)

    def relevant(self, t):
        """Symbols of `t`, skipping array elements the index cannot reach."""
        if not t.has_select:
            return t.symbols
        r = self.rel.get(t)
        if r is not None:
            return r
        if t.op == "select":
            idx, elems = t.args
            r = set(idx.symbols) if isinstance(idx, Term) else set()
            lo, hi = self.val(idx, 32)[:2]
            for i in range(lo, min(hi, len(elems) - 1) + 1):
                if isinstance(elems[i], Term):
                    r |= self.relevant(elems[i])
        else:
            r = set()
            for x in t.args:
                if isinstance(x, Term):
                    r |= self.relevant(x)
        self.rel[t] = r
        return r

    def _ev(self, t):
        op, w = t.op, t.width
        if op == "sym":
            lo, hi = self.box.get(t, (0, mask(w)))
            kb = self.bits.get(t)
            if kb is None:
                return _rng(lo, hi, w)
            lo, hi = _fit(lo, hi, kb[0], kb[1], w)
            return _norm(lo, hi, kb[0], kb[1], w)
        if op == "lnot":
            a = self.val(t.args[0], 1)
            return _bool(1 - a[1], 1 - a[0])
        if op == "land":
            a = self.val(t.args[0], 1)
            if a[1] == 0:
                return BOOL_F
            b = self.val(t.args[1], 1)
            return _bool(min(a[0], b[0]), min(a[1], b[1]))
        if op == "lor":
            a = self.val(t.args[0], 1)
            if a[0] == 1:
                return BOOL_T
            b = self.val(t.args[1], 1)
            return _bool(max(a[0], b[0]), max(a[1], b[1]))
        if op in COMPARE_OPS:
            aw = t.args[2]
            return _abs_cmp(op, self.val(t.args[0], aw), self.val(t.args[1], aw), aw)
        if op == "ite":
            c = self.val(t.args[0], 1)
            if c[0] == 1:
                return self.val(t.args[1], w)
            if c[1] == 0:
                return self.val(t.args[2], w)
            return _join(self.val(t.args[1], w), self.val(t.args[2], w), w)
        if op == "zext":
            a = self.val(t.args[0], t.args[1])
            return _norm(a[0], a[1], a[2] | (mask(w) & ~mask(t.args[1])), a[3], w)
        if op == "sext":
            fw = t.args[1]
            a = self.val(t.args[0], fw)
            half = 1 << (fw - 1)
            if a[1] < half:
                return _norm(a[0], a[1], a[2] | (mask(w) & ~mask(fw)), a[3], w)
            if a[0] >= half:
                ext = mask(w) & ~mask(fw)
                return _norm(a[0] | ext, a[1] | ext, a[2], a[3] | ext, w)
            return _full(w)
        if op == "trunc":
            a = self.val(t.args[0], t.args[1])
            m = mask(w)
            if (a[0] >> w) == (a[1] >> w):
                return _norm(a[0] & m, a[1] & m, a[2] & m, a[3] & m, w)
            return _norm(0, m, a[2] & m, a[3] & m, w)
        if op == "select":
            idx = self.val(t.args[0], 32)
            elems = t.args[1]
            n = len(elems)
            out = None
            if idx[1] >= n:
                out = _const(0, w)
            lo, hi = idx[0], min(idx[1], n - 1)
            if lo <= hi:
                if hi - lo > 64:
                    rng = range(n)
                else:
                    rng = range(lo, hi + 1)
                for i in rng:
                    e = self.val(elems[i], w)
                    out = e if out is None else _join(out, e, w)
            return out if out is not None else _full(w)
        args = tuple(self.val(a, w) for a in t.args)
        return _abs_op(op, args, w)


# ---------------------------------------------------------------- preprocessing


def _flatten(cs, out):
    for c in cs:
        if isinstance(c, int):
            if not c:
                return False
            continue
        if c.op == "land":
            if not _flatten(c.args, out):
                return False
        else:
            out.append(c)
    return True


# Range constraints are unions of disjoint unsigned intervals, so signed
# bounds and wrapped bounds share one representation.


def _iv_norm(pieces):
    out = []
    for lo, hi in sorted(p for p in pieces if p[0] <= p[1]):
        if out and lo <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def _iv_meet(a, b):
    out, i, j = [], 0, 0
    while i < len(a) and j < len(b):
        lo, hi = max(a[i][0], b[j][0]), min(a[i][1], b[j][1])
        if lo <= hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _iv_not(a, w):
    out, nxt = [], 0
    for lo, hi in a:
        if lo > nxt:
            out.append((nxt, lo - 1))
        nxt = hi + 1
    if nxt <= mask(w):
        out.append((nxt, mask(w)))
    return out


def _circ(lo, hi, w):
    """Wrapped interval from lo to hi (both reduced mod 2^w)."""
    m = mask(w)
    lo, hi = lo & m, hi & m
    return [(lo, hi)] if lo <= hi else [(0, hi), (lo, m)]


def _iv_xor(a, c, w, limit=64):
    """{x ^ c : x in a} as intervals, or None if that takes too many pieces."""
    if a == [(0, mask(w))]:
        return a
    out = []
    for lo, hi in a:
        while lo <= hi:
            k = (lo & -lo).bit_length() - 1 if lo else w
            while (1 << k) > hi - lo + 1:
                k -= 1
            base = (lo ^ c) & ~((1 << k) - 1) & mask(w)
            out.append((base, base + (1 << k) - 1))
            if len(out) > limit:
                return None
            lo += 1 << k
    return _iv_norm(out)


def _iv_shift(a, d, w):
    if len(a) == 1 and a[0] == (0, mask(w)):
        return a
    out = []
    for lo, hi in a:
        out += _circ(lo + d, hi + d, w)
    return _iv_norm(out)


def _signed_iv(lo, hi, w):
    return _circ(lo, hi, w) if lo <= hi else []


def _peel(t, iv):
    """Move the range through invertible operations down to a smaller term."""
    while isinstance(t, Term):
        w = t.width
        if t.op in ("add", "sub") and isinstance(t.args[1], int):
            d = t.args[1]
            iv, t = _iv_shift(iv, -d if t.op == "add" else d, w), t.args[0]
        elif t.op == "sub" and isinstance(t.args[0], int):
            c = t.args[0]  # c - x in iv  <=>  x in c - iv
            out = []
            for lo, hi in iv:
                out += _circ(c - hi, c - lo, w)
            iv, t = _iv_norm(out), t.args[1]
        elif t.op == "neg":
            out = []
            for lo, hi in iv:
                out += _circ(-hi, -lo, w)
            iv, t = _iv_norm(out), t.args[0]
        elif t.op == "not":
            m = mask(w)
            iv, t = _iv_norm([(m - hi, m - lo) for lo, hi in iv]), t.args[0]
        elif t.op == "xor" and isinstance(t.args[1], int):
            out = _iv_xor(iv, t.args[1], w)
            if out is None:
                break
            iv, t = out, t.args[0]
        elif t.op == "zext" and isinstance(t.args[0], Term):
            fw = t.args[1]
            iv, t = _iv_meet(iv, [(0, mask(fw))]), t.args[0]
        else:
            break
    return t, iv


_RANGE_MEMO = weakref.WeakKeyDictionary()
_NO_RANGE = object()


def _as_range(c):
    """(term, intervals) if c bounds a term by a constant, else None."""
    r = _RANGE_MEMO.get(c)
    if r is None:
        r = _as_range_uncached(c)
        _RANGE_MEMO[c] = _NO_RANGE if r is None else r
        return r
    return None if r is _NO_RANGE else r


def _as_range_uncached(c):
    neg = False
    if c.op == "lnot" and isinstance(c.args[0], Term):
        neg, c = True, c.args[0]
    if c.op not in ("eq", "ult", "ule", "slt", "sle"):
        return None
    a, b, w = c.args
    if isinstance(a, int) == isinstance(b, int):
        return None
    sgn = c.op in ("slt", "sle")
    m = mask(w)
    mn, mx = (-(1 << (w - 1)), (1 << (w - 1)) - 1) if sgn else (0, m)
    if isinstance(b, int):
        t, k, upper = a, (signed(b, w) if sgn else b), True
    else:
        t, k, upper = b, (signed(a, w) if sgn else a), False
    if c.op == "eq":
        iv = [(k, k)]
    else:
        strict = c.op in ("ult", "slt")
        if upper:   # t < k / t <= k
            lo, hi = mn, (k - 1 if strict else k)
        else:       # k < t / k <= t
            lo, hi = (k + 1 if strict else k), mx
        iv = _signed_iv(lo, hi, w) if sgn else ([(lo, hi)] if lo <= hi else [])
        iv = _iv_norm(iv)
    if neg:
        iv = _iv_not(iv, w)
    return _peel(t, iv)


def _known_bits(t, iv):
    """(symbol, known-zero, known-one) implied by `t in iv` for a masked symbol."""
    if not iv or t.op != "and" or not isinstance(t.args[1], int):
        return None
    m, x = t.args[1], t.args[0]
    if len(iv) == 1 and iv[0][0] == iv[0][1]:
        v = iv[0][0]
        if v & ~m:
            return None
        z, o = m & ~v, v
    elif m & (m - 1) == 0 and iv[0][0] > 0:
        z, o = 0, m
    else:
        return None
    if isinstance(x, Term) and x.op == "zext" and isinstance(x.args[0], Term):
        x = x.args[0]
    if not isinstance(x, Term) or x.op != "sym":
        return None
    m = mask(x.width)
    return x, z & m, o & m


class _Problem:
    def __init__(self, conjuncts):
        self.checks = []          # width-1 terms that must hold
        self.ranges = {}          # term -> allowed unsigned intervals
        self.empty = False
        for c in conjuncts:
            r = _as_range(c)
            if r is None:
                self.checks.append(c)
                continue
            t, iv = r
            if isinstance(t, int):
                if not any(lo <= t <= hi for lo, hi in iv):
                    self.empty = True
                continue
            cur = self.ranges.get(t)
            iv = iv if cur is None else _iv_meet(cur, iv)
            if not iv:
                self.empty = True
            self.ranges[t] = iv
        self.sym_box = {t: iv for t, iv in self.ranges.items() if t.op == "sym"}
        self.bits = {}
        for t, iv in self.ranges.items():
            kb = _known_bits(t, iv)
            if kb is not None:
                x, z, o = kb
                z0, o0 = self.bits.get(x, (0, 0))
                z, o = z | z0, o | o0
                if z & o:
                    self.empty = True
                self.bits[x] = (z, o)
        syms = set()
        for c in self.checks:
            syms |= c.symbols
        for t in self.ranges:
            syms |= t.symbols
        self.symbols = sorted(syms, key=lambda s: s.name)
        self.index_syms = set()
        seen = set()
        todo = [t for t in list(self.ranges) + self.checks if t.has_select]
        while todo:
            t = todo.pop()
            if t in seen:
                continue
            seen.add(t)
            if t.op == "select":
                if isinstance(t.args[0], Term):
                    self.index_syms |= t.args[0].symbols
                todo += [x for x in t.args[1] if isinstance(x, Term) and x.has_select]
            todo += [x for x in t.args if isinstance(x, Term) and x.has_select]

    def initial_boxes(self):
        boxes = [{}]
        for s in self.symbols:
            pieces = self.sym_box.get(s, [(0, mask(s.width))])
            if len(pieces) * len(boxes) > 256:
                pieces = [(pieces[0][0], pieces[-1][1])]
            boxes = [{**b, s: p} for b in boxes for p in pieces]
        return boxes

    def abstract(self, box):
        """1 all hold, 0 some conjunct fails, None undecided; plus the set of
        symbols occurring in undecided parts."""
        for x, (z, o) in self.bits.items():
            lo, hi = box.get(x, (0, mask(x.width)))
            if _fit(lo, hi, z, o, x.width) is None:
                return 0, None
        ab = _Abs(box, self.bits)
        undecided = set()
        for t, iv in self.ranges.items():
            a = ab.ev(t)
            lo, hi = a[0], a[1]
            inside = False
            hit = False
            for plo, phi in iv:
                if plo <= lo and hi <= phi:
                    inside = True
                    break
                if plo <= hi and lo <= phi:
                    hit = True
            if inside:
                continue
            if not hit:
                return 0, None
            undecided |= ab.relevant(t)
        for c in self.checks:
            a = ab.ev(c)
            if a[1] == 0:
                return 0, None
            if a[0] == 0:
                undecided |= ab.relevant(c)
        return (1 if not undecided else None), undecided

    def holds(self, model):
        memo = {}
        for t, iv in self.ranges.items():
            v = evaluate(t, model, memo)
            if not any(lo <= v <= hi for lo, hi in iv):
                return False
        return all(evaluate(c, model, memo) for c in self.checks)


# ---------------------------------------------------------------- solver


@dataclass
class Solver:
    config: SolverConfig = field(default_factory=SolverConfig.from_env)
    stats: SolverStats = field(default_factory=SolverStats)

    def __post_init__(self):
        self._cache = {}

    def check(self, conjuncts, hint: Optional[dict] = None):
        """Satisfiability of the conjunction.  Returns (status, model)."""
        self.stats.queries += 1
        hint = hint or {}
        flat = []
        if not _flatten(conjuncts, flat):
            self.stats.trivial += 1
            return UNSAT, None
        if not flat:
            self.stats.trivial += 1
            return SAT, dict(hint)
        memo = {}
        if all(evaluate(c, hint, memo) for c in flat):
            self.stats.trivial += 1
            return SAT, dict(hint)
        key = frozenset(flat)
        hit = self._cache.get(key)
        if hit is not None:
            self.stats.cache_hits += 1
            st, model = hit
            if st == SAT:
                merged = dict(hint)
                merged.update(model)
                return st, merged
            return st, None
        st, model = self._solve(flat, hint)
        if len(self._cache) >= self.config.cache_size:
            self._cache.clear()
        self._cache[key] = (st, model)
        if st == SAT:
            self.stats.sat += 1
            merged = dict(hint)
            merged.update(model)
            return st, merged
        if st == UNSAT:
            self.stats.unsat += 1
        else:
            self.stats.unknown += 1
        return st, None

    def check_with(self, base, extra, hint: Optional[dict] = None):
        """Satisfiability of base ∧ extra, where `hint` is known to satisfy
        `base`.  Only base conjuncts sharing symbols with `extra` (closed
        transitively) are passed to the search."""
        hint = hint or {}
        extra = [e for e in extra if not (isinstance(e, int) and e)]
        if any(isinstance(e, int) for e in extra):
            return UNSAT, None
        if not extra:
            return SAT, dict(hint)
        memo = {}
        if all(evaluate(e, hint, memo) for e in extra):
            return SAT, dict(hint)
        return self.check(slice_related(base, extra) + list(extra), hint)

    # -- layers -----------------------------------------------------------------

    def _solve(self, flat, hint):
        prob = _Problem(flat)
        if prob.empty:
            self.stats.refuted_by_ranges += 1
            return UNSAT, None
        st, model = self._search(prob, hint)
        if st == UNKNOWN and self.config.external:
            st, model = self._external(flat)
            if st == SAT and not prob.holds(model):
                st, model = UNKNOWN, None
        return st, model

    def _search(self, prob, hint):
        syms = prob.symbols
        stack = prob.initial_boxes()[::-1]
        nodes = 0
        limit = self.config.node_limit
        while stack:
            box = stack.pop()
            nodes += 1
            if nodes > limit:
                self.stats.nodes += nodes
                return UNKNOWN, None
            verdict, undecided = prob.abstract(box)
            if verdict == 0:
                continue
            probe = {}
            for s, (lo, hi) in box.items():
                h = hint.get(s)
                kb = prob.bits.get(s)
                if kb is not None and h is not None and (h & kb[0] or ~h & kb[1]):
                    h = None
                probe[s] = h if h is not None and lo <= h <= hi else (lo if kb is None else _fit(lo, hi, kb[0], kb[1], s.width)[0])
            if prob.holds(probe):
                self.stats.nodes += nodes
                return SAT, probe
            # split the widest symbol that still matters
            best, width = None, (0, 0)
            for s in syms:
                if s not in undecided:
                    continue
                lo, hi = box[s]
                rank = (s in prob.index_syms and hi > lo, hi - lo)
                if rank > width:
                    best, width = s, rank
            if best is None:
                continue  # fully concrete box whose probe failed
            lo, hi = box[best]
            k = (lo ^ hi).bit_length() - 1
            cut = (hi >> k) << k
            left, right = dict(box), dict(box)
            left[best] = (lo, cut - 1)
            right[best] = (cut, hi)
            h = hint.get(best, probe[best])
            if cut <= h:
                stack += [left, right]
            else:
                stack += [right, left]
        self.stats.nodes += nodes
        return UNSAT, None

    def _external(self, flat):
        self.stats.external_calls += 1
        text, decls = to_smtlib(flat)
        try:
            out = subprocess.run(shlex.split(self.config.external), input=text, capture_output=True,
                                 text=True, timeout=self.config.external_timeout).stdout
        except (OSError, subprocess.TimeoutExpired):
            return UNKNOWN, None
        return parse_smt_output(out, decls)


def slice_related(base, extra):
    """Conjuncts of `base` connected to `extra` through shared symbols."""
    want = set()
    for e in extra:
        if isinstance(e, Term):
            want |= e.symbols
    if not want:
        return []
    pending = [c for c in base if isinstance(c, Term)]
    picked = []
    changed = True
    while changed:
        changed = False
        rest = []
        for c in pending:
            if c.symbols & want:
                picked.append(c)
                want |= c.symbols
                changed = True
            else:
                rest.append(c)
        pending = rest
    return picked


def solve(constraint, hint=None, config: Optional[SolverConfig] = None):
    """One-shot query on a single boolean term or list of terms."""
    cs = constraint if isinstance(constraint, (list, tuple)) else [constraint]
    return Solver(config or SolverConfig.from_env()).check(list(cs), hint)


# ---------------------------------------------------------------- SMT-LIB2


_SMT_BIN = {"add": "bvadd", "sub": "bvsub", "mul": "bvmul", "and": "bvand", "or": "bvor", "xor": "bvxor",
            "shl": "bvshl", "lshr": "bvlshr", "ashr": "bvashr"}
_SMT_CMP = {"ult": "bvult", "ule": "bvule", "slt": "bvslt", "sle": "bvsle", "eq": "="}


def _bv(v, w):
    return f"(_ bv{v} {w})"


def to_smtlib(conjuncts):
    """QF_BV script asserting the conjuncts; returns (text, symbol list)."""
    defs, names = [], {}
    syms = set()
    for c in conjuncts:
        syms |= c.symbols

    def ref(x, w, as_bool=False):
        if isinstance(x, int):
            return ("true" if x else "false") if as_bool else _bv(x, w)
        return emit(x)

    def emit(t):
        if t in names:
            return names[t]
        op, w = t.op, t.width
        if op == "sym":
            return f"|{t.name}|"
        if op in _SMT_BIN:
            s = f"({_SMT_BIN[op]} {ref(t.args[0], w)} {ref(t.args[1], w)})"
        elif op in ("udiv", "sdiv"):
            a, b = ref(t.args[0], w), ref(t.args[1], w)
            s = f"(ite (= {b} {_bv(0, w)}) {_bv(0, w)} (bv{op} {a} {b}))"
        elif op in ("urem", "srem"):
            a, b = ref(t.args[0], w), ref(t.args[1], w)
            s = f"(ite (= {b} {_bv(0, w)}) {a} (bv{op} {a} {b}))"
        elif op == "not":
            s = f"(bvnot {ref(t.args[0], w)})"
        elif op == "neg":
            s = f"(bvneg {ref(t.args[0], w)})"
        elif op in _SMT_CMP:
            aw = t.args[2]
            s = f"({_SMT_CMP[op]} {ref(t.args[0], aw)} {ref(t.args[1], aw)})"
        elif op == "lnot":
            s = f"(not {ref(t.args[0], 1, True)})"
        elif op in ("land", "lor"):
            s = f"({'and' if op == 'land' else 'or'} {ref(t.args[0], 1, True)} {ref(t.args[1], 1, True)})"
        elif op in ("zext", "sext"):
            fw = t.args[1]
            if fw == 1:
                s = f"(ite {ref(t.args[0], 1, True)} {_bv(1, w)} {_bv(0, w)})"
            else:
                s = f"((_ {'zero' if op == 'zext' else 'sign'}_extend {w - fw}) {ref(t.args[0], fw)})"
        elif op == "trunc":
            s = f"((_ extract {w - 1} 0) {ref(t.args[0], t.args[1])})"
        elif op == "ite":
            b = w == 1
            s = f"(ite {ref(t.args[0], 1, True)} {ref(t.args[1], w, b)} {ref(t.args[2], w, b)})"
        elif op == "select":
            idx = ref(t.args[0], 32)
            s = _bv(0, w)
            for i in range(len(t.args[1]) - 1, -1, -1):
                s = f"(ite (= {idx} {_bv(i, 32)}) {ref(t.args[1][i], w)} {s})"
        else:
            raise ValueError(op)
        n = f"t{len(names)}"
        sort = "Bool" if w == 1 else f"(_ BitVec {w})"
        defs.append(f"(define-fun {n} () {sort} {s})")
        names[t] = n
        return n

    asserts = [f"(assert {ref(c, 1, True)})" for c in conjuncts]
    decls = sorted(syms, key=lambda s: s.name)
    head = ["(set-logic QF_BV)", "(set-option :produce-models true)"]
    head += [f"(declare-const |{s.name}| (_ BitVec {s.width}))" for s in decls]
    tail = ["(check-sat)"]
    if decls:
        tail.append("(get-value (" + " ".join(f"|{s.name}|" for s in decls) + "))")
    return "\n".join(head + defs + asserts + tail) + "\n", decls


def parse_smt_output(out: str, decls):
    lines = out.strip().split("\n", 1)
    if not lines or lines[0].strip() not in (SAT, UNSAT):
        return UNKNOWN, None
    if lines[0].strip() == UNSAT:
        return UNSAT, None
    rest = lines[1] if len(lines) > 1 else ""
    by_name = {s.name: s for s in decls}
    model = {}
    import re
    for name, val in re.findall(r"\(\|([^|]*)\|\s+(#x[0-9a-fA-F]+|#b[01]+|\(_ bv\d+ \d+\))\)", rest):
        if val.startswith("#x"):
            v = int(val[2:], 16)
        elif val.startswith("#b"):
            v = int(val[2:], 2)
        else:
            v = int(val.split()[1][2:])
        if name in by_name:
            model[by_name[name]] = v
    return SAT, model
