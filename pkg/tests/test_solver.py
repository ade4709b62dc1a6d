import itertools
import sys

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from faultline.symex import terms as T
from faultline.symex.solver import SAT, UNKNOWN, UNSAT, Solver, SolverConfig, solve, to_smtlib

W = 4
X, Y = T.sym("sx", W), T.sym("sy", W)
OPS = ["add", "sub", "mul", "and", "or", "xor", "shl", "lshr", "ashr", "udiv", "urem"]
CMPS = ["eq", "ne", "ult", "ule", "slt", "sle"]


@st.composite
def value(draw, depth=0):
    if depth > 2 or draw(st.integers(0, 2)) == 0:
        return draw(st.sampled_from([X, Y, draw(st.integers(0, 15))]))
    k = draw(st.integers(0, 3))
    if k == 0:
        return T.unop(draw(st.sampled_from(["not", "neg"])), draw(value(depth + 1)), W)
    if k == 1:
        c = draw(cond(depth + 1))
        return T.ite(c, draw(value(depth + 1)), draw(value(depth + 1)), W)
    return T.binop(draw(st.sampled_from(OPS)), draw(value(depth + 1)), draw(value(depth + 1)), W)


@st.composite
def cond(draw, depth=0):
    c = T.cmp(draw(st.sampled_from(CMPS)), draw(value(depth + 1)), draw(value(depth + 1)), W)
    if draw(st.booleans()):
        c = T.lnot(c)
    return c


def brute(cs):
    for vx, vy in itertools.product(range(16), repeat=2):
        m = {X: vx, Y: vy}
        if all(T.evaluate(c, m) for c in cs):
            return m
    return None


@settings(max_examples=300, deadline=None, suppress_health_check=list(HealthCheck))
@given(st.lists(cond(), min_size=1, max_size=4))
def test_agrees_with_brute_force(cs):
    cs = [c for c in cs]
    status, model = solve(cs)
    truth = brute(cs)
    assert status != UNKNOWN
    if truth is None:
        assert status == UNSAT
    else:
        assert status == SAT
        assert all(T.evaluate(c, model) for c in cs)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(OPS), st.integers(0, 15), st.integers(0, 15))
def test_constant_folding_matches_concrete(op, a, b):
    folded = T.binop(op, a, b, W)
    assert isinstance(folded, int)
    assert folded == T.evaluate(T.binop(op, X, b, W), {X: a})


def test_fault_mask_example():
    f = T.sym("f", 32)
    size = T.binop("xor", 255, f, 32)
    st_, m = solve([T.lnot(T.cmp("eq", f, 0, 32)), T.cmp("ult", 255, size, 32)], hint={f: 1})
    assert st_ == SAT and (255 ^ m[f]) > 255


def test_wide_unsat_by_ranges():
    i = T.sym("i", 32)
    assert solve([T.cmp("ule", i, 255, 32), T.cmp("ule", 256, i, 32)])[0] == UNSAT


def test_xor_range_peeling():
    f = T.sym("f", 32)
    x = T.binop("xor", f, 4, 32)
    st_, m = solve([T.cmp("ult", x, 4, 32), T.lnot(T.cmp("eq", f, 4, 32))])
    assert st_ == SAT and m[f] in (5, 6, 7)


def test_symbolic_index_select():
    elems = tuple(T.sym(f"b{i}", 8) for i in range(64))
    f = T.sym("f", 32)
    idx = T.binop("and", T.binop("xor", f, 4, 32), 63, 32)
    low = lambda e: T.binop("and", T.extend(e, 8, 32, False), 1, 32)
    cs = [T.cmp("ult", 0, low(elems[i]), 32) for i in range(4)]
    cs += [T.cmp("ule", 4, f, 32), T.cmp("ule", f, 7, 32), T.cmp("eq", low(T.select(idx, elems, 8)), 0, 32)]
    assert Solver(SolverConfig(node_limit=2000)).check(cs)[0] == UNSAT


def test_smtlib_text_declares_symbols():
    text, decls = to_smtlib([T.cmp("ult", T.binop("udiv", X, Y, W), 3, W)])
    assert "(declare-const |sx| (_ BitVec 4))" in text
    assert "(check-sat)" in text and {d.name for d in decls} == {"sx", "sy"}


def test_external_solver_model_is_checked(tmp_path):
    fake = tmp_path / "fake.py"
    fake.write_text("import sys\nsys.stdin.read()\nprint('sat')\nprint('((|sx| #x3))')\n")
    cfg = SolverConfig(node_limit=1, external=f"{sys.executable} {fake}")
    c = [T.cmp("eq", T.binop("mul", X, X, W), 9, W), T.cmp("ne", X, 13, W)]
    st_, m = Solver(cfg).check(c)
    assert st_ == SAT and m[X] == 3
    bad = [T.cmp("eq", T.binop("mul", X, X, W), 4, W), T.cmp("ne", X, 14, W)]
    assert Solver(cfg).check(bad)[0] == UNKNOWN


def test_cache_hits():
    s = Solver(SolverConfig())
    c = [T.cmp("ult", T.binop("add", X, Y, W), 3, W), T.cmp("ult", 5, X, W)]
    s.check(c)
    s.check(c)
    assert s.stats.cache_hits == 1
