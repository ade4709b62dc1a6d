import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultline import ast as A
from faultline import absint as AI
from faultline import corpus
from faultline import semantics as S
from faultline.absint import PROVEN, analyze
from faultline.depgraph import build_pdg, dependent_sites
from faultline.errors import UnknownAssertion
from faultline.frontend import parse_text
from faultline.instrument import FaultConfig, instrument

TYPES = [A.U8, A.I8, A.U32, A.I32]


@st.composite
def interval_and_point(draw, ty):
    a = draw(st.integers(ty.min, ty.max))
    b = draw(st.integers(ty.min, ty.max))
    lo, hi = min(a, b), max(a, b)
    return (lo, hi), draw(st.integers(lo, hi))


@settings(max_examples=400, deadline=None)
@given(st.data(), st.sampled_from(TYPES), st.sampled_from(["+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>"]))
def test_interval_arith_contains_concrete(data, ty, op):
    ia, x = data.draw(interval_and_point(ty))
    ib, y = data.draw(interval_and_point(ty))
    r = AI.arith(op, ia, ib, ty)
    v = S.arith(op, x, y, ty)
    assert r[0] <= v <= r[1]


@settings(max_examples=300, deadline=None)
@given(st.data(), st.sampled_from(TYPES), st.sampled_from(["==", "!=", "<", "<=", ">", ">="]))
def test_interval_compare_contains_concrete(data, ty, op):
    ia, x = data.draw(interval_and_point(ty))
    ib, y = data.draw(interval_and_point(ty))
    r = AI.compare(op, ia, ib)
    assert r[0] <= S.compare(op, x, y) <= r[1]


@settings(max_examples=300, deadline=None)
@given(st.integers(-(1 << 33), 1 << 33), st.integers(0, 300), st.sampled_from(TYPES))
def test_convert_is_sound(lo, span, ty):
    hi = lo + span
    r = AI.convert((lo, hi), ty)
    for v in (lo, hi, (lo + hi) // 2):
        assert r[0] <= ty.wrap(v) <= r[1]


def test_assertion_proven_without_faults():
    p = parse_text("void main(u32 x) {\n u32 t = x & 15;\n //@ assert t < 16;\n}")
    r = instrument(p)
    assert analyze(r.program, FaultConfig.inactive(r)).status("a0") == PROVEN
    # with the mask faulted the bound no longer holds
    assert analyze(r.program, FaultConfig.all_symbolic(r)).status("a0") != PROVEN


def test_loop_counter_bound():
    r = corpus.get("print_message").registry()
    from faultline.instrument import insert_counters
    rc = insert_counters(r)
    a = analyze(rc.program, FaultConfig.inactive(r))
    assert a.counter_max["fault_4_counter"][1] == 1


def test_dependency_closure_follows_calls():
    src = """
u32 g;
u32 twice(u32 v) { return v + v; }
void main(u32 x) {
    u32 unused = x * 3;
    g = twice(x);
    //@ assert g != 7;
    __print(unused);
}"""
    r = instrument(parse_text(src))
    g = build_pdg(r.program, analyze(r.program, FaultConfig.all_symbolic(r)))
    sites = dependent_sites(g, ["a0"], r)
    texts = {r.site(s).text for s in sites}
    assert "v + v" in texts and "x" in texts
    assert "x * 3" not in texts


def test_unknown_assertion():
    r = corpus.get("print_message").registry()
    g = build_pdg(r.program, analyze(r.program, FaultConfig.all_symbolic(r)))
    with pytest.raises(UnknownAssertion):
        dependent_sites(g, ["a9"], r)


def test_control_dependence_included():
    src = "u32 g;\nvoid main(u32 x) {\n if (x > 3) g = 1;\n //@ assert g == 0;\n}"
    r = instrument(parse_text(src))
    g = build_pdg(r.program, analyze(r.program, FaultConfig.all_symbolic(r)))
    roles = {r.site(s).role for s in dependent_sites(g, ["a0"], r)}
    assert roles == {"cond", "assign"}
