import pytest
from hypothesis import HealthCheck, given, settings

from faultline import ast as A
from faultline import corpus
from faultline.errors import ParseError, TypeCheckError
from faultline.frontend import generate_rte_assertions, lower_program, parse_text, program_text

from progs import program


@pytest.mark.parametrize("name", corpus.names())
def test_corpus_parses_and_prints_stably(name):
    p = corpus.get(name).load()
    text = program_text(p)
    assert program_text(parse_text(text)) == text


@pytest.mark.parametrize("src, err", [
    ("void f(void) { x = 1; }", TypeCheckError),
    ("void f(void) { u32 x = ; }", ParseError),
    ("void f(void) { u32 x; x = y(); }", TypeCheckError),
    ("void f(void) { u32 x = 1 @ 2; }", ParseError),
])
def test_rejects_bad_source(src, err):
    with pytest.raises(err):
        parse_text(src)


def test_error_carries_location():
    with pytest.raises(TypeCheckError) as e:
        parse_text("void f(void)\n{\n    x = 1;\n}", path="t.fic")
    assert str(e.value).startswith("t.fic:3:")


def test_assertion_comments_are_numbered_in_order():
    p = parse_text("void f(u32 a) {\n //@ assert a > 1;\n a = a + 1;\n //@ assert a != 0;\n}")
    assert [a.id for a in p.assertions] == ["a0", "a1"]


def test_entry_defaults_to_main_else_last_function():
    assert parse_text("void a(void) {}\nvoid main(void) {}\nvoid b(void) {}").entry == "main"
    assert parse_text("void a(void) {}\nvoid b(void) {}").entry == "b"


def test_preprocessor_selects_branch():
    src = "#define K 3\nu32 g;\nvoid main(void) {\n#ifdef FIX\n g = K;\n#else\n g = 1;\n#endif\n}"
    plain, fixed = parse_text(src), parse_text(src, defines={"FIX"})
    assert "g = 1;" in program_text(plain)
    assert "g = 3;" in program_text(fixed)


def test_sym_input_bounds_are_recorded():
    p = parse_text('void main(void) { u32 a = __sym_input_u32("a", 2, 5); }')
    found = [x for f in p.functions for s in A.walk_stmts(f.body) for e in A.stmt_exprs(s)
             for x in A.walk_expr(e) if isinstance(x, A.SymInput)]
    assert [(x.name, x.lo, x.hi) for x in found] == [("a", 2, 5)]


def test_rte_assertions_guard_subscripts():
    p = parse_text("u8 t[4];\nvoid main(u32 i) { t[i] = 1; }")
    q = generate_rte_assertions(p)
    assert len(q.assertions) == len(p.assertions) + 1


@settings(max_examples=40, deadline=None, suppress_health_check=list(HealthCheck))
@given(program())
def test_random_programs_print_and_lower(src):
    p = parse_text(src)
    text = program_text(p)
    assert program_text(parse_text(text)) == text
    cfgs = lower_program(p)
    assert set(cfgs) == {f.name for f in p.functions}
