import pytest

from faultline import corpus
from faultline.frontend import parse_text, program_text
from faultline.instrument import (TEST, FaultConfig, enumerate_faultable, fix_and_simplify, insert_counters,
                                  instrument)
from faultline.interp import NORMAL, VIOLATION, concrete_run


@pytest.fixture(scope="module")
def pm():
    return corpus.get("print_message").registry()


def test_print_message_sites(pm):
    assert pm.names == [f"fault_{i}" for i in range(6)]
    roles = [s.role for s in pm.sites]
    assert roles == ["for-init", "for-step", "cond", "cond", "init", "arg0"]
    assert pm.site(4).text == "d->msg_size & 255"
    assert "^ fault_4" in program_text(pm.program)


def test_condition_sites_are_bytes(pm):
    for s in pm.sites:
        if s.kind == TEST:
            assert s.expr_type.name == "u8"


def test_test_inversion_model_keeps_only_conditions():
    p = corpus.get("print_message").load()
    r = instrument(p, "test-inversion")
    assert [s.role for s in r.sites] == ["cond", "cond"]
    assert len(enumerate_faultable(p, "data")) == 4


def test_empty_program_has_no_sites():
    assert instrument(parse_text("void main(void) {}")).sites == []


def test_unknown_model_rejected():
    with pytest.raises(ValueError):
        instrument(parse_text("void main(void) {}"), "glitch")


def test_inactive_config_restores_original(pm):
    q = fix_and_simplify(pm, FaultConfig.inactive(pm))
    assert program_text(q) == program_text(pm.original)


def test_fixed_value_becomes_literal(pm):
    q = fix_and_simplify(pm, FaultConfig(frozenset([4]), {2: 1}))
    text = program_text(q)
    assert "^ fault_4" in text and "^ 1" in text
    assert "fault_0" not in text.replace("extern u32 fault_4;", "")


def test_counters_count_evaluations(pm):
    rc = insert_counters(pm)
    t = concrete_run(rc.program, {"d->msg_size": 255})
    assert t.kind == NORMAL
    assert [t.counters[f"fault_{i}_counter"] for i in range(6)] == [1, 256, 257, 256, 1, 256]


def test_fault_injection_by_occurrence(pm):
    t = concrete_run(pm.program, {"d->msg_size": 3}, [(4, 0, 0x100)])
    assert t.kind == VIOLATION and t.assertion == "a0"
    assert t.faults == [(4, 0, 0x100)]
    # an occurrence that never happens leaves the run nominal
    assert concrete_run(pm.program, {"d->msg_size": 3}, [(4, 5, 0x100)]).kind == NORMAL
