import pytest

from faultline import ast as A
from faultline import corpus
from faultline.frontend import parse_text
from faultline.instrument import FaultConfig, instrument
from faultline.interp import VIOLATION, concrete_run
from faultline.oracle import declared_domains, fault_values, oracle


def test_declared_domains():
    r = corpus.get("unfeasible").registry()
    assert declared_domains(r.program) == {"a": (0, 3), "b": (0, 3)}


def test_fault_values():
    assert fault_values(A.U8, "test-condition", "test-inversion") == [1]
    assert fault_values(A.U32, "data", "both") == [1, 0xFFFFFFFF]


def test_mask_attack_and_witness_replays():
    e = corpus.get("print_message")
    r = e.registry()
    o = oracle(r, max_faults=1, inputs=e.inputs)
    assert ("a0", (4,), 1) in o.signatures
    env, faults = o.witnesses[("a0", (4,), 1)]
    tr = concrete_run(r.program, env, faults)
    assert tr.kind == VIOLATION and tr.assertion == "a0"


def test_zero_faults_is_safe():
    e = corpus.get("print_message")
    assert oracle(e.registry(), max_faults=0, inputs=e.inputs).signatures == set()


def test_strategy_restricts_sites():
    e = corpus.get("print_message")
    r = e.registry()
    o = oracle(r, FaultConfig(frozenset([0, 1])), max_faults=1, inputs=e.inputs)
    assert all(set(s[1]) <= {0, 1} for s in o.signatures)


def test_input_limit():
    src = "void main(void) {\n u32 a = __sym_input_u32(\"a\", 0, 100000);\n //@ assert a != 3;\n}"
    with pytest.raises(ValueError):
        oracle(instrument(parse_text(src)), max_faults=0, input_limit=1000)
