import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultline import corpus
from faultline.errors import ReplayMismatch
from faultline.frontend import parse_text
from faultline.instrument import FaultConfig, instrument
from faultline.symex.engine import EarlyTrace, EarlyTraces, explore, replay

PM_INPUTS = {"d->msg_size": 258}


@pytest.fixture(scope="module")
def pm():
    return corpus.get("print_message").registry()


def test_zero_faults_finds_nothing_on_safe_program(pm):
    res = explore(pm, max_faults=0, budget=60, inputs=PM_INPUTS)
    assert res.attacks == [] and res.complete
    assert all(v == [0] for v in res.table.to_dict()["rows"].values())


def test_single_fault_attack_and_replay(pm):
    res = explore(pm, FaultConfig(frozenset([4])), max_faults=1, budget=60, inputs=PM_INPUTS)
    (ap,) = res.attacks
    assert ap.signature == ("a0", (4,), 1)
    assert ap.input_model["d->msg_size"] == 258
    replay(ap, res.program)
    # tampering with the fault set breaks the replay
    bad = dataclasses.replace(ap, faults=())
    with pytest.raises(ReplayMismatch):
        replay(bad, res.program)


def test_dfs_is_deterministic(pm):
    a = explore(pm, max_faults=1, budget=60, inputs=PM_INPUTS)
    b = explore(pm, max_faults=1, budget=60, inputs=PM_INPUTS)
    assert a.table == b.table
    assert [x.faults for x in a.attacks] == [x.faults for x in b.attacks]


def test_bfs_finds_the_same_signatures():
    r = corpus.get("verifypin_basic").registry()
    d = explore(r, max_faults=2, budget=120, search="dfs")
    b = explore(r, max_faults=2, budget=120, search="bfs")
    assert d.signatures == b.signatures


def test_bad_arguments(pm):
    with pytest.raises(ValueError):
        explore(pm, max_faults=-1)
    with pytest.raises(ValueError):
        explore(pm, search="random")


def test_budget_exhaustion_is_incomplete():
    r = corpus.get("exploding").registry()
    res = explore(r, max_faults=1, budget=1.0)
    assert res.timed_out and not res.complete
    assert res.early and res.early.trigger_counts()


def test_unroll_limit_records_early_traces():
    src = "void main(u32 n) {\n u32 i;\n u32 s = 0;\n for (i = 0; i < n; i++) s = s + 1;\n //@ assert s != 5000;\n}"
    r = instrument(parse_text(src))
    res = explore(r, max_faults=0, budget=60, unroll_limit=16)
    assert not res.attacks
    assert any(t.reason == "unroll" for t in res.early)
    assert not res.complete


def test_domain_bounds_respected():
    src = 'void main(void) {\n u32 a = __sym_input_u32("a", 10, 12);\n //@ assert a != 11;\n}'
    res = explore(instrument(parse_text(src)), max_faults=0)
    (ap,) = res.attacks
    assert ap.input_model == {"a": 11} and ap.fault_count == 0


def test_path_continues_after_a_violation():
    src = "u32 g;\nvoid main(u32 x) {\n g = x & 1;\n //@ assert g != 2;\n //@ assert g != 4;\n}"
    res = explore(instrument(parse_text(src)), max_faults=1)
    assert sorted(res.signatures) == [("a0", (0,), 1), ("a1", (0,), 1)]
    assert len(res.attacks) == 2


def test_violation_is_assumed_away_afterwards():
    src = "u32 g;\nvoid main(u32 x) {\n g = x & 1;\n //@ assert g < 2;\n //@ assert g < 3;\n}"
    res = explore(instrument(parse_text(src)), max_faults=1)
    assert sorted(res.signatures) == [("a0", (0,), 1)]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.builds(EarlyTrace, st.sampled_from(["budget", "unroll"]),
                          st.dictionaries(st.integers(0, 9), st.integers(1, 5)), st.integers(0, 99)), max_size=5))
def test_early_traces_round_trip(traces):
    et = EarlyTraces(traces)
    assert EarlyTraces.loads(et.dumps()) == et
