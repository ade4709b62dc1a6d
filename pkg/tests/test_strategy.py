import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultline import corpus
from faultline.errors import SchemaMismatch, StrategyError
from faultline.selection import select_by_dependency
from faultline.strategy import Strategy


@st.composite
def strategies(draw):
    ids = draw(st.sets(st.integers(0, 40), max_size=8))
    pinned = draw(st.sets(st.integers(41, 60), max_size=3))
    fixed = {i: draw(st.integers(0, 2**32 - 1)) for i in pinned}
    prov = draw(st.lists(st.tuples(st.sampled_from(["deps", "prove", "grow"]), st.integers(0, 50),
                                   st.integers(0, 50), st.floats(0, 100, allow_nan=False)).map(list), max_size=3))
    return Strategy(tuple(ids), fixed, draw(st.sampled_from(["data", "test-inversion", "both"])),
                    draw(st.integers(0, 4)), complete=draw(st.booleans()), provenance=prov)


@settings(max_examples=150, deadline=None)
@given(strategies())
def test_round_trip(s):
    assert Strategy.loads(s.dumps()) == s


def test_selection_to_strategy_and_back(tmp_path):
    r = corpus.get("print_message").registry()
    s = Strategy.from_selection(select_by_dependency(r), model=r.model)
    path = tmp_path / "s.yaml"
    s.save(path)
    back = Strategy.load(path, r)
    assert back.sites == (0, 1, 2, 3, 4)
    assert back.config().symbolic == frozenset(range(5))


def test_version_mismatch():
    with pytest.raises(SchemaMismatch):
        Strategy.loads('version: "0.3"\nsites: [fault_1]\n')


@pytest.mark.parametrize("text", [
    'version: "1.0"\nsites: [fault_x]\n',
    'version: "1.0"\nsites: [fault_1]\nfixd: {}\n',
    'version: "1.0"\nmodel: bitflip\n',
    'version: "1.0"\nsites: [fault_1]\nfixed: {fault_1: 3}\n',
    '- just a list\n',
])
def test_malformed(text):
    with pytest.raises(StrategyError):
        Strategy.loads(text)


def test_unknown_site_for_registry():
    r = corpus.get("print_message").registry()
    with pytest.raises(StrategyError):
        Strategy((0, 99), model=r.model).check(r)
    with pytest.raises(StrategyError):
        Strategy((0,), model="test-inversion").check(r)
