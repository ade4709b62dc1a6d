import pytest

from faultline import corpus
from faultline.errors import MultiFaultContext, NonTerminating, UnknownAssertion
from faultline.frontend import parse_text
from faultline.instrument import instrument
from faultline.selection import (all_sites, brute_force_filter, count_occurrences, eliminate_proven,
                                 filter_by_occurrence, make_runner, select_by_dependency, strategy_shrink)


@pytest.fixture(scope="module")
def pm():
    e = corpus.get("print_message")
    return e, e.registry()


def _check_chain(sel):
    sizes = [(b, a) for _, b, a, _ in sel.steps]
    assert all(a <= b for b, a in sizes)
    assert all(sel.provenance.get(s) for s in sel.sites)


def test_pipeline_is_monotone_with_provenance(pm):
    e, r = pm
    sel = all_sites(r)
    deps = select_by_dependency(r)
    assert set(deps.sites) <= set(sel.sites)
    pr = eliminate_proven(deps, r)
    bf = brute_force_filter(pr, r)
    assert set(bf.sites) <= set(pr.sites) <= set(deps.sites)
    _check_chain(bf)
    assert bf.complete


def test_occurrence_limits(pm):
    e, r = pm
    occ = count_occurrences(r, e.count_inputs)
    assert filter_by_occurrence(all_sites(r), occ, 1).sites == (0, 4)
    assert filter_by_occurrence(all_sites(r), occ, 0).sites == ()
    assert not filter_by_occurrence(all_sites(r), occ, 1).complete


def test_multi_fault_context(pm):
    _, r = pm
    with pytest.raises(MultiFaultContext):
        brute_force_filter(all_sites(r), r, max_faults=2)
    with pytest.raises(MultiFaultContext):
        strategy_shrink(all_sites(r), make_runner(r, 2), max_faults=2)


def test_unknown_assertion_target(pm):
    _, r = pm
    with pytest.raises(UnknownAssertion):
        select_by_dependency(r, targets=["a42"])


def test_non_terminating_count():
    r = instrument(parse_text("void main(u32 x) {\n while (x < 5) x = x * 1;\n //@ assert x != 9;\n}"))
    with pytest.raises(NonTerminating):
        count_occurrences(r, {"x": 0}, step_limit=10_000)


def test_shrink_drops_the_exploding_site_first():
    r = corpus.get("exploding").registry()
    bound = next(s.id for s in r.sites if s.role == "init" and s.text == "3")
    shrunk = strategy_shrink(all_sites(r), make_runner(r, 1), run_budget=2.0)
    assert bound not in shrunk.sites
    assert shrunk.steps[-1][0] == "shrink" and not shrunk.complete


def test_no_assertions_gives_empty_dependency_selection():
    r = instrument(parse_text("void main(u32 x) {\n u32 y = x + 1;\n __print(y);\n}"))
    assert select_by_dependency(r).sites == ()
