import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csmverify import abp, tl
from csmverify.checker import (
    Labeler,
    MissingBinding,
    Verdict,
    bottom_components,
    check_exists,
    check_forall,
    check_plain,
    format_elapsed,
    render_query,
    render_result,
    run_command,
    run_query,
    run_script,
    sat,
    strongly_connected_components,
)
from csmverify.tl import AF, AG, AU, AX, And, Atom, Const, Implies, InVar, Not, Or, ResolveError, parse_script

from oracles import almost_sure_until, ef, eg, eu, make_graph, path_sat, random_formula, random_graph

P, Q = Atom("p"), Atom("q")


def label(*sets):
    return [frozenset(s) for s in sets]


def test_af_chain():
    g = make_graph([(1,), (1,)], label("", "p"))
    assert sat(g, AF(P)) == {0, 1}


def test_af_branch_may_avoid():
    g = make_graph([(0, 1), (1,)], label("", "p"))
    assert sat(g, AF(P)) == {1}


def test_af_branch_fair():
    g = make_graph([(0, 1), (1,)], label("", "p"))
    assert sat(g, AF(P), fair=True) == {0, 1}


def test_until_is_strong():
    g = make_graph([(0,)], label("p"))
    assert sat(g, AU(P, Q)) == frozenset()
    assert sat(g, AU(P, Q), fair=True) == frozenset()


def test_plain_true():
    g = make_graph([(0,)], label(""))
    v = check_plain(g, Const(True))
    assert v.result and v.violations == ()


def test_forall_and_exists_domains():
    g = make_graph([(1,), (0,)], label("p", ""))
    s = InVar("s")
    assert check_forall(g, "s", [], Const(False)).result
    assert check_exists(g, "s", None, s).result
    empty = check_exists(g, "s", [], Const(True))
    assert not empty.result and empty.violations == ()
    v = check_exists(g, "s", [0, 1], Const(False))
    assert not v.result and v.violations == (0, 1)
    v = check_forall(g, "s", None, Implies(s, P))
    assert not v.result and v.violations == (1,) and v.names == ("N1",)


def test_query_all():
    g = make_graph([(1,), (0,)], label("p", ""))
    rows = run_query(g, "s", Const(True))
    assert rows == [(0, True), (1, True)]
    assert render_query(g, rows) == ["--> FULFILLED FOR STATES:", "ALL"]
    rows = run_query(g, "s", Implies(InVar("s"), P))
    assert render_query(g, rows) == ["--> FULFILLED FOR STATES:", "NOT N1"]


def test_missing_binding():
    g = make_graph([(0,)], label(""))
    with pytest.raises(MissingBinding):
        sat(g, InVar("s"))
    cmd = tl.Command("plain", InVar("s"))
    with pytest.raises(MissingBinding):
        run_command(g, cmd, Labeler(g))


def test_unknown_atom():
    g = make_graph([(0,)], label(""))
    with pytest.raises(ResolveError):
        sat(g, Atom("nosuch"))


@pytest.mark.parametrize(
    "seconds, text",
    [(0.11, "00:00:00/11"), (0.0, "00:00:00/00"), (3661.5, "01:01:01/50"), (0.004, "00:00:00/00"), (59.996, "00:01:00/00")],
)
def test_format_elapsed(seconds, text):
    assert format_elapsed(seconds) == text


def test_render_result():
    assert render_result(Verdict(True, (), 0.11)) == ["--> TRUE", "Evaluation time is 00:00:00/11"]
    assert render_result(Verdict(False, (0,), 0.0)) == ["--> FALSE", "Evaluation time is 00:00:00/00"]


def test_scc():
    g = make_graph([(1,), (0, 2), (3,), (2,), (4,)], label("", "", "", "", ""))
    comps = sorted(map(tuple, strongly_connected_components(g)))
    assert comps == [(0, 1), (2, 3), (4,)]
    assert sorted(map(sorted, bottom_components(g))) == [[2, 3], [4]]


# -- oracle comparisons ---------------------------------------------------------

def _compare(g, f):
    assert sat(g, f) == path_sat(g, f), (g.succ, g.emits, f)


def test_path_oracle_seeded():
    rng = random.Random(7)
    for _ in range(500):
        g = random_graph(rng)
        for _ in range(3):
            _compare(g, random_formula(rng))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_path_oracle(seed):
    rng = random.Random(seed)
    g = random_graph(rng)
    _compare(g, random_formula(rng))


def _laws(g, f, h):
    everything = frozenset(range(len(g)))
    sf, sh = sat(g, f), sat(g, h)
    # dualities against independently coded existential operators
    assert sat(g, AG(f)) == everything - ef(g, everything - sf)
    assert sat(g, AF(f)) == everything - eg(g, everything - sf)
    # A[f U g] = !E[!g U (!f & !g)] & !EG !g
    nf, nh = everything - sf, everything - sh
    assert sat(g, AU(f, h)) == everything - (eu(g, nh, nf & nh) | eg(g, nh))
    # expansion laws
    assert sat(g, AF(f)) == sat(g, Or(f, AX(AF(f))))
    assert sat(g, AU(f, h)) == sat(g, Or(h, And(f, AX(AU(f, h)))))
    assert sat(g, AG(f)) == sat(g, And(f, AX(AG(f))))
    # reflexivity
    assert sf <= sat(g, AF(f))
    assert sat(g, AG(f)) <= sf
    # monotonicity
    if sf <= sh:
        assert sat(g, AF(f)) <= sat(g, AF(h))
    assert sat(g, AF(And(f, h))) <= sat(g, AF(f))
    # plain check agrees with quantification over all states
    assert check_plain(g, f).violations == check_forall(g, "s", None, f).violations
    # quantifier duality
    assert check_exists(g, "s", None, f).result == (not check_forall(g, "s", None, Not(f)).result)


def test_laws_seeded():
    rng = random.Random(11)
    for _ in range(500):
        g = random_graph(rng)
        _laws(g, random_formula(rng, 2), random_formula(rng, 2))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_laws(seed):
    rng = random.Random(seed)
    g = random_graph(rng)
    _laws(g, random_formula(rng, 2), random_formula(rng, 2))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=300, deadline=None)
def test_fair_until_matches_almost_sure(seed):
    rng = random.Random(seed)
    g = random_graph(rng)
    f, h = random_formula(rng, 2), random_formula(rng, 2)
    sf, sh = sat(g, f, fair=True), sat(g, h, fair=True)
    everything = frozenset(range(len(g)))
    assert sat(g, AU(f, h), fair=True) == almost_sure_until(g, sf, sh)
    assert sat(g, AF(h), fair=True) == almost_sure_until(g, everything, sh)
    # next and always do not depend on fairness
    assert sat(g, AX(f), fair=True) == {u for u in g.nodes if all(v in sf for v in g.succ[u])}
    assert sat(g, AG(Atom("p")), fair=True) == sat(g, AG(Atom("p")))
    assert sat(g, AX(Atom("q")), fair=True) == sat(g, AX(Atom("q")))
    # fairness only removes counterexample paths
    assert sat(g, AU(Atom("p"), Atom("q"))) <= sat(g, AU(Atom("p"), Atom("q")), fair=True)


def test_fair_equals_universal_on_deterministic_graphs():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 6)
        g = make_graph([(rng.randrange(n),) for _ in range(n)], [frozenset(a for a in "pq" if rng.random() < 0.4) for _ in range(n)])
        f = random_formula(rng)
        assert sat(g, f) == sat(g, f, fair=True)


# -- bundled variants -----------------------------------------------------------


# Under plain universal path semantics the lossy channels defeat most
# liveness and delivery checks: any state that can branch forever avoids
# progress on some path.  Frozen so a semantics change shows up here.
UNIVERSAL_MISMATCHES = {
    "A": [0, 1, 2, 3, 10, 11, 12, 13, 14, 15, 16, 17, 18],
    "B": [0, 1, 2],
    "C-broken": [],
    "C-fixed": [0, 1, 4],
    "D": [],
}


@pytest.mark.parametrize("variant", list(UNIVERSAL_MISMATCHES))
def test_universal_semantics_record(variant):
    fx = abp.load_variant(variant)
    results = run_script(fx.graph(), fx.script(), fair=False)
    assert [r.index for r in results if not r.matches_expectation] == UNIVERSAL_MISMATCHES[variant]
