import pytest
from hypothesis import assume, given, settings, strategies as st

from typal.errors import CapExceeded, TypalError
from typal.logic import Atom, disj
from typal.oracle import BoolSemantics, StripsSemantics, bfs_solve, reachable, validate_plan
from typal.pddl import fold_plan
from typal.pipeline import PipelineConfig, compile_text
from typal.randgen import random_model
from typal.strips import GOAL_REACHED, P0, eliminate_disjunctions, lower_model
from typal.syntax import format_model

BOOLS = ("var x: bool; var y: bool; var u: bool; var z: bool; var s: bool; var g: bool;\n"
         "init x = false; init y = true; init u = false; init z = true; init s = true;\n"
         "init g = false;\ngoal g;\n")


def lowered(text, m=8):
    return compile_text(text, "t", PipelineConfig(max_params=m)).strips


def effects(a):
    return [(e.cond, e.bit, e.value) for e in a.effects]


def test_single_disjunction():
    s = lowered(BOOLS + "action a() pre x or y eff g := true; end")
    assert s.meta["a"].chain == ["b-a-1", "a"]
    b, a = s.action("b-a-1"), s.action("a")
    w, t1 = "aux-a-w1_1", "aux-a-t1"
    assert (( ("x", True),), w, True) in effects(b)
    assert ((("y", True),), w, True) in effects(b)
    assert set(a.pre) == {(w, True), (t1, True)}
    assert ((), w, False) in effects(a)
    assert w not in s.init


def test_conjunctive_precondition_only_gains_p0():
    s = lowered(BOOLS + "action a() pre x and not y eff g := true; end")
    assert s.meta["a"].chain == ["a"]
    assert s.action("a").pre == (("x", True), ("y", False), (P0, True))


def test_two_disjunctions_share_one_round():
    s = lowered(BOOLS + "action a() pre (x or y) and (u or z) eff g := true; end")
    assert s.meta["a"].chain == ["b-a-1", "a"]
    assert sorted(s.meta["a"].w_table) == ["aux-a-w1_1", "aux-a-w1_2"]


def test_nested_disjunctions_take_two_rounds():
    rounds = eliminate_disjunctions(
        [disj(Atom("x"), Atom("y")) & (Atom("u") | (Atom("z") & (Atom("x") | Atom("s"))))], "p")[1]
    assert [len(r) for r in rounds] == [2, 1]


def test_identical_disjunctions_are_shared():
    _, rounds = eliminate_disjunctions([Atom("x") | Atom("y"), (Atom("x") | Atom("y")) & Atom("z")],
                                       "p")
    assert len(rounds) == 1 and len(rounds[0]) == 1


def test_parameter_decomposition():
    s = lowered("var v: bool; init v = false; goal v;\n"
                "action a(p: array<0..1, <0..1, set<0..2>>>) pre true eff v := true; end")
    assert s.meta["a"].param_bits["p"] == [
        "?p_0_1_0", "?p_0_1_1", "?p_0_2_0", "?p_0_2_1", "?p_0_2_2",
        "?p_1_1_0", "?p_1_1_1", "?p_1_2_0", "?p_1_2_1", "?p_1_2_2"]
    s = lowered("var v: bool; init v = false; goal v;\n"
                "action a(p: bool) pre true eff v := p; end")
    assert s.meta["a"].param_bits["p"] == ["?p"]


def test_range_parameter_gets_exactly_one_constraint():
    c = compile_text("var v: 0..3; init v = 0; goal v eq 2;\n"
                     "action a(p: 0..3) pre true eff v := p; end")
    ba = c.bool_model.action("a")
    assert ba.param_bits == ["?p_0", "?p_1", "?p_2", "?p_3"]
    sem = BoolSemantics(c.bool_model)
    assert sorted(sem.bindings(ba, c.bool_model.init)) == sorted(
        tuple(i == k for i in range(4)) for k in range(4))


def test_parameter_literals_are_fixed():
    s = lowered(BOOLS + "action a(p: bool, q: bool) pre p and not q and s eff g := true; end")
    a = s.action("a")
    assert a.params == []
    assert a.pre == (("s", True), (P0, True))
    assert s.meta["a"].sources == {"?p": True, "?q": False}


def test_split_into_three_steps():
    s = lowered("var v: set<0..19>; init v = {}; goal 3 in v;\n"
                "action a(p: set<0..19>) pre true eff v := p; end")
    chain = s.meta["a"].chain
    assert chain == ["c-a-1", "c-a-2", "c-a-3", "a"]
    assert [len(s.action(n).params) for n in chain] == [8, 8, 4, 0]
    assert max(2 ** len(s.action(n).params) for n in chain) == 256


def test_small_action_is_not_split():
    s = lowered("var v: set<0..2>; init v = {}; goal 1 in v;\n"
                "action a(p: set<0..2>) pre true eff v := p; end")
    assert s.meta["a"].chain == ["a"]
    assert len(s.action("a").params) == 3


def test_max_params_must_be_positive():
    c = compile_text("var v: bool; init v = false; goal v;")
    with pytest.raises(TypalError):
        lower_model(c.bool_model, 0)


def test_impossible_action_is_dropped():
    s = lowered("var v: 0..1; init v = 0; goal v eq 1;\n"
                "action a() pre v eq 2 eff v := 1; end")
    assert s.actions == [] and s.meta == {}


def test_disjunctive_goal_gets_a_chain():
    s = lowered("var x: bool; var y: bool; init x = false; init y = false;\n"
                "goal x or y;\naction a() pre true eff y := true; end")
    assert s.goal == ((GOAL_REACHED, True),)
    assert s.goal_chain == ["goal-b-1", "goal-finish"]
    res = bfs_solve(StripsSemantics(s))
    assert [n for n, _ in res.plan] == ["a", "goal-b-1", "goal-finish"]


def test_false_goal_is_unreachable():
    s = lowered("var x: 0..1; init x = 0; goal x eq 2;\naction a() pre true eff x := 1; end")
    assert s.goal == ((GOAL_REACHED, True),) and s.goal_chain == []
    assert not bfs_solve(StripsSemantics(s)).solved


# -- properties over random models --------------------------------------------------

def _compiled(seed, m=8):
    return compile_text(format_model(random_model(seed)), "r", PipelineConfig(max_params=m))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 8))
def test_structure_after_lowering(seed, m):
    s = _compiled(seed, m).strips
    names = {a.name for a in s.actions}
    for a in s.actions:
        assert len(a.params) <= m
        params = set(a.params)
        assert not any(n in params for n, _ in a.pre)
        for n, v in a.pre:
            assert isinstance(n, str) and isinstance(v, bool)
        for e in a.effects:
            assert all(isinstance(v, bool) for _, v in e.cond)
            assert e.bit in s.bits
    for info in s.meta.values():
        assert set(info.chain) <= names
        for bits in info.param_bits.values():
            for b in bits:
                src = info.sources[b]
                assert isinstance(src, bool) or b in s.action(src).params


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_turnstiles_mutually_exclusive(seed):
    s = _compiled(seed).strips
    try:
        states = reachable(StripsSemantics(s), cap=20_000)
    except CapExceeded:
        assume(False)
    tokens = set(s.turnstiles)
    for state in states:
        assert len(tokens & state) <= 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 4))
def test_plans_correspond_across_levels(seed, m):
    c = _compiled(seed, m)
    try:
        bool_res = bfs_solve(BoolSemantics(c.bool_model), cap=20_000)
        strips_res = bfs_solve(StripsSemantics(c.strips), cap=200_000)
    except CapExceeded:
        assume(False)
    assert bool_res.solved == strips_res.solved
    if not strips_res.solved:
        return
    folded = fold_plan(strips_res.plan, c.strips.meta, c.strips.goal_chain)
    bool_plan = [(n, tuple(bits[b] for b in c.bool_model.action(n).param_bits))
                 for n, bits in folded]
    assert validate_plan(BoolSemantics(c.bool_model), bool_plan).ok
    assert len(bool_plan) == len(bool_res.plan)
