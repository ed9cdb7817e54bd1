import pytest
from hypothesis import assume, given, settings, strategies as st

from typal.errors import CapExceeded, PlanError
from typal.oracle import StripsSemantics, bfs_solve
from typal.pddl import (
    REQUIREMENTS, PddlInterpreter, format_plan, parse_plan, parse_sexpr, reconstruct_plan,
)
from typal.pipeline import PipelineConfig, compile_file, compile_text
from typal.randgen import random_model_text
from typal.strips import load_meta

from support import DOMAINS

SET_X = "var x: bool; init x = false; goal x;\naction set_x() pre true eff x := true; end"


def actions_of(domain_text):
    return {item[1]: dict(zip(item[2::2], item[3::2]))
            for item in parse_sexpr(domain_text)[2:] if item[0] == ":action"}


def test_single_bit_domain():
    doc = compile_text(SET_X, "one").pddl()
    assert REQUIREMENTS in doc.domain
    assert "(x)" in doc.domain
    act = actions_of(doc.domain)["set_x"]
    assert ["x"] in act[":effect"]
    assert "(:objects btrue bfalse - boolval)" in doc.problem
    assert "(istrue btrue)" in doc.problem


def test_parameter_bits_become_boolval_parameters():
    doc = compile_text("var x: bool; var y: bool; init x = false; init y = false; goal x and y;\n"
                       "action a(p0: bool, p1: bool) pre true eff x := p0; y := p1; end",
                       "two").pddl()
    act = actions_of(doc.domain)["a"]
    assert act[":parameters"] == ["?p0", "?p1", "-", "boolval"]
    assert ["when", ["istrue", "?p0"], ["x"]] in act[":effect"]
    assert "(when (not (istrue ?p1)) (not (y)))" in doc.domain


def test_buckets_emission():
    c = compile_file(DOMAINS / "buckets.tp")
    doc = c.pddl()
    preds = parse_sexpr(doc.domain)[4]
    assert preds[0] == ":predicates"
    names = [p[0] for p in preds[2:]]
    assert [n for n in names if n.startswith("b3_")] == [f"b3_{i}" for i in range(4)]
    assert [n for n in names if n.startswith("b5_")] == [f"b5_{i}" for i in range(6)]
    assert len(actions_of(doc.domain)) == len(c.strips.actions)
    assert sorted(a.name for a in c.strips.actions if a.kind == "main") == sorted(
        ["fill3", "fill5", "empty3", "empty5", "pour35", "pour53"])


def test_emission_is_deterministic():
    a = compile_file(DOMAINS / "trucks_set.tp").pddl()
    b = compile_file(DOMAINS / "trucks_set.tp").pddl()
    assert a == b


# -- plan files ----------------------------------------------------------------------

def test_parse_plan_lines():
    assert parse_plan("(fill5)\n") == [("fill5", ())]
    assert parse_plan("; comment\n\n(c-a-1 btrue bfalse)  ; trailing\n") == [
        ("c-a-1", (True, False))]


def test_parse_plan_against_model():
    s = compile_file(DOMAINS / "buckets.tp").strips
    assert parse_plan("(FILL5)", s) == [("fill5", ())]
    with pytest.raises(PlanError, match="unknown action"):
        parse_plan("(nosuch)", s)
    with pytest.raises(PlanError, match="expects 0 arguments"):
        parse_plan("(fill5 btrue)", s)
    with pytest.raises(PlanError, match="unknown object"):
        parse_plan("(fill5 maybe)")


def test_format_and_parse_round_trip():
    plan = [("a", (True, False)), ("b", ())]
    assert parse_plan(format_plan(plan)) == plan


# -- reconstruction ----------------------------------------------------------------

def test_reconstruct_without_auxiliaries():
    c = compile_text("var x: bool; var y: bool; init x = false; init y = false; goal x and y;\n"
                     "action sx() pre true eff x := true; end\n"
                     "action sy() pre x eff y := true; end")
    assert all(info.chain == [name] for name, info in c.strips.meta.items())
    plan = bfs_solve(StripsSemantics(c.strips)).plan
    assert plan == [("sx", ()), ("sy", ())]
    assert reconstruct_plan(plan, c.strips.meta) == [("sx", ()), ("sy", ())]


def test_reconstruct_split_chain():
    c = compile_text("var s: set<0..2>; init s = {}; goal s eq {0, 2};\n"
                     "action a(p: set<0..2>) pre true eff s := p; end",
                     config=PipelineConfig(max_params=1))
    plan = bfs_solve(StripsSemantics(c.strips)).plan
    assert plan == [("c-a-1", (True,)), ("c-a-2", (False,)), ("c-a-3", (True,)), ("a", ())]
    meta, goal_chain = load_meta(c.strips.meta_json())
    assert reconstruct_plan(plan, meta, goal_chain) == [("a", (frozenset({0, 2}),))]


def test_broken_chain():
    c = compile_text("var s: set<0..2>; init s = {}; goal s eq {0, 2};\n"
                     "action a(p: set<0..2>) pre true eff s := p; end",
                     config=PipelineConfig(max_params=1))
    plan = [("c-a-2", (False,)), ("c-a-1", (True,)), ("c-a-3", (True,)), ("a", ())]
    with pytest.raises(PlanError, match="broken chain"):
        reconstruct_plan(plan, c.strips.meta)
    with pytest.raises(PlanError, match="ends inside"):
        reconstruct_plan(plan[1:2], c.strips.meta)


def test_reconstruct_rejects_invalid_parameter_bits():
    c = compile_text("var v: 0..3; init v = 0; goal v eq 2;\n"
                     "action a(p: 0..3) pre true eff v := p; end")
    info = c.strips.meta["a"]
    plan = [(step, tuple(True for _ in c.strips.action(step).params)) for step in info.chain]
    with pytest.raises(PlanError, match="exactly-one"):
        reconstruct_plan(plan, c.strips.meta)


# -- the emitted text means what the model means ------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_interpreter_trace_matches_model(seed):
    c = compile_text(random_model_text(seed), "r")
    sem = StripsSemantics(c.strips)
    try:
        res = bfs_solve(sem, cap=50_000)
    except CapExceeded:
        assume(False)
    assume(res.solved)
    doc = c.pddl()
    interp = PddlInterpreter(doc.domain, doc.problem)
    states = [sem.init()]
    for step in res.plan:
        states.append(sem.apply(states[-1], step))
    lowered = [frozenset(b.lower() for b in s) for s in states]
    assert interp.trace(res.plan) == lowered
    assert interp.is_goal(lowered[-1])
