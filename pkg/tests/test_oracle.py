import hashlib

import pytest
from hypothesis import assume, given, settings, strategies as st

from typal.errors import ActionError, CapExceeded, EvalError, WriteConflict
from typal.oracle import (
    BoolSemantics, SourceSemantics, StripsSemantics, apply_action, bfs_solve, eval_expr,
    validate_plan,
)
from typal.parser import parse_expr, parse_model
from typal.pipeline import compile_file, compile_text
from typal.randgen import random_model, random_model_text
from typal.syntax import format_model
from typal.typecheck import typecheck, typecheck_expr
from typal.types import IntRange, SetType

from support import DOMAINS

BUCKETS_PLAN = ["fill5", "pour53", "empty3", "pour53", "fill5", "pour53"]


def buckets(small=3, large=5, target=4):
    text = (DOMAINS / "buckets.tp").read_text()
    if (small, large, target) != (3, 5, 4):
        text = (text.replace("b3", "bs").replace("b5", "bl")
                .replace("3", str(small)).replace("5", str(large))
                .replace("bl eq 4", f"bl eq {target}"))
    return typecheck(parse_model(text))


# -- interpreter ---------------------------------------------------------------------

def test_addition():
    assert eval_expr(typecheck_expr(parse_expr("2 add 3"), {}), {}) == 5


def test_set_intersection():
    e = typecheck_expr(parse_expr("a inter b"), {"a": SetType(IntRange(0, 2)),
                                                   "b": SetType(IntRange(0, 2))})
    assert eval_expr(e, {"a": frozenset({0, 1}), "b": frozenset({1, 2})}) == frozenset({1})


def test_inexact_division_is_an_error():
    e = typecheck_expr(parse_expr("x div y"), {"x": IntRange(4, 8), "y": IntRange(2, 4)})
    with pytest.raises(EvalError, match="inexact"):
        eval_expr(e, {"x": 6, "y": 4})
    assert eval_expr(e, {"x": 8, "y": 4}) == 2


# -- actions -------------------------------------------------------------------------

def test_pour_large_into_small():
    assert apply_action(buckets(), {"b3": 0, "b5": 5}, "pour53", ()) == {"b3": 3, "b5": 2}


def test_false_precondition():
    with pytest.raises(ActionError):
        apply_action(buckets(), {"b3": 0, "b5": 0}, "empty3", ())


def test_write_conflict():
    m = typecheck(parse_model("var x: 0..2; init x = 0; goal x eq 1;\n"
                              "action a() pre true eff x := 1; x := 2; end"))
    with pytest.raises(WriteConflict):
        apply_action(m, {"x": 0}, "a", ())


def test_identical_writes_do_not_conflict():
    m = typecheck(parse_model("var x: 0..2; init x = 0; goal x eq 1;\n"
                              "action a() pre true eff x := 1; x := 1; end"))
    assert apply_action(m, {"x": 0}, "a", ()) == {"x": 1}


def test_effects_read_the_pre_state():
    m = typecheck(parse_model("var x: bool; var y: bool; init x = true; init y = false;\n"
                              "goal y; action swap() pre true eff x := y; y := x; end"))
    assert apply_action(m, {"x": True, "y": False}, "swap", ()) == {"x": False, "y": True}


# -- search ----------------------------------------------------------------------------

def test_buckets_plan():
    res = bfs_solve(SourceSemantics(buckets()))
    assert [n for n, _ in res.plan] == BUCKETS_PLAN


def test_goal_true_in_init():
    m = typecheck(parse_model("var x: bool; init x = true; goal x;"))
    res = bfs_solve(SourceSemantics(m))
    assert res.plan == [] and res.solved


def test_unsolvable_buckets():
    res = bfs_solve(SourceSemantics(buckets(2, 4, 3)))
    assert not res.solved and res.plan is None
    assert bfs_solve(SourceSemantics(buckets(2, 4, 2))).solved


def test_cap_is_reported():
    m = buckets()
    with pytest.raises(CapExceeded):
        bfs_solve(SourceSemantics(m), cap=3)


def test_same_plan_at_every_level():
    c = compile_file(DOMAINS / "buckets.tp")
    for sem in (SourceSemantics(c.source), BoolSemantics(c.bool_model)):
        assert [n for n, _ in bfs_solve(sem).plan] == BUCKETS_PLAN
    strips_plan = bfs_solve(StripsSemantics(c.strips)).plan
    assert [n for n, _ in strips_plan if c.strips.action(n).kind == "main"] == BUCKETS_PLAN


# -- validation --------------------------------------------------------------------------

def test_validate_oracle_plan():
    sem = SourceSemantics(buckets())
    v = validate_plan(sem, bfs_solve(sem).plan)
    assert v.ok and str(v) == "VALID, 6 steps"


@pytest.mark.parametrize("dropped, message", [
    (0, "INVALID at step 1: precondition of pour53 does not hold"),
    (3, "INVALID at step 5: goal not reached"),
])
def test_validate_mutated_plan(dropped, message):
    sem = SourceSemantics(buckets())
    plan = bfs_solve(sem).plan
    v = validate_plan(sem, plan[:dropped] + plan[dropped + 1:])
    assert not v.ok and str(v) == message


def test_validate_empty_plan():
    v = validate_plan(SourceSemantics(buckets()), [])
    assert str(v) == "INVALID at step 0: goal not reached"


# -- random models -------------------------------------------------------------------------

def test_random_model_is_reproducible():
    digest = hashlib.sha256(random_model_text(1).encode()).hexdigest()
    assert digest == "df7ac76ff35139840058f4e0b55da8cacc8f66a98a44deb8d7043a1a0ecbd4e4"
    assert random_model_text(1) == format_model(random_model(1))


def test_random_models_are_often_solvable():
    solved = sum(bfs_solve(SourceSemantics(random_model(s))).solved for s in range(100))
    assert solved >= 30


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 1_000_000))
def test_random_model_typechecks_and_plans_validate(seed):
    m = random_model(seed)
    assert m.typed
    sem = SourceSemantics(m)
    try:
        res = bfs_solve(sem, cap=20_000)
    except CapExceeded:
        assume(False)
    if res.solved:
        assert validate_plan(sem, res.plan).ok


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1_000_000))
def test_bool_plans_validate(seed):
    c = compile_text(random_model_text(seed), "r")
    sem = BoolSemantics(c.bool_model)
    try:
        res = bfs_solve(sem, cap=20_000)
    except CapExceeded:
        assume(False)
    if res.solved:
        assert validate_plan(sem, res.plan).ok
