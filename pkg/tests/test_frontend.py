import itertools

import pytest
from hypothesis import given, settings, strategies as st

from typal.adt import lower_expr, lower_records_unions, lower_type
from typal.booleanize import width
from typal.errors import EvalError, ParseError, TypeCheckError
from typal.oracle import eval_expr
from typal.parser import parse_expr, parse_model, parse_type
from typal.randgen import random_expr, random_model, random_model_text
from typal.syntax import BinOp, TupleAccess, format_model, walk
from typal.typecheck import typecheck, typecheck_expr
from typal.types import (
    BOOL, EnumType, IntRange, RecordType, TupleType, UnionType, domain_of, value_fits,
)

from support import DOMAINS


# -- parsing -----------------------------------------------------------------

def test_minimal_program():
    m = parse_model("var b: 0..5; init b = 0; goal b eq 4;\n"
                    "action fill() pre true eff b := 5; end")
    assert [(d.name, d.type) for d in m.vars] == [("b", IntRange(0, 5))]
    assert len(m.actions) == 1


def test_empty_input_is_rejected():
    with pytest.raises(ParseError) as info:
        parse_model("")
    assert "expected declaration" in str(info.value)
    assert info.value.pos == (1, 1)


def test_syntax_error_reports_position_and_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse_model("var x: ;")
    assert info.value.pos == (1, 8)
    assert "INT" in info.value.expected


def test_buckets_shape():
    m = parse_model((DOMAINS / "buckets.tp").read_text())
    assert len(m.vars) == 2
    assert [a.name for a in m.actions] == ["fill3", "fill5", "empty3", "empty5", "pour35", "pour53"]


def test_operator_precedence():
    e = parse_expr("a or b and not c eq d add e mul f")
    assert isinstance(e, BinOp) and e.op == "or"
    rhs = e.right
    assert rhs.op == "and"
    cmp = rhs.right.arg
    assert cmp.op == "eq" and cmp.right.op == "add" and cmp.right.right.op == "mul"


def test_comments_and_types():
    t = parse_type("array<<1..2, {a, b}>, set<[x: bool, y: 0..1]>>  # trailing")
    assert str(t) == "array<<1..2, {a, b}>, set<[x: bool, y: 0..1]>>"


# -- typechecking --------------------------------------------------------------

@pytest.mark.parametrize("src, env, expected", [
    ("v1 add v2", {"v1": IntRange(0, 1), "v2": IntRange(0, 2)}, IntRange(0, 3)),
    ("v1 sub v2", {"v1": IntRange(0, 1), "v2": IntRange(0, 2)}, IntRange(-2, 1)),
    ("v1 mul v2", {"v1": IntRange(0, 2), "v2": IntRange(1, 3)}, IntRange(0, 6)),
    ("x div y", {"x": IntRange(4, 8), "y": IntRange(2, 4)}, IntRange(1, 4)),
])
def test_range_widening(src, env, expected):
    assert typecheck_expr(parse_expr(src), env).type == expected


def test_type_mismatch():
    with pytest.raises(TypeCheckError):
        typecheck_expr(parse_expr("3 eq true"), {})


def test_division_never_defined():
    with pytest.raises(TypeCheckError, match="division never defined"):
        typecheck_expr(parse_expr("x div y"), {"x": IntRange(1, 1), "y": IntRange(0, 0)})


@pytest.mark.parametrize("src, message", [
    ("var x: bool; init x = true; goal y;", "unknown identifier"),
    ("var x: <bool, bool>; init x = <true, true>; goal x.3;", "tuple index 3 out of range"),
    ("var x: {a: bool}; init x = {a: true}; goal x.b;", "field"),
    ("var x: [a: bool]; init x = a(true); goal x as b;", "tag"),
    ("var x: array<0..1, bool>; init x = [true, false]; goal x[true];", "index"),
    ("type t = <t, bool>; var x: t; init x = <true, true>; goal true;", "recursive"),
    ("var x: bool; goal x;", "initial value"),
])
def test_typecheck_errors(src, message):
    with pytest.raises(TypeCheckError, match=message):
        typecheck(parse_model(src))


# -- record and union lowering --------------------------------------------------

def test_record_lowers_to_sorted_tuple():
    t = RecordType((("x", BOOL), ("a", IntRange(0, 1))))
    assert lower_type(t) == TupleType((IntRange(0, 1), BOOL))
    e = typecheck_expr(parse_expr("r.x"), {"r": t})
    low = lower_expr(e)
    assert isinstance(low, TupleAccess) and low.index == 2


def test_union_lowers_to_tag_plus_payloads():
    t = parse_type("[email: 0..3, phone: 0..7]")
    assert isinstance(t, UnionType)
    assert lower_type(t) == TupleType((EnumType(("email", "phone")), IntRange(0, 3),
                                       IntRange(0, 7)))


def test_model_without_adts_is_unchanged():
    m = typecheck(parse_model((DOMAINS / "buckets.tp").read_text()))
    assert lower_records_unions(m) == m


def test_union_construct_fills_inactive_slot_with_first_value():
    m = typecheck(parse_model(
        "var u: [a: 2..3, b: bool]; init u = b(true); goal u is a;\n"
        "action mk() pre true eff u := a(3); end"))
    low = lower_records_unions(m)
    assert low.var_types()["u"] == TupleType((EnumType(("a", "b")), IntRange(2, 3), BOOL))
    assert low.init_map()["u"] == ("b", 2, True)
    value = low.actions[0].effects[0].value
    assert eval_expr(value, {}) == ("a", 3, False)


# -- properties -------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_print_parse_fixpoint(seed):
    text = random_model_text(seed)
    once = parse_model(text)
    assert parse_model(format_model(once)) == once


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_lowering_preserves_widths_and_retypechecks(seed):
    m = random_model(seed)
    low = lower_records_unions(m)
    assert typecheck(parse_model(format_model(low))).var_types() == low.var_types()
    for a, b in zip(m.actions, low.actions):
        for p, q in zip(a.params, b.params):
            assert width(lower_type(p.type)) == width(q.type)
        for e1, e2 in zip(a.effects, b.effects):
            assert width(lower_type(e1.value.type)) == width(e2.value.type)
            assert width(lower_type(e1.target.type)) == width(e2.target.type)
    for name, t in m.var_types().items():
        assert width(lower_type(t)) == width(low.var_types()[name])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000))
def test_arithmetic_never_overflows(seed):
    e, env = random_expr(seed, max_width=10, depth=3)
    names = sorted(env)
    arith = [n for n in walk(e) if isinstance(n, BinOp) and n.op in ("add", "sub", "mul", "div")]
    if not arith:
        return
    for combo in itertools.product(*(domain_of(env[n]) for n in names)):
        values = dict(zip(names, combo))
        for node in arith:
            try:
                v = eval_expr(node, values)
            except EvalError:
                continue
            assert value_fits(v, node.type)
