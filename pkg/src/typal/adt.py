"""Lower records and unions to tuples.

A record becomes the tuple of its fields in name order.  A union with ``n``
alternatives becomes an ``n+1``-tuple: an enum over the tags followed by one
payload slot per alternative.  Payload slots are never shared.
"""

from __future__ import annotations

import dataclasses
from typing import Any

from .syntax import (
    Action, BinOp, EnumConst, Effect, Expr, FieldAccess, Index, Lit, Not, Param, SetLit,
    SourceModel, TagAccess, TagConstruct, TagTest, TupleAccess, TupleLit, VarDecl,
)
from .types import (
    BOOL, ArrayType, EnumType, RecordType, RecordValue, SetType, TupleType, TypeExpr,
    UnionType, UnionValue, default_value,
)


def lower_type(t: TypeExpr) -> TypeExpr:
    if isinstance(t, RecordType):
        return TupleType(tuple(lower_type(c) for _, c in t.fields))
    if isinstance(t, UnionType):
        return TupleType((EnumType(t.tags),) + tuple(lower_type(c) for _, c in t.alternatives))
    if isinstance(t, TupleType):
        return TupleType(tuple(lower_type(c) for c in t.components))
    if isinstance(t, SetType):
        return SetType(lower_type(t.element))
    if isinstance(t, ArrayType):
        return ArrayType(lower_type(t.value), lower_type(t.key))
    return t


def has_adt(t: TypeExpr) -> bool:
    return lower_type(t) != t


def lower_value(v: Any, t: TypeExpr) -> Any:
    if isinstance(t, RecordType):
        return tuple(lower_value(x, c) for (_, x), (_, c) in zip(v.fields, t.fields))
    if isinstance(t, UnionType):
        return (v.tag,) + tuple(lower_value(x, c) for x, (_, c) in zip(v.payloads, t.alternatives))
    if isinstance(t, TupleType):
        return tuple(lower_value(x, c) for x, c in zip(v, t.components))
    if isinstance(t, SetType):
        return frozenset(lower_value(x, t.element) for x in v)
    if isinstance(t, ArrayType):
        return tuple(lower_value(x, t.value) for x in v)
    return v


def raise_value(v: Any, t: TypeExpr) -> Any:
    """Inverse of :func:`lower_value`."""
    if isinstance(t, RecordType):
        return RecordValue(tuple((n, raise_value(x, c)) for x, (n, c) in zip(v, t.fields)))
    if isinstance(t, UnionType):
        return UnionValue(v[0], tuple(raise_value(x, c)
                                      for x, (_, c) in zip(v[1:], t.alternatives)))
    if isinstance(t, TupleType):
        return tuple(raise_value(x, c) for x, c in zip(v, t.components))
    if isinstance(t, SetType):
        return frozenset(raise_value(x, t.element) for x in v)
    if isinstance(t, ArrayType):
        return tuple(raise_value(x, t.value) for x in v)
    return v


def lower_expr(e: Expr) -> Expr:
    t = lower_type(e.type)
    if isinstance(e, FieldAccess):
        i = e.base.type.field_index(e.name)
        return TupleAccess(lower_expr(e.base), i + 1, type=t, pos=e.pos)
    if isinstance(e, TagTest):
        u: UnionType = e.base.type
        tags = EnumType(u.tags)
        tag = TupleAccess(lower_expr(e.base), 1, type=tags, pos=e.pos)
        return BinOp("eq", tag, EnumConst(e.tag, type=tags, pos=e.pos), type=BOOL, pos=e.pos)
    if isinstance(e, TagAccess):
        k = e.base.type.tag_index(e.tag)
        return TupleAccess(lower_expr(e.base), k + 2, type=t, pos=e.pos)
    if isinstance(e, TagConstruct):
        u = e.type
        parts: list[Expr] = [EnumConst(e.tag, type=EnumType(u.tags), pos=e.pos)]
        for name, alt in u.alternatives:
            if name == e.tag:
                parts.append(lower_expr(e.value))
            else:
                lt = lower_type(alt)
                parts.append(Lit(default_value(lt), type=lt, pos=e.pos))
        # the payload may be narrower than its slot; the Booleanizer widens it
        return TupleLit(tuple(parts), type=lower_type(u), pos=e.pos)
    if isinstance(e, Lit):
        return Lit(lower_value(e.value, e.type), type=t, pos=e.pos)
    if isinstance(e, Not):
        return dataclasses.replace(e, arg=lower_expr(e.arg), type=t)
    if isinstance(e, BinOp):
        return dataclasses.replace(e, left=lower_expr(e.left), right=lower_expr(e.right), type=t)
    if isinstance(e, (SetLit, TupleLit)):
        return dataclasses.replace(e, elements=tuple(lower_expr(x) for x in e.elements), type=t)
    if isinstance(e, TupleAccess):
        return dataclasses.replace(e, base=lower_expr(e.base), type=t)
    if isinstance(e, Index):
        return dataclasses.replace(e, base=lower_expr(e.base), index=lower_expr(e.index), type=t)
    return dataclasses.replace(e, type=t)


def lower_records_unions(model: SourceModel) -> SourceModel:
    """Rewrite a typechecked model so that no record or union type remains."""
    types = model.var_types()
    decls = tuple(VarDecl(d.name, lower_type(d.type), d.pos) for d in model.vars)
    init = tuple((n, lower_value(v, types[n])) for n, v in model.init)
    goal = lower_expr(model.goal) if model.goal is not None else None
    actions = []
    for a in model.actions:
        params = tuple(Param(p.name, lower_type(p.type), p.pos) for p in a.params)
        effects = tuple(
            Effect(lower_expr(eff.cond) if eff.cond is not None else None,
                   lower_expr(eff.target), lower_expr(eff.value), eff.pos)
            for eff in a.effects)
        actions.append(Action(a.name, params, lower_expr(a.pre), effects, a.pos))
    typedefs = tuple((n, lower_type(t)) for n, t in model.typedefs)
    return SourceModel(typedefs, decls, init, goal, tuple(actions), typed=True)
