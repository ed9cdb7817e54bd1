"""Abstract syntax of the modeling language and its pretty printer.

Expression nodes are immutable.  ``type`` is filled in by the typechecker and
``pos`` by the parser; neither takes part in equality, so ASTs compare by
structure alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .types import TypeExpr, format_value

Pos = tuple[int, int]

ARITH_OPS = ("add", "sub", "mul", "div")
COMPARE_OPS = ("eq", "neq", "lt", "leq", "gt", "geq", "in", "subseteq")
SET_OPS = ("union", "inter", "diff")
BOOL_OPS = ("and", "or")


@dataclass(frozen=True)
class Expr:
    type: TypeExpr | None = field(default=None, compare=False, kw_only=True, repr=False)
    pos: Pos | None = field(default=None, compare=False, kw_only=True, repr=False)


@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool


@dataclass(frozen=True)
class IntConst(Expr):
    value: int


@dataclass(frozen=True)
class EnumConst(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Not(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class SetLit(Expr):
    elements: tuple[Expr, ...]


@dataclass(frozen=True)
class TupleLit(Expr):
    elements: tuple[Expr, ...]


@dataclass(frozen=True)
class TupleAccess(Expr):
    base: Expr
    index: int  # 1-based


@dataclass(frozen=True)
class FieldAccess(Expr):
    base: Expr
    name: str


@dataclass(frozen=True)
class TagTest(Expr):
    base: Expr
    tag: str


@dataclass(frozen=True)
class TagAccess(Expr):
    base: Expr
    tag: str


@dataclass(frozen=True)
class TagConstruct(Expr):
    tag: str
    value: Expr


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(frozen=True)
class Lit(Expr):
    """Typed constant of any type; produced by lowering, never by the parser."""

    value: Any


REFERENCE_NODES = (Var, TupleAccess, FieldAccess, TagAccess, Index)


def is_reference(e: Expr) -> bool:
    while not isinstance(e, Var):
        if not isinstance(e, REFERENCE_NODES):
            return False
        e = e.base
    return True


def reference_root(e: Expr) -> str:
    while not isinstance(e, Var):
        e = e.base
    return e.name


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Not):
        return (e.arg,)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, (SetLit, TupleLit)):
        return e.elements
    if isinstance(e, (TupleAccess, FieldAccess, TagTest, TagAccess)):
        return (e.base,)
    if isinstance(e, TagConstruct):
        return (e.value,)
    if isinstance(e, Index):
        return (e.base, e.index)
    return ()


def walk(e: Expr):
    yield e
    for c in children(e):
        yield from walk(c)


def free_vars(e: Expr) -> list[str]:
    seen: dict[str, None] = {}
    for node in walk(e):
        if isinstance(node, Var):
            seen.setdefault(node.name)
    return list(seen)


@dataclass(frozen=True)
class RawLit:
    """Untyped literal as written in an ``init`` declaration."""

    kind: str  # bool | int | name | tuple | set | record | array | tag
    value: Any
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: TypeExpr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Param:
    name: str
    type: TypeExpr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Effect:
    cond: Expr | None
    target: Expr
    value: Expr
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Action:
    name: str
    params: tuple[Param, ...]
    pre: Expr
    effects: tuple[Effect, ...]
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SourceModel:
    """A parsed (and possibly typechecked) planning problem.

    Before typechecking ``init`` maps names to :class:`RawLit`; afterwards it
    maps names to literal values and every type is alias-free.
    """

    typedefs: tuple[tuple[str, TypeExpr], ...]
    vars: tuple[VarDecl, ...]
    init: tuple[tuple[str, Any], ...]
    goal: Expr | None
    actions: tuple[Action, ...]
    typed: bool = False

    def var_types(self) -> dict[str, TypeExpr]:
        return {d.name: d.type for d in self.vars}

    def init_map(self) -> dict[str, Any]:
        return dict(self.init)

    def action(self, name: str) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)


# -- pretty printing ---------------------------------------------------------

def format_expr(e: Expr) -> str:
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, IntConst):
        return str(e.value)
    if isinstance(e, EnumConst):
        return e.name
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        return format_value(e.value, e.type)
    if isinstance(e, Not):
        return f"not {_atom(e.arg)}"
    if isinstance(e, BinOp):
        return f"{_atom(e.left)} {e.op} {_atom(e.right)}"
    if isinstance(e, SetLit):
        return "{" + ", ".join(format_expr(x) for x in e.elements) + "}"
    if isinstance(e, TupleLit):
        return "<" + ", ".join(format_expr(x) for x in e.elements) + ">"
    if isinstance(e, TupleAccess):
        return f"{_atom(e.base)}.{e.index}"
    if isinstance(e, FieldAccess):
        return f"{_atom(e.base)}.{e.name}"
    if isinstance(e, TagTest):
        return f"{_atom(e.base)} is {e.tag}"
    if isinstance(e, TagAccess):
        return f"{_atom(e.base)} as {e.tag}"
    if isinstance(e, TagConstruct):
        return f"{e.tag}({format_expr(e.value)})"
    if isinstance(e, Index):
        return f"{_atom(e.base)}[{format_expr(e.index)}]"
    raise TypeError(f"unknown expression {e!r}")


_PRIMARY = (BoolConst, IntConst, EnumConst, Var, SetLit, TupleLit, TupleAccess,
            FieldAccess, TagAccess, TagConstruct, Index)


def _atom(e: Expr) -> str:
    text = format_expr(e)
    if isinstance(e, _PRIMARY):
        return text
    return f"({text})"


def format_raw(lit: RawLit) -> str:
    if lit.kind == "bool":
        return "true" if lit.value else "false"
    if lit.kind in ("int", "name"):
        return str(lit.value)
    if lit.kind == "tuple":
        return "<" + ", ".join(map(format_raw, lit.value)) + ">"
    if lit.kind == "set":
        return "{" + ", ".join(map(format_raw, lit.value)) + "}"
    if lit.kind == "array":
        return "[" + ", ".join(map(format_raw, lit.value)) + "]"
    if lit.kind == "record":
        return "{" + ", ".join(f"{n}: {format_raw(v)}" for n, v in lit.value) + "}"
    if lit.kind == "tag":
        tag, inner = lit.value
        return f"{tag}({format_raw(inner)})"
    raise ValueError(lit.kind)


def format_model(model: SourceModel) -> str:
    lines = []
    for name, t in model.typedefs:
        lines.append(f"type {name} = {t};")
    types = model.var_types()
    for d in model.vars:
        lines.append(f"var {d.name}: {d.type};")
    for name, v in model.init:
        text = format_raw(v) if isinstance(v, RawLit) else format_value(v, types[name])
        lines.append(f"init {name} = {text};")
    if model.goal is not None:
        lines.append(f"goal {format_expr(model.goal)};")
    for a in model.actions:
        params = ", ".join(f"{p.name}: {p.type}" for p in a.params)
        lines.append(f"action {a.name}({params})")
        lines.append(f"  pre {format_expr(a.pre)}")
        lines.append("  eff")
        for eff in a.effects:
            when = f"when {format_expr(eff.cond)} " if eff.cond is not None else ""
            lines.append(f"    {when}{format_expr(eff.target)} := {format_expr(eff.value)};")
        lines.append("end")
    return "\n".join(lines) + "\n"
