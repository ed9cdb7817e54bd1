"""Type resolution and checking.

Arithmetic never overflows: the result range of every arithmetic node is the
smallest range covering all results of its operands' ranges.  Assignments
whose value range is wider than the target are accepted; at run time such an
assignment acts as an extra precondition (the value must fit the target).
"""

from __future__ import annotations

import dataclasses
from typing import Any

from .errors import TypeCheckError
from .syntax import (
    Action, BinOp, BoolConst, Effect, EnumConst, Expr, FieldAccess, Index, IntConst,
    Lit, Not, Param, RawLit, SetLit, SourceModel, TagAccess, TagConstruct, TagTest,
    TupleAccess, TupleLit, Var, VarDecl, is_reference,
)
from .types import (
    BOOL, ArrayType, BoolType, EnumType, IntRange, NamedType, RecordType, RecordValue,
    SetType, TupleType, TypeExpr, UnionType, UnionValue, contains_value, default_value,
    domain_size, is_subtype, join,
)

DIV_PAIR_CAP = 1_000_000


def arith_range(op: str, a: IntRange, b: IntRange, pos=None) -> IntRange:
    if op == "add":
        return IntRange(a.lo + b.lo, a.hi + b.hi)
    if op == "sub":
        return IntRange(a.lo - b.hi, a.hi - b.lo)
    if op == "mul":
        prods = [x * y for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
        return IntRange(min(prods), max(prods))
    if op == "div":
        if domain_size(a) * domain_size(b) > DIV_PAIR_CAP:
            raise TypeCheckError("division ranges too large to enumerate", pos)
        quotients = [x // y for x in range(a.lo, a.hi + 1)
                     for y in range(b.lo, b.hi + 1) if y != 0 and x % y == 0]
        if not quotients:
            raise TypeCheckError("division never defined on these ranges", pos)
        return IntRange(min(quotients), max(quotients))
    raise ValueError(op)


def iter_types(t: TypeExpr):
    yield t
    if isinstance(t, TupleType):
        for c in t.components:
            yield from iter_types(c)
    elif isinstance(t, (RecordType, UnionType)):
        for _, c in (t.fields if isinstance(t, RecordType) else t.alternatives):
            yield from iter_types(c)
    elif isinstance(t, SetType):
        yield from iter_types(t.element)
    elif isinstance(t, ArrayType):
        yield from iter_types(t.key)
        yield from iter_types(t.value)


class Checker:
    def __init__(self, aliases: dict[str, TypeExpr] | None = None):
        self.aliases = dict(aliases or {})
        self.resolved: dict[str, TypeExpr] = {}
        self.enums: dict[str, list[EnumType]] = {}
        self.unions: dict[str, list[UnionType]] = {}
        self.state: dict[str, TypeExpr] = {}
        self.params: dict[str, TypeExpr] = {}

    # -- types ---------------------------------------------------------------

    def resolve(self, t: TypeExpr, pos=None, _stack: tuple[str, ...] = ()) -> TypeExpr:
        if isinstance(t, NamedType):
            if t.name in self.resolved:
                return self.resolved[t.name]
            if t.name not in self.aliases:
                raise TypeCheckError(f"unknown type {t.name!r}", pos)
            if t.name in _stack:
                raise TypeCheckError(f"recursive type {' -> '.join(_stack + (t.name,))}", pos)
            out = self.resolve(self.aliases[t.name], pos, _stack + (t.name,))
            self.resolved[t.name] = out
            return out
        if isinstance(t, TupleType):
            return TupleType(tuple(self.resolve(c, pos, _stack) for c in t.components))
        if isinstance(t, RecordType):
            return RecordType(tuple((n, self.resolve(c, pos, _stack)) for n, c in t.fields))
        if isinstance(t, UnionType):
            return UnionType(tuple((n, self.resolve(c, pos, _stack)) for n, c in t.alternatives))
        if isinstance(t, SetType):
            return SetType(self.resolve(t.element, pos, _stack))
        if isinstance(t, ArrayType):
            return ArrayType(self.resolve(t.value, pos, _stack), self.resolve(t.key, pos, _stack))
        return t

    def register(self, t: TypeExpr) -> None:
        for sub in iter_types(t):
            if isinstance(sub, EnumType):
                for item in sub.items:
                    known = self.enums.setdefault(item, [])
                    if sub not in known:
                        known.append(sub)
            elif isinstance(sub, UnionType):
                for tag in sub.tags:
                    known = self.unions.setdefault(tag, [])
                    if sub not in known:
                        known.append(sub)

    # -- literals ------------------------------------------------------------

    def literal(self, lit: RawLit, t: TypeExpr) -> Any:
        def bad(msg=None):
            return TypeCheckError(msg or f"literal does not match type {t}", lit.pos)

        if isinstance(t, BoolType):
            if lit.kind != "bool":
                raise bad()
            return lit.value
        if isinstance(t, IntRange):
            if lit.kind != "int":
                raise bad()
            if not t.lo <= lit.value <= t.hi:
                raise bad(f"{lit.value} outside {t}")
            return lit.value
        if isinstance(t, EnumType):
            if lit.kind != "name" or lit.value not in t.items:
                raise bad()
            return lit.value
        if isinstance(t, TupleType):
            if lit.kind != "tuple" or len(lit.value) != len(t.components):
                raise bad()
            return tuple(self.literal(x, c) for x, c in zip(lit.value, t.components))
        if isinstance(t, RecordType):
            if lit.kind != "record":
                raise bad()
            given = dict(lit.value)
            if sorted(given) != [n for n, _ in t.fields] or len(given) != len(lit.value):
                raise bad(f"record literal fields do not match {t}")
            return RecordValue(tuple((n, self.literal(given[n], c)) for n, c in t.fields))
        if isinstance(t, UnionType):
            if lit.kind != "tag" or lit.value[0] not in t.tags:
                raise bad()
            tag, inner = lit.value
            payloads = tuple(self.literal(inner, c) if n == tag else default_value(c)
                             for n, c in t.alternatives)
            return UnionValue(tag, payloads)
        if isinstance(t, SetType):
            if lit.kind != "set":
                raise bad()
            return frozenset(self.literal(x, t.element) for x in lit.value)
        if isinstance(t, ArrayType):
            n = domain_size(t.key)
            if lit.kind != "array" or len(lit.value) != n:
                raise bad(f"array literal needs {n} values")
            return tuple(self.literal(x, t.value) for x in lit.value)
        raise bad()

    # -- expressions ---------------------------------------------------------

    def lookup(self, name: str) -> TypeExpr | None:
        if name in self.params:
            return self.params[name]
        return self.state.get(name)

    def infer(self, e: Expr, hint: TypeExpr | None = None) -> Expr:
        """Annotate ``e``; ``hint`` guides set literals, constructors and enum items."""
        pos = e.pos
        if isinstance(e, BoolConst):
            return dataclasses.replace(e, type=BOOL)
        if isinstance(e, IntConst):
            return dataclasses.replace(e, type=IntRange(e.value, e.value))
        if isinstance(e, Lit):
            if e.type is None:
                raise TypeCheckError("untyped literal", pos)
            return e
        if isinstance(e, EnumConst):
            if e.type is not None:
                return e
            return self.enum_item(e.name, hint, pos)
        if isinstance(e, Var):
            t = self.lookup(e.name)
            if t is not None:
                return dataclasses.replace(e, type=t)
            if e.name in self.enums:
                return self.enum_item(e.name, hint, pos)
            raise TypeCheckError(f"unknown identifier {e.name!r}", pos)
        if isinstance(e, Not):
            return dataclasses.replace(e, arg=self.expect_bool(e.arg), type=BOOL)
        if isinstance(e, BinOp):
            return self.binop(e)
        if isinstance(e, SetLit):
            el_hint = hint.element if isinstance(hint, SetType) else None
            elems = tuple(self.infer(x, el_hint) for x in e.elements)
            el = el_hint
            for x in elems:
                el = x.type if el is None else join(el, x.type)
                if el is None:
                    raise TypeCheckError("set literal elements have incompatible types", x.pos)
            if el is None:
                raise TypeCheckError("cannot infer the element type of an empty set", pos)
            return dataclasses.replace(e, elements=elems, type=SetType(el))
        if isinstance(e, TupleLit):
            hints = (hint.components if isinstance(hint, TupleType)
                     and len(hint.components) == len(e.elements) else (None,) * len(e.elements))
            elems = tuple(self.infer(x, h) for x, h in zip(e.elements, hints))
            return dataclasses.replace(e, elements=elems,
                                       type=TupleType(tuple(x.type for x in elems)))
        if isinstance(e, TupleAccess):
            base = self.infer(e.base)
            if not isinstance(base.type, TupleType):
                raise TypeCheckError(f"tuple access on non-tuple type {base.type}", pos)
            n = len(base.type.components)
            if not 1 <= e.index <= n:
                raise TypeCheckError(f"tuple index {e.index} out of range 1..{n}", pos)
            return dataclasses.replace(e, base=base, type=base.type.components[e.index - 1])
        if isinstance(e, FieldAccess):
            base = self.infer(e.base)
            if not isinstance(base.type, RecordType):
                raise TypeCheckError(f"field access on non-record type {base.type}", pos)
            i = base.type.field_index(e.name)
            if i is None:
                raise TypeCheckError(f"unknown record field {e.name!r}", pos)
            return dataclasses.replace(e, base=base, type=base.type.fields[i][1])
        if isinstance(e, (TagTest, TagAccess)):
            base = self.infer(e.base)
            if not isinstance(base.type, UnionType):
                raise TypeCheckError(f"union operation on non-union type {base.type}", pos)
            i = base.type.tag_index(e.tag)
            if i is None:
                raise TypeCheckError(f"unknown union tag {e.tag!r}", pos)
            t = BOOL if isinstance(e, TagTest) else base.type.alternatives[i][1]
            return dataclasses.replace(e, base=base, type=t)
        if isinstance(e, TagConstruct):
            return self.construct(e, hint)
        if isinstance(e, Index):
            base = self.infer(e.base)
            if not isinstance(base.type, ArrayType):
                raise TypeCheckError(f"indexing non-array type {base.type}", pos)
            idx = self.infer(e.index, base.type.key)
            if not is_subtype(idx.type, base.type.key):
                raise TypeCheckError(
                    f"array index type mismatch: {idx.type} is not within {base.type.key}", pos)
            return dataclasses.replace(e, base=base, index=idx, type=base.type.value)
        raise TypeCheckError(f"unsupported expression {type(e).__name__}", pos)

    def enum_item(self, name: str, hint, pos) -> EnumConst:
        candidates = self.enums.get(name, [])
        if isinstance(hint, EnumType) and hint in candidates:
            return EnumConst(name, type=hint, pos=pos)
        if len(candidates) == 1:
            return EnumConst(name, type=candidates[0], pos=pos)
        if not candidates:
            raise TypeCheckError(f"unknown identifier {name!r}", pos)
        raise TypeCheckError(f"ambiguous enum item {name!r}", pos)

    def construct(self, e: TagConstruct, hint) -> Expr:
        template = hint if isinstance(hint, UnionType) and e.tag in hint.tags else None
        if template is None:
            candidates = self.unions.get(e.tag, [])
            if len(candidates) != 1:
                raise TypeCheckError(f"cannot infer the union type of constructor {e.tag!r}", e.pos)
            template = candidates[0]
        i = template.tag_index(e.tag)
        value = self.infer(e.value, template.alternatives[i][1])
        widened = join(value.type, template.alternatives[i][1])
        if widened is None:
            raise TypeCheckError(f"payload of {e.tag!r} has type {value.type}, "
                                 f"expected {template.alternatives[i][1]}", e.pos)
        alts = list(template.alternatives)
        alts[i] = (e.tag, widened)
        return dataclasses.replace(e, value=value, type=UnionType(tuple(alts)))

    def expect_bool(self, e: Expr) -> Expr:
        out = self.infer(e, BOOL)
        if not isinstance(out.type, BoolType):
            raise TypeCheckError(f"expected bool, got {out.type}", e.pos)
        return out

    def expect_int(self, e: Expr) -> Expr:
        out = self.infer(e)
        if not isinstance(out.type, IntRange):
            raise TypeCheckError(f"expected an integer, got {out.type}", e.pos)
        return out

    def pair(self, left: Expr, right: Expr) -> tuple[Expr, Expr]:
        """Infer two operands, letting a context-free side guide a context-needing one."""
        needs = (SetLit, TagConstruct, TupleLit)
        if isinstance(left, needs) and not isinstance(right, needs):
            r = self.infer(right)
            return self.infer(left, r.type), r
        if isinstance(left, Var) and left.name not in self.state and left.name not in self.params:
            r = self.infer(right)
            return self.infer(left, r.type), r
        l = self.infer(left)
        return l, self.infer(right, l.type)

    def binop(self, e: BinOp) -> Expr:
        op, pos = e.op, e.pos
        if op in ("and", "or"):
            return dataclasses.replace(e, left=self.expect_bool(e.left),
                                       right=self.expect_bool(e.right), type=BOOL)
        if op in ("add", "sub", "mul", "div"):
            l, r = self.expect_int(e.left), self.expect_int(e.right)
            return dataclasses.replace(e, left=l, right=r,
                                       type=arith_range(op, l.type, r.type, pos))
        if op in ("lt", "leq", "gt", "geq"):
            l, r = self.expect_int(e.left), self.expect_int(e.right)
            return dataclasses.replace(e, left=l, right=r, type=BOOL)
        if op in ("eq", "neq"):
            l, r = self.pair(e.left, e.right)
            if join(l.type, r.type) is None:
                raise TypeCheckError(f"type mismatch: {l.type} {op} {r.type}", pos)
            return dataclasses.replace(e, left=l, right=r, type=BOOL)
        if op == "in":
            r = self.infer(e.right)
            if not isinstance(r.type, SetType):
                raise TypeCheckError(f"'in' needs a set on the right, got {r.type}", pos)
            l = self.infer(e.left, r.type.element)
            if join(l.type, r.type.element) is None:
                raise TypeCheckError(f"type mismatch: {l.type} in {r.type}", pos)
            return dataclasses.replace(e, left=l, right=r, type=BOOL)
        if op in ("subseteq", "union", "inter", "diff"):
            l, r = self.pair(e.left, e.right)
            if not isinstance(l.type, SetType) or not isinstance(r.type, SetType):
                raise TypeCheckError(f"'{op}' needs sets, got {l.type} and {r.type}", pos)
            joined = join(l.type, r.type)
            if joined is None:
                raise TypeCheckError(f"type mismatch: {l.type} {op} {r.type}", pos)
            return dataclasses.replace(e, left=l, right=r,
                                       type=BOOL if op == "subseteq" else joined)
        raise TypeCheckError(f"unknown operator {op!r}", pos)

    # -- model ---------------------------------------------------------------

    def action(self, a: Action) -> Action:
        self.params = {}
        params = []
        for p in a.params:
            if p.name in self.params:
                raise TypeCheckError(f"duplicate parameter {p.name!r}", p.pos)
            if p.name in self.state:
                raise TypeCheckError(f"parameter {p.name!r} shadows a state variable", p.pos)
            t = self.resolve(p.type, p.pos)
            self.params[p.name] = t
            params.append(Param(p.name, t, p.pos))
        pre = self.expect_bool(a.pre)
        effects = []
        for eff in a.effects:
            cond = self.expect_bool(eff.cond) if eff.cond is not None else None
            if not is_reference(eff.target):
                raise TypeCheckError("assignment target must be a reference", eff.pos)
            target = self.infer(eff.target)
            root = target
            while not isinstance(root, Var):
                root = root.base
            if root.name not in self.state or root.name in self.params:
                raise TypeCheckError(f"cannot assign to {root.name!r}", eff.pos)
            value = self.infer(eff.value, target.type)
            if join(value.type, target.type) is None:
                raise TypeCheckError(
                    f"type mismatch: cannot assign {value.type} to {target.type}", eff.pos)
            effects.append(Effect(cond, target, value, eff.pos))
        self.params = {}
        return Action(a.name, tuple(params), pre, tuple(effects), a.pos)

    def model(self, m: SourceModel) -> SourceModel:
        for name, t in m.typedefs:
            if name in self.aliases and self.aliases[name] != t:
                raise TypeCheckError(f"duplicate type {name!r}")
            self.aliases[name] = t
        typedefs = tuple((name, self.resolve(NamedType(name))) for name, _ in m.typedefs)
        for _, t in typedefs:
            self.register(t)
        decls = []
        for d in m.vars:
            if d.name in self.state:
                raise TypeCheckError(f"duplicate variable {d.name!r}", d.pos)
            t = self.resolve(d.type, d.pos)
            self.register(t)
            self.state[d.name] = t
            decls.append(VarDecl(d.name, t, d.pos))
        for a in m.actions:
            for p in a.params:
                self.register(self.resolve(p.type, p.pos))
        init: dict[str, Any] = {}
        for name, lit in m.init:
            if name not in self.state:
                raise TypeCheckError(f"init of undeclared variable {name!r}",
                                     getattr(lit, "pos", None))
            if name in init:
                raise TypeCheckError(f"duplicate init of {name!r}", getattr(lit, "pos", None))
            if isinstance(lit, RawLit):
                init[name] = self.literal(lit, self.state[name])
            else:
                if not contains_value(self.state[name], lit):
                    raise TypeCheckError(f"initial value of {name!r} does not match its type")
                init[name] = lit
        missing = [d.name for d in decls if d.name not in init]
        if missing:
            raise TypeCheckError(f"no initial value for {', '.join(missing)}")
        goal = self.expect_bool(m.goal) if m.goal is not None else None
        names = set()
        actions = []
        for a in m.actions:
            if a.name in names:
                raise TypeCheckError(f"duplicate action {a.name!r}", a.pos)
            names.add(a.name)
            actions.append(self.action(a))
        return SourceModel(typedefs, tuple(decls),
                           tuple((d.name, init[d.name]) for d in decls),
                           goal, tuple(actions), typed=True)


def typecheck(model: SourceModel) -> SourceModel:
    return Checker().model(model)


def typecheck_expr(e: Expr, env: dict[str, TypeExpr], hint: TypeExpr | None = None) -> Expr:
    """Annotate a standalone expression whose free variables have the given types."""
    c = Checker()
    for t in list(env.values()) + ([hint] if hint is not None else []):
        c.register(t)
    c.state = dict(env)
    return c.infer(e, hint)
