"""Seeded random models and expressions for property tests.

Generation is type directed: a type is drawn first, then expressions of that
type are built from literals, variable paths and operators.  Models are
pretty-printed and re-parsed, so every generated model also exercises the
parser and the typechecker.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from .adt import lower_type
from .booleanize import width
from .parser import parse_model
from .syntax import (
    Action, BinOp, BoolConst, EnumConst, Effect, Expr, FieldAccess, Index, IntConst, Not, Param,
    SetLit, SourceModel, TagAccess, TagConstruct, TagTest, TupleAccess, TupleLit, Var, VarDecl,
    format_model, free_vars,
)
from .errors import TypeCheckError
from .typecheck import typecheck, typecheck_expr
from .types import (
    BOOL, ArrayType, BoolType, EnumType, IntRange, RecordType, RecordValue, SetType, TupleType,
    TypeExpr, UnionType, UnionValue, domain_size,
)

COLOR = EnumType(("red", "green", "blue"))


@dataclass(frozen=True)
class Bounds:
    max_vars: int = 4
    max_depth: int = 3
    max_actions: int = 5
    max_width: int = 16
    max_params: int = 2
    max_param_bits: int = 6


class Generator:
    def __init__(self, rng: random.Random, bounds: Bounds = Bounds(), use_div: bool = False):
        self.rng = rng
        self.bounds = bounds
        self.use_div = use_div
        self.unions = 0

    # -- types ---------------------------------------------------------------

    def scalar_type(self, small: bool = False) -> TypeExpr:
        r = self.rng.random()
        if r < 0.35:
            return BOOL
        if r < 0.8:
            lo = self.rng.randint(-1, 1) if not small else 0
            return IntRange(lo, lo + self.rng.randint(1, 2 if small else 3))
        return COLOR

    def key_type(self) -> TypeExpr:
        return self.rng.choice([BOOL, IntRange(0, 1), IntRange(0, 2), IntRange(1, 2)])

    def type(self, depth: int) -> TypeExpr:
        if depth <= 1 or self.rng.random() < 0.45:
            return self.scalar_type()
        kind = self.rng.choice(["tuple", "record", "union", "set", "array"])
        if kind == "tuple":
            return TupleType(tuple(self.type(depth - 1) for _ in range(2)))
        if kind == "record":
            return RecordType((("f", self.type(depth - 1)), ("g", self.type(depth - 1))))
        if kind == "union":
            self.unions += 1
            k = self.unions
            return UnionType(((f"u{k}a", self.scalar_type(True)), (f"u{k}b", self.scalar_type(True))))
        if kind == "set":
            return SetType(self.rng.choice([IntRange(0, 2), IntRange(1, 3), COLOR, BOOL]))
        return ArrayType(self.type(depth - 1), self.key_type())

    # -- values --------------------------------------------------------------

    def value(self, t: TypeExpr) -> Any:
        rng = self.rng
        if isinstance(t, BoolType):
            return rng.random() < 0.5
        if isinstance(t, IntRange):
            return rng.randint(t.lo, t.hi)
        if isinstance(t, EnumType):
            return rng.choice(t.items)
        if isinstance(t, TupleType):
            return tuple(self.value(c) for c in t.components)
        if isinstance(t, RecordType):
            return RecordValue(tuple((n, self.value(c)) for n, c in t.fields))
        if isinstance(t, UnionType):
            return UnionValue(rng.choice(t.tags), tuple(self.value(c) for _, c in t.alternatives))
        if isinstance(t, SetType):
            from .types import domain_of
            return frozenset(e for e in domain_of(t.element) if rng.random() < 0.4)
        if isinstance(t, ArrayType):
            return tuple(self.value(t.value) for _ in range(domain_size(t.key)))
        raise TypeError(t)

    def literal_expr(self, t: TypeExpr, v: Any) -> Expr | None:
        """Expression denoting ``v``; None for records and arrays (no literal syntax)."""
        if isinstance(t, BoolType):
            return BoolConst(v)
        if isinstance(t, IntRange):
            return IntConst(v)
        if isinstance(t, EnumType):
            return EnumConst(v)
        if isinstance(t, TupleType):
            parts = [self.literal_expr(c, x) for c, x in zip(t.components, v)]
            return None if any(p is None for p in parts) else TupleLit(tuple(parts))
        if isinstance(t, UnionType):
            i = t.tags.index(v.tag)
            inner = self.literal_expr(t.alternatives[i][1], v.payloads[i])
            return None if inner is None else TagConstruct(v.tag, inner)
        if isinstance(t, SetType):
            return SetLit(tuple(EnumConst(e) if isinstance(e, str) else
                                BoolConst(e) if isinstance(e, bool) else IntConst(e)
                                for e in sorted(v, key=repr))) if v else None
        return None

    # -- paths ---------------------------------------------------------------

    def paths(self, env: dict[str, TypeExpr], depth: int = 2) -> list[tuple[Expr, TypeExpr]]:
        """Reference expressions into the environment with their types."""
        out = []
        for name, t in env.items():
            self._paths(Var(name), t, env, depth, out)
        return out

    def _paths(self, e: Expr, t: TypeExpr, env, depth: int, out: list) -> None:
        out.append((e, t))
        if depth == 0:
            return
        if isinstance(t, TupleType):
            for i, c in enumerate(t.components, 1):
                self._paths(TupleAccess(e, i), c, env, depth - 1, out)
        elif isinstance(t, RecordType):
            for n, c in t.fields:
                self._paths(FieldAccess(e, n), c, env, depth - 1, out)
        elif isinstance(t, UnionType):
            for n, c in t.alternatives:
                self._paths(TagAccess(e, n), c, env, depth - 1, out)
        elif isinstance(t, ArrayType):
            idx = self.index_expr(t.key, env)
            self._paths(Index(e, idx), t.value, env, depth - 1, out)

    def index_expr(self, key: TypeExpr, env: dict[str, TypeExpr]) -> Expr:
        fitting = [n for n, t in env.items() if _within(t, key)]
        if fitting and self.rng.random() < 0.6:
            return Var(self.rng.choice(fitting))
        return self.literal_expr(key, self.value(key))

    # -- expressions ---------------------------------------------------------

    def expr(self, t: TypeExpr, env: dict[str, TypeExpr], depth: int) -> Expr:
        rng = self.rng
        paths = [p for p, pt in self.paths(env) if _compatible(pt, t)]
        if depth <= 0 or rng.random() < 0.3:
            lit = self.literal_expr(t, self.value(t))
            if paths and (lit is None or rng.random() < 0.6):
                return rng.choice(paths)
            if lit is not None:
                return lit
        if isinstance(t, BoolType):
            return self.bool_expr(env, depth)
        if isinstance(t, IntRange):
            r = rng.random()
            if r < 0.5 or not self._int_paths(env):
                a = self.expr(t, env, depth - 1)
                b = IntConst(rng.randint(0, 1))
                return BinOp(rng.choice(["add", "sub"]), a, b)
            a = self.int_expr(env, depth - 1)
            b = self.int_expr(env, depth - 1)
            ops = ["add", "sub", "mul"] + (["div"] if self.use_div else [])
            return BinOp(rng.choice(ops), a, b)
        if isinstance(t, TupleType):
            return TupleLit(tuple(self.expr(c, env, depth - 1) for c in t.components))
        if isinstance(t, UnionType):
            i = rng.randrange(len(t.tags))
            return TagConstruct(t.tags[i], self.expr(t.alternatives[i][1], env, depth - 1))
        if isinstance(t, SetType):
            if rng.random() < 0.5:
                return BinOp(rng.choice(["union", "inter", "diff"]),
                             self.expr(t, env, depth - 1), self.expr(t, env, depth - 1))
            n = rng.randint(1, 2)
            return SetLit(tuple(self.expr(t.element, env, depth - 1) for _ in range(n)))
        if paths:
            return rng.choice(paths)
        lit = self.literal_expr(t, self.value(t))
        if lit is None:
            raise _NoExpr(t)
        return lit

    def _int_paths(self, env) -> list[Expr]:
        return [p for p, pt in self.paths(env) if isinstance(pt, IntRange)]

    def int_expr(self, env, depth: int) -> Expr:
        paths = self._int_paths(env)
        if paths and self.rng.random() < 0.7:
            return self.rng.choice(paths)
        if depth > 0 and self.rng.random() < 0.3:
            return self.expr(IntRange(-1, 2), env, depth)
        return IntConst(self.rng.randint(-1, 3))

    def bool_expr(self, env: dict[str, TypeExpr], depth: int) -> Expr:
        rng = self.rng
        all_paths = self.paths(env)
        choices = ["const", "not", "andor", "cmp", "eq"]
        if any(isinstance(t, SetType) for _, t in all_paths):
            choices += ["in", "subseteq"]
        if any(isinstance(t, UnionType) for _, t in all_paths):
            choices.append("is")
        if depth <= 0:
            choices = ["const", "cmp", "eq"]
        kind = rng.choice(choices)
        if kind == "const":
            bools = [p for p, t in all_paths if isinstance(t, BoolType)]
            if bools and rng.random() < 0.7:
                return rng.choice(bools)
            return BoolConst(rng.random() < 0.5)
        if kind == "not":
            return Not(self.bool_expr(env, depth - 1))
        if kind == "andor":
            return BinOp(rng.choice(["and", "or"]), self.bool_expr(env, depth - 1),
                         self.bool_expr(env, depth - 1))
        if kind == "cmp":
            op = rng.choice(["lt", "leq", "gt", "geq", "eq", "neq"])
            return BinOp(op, self.int_expr(env, depth - 1), self.int_expr(env, depth - 1))
        if kind == "eq":
            e, t = rng.choice(all_paths) if all_paths else (BoolConst(True), BOOL)
            try:
                other = self.expr(t, env, depth - 1)
            except _NoExpr:
                other = e
            return BinOp(rng.choice(["eq", "neq"]), e, other)
        if kind == "in":
            e, t = rng.choice([(p, t) for p, t in all_paths if isinstance(t, SetType)])
            if rng.random() < 0.5:
                return BinOp("in", self.expr(t.element, env, depth - 1), e)
            return BinOp("in", self.literal_expr(t.element, self.value(t.element)), e)
        if kind == "subseteq":
            e, t = rng.choice([(p, t) for p, t in all_paths if isinstance(t, SetType)])
            return BinOp("subseteq", self.expr(t, env, depth - 1), e)
        e, t = rng.choice([(p, t) for p, t in all_paths if isinstance(t, UnionType)])
        return TagTest(e, rng.choice(t.tags))

    # -- models --------------------------------------------------------------

    def state_types(self) -> dict[str, TypeExpr]:
        b = self.bounds
        out: dict[str, TypeExpr] = {}
        budget = b.max_width
        for i in range(self.rng.randint(1, b.max_vars)):
            for _ in range(20):
                t = self.type(self.rng.randint(1, b.max_depth))
                w = width(lower_type(t))
                if w <= budget - (b.max_vars - i - 1 if i < 1 else 0):
                    break
            else:
                t = BOOL
                w = 1
            if w > budget:
                break
            out[f"v{i}"] = t
            budget -= w
        return out

    def param_types(self, state: dict[str, TypeExpr]) -> dict[str, TypeExpr]:
        out: dict[str, TypeExpr] = {}
        bits = 0
        keys = [t.key for t in _walk_types(state.values()) if isinstance(t, ArrayType)]
        for i in range(self.rng.randint(0, self.bounds.max_params)):
            t = self.rng.choice(keys) if keys and self.rng.random() < 0.5 else self.scalar_type(True)
            w = width(t)
            if bits + w > self.bounds.max_param_bits:
                break
            out[f"p{i}"] = t
            bits += w
        return out

    def action(self, name: str, state: dict[str, TypeExpr]) -> Action:
        rng = self.rng
        params = self.param_types(state)
        env = {**state, **params}
        pre = BoolConst(True) if rng.random() < 0.4 else self.bool_expr(env, rng.randint(1, 2))
        roots = list(state)
        rng.shuffle(roots)
        effects = []
        for root in roots[:rng.randint(1, min(3, len(roots)))]:
            targets = [(p, t) for p, t in self.paths({root: state[root]})]
            target, t = rng.choice(targets)
            target = self._bind_indices(target, params, state)
            try:
                value = self.expr(t, env, rng.randint(0, 2))
            except _NoExpr:
                value = target
            cond = self.bool_expr(env, 1) if rng.random() < 0.25 else None
            effects.append(Effect(cond, target, value))
        return Action(name, tuple(Param(n, t) for n, t in params.items()), pre, tuple(effects))

    def _bind_indices(self, e: Expr, params, state) -> Expr:
        if isinstance(e, Index):
            base = self._bind_indices(e.base, params, state)
            key = _type_of_path(e.base, state).key
            fitting = [n for n, t in params.items() if _within(t, key)]
            idx = Var(self.rng.choice(fitting)) if fitting and self.rng.random() < 0.7 \
                else self.literal_expr(key, self.value(key))
            return Index(base, idx)
        if isinstance(e, (TupleAccess, FieldAccess, TagAccess)):
            return type(e)(self._bind_indices(e.base, params, state), *_extra(e))
        return e

    def goal(self, state: dict[str, TypeExpr]) -> Expr:
        atoms = []
        paths = [(p, t) for p, t in self.paths(state, 3)
                 if isinstance(t, (BoolType, IntRange, EnumType, SetType))]
        scalar_paths = [(p, t) for p, t in paths if _no_index(p)] or paths
        for _ in range(self.rng.randint(1, 2)):
            p, t = self.rng.choice(scalar_paths)
            if isinstance(t, SetType):
                elem = self.literal_expr(t.element, self.value(t.element))
                atoms.append(BinOp("in", elem, p) if self.rng.random() < 0.7 else Not(BinOp("in", elem, p)))
            elif isinstance(t, BoolType):
                atoms.append(p if self.rng.random() < 0.5 else Not(p))
            else:
                atoms.append(BinOp("eq", p, self.literal_expr(t, self.value(t))))
        goal = atoms[0]
        for a in atoms[1:]:
            goal = BinOp("and", goal, a)
        return goal

    def model(self) -> SourceModel:
        state = self.state_types()
        init = tuple((n, self.value(t)) for n, t in state.items())
        actions = tuple(self.action(f"act{i}", state)
                        for i in range(self.rng.randint(1, self.bounds.max_actions)))
        decls = tuple(VarDecl(n, t) for n, t in state.items())
        typedefs = (("color", COLOR),)
        return SourceModel(typedefs, decls, init, self.goal(state), actions, typed=True)


class _NoExpr(Exception):
    pass


def _extra(e):
    if isinstance(e, TupleAccess):
        return (e.index,)
    if isinstance(e, FieldAccess):
        return (e.name,)
    return (e.tag,)


def _no_index(e: Expr) -> bool:
    while not isinstance(e, Var):
        if isinstance(e, Index):
            return False
        e = e.base
    return True


def _type_of_path(e: Expr, env: dict[str, TypeExpr]) -> TypeExpr:
    if isinstance(e, Var):
        return env[e.name]
    t = _type_of_path(e.base, env)
    if isinstance(e, TupleAccess):
        return t.components[e.index - 1]
    if isinstance(e, FieldAccess):
        return t.fields[t.field_index(e.name)][1]
    if isinstance(e, TagAccess):
        return t.alternatives[t.tag_index(e.tag)][1]
    return t.value


def _walk_types(types):
    for t in types:
        yield t
        if isinstance(t, TupleType):
            yield from _walk_types(t.components)
        elif isinstance(t, (RecordType, UnionType)):
            yield from _walk_types([c for _, c in (t.fields if isinstance(t, RecordType)
                                                   else t.alternatives)])
        elif isinstance(t, SetType):
            yield from _walk_types([t.element])
        elif isinstance(t, ArrayType):
            yield from _walk_types([t.value, t.key])


def _within(t: TypeExpr, key: TypeExpr) -> bool:
    if isinstance(t, IntRange) and isinstance(key, IntRange):
        return key.lo <= t.lo and t.hi <= key.hi
    return t == key


def _compatible(a: TypeExpr, b: TypeExpr) -> bool:
    from .types import join
    return a == b or (isinstance(a, IntRange) and isinstance(b, IntRange)) or (
        not isinstance(a, IntRange) and join(a, b) == b)


def random_model(seed: int, bounds: Bounds = Bounds()) -> SourceModel:
    """A typechecked random model, reproducible from ``seed``.

    The model goes through the pretty printer and the parser, so the text
    form (``format_model``) is the canonical description of the model.
    """
    gen = Generator(random.Random(seed), bounds)
    model = gen.model()
    return typecheck(parse_model(format_model(model)))


def random_model_text(seed: int, bounds: Bounds = Bounds()) -> str:
    gen = Generator(random.Random(seed), bounds)
    return format_model(gen.model())


def random_expr(seed: int, max_width: int = 14, depth: int = 4, use_div: bool = True):
    """A random typechecked expression and its free-variable environment.

    The environment's total Boolean width stays within ``max_width``.
    """
    rng = random.Random(seed)
    gen = Generator(rng, Bounds(max_depth=3), use_div=use_div)
    env: dict[str, TypeExpr] = {}
    budget = max_width
    for i in range(rng.randint(1, 3)):
        for _ in range(20):
            t = gen.type(rng.randint(1, 3))
            if width(lower_type(t)) <= budget:
                break
        else:
            continue
        env[f"x{i}"] = t
        budget -= width(lower_type(t))
    if not env:
        env["x0"] = BOOL
    target = gen.type(2) if rng.random() < 0.4 else rng.choice(list(env.values()) + [BOOL])
    closed = 0
    while True:
        try:
            e = typecheck_expr(gen.expr(target, env, depth), env, target)
        except _NoExpr:
            target = BOOL
            continue
        except TypeCheckError:
            continue  # e.g. a divisor whose range is {0}
        if free_vars(e):
            return e, env
        # closed expressions only exercise constant folding
        closed += 1
        if closed % 8 == 0:
            target = BOOL
