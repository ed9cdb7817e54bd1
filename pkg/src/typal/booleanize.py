"""Translate typed values and expressions into trees of propositional formulas.

A representation (``Repr``) is either a :class:`~typal.logic.Formula` (a leaf)
or a tuple of representations.  Its shape depends only on the type:

* ``bool`` -> one leaf
* ``n..m`` -> ``m-n+1`` leaves, one per value (unary, exactly one true)
* enum -> one leaf per item
* tuple -> one child per component
* ``set<t>`` -> one leaf per element of ``domain_of(t)``
* ``array<k, v>`` -> one child per key in ``domain_of(k)``

Inputs must be typechecked and free of records and unions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Union

from . import logic
from .errors import DecodeError, TypalError
from .logic import FALSE, TRUE, Atom, Formula, conj, conj_all, const, disj, disj_all, iff, neg
from .syntax import (
    BinOp, BoolConst, EnumConst, Expr, Index, IntConst, Lit, Not, SetLit, SourceModel,
    TupleAccess, TupleLit, Var,
)
from .types import (
    DEFAULT_DOMAIN_CAP, ArrayType, BoolType, EnumType, IntRange, SetType, TupleType,
    TypeExpr, domain_of, join, mangle_key,
)

Repr = Union[Formula, tuple]


# -- shapes ------------------------------------------------------------------

def leaves(r: Repr) -> list[Formula]:
    if isinstance(r, Formula):
        return [r]
    out = []
    for c in r:
        out.extend(leaves(c))
    return out


def shape(r: Repr):
    if isinstance(r, Formula):
        return None
    return tuple(shape(c) for c in r)


def type_shape(t: TypeExpr, cap: int = DEFAULT_DOMAIN_CAP):
    if isinstance(t, BoolType):
        return None
    if isinstance(t, IntRange):
        return (None,) * (t.hi - t.lo + 1)
    if isinstance(t, EnumType):
        return (None,) * len(t.items)
    if isinstance(t, TupleType):
        return tuple(type_shape(c, cap) for c in t.components)
    if isinstance(t, SetType):
        return (None,) * len(domain_of(t.element, cap))
    if isinstance(t, ArrayType):
        return (type_shape(t.value, cap),) * len(domain_of(t.key, cap))
    raise TypalError(f"type {t} must be lowered before Booleanization")


def width(t: TypeExpr) -> int:
    """Number of Boolean leaves in the representation of ``t``."""
    s = type_shape(t)
    return 1 if s is None else _count(s)


def _count(s) -> int:
    return 1 if s is None else sum(_count(c) for c in s)


def map_leaves(r: Repr, fn) -> Repr:
    if isinstance(r, Formula):
        return fn(r)
    return tuple(map_leaves(c, fn) for c in r)


# -- declarations and constants ---------------------------------------------

def encode_decl(name: str, t: TypeExpr, cap: int = DEFAULT_DOMAIN_CAP) -> Repr:
    """Atom-leafed representation of a variable; bit names follow the value path."""
    if isinstance(t, BoolType):
        return Atom(name)
    if isinstance(t, IntRange):
        return tuple(Atom(f"{name}_{mangle_key(i)}") for i in range(t.lo, t.hi + 1))
    if isinstance(t, EnumType):
        return tuple(Atom(f"{name}_{item}") for item in t.items)
    if isinstance(t, TupleType):
        return tuple(encode_decl(f"{name}_{i}", c, cap) for i, c in enumerate(t.components, 1))
    if isinstance(t, SetType):
        return tuple(Atom(f"{name}_{mangle_key(e)}") for e in domain_of(t.element, cap))
    if isinstance(t, ArrayType):
        return tuple(encode_decl(f"{name}_{mangle_key(k)}", t.value, cap)
                     for k in domain_of(t.key, cap))
    raise TypalError(f"type {t} must be lowered before Booleanization")


def encode_value(v: Any, t: TypeExpr, cap: int = DEFAULT_DOMAIN_CAP) -> Repr:
    """Constant representation of a literal (one-hot for scalars)."""
    if isinstance(t, BoolType):
        return const(bool(v))
    if isinstance(t, IntRange):
        return tuple(const(i == v) for i in range(t.lo, t.hi + 1))
    if isinstance(t, EnumType):
        return tuple(const(item == v) for item in t.items)
    if isinstance(t, TupleType):
        return tuple(encode_value(x, c, cap) for x, c in zip(v, t.components))
    if isinstance(t, SetType):
        return tuple(const(e in v) for e in domain_of(t.element, cap))
    if isinstance(t, ArrayType):
        return tuple(encode_value(x, t.value, cap) for x in v)
    raise TypalError(f"type {t} must be lowered before Booleanization")


def decode_value(t: TypeExpr, bits, path: str = "", cap: int = DEFAULT_DOMAIN_CAP) -> Any:
    """Inverse of :func:`encode_value` on a tree of truth values."""
    if isinstance(t, BoolType):
        return bool(bits)
    if isinstance(t, (IntRange, EnumType)):
        hot = [i for i, b in enumerate(bits) if b]
        if len(hot) != 1:
            raise DecodeError(f"exactly-one violated at {path or '<root>'}: "
                              f"{len(hot)} of {len(bits)} bits set")
        return t.lo + hot[0] if isinstance(t, IntRange) else t.items[hot[0]]
    if isinstance(t, TupleType):
        return tuple(decode_value(c, b, f"{path}.{i}", cap)
                     for i, (c, b) in enumerate(zip(t.components, bits), 1))
    if isinstance(t, SetType):
        return frozenset(e for e, b in zip(domain_of(t.element, cap), bits) if b)
    if isinstance(t, ArrayType):
        keys = domain_of(t.key, cap)
        return tuple(decode_value(t.value, b, f"{path}[{k}]", cap) for k, b in zip(keys, bits))
    raise TypalError(f"type {t} must be lowered before Booleanization")


def exactly_one_groups(t: TypeExpr, r: Repr) -> list[list[str]]:
    """Bit-name groups of which exactly one must be true, for a declared variable."""
    if isinstance(t, (IntRange, EnumType)):
        return [[a.name for a in r]]
    if isinstance(t, TupleType):
        return [g for c, sub in zip(t.components, r) for g in exactly_one_groups(c, sub)]
    if isinstance(t, ArrayType):
        return [g for sub in r for g in exactly_one_groups(t.value, sub)]
    return []


# -- helpers from the translation tables ------------------------------------

def fix(elems: list[Repr], guards: list[Formula]) -> Repr:
    """Select among same-shaped representations under mutually exclusive guards."""
    if not elems or len(elems) != len(guards):
        raise TypalError("fix needs one guard per element and at least one element")
    if all(isinstance(e, Formula) for e in elems):
        return disj_all(conj(e, g) for e, g in zip(elems, guards))
    if any(isinstance(e, Formula) for e in elems) or len({len(e) for e in elems}) != 1:
        raise TypalError("fix: elements have different shapes")
    return tuple(fix([e[j] for e in elems], guards) for j in range(len(elems[0])))


def eq_repr(a: Repr, ta: TypeExpr, b: Repr, tb: TypeExpr, cap: int = DEFAULT_DOMAIN_CAP) -> Formula:
    if isinstance(ta, BoolType):
        return iff(a, b)
    if isinstance(ta, IntRange):
        lo, hi = max(ta.lo, tb.lo), min(ta.hi, tb.hi)
        return disj_all(conj(a[j - ta.lo], b[j - tb.lo]) for j in range(lo, hi + 1))
    if isinstance(ta, EnumType):
        return disj_all(conj(x, y) for x, y in zip(a, b))
    if isinstance(ta, TupleType):
        return conj_all(eq_repr(x, cx, y, cy, cap)
                        for x, cx, y, cy in zip(a, ta.components, b, tb.components))
    if isinstance(ta, SetType):
        t = join(ta, tb)
        a, b = coerce(a, ta, t, cap), coerce(b, tb, t, cap)
        return conj_all(iff(x, y) for x, y in zip(a, b))
    if isinstance(ta, ArrayType):
        return conj_all(eq_repr(x, ta.value, y, tb.value, cap) for x, y in zip(a, b))
    raise TypalError(f"type {ta} must be lowered before Booleanization")


def lt_repr(a: Repr, ta: IntRange, b: Repr, tb: IntRange) -> Formula:
    return disj_all(conj(a[j1 - ta.lo], b[j2 - tb.lo])
                    for j1 in range(ta.lo, ta.hi + 1)
                    for j2 in range(max(j1 + 1, tb.lo), tb.hi + 1))


def coerce(r: Repr, src: TypeExpr, dst: TypeExpr, cap: int = DEFAULT_DOMAIN_CAP) -> Repr:
    """Re-index a representation between compatible types (integer ranges may differ).

    Values of ``src`` outside ``dst`` lose their bits; see :func:`fits`.
    """
    if src == dst:
        return r
    if isinstance(src, IntRange):
        return tuple(r[i - src.lo] if src.lo <= i <= src.hi else FALSE
                     for i in range(dst.lo, dst.hi + 1))
    if isinstance(src, TupleType):
        return tuple(coerce(x, s, d, cap) for x, s, d in zip(r, src.components, dst.components))
    if isinstance(src, SetType):
        index = {e: i for i, e in enumerate(domain_of(src.element, cap))}
        return tuple(r[index[e]] if e in index else FALSE for e in domain_of(dst.element, cap))
    if isinstance(src, ArrayType):
        return tuple(coerce(x, src.value, dst.value, cap) for x in r)
    return r


def fits(r: Repr, src: TypeExpr, dst: TypeExpr, cap: int = DEFAULT_DOMAIN_CAP) -> Formula:
    """Formula stating that the value represented by ``r`` is also a value of ``dst``."""
    if src == dst:
        return TRUE
    if isinstance(src, IntRange):
        if dst.lo <= src.lo and src.hi <= dst.hi:
            return TRUE
        return disj_all(r[i - src.lo] for i in range(max(src.lo, dst.lo), min(src.hi, dst.hi) + 1))
    if isinstance(src, TupleType):
        return conj_all(fits(x, s, d, cap) for x, s, d in zip(r, src.components, dst.components))
    if isinstance(src, SetType):
        keep = set(domain_of(dst.element, cap))
        return conj_all(neg(x) for x, e in zip(r, domain_of(src.element, cap)) if e not in keep)
    if isinstance(src, ArrayType):
        return conj_all(fits(x, src.value, dst.value, cap) for x in r)
    return TRUE


def _arith(op: str, x: int, y: int) -> int | None:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if y == 0 or x % y:
        return None
    return x // y


# -- expressions -------------------------------------------------------------

class Translator:
    """Booleanize annotated expressions under an environment of variable representations."""

    def __init__(self, env: dict[str, Repr], cap: int = DEFAULT_DOMAIN_CAP):
        self.env = env
        self.cap = cap

    def __call__(self, e: Expr) -> Repr:
        return self.tr(e)

    def tr(self, e: Expr) -> Repr:
        t = e.type
        if t is None:
            raise TypalError("expression is not typechecked")
        if isinstance(e, BoolConst):
            return const(e.value)
        if isinstance(e, (IntConst, EnumConst)):
            return encode_value(e.value if isinstance(e, IntConst) else e.name, t, self.cap)
        if isinstance(e, Lit):
            return encode_value(e.value, t, self.cap)
        if isinstance(e, Var):
            return self.env[e.name]
        if isinstance(e, Not):
            return neg(self.tr(e.arg))
        if isinstance(e, BinOp):
            return self.binop(e)
        if isinstance(e, SetLit):
            elems = [(self.tr(x), x.type) for x in e.elements]
            return tuple(
                disj_all(eq_repr(r, rt, encode_value(c, t.element, self.cap), t.element, self.cap)
                         for r, rt in elems)
                for c in domain_of(t.element, self.cap))
        if isinstance(e, TupleLit):
            # components may be narrower than the literal's declared type
            return tuple(coerce(self.tr(x), x.type, c, self.cap)
                         for x, c in zip(e.elements, t.components))
        if isinstance(e, TupleAccess):
            return self.tr(e.base)[e.index - 1]
        if isinstance(e, Index):
            base = self.tr(e.base)
            return fix(list(base), self.guards(e.index, e.base.type.key))
        raise TypalError(f"cannot Booleanize {type(e).__name__}; lower records and unions first")

    def guards(self, idx: Expr, key: TypeExpr) -> list[Formula]:
        r = self.tr(idx)
        return [eq_repr(encode_value(c, key, self.cap), key, r, idx.type, self.cap)
                for c in domain_of(key, self.cap)]

    def binop(self, e: BinOp) -> Repr:
        op = e.op
        if op == "and":
            return conj(self.tr(e.left), self.tr(e.right))
        if op == "or":
            return disj(self.tr(e.left), self.tr(e.right))
        a, b = self.tr(e.left), self.tr(e.right)
        ta, tb = e.left.type, e.right.type
        if op in ("add", "sub", "mul", "div"):
            t = e.type
            buckets: list[list[Formula]] = [[] for _ in range(t.lo, t.hi + 1)]
            for x in range(ta.lo, ta.hi + 1):
                for y in range(tb.lo, tb.hi + 1):
                    r = _arith(op, x, y)
                    if r is not None:
                        buckets[r - t.lo].append(conj(a[x - ta.lo], b[y - tb.lo]))
            return tuple(disj_all(bucket) for bucket in buckets)
        if op == "eq":
            return eq_repr(a, ta, b, tb, self.cap)
        if op == "neq":
            return neg(eq_repr(a, ta, b, tb, self.cap))
        if op == "lt":
            return lt_repr(a, ta, b, tb)
        if op == "gt":
            return lt_repr(b, tb, a, ta)
        if op == "leq":
            return disj(lt_repr(a, ta, b, tb), eq_repr(a, ta, b, tb))
        if op == "geq":
            return disj(lt_repr(b, tb, a, ta), eq_repr(b, tb, a, ta))
        if op == "in":
            el = tb.element
            guards = [eq_repr(a, ta, encode_value(c, el, self.cap), el, self.cap)
                      for c in domain_of(el, self.cap)]
            return fix(list(b), guards)
        if op in ("subseteq", "union", "inter", "diff"):
            t = join(ta, tb)
            a, b = coerce(a, ta, t, self.cap), coerce(b, tb, t, self.cap)
            if op == "subseteq":
                return conj_all(disj(neg(x), y) for x, y in zip(a, b))
            if op == "union":
                return tuple(disj(x, y) for x, y in zip(a, b))
            if op == "inter":
                return tuple(conj(x, y) for x, y in zip(a, b))
            return tuple(conj(x, neg(y)) for x, y in zip(a, b))
        raise TypalError(f"unknown operator {op!r}")

    # -- references ----------------------------------------------------------

    def resolve_refs(self, r: Expr) -> list[tuple[Repr, Formula]]:
        """Guarded sets of state bits a reference expression may denote."""
        if isinstance(r, Var):
            return [(self.env[r.name], TRUE)]
        if isinstance(r, TupleAccess):
            return [(target[r.index - 1], g) for target, g in self.resolve_refs(r.base)]
        if isinstance(r, Index):
            guards = self.guards(r.index, r.base.type.key)
            out = []
            for target, g in self.resolve_refs(r.base):
                for elem, omega in zip(target, guards):
                    psi = conj(g, omega)
                    if psi != FALSE:
                        out.append((elem, psi))
            return out
        raise TypalError(f"{type(r).__name__} is not a reference")

    def assignment(self, cond: Formula, target: Expr, value: Expr):
        """Booleanize ``when cond: target := value``.

        Returns ``(effects, assignments, guard)``: add/delete effects, the
        pre-split ``(condition, bit, formula)`` triples, and the formula the
        action's precondition must imply so the value fits the target type.
        """
        v = self.tr(value)
        guard = disj(neg(cond), fits(v, value.type, target.type, self.cap))
        v = coerce(v, value.type, target.type, self.cap)
        effects, assigns = [], []
        for ref, phi in self.resolve_refs(target):
            base = conj(cond, phi)
            for bit, eb in zip(leaves(ref), leaves(v)):
                assigns.append((base, bit.name, eb))
                add = conj(base, eb)
                if add != FALSE:
                    effects.append(BoolEffect(add, bit.name, True))
                delete = conj(base, neg(eb))
                if delete != FALSE:
                    effects.append(BoolEffect(delete, bit.name, False))
        return effects, assigns, guard


def translate(e: Expr, env: dict[str, Repr], cap: int = DEFAULT_DOMAIN_CAP) -> Repr:
    return Translator(env, cap).tr(e)


def resolve_refs(r: Expr, env: dict[str, Repr], cap: int = DEFAULT_DOMAIN_CAP):
    return Translator(env, cap).resolve_refs(r)


def booleanize_assignment(cond: Formula, target: Expr, value: Expr, env: dict[str, Repr],
                          cap: int = DEFAULT_DOMAIN_CAP) -> list["BoolEffect"]:
    return Translator(env, cap).assignment(cond, target, value)[0]


# -- models ------------------------------------------------------------------

@dataclass(frozen=True)
class BoolEffect:
    cond: Formula
    bit: str
    value: bool

    def __str__(self) -> str:
        return f"when {self.cond}: {self.bit} := {'T' if self.value else 'F'}"


@dataclass
class BoolParam:
    name: str
    type: TypeExpr
    repr: Repr
    source_type: TypeExpr | None = None  # type before record/union lowering

    @property
    def bits(self) -> list[str]:
        return [a.name for a in leaves(self.repr)]

    def groups(self) -> list[list[str]]:
        return exactly_one_groups(self.type, self.repr)


@dataclass
class BoolAction:
    name: str
    params: list[BoolParam]
    pre: Formula
    effects: list[BoolEffect]
    assignments: list[tuple[Formula, str, Formula]] = field(default_factory=list)

    @property
    def param_bits(self) -> list[str]:
        return [b for p in self.params for b in p.bits]

    def param_constraint(self) -> Formula:
        """Exactly-one constraints that make a parameter bit pattern a valid value."""
        return conj_all(logic.exactly_one(g) for p in self.params for g in p.groups())


@dataclass
class BoolModel:
    bits: list[str]
    init: frozenset[str]
    goal: Formula
    actions: list[BoolAction]
    groups: list[list[str]]
    var_reprs: dict[str, tuple[TypeExpr, Repr]]

    def action(self, name: str) -> BoolAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def decode_state(self, state: frozenset[str] | set[str]) -> dict[str, Any]:
        return {name: decode_value(t, map_leaves(r, lambda a: a.name in state), name)
                for name, (t, r) in self.var_reprs.items()}

    def encode_state(self, values: dict[str, Any]) -> frozenset[str]:
        true = set()
        for name, (t, r) in self.var_reprs.items():
            for bit, val in zip(leaves(r), leaves(encode_value(values[name], t))):
                if val == TRUE:
                    true.add(bit.name)
        return frozenset(true)

    def describe(self) -> str:
        lines = [f"bits ({len(self.bits)}): {' '.join(self.bits)}",
                 f"init: {' '.join(b for b in self.bits if b in self.init)}",
                 f"goal: {self.goal}"]
        for a in self.actions:
            params = ", ".join(f"{p.name}: {p.type} [{' '.join(p.bits)}]" for p in a.params)
            lines.append(f"action {a.name}({params})")
            lines.append(f"  pre: {a.pre}")
            for eff in a.effects:
                lines.append(f"  {eff}")
        return "\n".join(lines)


def check_bit_names(names: Iterable[str]) -> None:
    seen: dict[str, str] = {}
    for n in names:
        key = n.lower()
        if key in seen:
            raise TypalError(f"bit name clash: {seen[key]!r} and {n!r}; rename a variable")
        seen[key] = n


def booleanize_model(model: SourceModel, cap: int = DEFAULT_DOMAIN_CAP) -> BoolModel:
    """Booleanize a typechecked model whose records and unions were lowered."""
    var_reprs: dict[str, tuple[TypeExpr, Repr]] = {}
    env: dict[str, Repr] = {}
    bits: list[str] = []
    groups: list[list[str]] = []
    for d in model.vars:
        r = encode_decl(d.name, d.type, cap)
        var_reprs[d.name] = (d.type, r)
        env[d.name] = r
        bits.extend(a.name for a in leaves(r))
        groups.extend(exactly_one_groups(d.type, r))
    check_bit_names(bits)
    init = set()
    types = model.var_types()
    for name, v in model.init:
        for bit, val in zip(leaves(env[name]), leaves(encode_value(v, types[name], cap))):
            if val == TRUE:
                init.add(bit.name)
    goal = translate(model.goal, env, cap) if model.goal is not None else TRUE
    actions = []
    for a in model.actions:
        params = [BoolParam(p.name, p.type, encode_decl(f"?{p.name}", p.type, cap))
                  for p in a.params]
        scope = dict(env)
        scope.update({p.name: p.repr for p in params})
        tr = Translator(scope, cap)
        pre = tr.tr(a.pre)
        effects, assigns, range_guards = [], [], []
        for eff in a.effects:
            cond = tr.tr(eff.cond) if eff.cond is not None else TRUE
            es, asg, guard = tr.assignment(cond, eff.target, eff.value)
            effects.extend(es)
            assigns.extend(asg)
            range_guards.append(guard)
        actions.append(BoolAction(a.name, params, conj(pre, *range_guards), effects, assigns))
    return BoolModel(bits, frozenset(init), goal, actions, groups, var_reprs)
