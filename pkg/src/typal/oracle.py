"""Reference semantics and brute-force search.

Three interchangeable semantics share one interface (``init``, ``successors``,
``apply``, ``is_goal``):

* :class:`SourceSemantics` interprets the typed source model directly;
* :class:`BoolSemantics` runs a :class:`~typal.booleanize.BoolModel`;
* :class:`StripsSemantics` runs a :class:`~typal.strips.StripsModel`.

:func:`bfs_solve` and :func:`validate_plan` work on any of them.  Costs are
counted in original actions, so auxiliary STRIPS steps are free and plan
lengths are comparable across levels.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterator

from . import logic
from .booleanize import BoolAction, BoolModel
from .errors import ActionError, CapExceeded, EvalError, TypalError, WriteConflict
from .logic import FALSE, TRUE, Atom, Conj, Neg
from .strips import StripsAction, StripsModel
from .syntax import (
    Action, BinOp, BoolConst, EnumConst, Expr, FieldAccess, Index, IntConst, Lit, Not, SetLit,
    SourceModel, TagAccess, TagConstruct, TagTest, TupleAccess, TupleLit, Var,
)
from .types import (
    ArrayType, EnumType, RecordType, RecordValue, TupleType, TypeExpr, UnionType, UnionValue,
    contains_value, default_value, domain_of, domain_size, key_index, value_fits,
)

DEFAULT_STATE_CAP = 1_000_000


# -- expressions -------------------------------------------------------------

def eval_expr(e: Expr, env: dict[str, Any]) -> Any:
    """Evaluate a typechecked expression under ``env`` (variable -> literal value)."""
    if isinstance(e, BoolConst):
        return e.value
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, EnumConst):
        return e.name
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}", e.pos) from None
    if isinstance(e, Not):
        return not eval_expr(e.arg, env)
    if isinstance(e, BinOp):
        return _binop(e, env)
    if isinstance(e, SetLit):
        return frozenset(eval_expr(x, env) for x in e.elements)
    if isinstance(e, TupleLit):
        return tuple(eval_expr(x, env) for x in e.elements)
    if isinstance(e, TupleAccess):
        return eval_expr(e.base, env)[e.index - 1]
    if isinstance(e, FieldAccess):
        return eval_expr(e.base, env)[e.name]
    if isinstance(e, TagTest):
        return eval_expr(e.base, env).tag == e.tag
    if isinstance(e, TagAccess):
        return eval_expr(e.base, env).payloads[e.base.type.tag_index(e.tag)]
    if isinstance(e, TagConstruct):
        u: UnionType = e.type
        k = u.tag_index(e.tag)
        payloads = [default_value(t) for _, t in u.alternatives]
        payloads[k] = eval_expr(e.value, env)
        return UnionValue(e.tag, tuple(payloads))
    if isinstance(e, Index):
        base = eval_expr(e.base, env)
        i = key_index(e.base.type.key, eval_expr(e.index, env))
        if i is None:
            raise EvalError("array index outside the key domain", e.pos)
        return base[i]
    raise EvalError(f"cannot evaluate {type(e).__name__}", e.pos)


def _binop(e: BinOp, env: dict[str, Any]) -> Any:
    op = e.op
    if op == "and":
        return eval_expr(e.left, env) and eval_expr(e.right, env)
    if op == "or":
        return eval_expr(e.left, env) or eval_expr(e.right, env)
    a, b = eval_expr(e.left, env), eval_expr(e.right, env)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0 or a % b:
            raise EvalError(f"inexact division {a} div {b}", e.pos)
        return a // b
    if op == "eq":
        return a == b
    if op == "neq":
        return a != b
    if op == "lt":
        return a < b
    if op == "leq":
        return a <= b
    if op == "gt":
        return a > b
    if op == "geq":
        return a >= b
    if op == "in":
        return contains_value(e.right.type.element, a) and a in b
    if op == "subseteq":
        return a <= b
    if op == "union":
        return a | b
    if op == "inter":
        return a & b
    if op == "diff":
        return a - b
    raise EvalError(f"unknown operator {op!r}", e.pos)


# -- source-level actions ----------------------------------------------------

def _slot_path(r: Expr, env: dict[str, Any]) -> tuple[str, tuple[int, ...]]:
    """Variable name and component path denoted by a reference expression."""
    if isinstance(r, Var):
        return r.name, ()
    name, path = _slot_path(r.base, env)
    if isinstance(r, TupleAccess):
        return name, path + (r.index - 1,)
    if isinstance(r, FieldAccess):
        return name, path + (r.base.type.field_index(r.name),)
    if isinstance(r, TagAccess):
        return name, path + (1 + r.base.type.tag_index(r.tag),)
    if isinstance(r, Index):
        i = key_index(r.base.type.key, eval_expr(r.index, env))
        if i is None:
            raise EvalError("array index outside the key domain", r.pos)
        return name, path + (i,)
    raise EvalError(f"{type(r).__name__} is not a reference", r.pos)


def _children(v: Any, t: TypeExpr):
    """Component values and types of a composite, in slot order; None for scalars and sets."""
    if isinstance(t, TupleType):
        return list(zip(v, t.components))
    if isinstance(t, RecordType):
        return [(x, c) for (_, x), (_, c) in zip(v.fields, t.fields)]
    if isinstance(t, UnionType):
        return [(v.tag, EnumType(t.tags))] + list(zip(v.payloads, (c for _, c in t.alternatives)))
    if isinstance(t, ArrayType):
        return [(x, t.value) for x in v]
    return None


def _slot_type(t: TypeExpr, path: tuple[int, ...]) -> TypeExpr:
    for i in path:
        if isinstance(t, TupleType):
            t = t.components[i]
        elif isinstance(t, RecordType):
            t = t.fields[i][1]
        elif isinstance(t, UnionType):
            if i == 0:
                t = EnumType(t.tags)
            else:
                t = t.alternatives[i - 1][1]
        else:
            t = t.value
    return t


def _explode(path: tuple[int, ...], v: Any, t: TypeExpr, out: list) -> None:
    kids = _children(v, t)
    if kids is None:
        out.append((path, v))
        return
    for i, (x, c) in enumerate(kids):
        _explode(path + (i,), x, c, out)


def _set_path(v: Any, t: TypeExpr, path: tuple[int, ...], new: Any) -> Any:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(t, TupleType):
        return v[:i] + (_set_path(v[i], t.components[i], rest, new),) + v[i + 1:]
    if isinstance(t, RecordType):
        name, ft = t.fields[i]
        return v.replace(name, _set_path(v[name], ft, rest, new))
    if isinstance(t, UnionType):
        if i == 0:
            return UnionValue(new, v.payloads)
        k = i - 1
        payload = _set_path(v.payloads[k], t.alternatives[k][1], rest, new)
        return UnionValue(v.tag, v.payloads[:k] + (payload,) + v.payloads[k + 1:])
    if isinstance(t, ArrayType):
        return v[:i] + (_set_path(v[i], t.value, rest, new),) + v[i + 1:]
    raise EvalError(f"cannot index into {t}")


def apply_action(model: SourceModel, state: dict[str, Any], action: Action | str,
                 args: tuple = ()) -> dict[str, Any]:
    """Apply a ground action to a source-level state and return the successor.

    Effect conditions, indices and values are evaluated in the pre-state; all
    enabled writes happen at once.  Raises :class:`ActionError` when the
    action is not applicable and :class:`WriteConflict` when two enabled
    effects write different values to one slot.
    """
    if isinstance(action, str):
        try:
            action = model.action(action)
        except KeyError:
            raise ActionError(f"unknown action {action!r}") from None
    if len(args) != len(action.params):
        raise ActionError(f"{action.name} expects {len(action.params)} arguments, got {len(args)}")
    env = dict(state)
    for p, v in zip(action.params, args):
        if not contains_value(p.type, v):
            raise ActionError(f"argument {p.name} of {action.name} is not a value of {p.type}")
        env[p.name] = v
    if not eval_expr(action.pre, env):
        raise ActionError(f"precondition of {action.name} does not hold")
    types = model.var_types()
    writes: dict[tuple[str, tuple[int, ...]], Any] = {}
    for eff in action.effects:
        if eff.cond is not None and not eval_expr(eff.cond, env):
            continue
        name, path = _slot_path(eff.target, env)
        value = eval_expr(eff.value, env)
        slot_type = _slot_type(types[name], path)
        if not value_fits(value, slot_type):
            raise ActionError(f"{action.name}: value {value!r} does not fit {slot_type}")
        leaves: list = []
        _explode(path, value, slot_type, leaves)
        for p, v in leaves:
            old = writes.setdefault((name, p), v)
            if old != v:
                raise WriteConflict(f"{action.name} writes {old!r} and {v!r} to one slot of {name}")
    new = dict(state)
    for (name, path), v in writes.items():
        new[name] = _set_path(new[name], types[name], path, v)
    return new


# -- semantics ---------------------------------------------------------------

class SourceSemantics:
    """States are tuples of values in declaration order; steps are ``(name, args)``."""

    level = "source"

    def __init__(self, model: SourceModel, arg_cap: int = 1 << 16):
        if not model.typed:
            raise TypalError("source semantics needs a typechecked model")
        self.model = model
        self.names = [d.name for d in model.vars]
        self.arg_cap = arg_cap
        self._ground: dict[str, list[tuple]] = {}

    def to_dict(self, state: tuple) -> dict[str, Any]:
        return dict(zip(self.names, state))

    def init(self) -> tuple:
        m = self.model.init_map()
        return tuple(m[n] for n in self.names)

    def is_goal(self, state: tuple) -> bool:
        if self.model.goal is None:
            return True
        try:
            return bool(eval_expr(self.model.goal, self.to_dict(state)))
        except EvalError:
            return False

    def arguments(self, a: Action) -> list[tuple]:
        if a.name not in self._ground:
            size = 1
            for p in a.params:
                size *= domain_size(p.type)
            if size > self.arg_cap:
                raise CapExceeded(f"{a.name} has {size} ground instances", self.arg_cap)
            self._ground[a.name] = list(itertools.product(*(domain_of(p.type) for p in a.params)))
        return self._ground[a.name]

    def apply(self, state: tuple, step) -> tuple:
        name, args = step
        new = apply_action(self.model, self.to_dict(state), name, tuple(args))
        return tuple(new[n] for n in self.names)

    def successors(self, state: tuple) -> Iterator[tuple[Any, tuple, int]]:
        for a in self.model.actions:
            for args in self.arguments(a):
                try:
                    yield (a.name, args), self.apply(state, (a.name, args)), 1
                except (ActionError, EvalError):
                    continue


def _solutions(f: logic.Formula, order: list[str]) -> Iterator[dict[str, bool]]:
    """All assignments to ``order`` satisfying ``f`` (which mentions no other atoms)."""

    def go(g: logic.Formula, i: int, acc: dict[str, bool]):
        if g == FALSE:
            return
        forced = {}
        if isinstance(g, Conj):
            for a in g.args:
                if isinstance(a, Atom):
                    forced[a.name] = True
                elif isinstance(a, Neg) and isinstance(a.arg, Atom):
                    forced[a.arg.name] = False
        elif isinstance(g, Atom):
            forced[g.name] = True
        elif isinstance(g, Neg) and isinstance(g.arg, Atom):
            forced[g.arg.name] = False
        if forced:
            g = logic.restrict(g, forced)
            acc = {**acc, **forced}
            if g == FALSE:
                return
        while i < len(order) and order[i] in acc:
            i += 1
        if i == len(order):
            if g == TRUE or logic.evaluate(g, acc):
                yield acc
            return
        bit = order[i]
        for value in (False, True):
            yield from go(logic.restrict(g, {bit: value}), i + 1, {**acc, bit: value})

    yield from go(logic.simplify(f), 0, {})


class BoolSemantics:
    """States are frozensets of true bits; steps are ``(name, binding)`` with binding a bit tuple."""

    level = "bool"

    def __init__(self, model: BoolModel):
        self.model = model
        self._checks = {a.name: logic.conj(a.pre, a.param_constraint()) for a in model.actions}

    def init(self) -> frozenset:
        return self.model.init

    def _env(self, state) -> dict[str, bool]:
        return {b: b in state for b in self.model.bits}

    def is_goal(self, state) -> bool:
        return logic.evaluate(self.model.goal, self._env(state))

    def bindings(self, a: BoolAction, state) -> Iterator[tuple[bool, ...]]:
        bits = a.param_bits
        f = logic.restrict(self._checks[a.name], self._env(state))
        for sol in _solutions(f, bits):
            yield tuple(sol[b] for b in bits)

    def _result(self, a: BoolAction, env: dict[str, bool], state):
        adds, dels = set(), set()
        for eff in a.effects:
            if logic.evaluate(eff.cond, env):
                (adds if eff.value else dels).add(eff.bit)
        clash = adds & dels
        if clash:
            raise WriteConflict(f"{a.name} both adds and deletes {sorted(clash)[0]}")
        return frozenset((state - dels) | adds)

    def apply(self, state, step):
        name, binding = step
        try:
            a = self.model.action(name)
        except KeyError:
            raise ActionError(f"unknown action {name!r}") from None
        if len(binding) != len(a.param_bits):
            raise ActionError(f"{name} expects {len(a.param_bits)} parameter bits")
        env = self._env(state)
        env.update(zip(a.param_bits, binding))
        if not logic.evaluate(self._checks[name], env):
            raise ActionError(f"precondition of {name} does not hold")
        return self._result(a, env, state)

    def successors(self, state):
        env = self._env(state)
        for a in self.model.actions:
            for binding in self.bindings(a, state):
                full = dict(env)
                full.update(zip(a.param_bits, binding))
                yield (a.name, binding), self._result(a, full, state), 1


class StripsSemantics:
    """States are frozensets of true bits; steps are ``(name, args)`` with one bool per parameter."""

    level = "strips"

    def __init__(self, model: StripsModel):
        self.model = model
        self.by_token: dict[str, list[StripsAction]] = {}
        turnstiles = set(model.turnstiles)
        for a in model.actions:
            token = next((n for n, v in a.pre if v and n in turnstiles), None)
            self.by_token.setdefault(token, []).append(a)
        self._actions = {a.name: a for a in model.actions}
        self._args = {a.name: list(itertools.product((False, True), repeat=len(a.params)))
                      for a in model.actions}

    def init(self) -> frozenset:
        return self.model.init

    def is_goal(self, state) -> bool:
        return all((n in state) == v for n, v in self.model.goal)

    @staticmethod
    def holds(lits, state, binding: dict[str, bool]) -> bool:
        for n, v in lits:
            actual = binding[n] if n in binding else n in state
            if actual != v:
                return False
        return True

    def _result(self, a: StripsAction, state, binding):
        adds, dels = set(), set()
        for eff in a.effects:
            if self.holds(eff.cond, state, binding):
                (adds if eff.value else dels).add(eff.bit)
        return frozenset((state - dels) | adds)

    def apply(self, state, step):
        name, args = step
        a = self._actions.get(name)
        if a is None:
            raise ActionError(f"unknown action {name!r}")
        if len(args) != len(a.params):
            raise ActionError(f"{name} expects {len(a.params)} arguments")
        binding = dict(zip(a.params, args))
        if not self.holds(a.pre, state, binding):
            raise ActionError(f"precondition of {name} does not hold")
        return self._result(a, state, binding)

    def cost(self, name: str) -> int:
        return self._actions[name].cost

    def candidates(self, state) -> list[StripsAction]:
        out = list(self.by_token.get(None, []))
        for token in self.model.turnstiles:
            if token in state:
                out.extend(self.by_token.get(token, []))
        return out

    def successors(self, state):
        for a in self.candidates(state):
            if not self.holds(a.pre, state, {}):
                continue
            for args in self._args[a.name]:
                yield (a.name, args), self._result(a, state, dict(zip(a.params, args))), a.cost


# -- search and validation ---------------------------------------------------

@dataclass
class SearchResult:
    plan: list | None
    expanded: int = 0
    frontier_peak: int = 0
    cost: int | None = None

    @property
    def solved(self) -> bool:
        return self.plan is not None


def bfs_solve(sem, cap: int = DEFAULT_STATE_CAP) -> SearchResult:
    """Cheapest plan by original-action count (0-1 BFS); ties go to declaration order."""
    start = sem.init()
    dist = {start: 0}
    parent: dict[Any, tuple[Any, Any]] = {}
    frontier = deque([start])
    expanded = peak = 0
    done = set()
    while frontier:
        peak = max(peak, len(frontier))
        s = frontier.popleft()
        if s in done:
            continue
        done.add(s)
        if sem.is_goal(s):
            plan = []
            while s in parent:
                s, step = parent[s]
                plan.append(step)
            plan.reverse()
            return SearchResult(plan, expanded, peak, _plan_cost(sem, plan))
        expanded += 1
        d = dist[s]
        for step, t, c in sem.successors(s):
            nd = d + c
            if t in dist and dist[t] <= nd:
                continue
            if t not in dist and len(dist) >= cap:
                raise CapExceeded(f"state space exceeds {cap} states", cap)
            dist[t] = nd
            parent[t] = (s, step)
            if c == 0:
                frontier.appendleft(t)
            else:
                frontier.append(t)
    return SearchResult(None, expanded, peak, None)


def _plan_cost(sem, plan) -> int:
    if isinstance(sem, StripsSemantics):
        return sum(sem.cost(name) for name, _ in plan)
    return len(plan)


def reachable(sem, cap: int = DEFAULT_STATE_CAP) -> set:
    start = sem.init()
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for _, t, _ in sem.successors(s):
            if t not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(f"state space exceeds {cap} states", cap)
                seen.add(t)
                stack.append(t)
    return seen


@dataclass
class Validation:
    ok: bool
    steps: int
    index: int | None = None  # 0-based index of the failing step
    reason: str = ""
    trace: list = field(default_factory=list, repr=False)

    def __str__(self) -> str:
        if self.ok:
            return f"VALID, {self.steps} steps"
        step = self.index if self.index == self.steps else self.index + 1
        return f"INVALID at step {step}: {self.reason}"


def validate_plan(sem, plan) -> Validation:
    """Replay ``plan``; report the first failing step or an unreached goal."""
    s = sem.init()
    trace = [s]
    for i, step in enumerate(plan):
        try:
            s = sem.apply(s, step)
        except (ActionError, EvalError, WriteConflict) as exc:
            return Validation(False, len(plan), i, str(exc), trace)
        trace.append(s)
    if not sem.is_goal(s):
        return Validation(False, len(plan), len(plan), "goal not reached", trace)
    return Validation(True, len(plan), None, "", trace)
