"""Lower a Boolean model to STRIPS with conditional effects.

Every action becomes a chain of steps executed back to back:

1. exactly-one constraints of the decomposed parameters join the precondition;
2. conditions are put in negation normal form;
3. disjunctions are eliminated in rounds (innermost first).  Round ``i``
   yields an auxiliary step ``b-<a>-<i>`` that sets ``w`` variables, and any
   parameter first mentioned there moves to that step, leaving a shadow
   variable behind for the later steps;
4. parameter literals in a step's precondition are fixed to constants;
5. steps with more than ``m`` parameter bits are split into ``c`` steps that
   copy their parameter bits into store variables.

Turnstile variables (``aux-p0`` plus one per chain link) make every chain
atomic: no other action can start while a chain is running.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .booleanize import BoolAction, BoolModel
from .errors import TypalError
from .logic import (
    FALSE, TRUE, Atom, Conj, Disj, Formula, atoms, conj, conj_all, contains_or, disj_all,
    literals, neg, restrict, substitute, to_nnf,
)

Literal = tuple[str, bool]

P0 = "aux-p0"
GOAL_REACHED = "aux-goal-reached"


@dataclass(frozen=True)
class StripsEffect:
    cond: tuple[Literal, ...]
    bit: str
    value: bool

    def __str__(self) -> str:
        return f"when {format_literals(self.cond)}: {self.bit} := {'T' if self.value else 'F'}"


@dataclass
class StripsAction:
    name: str
    params: list[str]
    pre: tuple[Literal, ...]
    effects: list[StripsEffect]
    origin: str = ""
    kind: str = "main"  # main | aux | split | goal

    @property
    def cost(self) -> int:
        """Steps that stand for an original action cost 1, bookkeeping steps 0."""
        return 1 if self.kind == "main" else 0


@dataclass
class ChainMetadata:
    """How one source action maps onto its STRIPS chain."""

    action: str
    chain: list[str]
    params: list[tuple[str, str, str]]  # name, lowered type, source type
    param_bits: dict[str, list[str]]
    sources: dict[str, Any]  # bit -> step name, or the bool it was fixed to
    w_table: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"chain": self.chain, "params": [list(p) for p in self.params],
                "param_bits": self.param_bits, "sources": self.sources, "w": self.w_table}

    @classmethod
    def from_json(cls, name: str, data: dict) -> "ChainMetadata":
        return cls(name, list(data["chain"]), [tuple(p) for p in data["params"]],
                   {k: list(v) for k, v in data["param_bits"].items()}, dict(data["sources"]),
                   dict(data.get("w", {})))


@dataclass
class StripsModel:
    bits: list[str]
    init: frozenset[str]
    goal: tuple[Literal, ...]
    actions: list[StripsAction]
    meta: dict[str, ChainMetadata]
    goal_chain: list[str]
    turnstiles: list[str]
    max_params: int

    def action(self, name: str) -> StripsAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def meta_json(self) -> str:
        data = {"max_params": self.max_params, "goal_chain": self.goal_chain,
                "actions": {k: v.to_json() for k, v in self.meta.items()}}
        return json.dumps(data, indent=1, sort_keys=False) + "\n"

    def describe(self) -> str:
        lines = [f"bits ({len(self.bits)}): {' '.join(self.bits)}",
                 f"init: {' '.join(b for b in self.bits if b in self.init)}",
                 f"goal: {format_literals(self.goal)}"]
        for a in self.actions:
            lines.append(f"action {a.name}({' '.join(a.params)}) [{a.kind} of {a.origin or '-'}]")
            lines.append(f"  pre: {format_literals(a.pre)}")
            lines.extend(f"  {e}" for e in a.effects)
        return "\n".join(lines)


def load_meta(text: str) -> tuple[dict[str, ChainMetadata], list[str]]:
    data = json.loads(text)
    meta = {k: ChainMetadata.from_json(k, v) for k, v in data["actions"].items()}
    return meta, list(data.get("goal_chain", []))


def format_literals(lits) -> str:
    if not lits:
        return "T"
    return " & ".join(n if v else f"!{n}" for n, v in lits)


# -- disjunction elimination -------------------------------------------------

def eliminate_disjunctions(formulas: list[Formula], prefix: str):
    """Replace disjunctions by fresh atoms, innermost first.

    Returns the rewritten formulas (Or-free) and the rounds: one list of
    ``(w_name, disjunction)`` per round.  Identical disjunctions share a
    variable.
    """
    table: dict[Formula, str] = {}
    rounds: list[list[tuple[str, Formula]]] = []
    current = list(formulas)
    while any(contains_or(f) for f in current):
        entries: list[tuple[str, Formula]] = []
        memo: dict[int, Formula] = {}

        def go(g: Formula) -> Formula:
            if id(g) in memo:
                return memo[id(g)]
            if isinstance(g, Disj):
                if not any(contains_or(a) for a in g.args):
                    name = table.get(g)
                    if name is None:
                        name = f"{prefix}-w{len(rounds) + 1}_{len(entries) + 1}"
                        table[g] = name
                        entries.append((name, g))
                    out = Atom(name)
                else:
                    out = disj_all(go(a) for a in g.args)
            elif isinstance(g, Conj):
                out = conj_all(go(a) for a in g.args)
            else:
                out = g
            memo[id(g)] = out
            return out

        current = [go(f) for f in current]
        rounds.append(entries)
    return current, rounds


def disjuncts(f: Formula) -> tuple[Formula, ...]:
    return f.args if isinstance(f, Disj) else (f,)


# -- chains ------------------------------------------------------------------

@dataclass
class _Step:
    name: str
    params: list[str]
    pre: Formula
    effects: list[tuple[Formula, str, bool]]
    kind: str


def _store_name(step: str, bit: str) -> str:
    return f"aux-{step}-st-{bit.lstrip('?')}"


def _fix_params(step: _Step, fixed: dict[str, bool]) -> None:
    lits = literals(step.pre)
    if lits is None:
        return
    own = set(step.params)
    values = {n: v for n, v in lits if n in own}
    if not values:
        return
    fixed.update(values)
    step.params = [p for p in step.params if p not in values]
    step.pre = restrict(step.pre, values)
    step.effects = [(restrict(c, values), b, v) for c, b, v in step.effects]


def _split(step: _Step, m: int, aux_bits: list[str]) -> list[_Step]:
    if len(step.params) <= m:
        return [step]
    groups = [step.params[i:i + m] for i in range(0, len(step.params), m)]
    out = []
    stores = {}
    for j, group in enumerate(groups, 1):
        effects = []
        for q in group:
            st = stores[q] = _store_name(step.name, q)
            aux_bits.append(st)
            effects.append((Atom(q), st, True))
            effects.append((neg(Atom(q)), st, False))
        out.append(_Step(f"c-{step.name}-{j}", list(group), step.pre if j == 1 else TRUE,
                         effects, "split"))
    mapping = {q: Atom(st) for q, st in stores.items()}
    effects = [(substitute(c, mapping), b, v) for c, b, v in step.effects]
    effects.extend((TRUE, st, False) for st in stores.values())
    out.append(_Step(step.name, [], TRUE, effects, step.kind))
    return out


def _link(steps: list[_Step], prefix: str, aux_bits: list[str],
          turnstiles: list[str]) -> list[_Step]:
    """Wire turnstiles through a chain; a single step only waits for ``p0``."""
    p0 = Atom(P0)
    if len(steps) == 1:
        steps[0].pre = conj(steps[0].pre, p0)
        return steps
    ts = [f"{prefix}-t{i}" for i in range(1, len(steps))]
    aux_bits.extend(ts)
    turnstiles.extend(ts)
    for i, s in enumerate(steps):
        before = p0 if i == 0 else Atom(ts[i - 1])
        after = ts[i] if i < len(ts) else P0
        s.pre = conj(s.pre, before)
        s.effects = s.effects + [(TRUE, before.name, False), (TRUE, after, True)]
    return steps


def _finish(s: _Step, origin: str) -> StripsAction | None:
    pre = literals(s.pre)
    if pre is None:
        return None
    effects = []
    for c, b, v in s.effects:
        lits = literals(c)
        if lits is not None:
            effects.append(StripsEffect(tuple(lits), b, v))
    return StripsAction(s.name, list(s.params), tuple(pre), effects, origin, s.kind)


def lower_action(a: BoolAction, m: int, aux_bits: list[str], turnstiles: list[str]):
    """Lower one Boolean action; returns ``(steps, metadata)`` or None if it can never apply.

    Auxiliary bits and turnstiles are appended to the given lists only when
    the action survives.
    """
    new_bits: list[str] = []
    new_ts: list[str] = []
    prefix = f"aux-{a.name}"
    pre = to_nnf(conj(a.pre, a.param_constraint()))
    conds = [to_nnf(e.cond) for e in a.effects]
    rewritten, rounds = eliminate_disjunctions([pre] + conds, prefix)
    pre, conds = rewritten[0], rewritten[1:]

    param_bits = a.param_bits
    param_set = set(param_bits)
    owner: dict[str, int] = {}
    for r, entries in enumerate(rounds):
        for _, phi in entries:
            for name in atoms(phi):
                if name in param_set and name not in owner:
                    owner[name] = r
    shadow = {p: f"{prefix}-sh-{p.lstrip('?')}" for p in param_bits if p in owner}
    w_names = [w for entries in rounds for w, _ in entries]
    new_bits.extend(w_names)
    new_bits.extend(shadow.values())

    steps: list[_Step] = []
    for r, entries in enumerate(rounds):
        moved_before = {p: Atom(shadow[p]) for p, o in owner.items() if o < r}
        own = [p for p in param_bits if owner.get(p) == r]
        effects = []
        for w, phi in entries:
            for psi in disjuncts(phi):
                effects.append((substitute(psi, moved_before), w, True))
        for p in own:
            effects.append((Atom(p), shadow[p], True))
            effects.append((neg(Atom(p)), shadow[p], False))
        steps.append(_Step(f"b-{a.name}-{r + 1}", own, TRUE, effects, "aux"))

    moved = {p: Atom(sh) for p, sh in shadow.items()}
    effects = [(substitute(c, moved), e.bit, e.value) for c, e in zip(conds, a.effects)]
    effects.extend((TRUE, w, False) for w in w_names)
    effects.extend((TRUE, sh, False) for sh in shadow.values())
    main = _Step(a.name, [p for p in param_bits if p not in owner], substitute(pre, moved),
                 effects, "main")
    if main.pre == FALSE:
        return None
    steps.append(main)

    fixed: dict[str, bool] = {}
    chain: list[_Step] = []
    for s in steps:
        _fix_params(s, fixed)
        chain.extend(_split(s, m, new_bits))
    chain = _link(chain, prefix, new_bits, new_ts)
    actions = []
    for s in chain:
        act = _finish(s, a.name)
        if act is None:
            return None
        actions.append(act)

    sources: dict[str, Any] = {}
    for act in actions:
        for p in act.params:
            sources[p] = act.name
    sources.update(fixed)
    for p in param_bits:
        if p not in sources:
            raise TypalError(f"internal: parameter bit {p} of {a.name} was lost in lowering")
    w_table = {w: str(phi) for entries in rounds for w, phi in entries}
    meta = ChainMetadata(a.name, [act.name for act in actions],
                         [(p.name, str(p.type), str(p.source_type or p.type))
                          for p in a.params],
                         {p.name: p.bits for p in a.params},
                         {p: sources[p] for p in param_bits}, w_table)
    aux_bits.extend(new_bits)
    turnstiles.extend(new_ts)
    return actions, meta


def lower_goal(goal: Formula, aux_bits: list[str], turnstiles: list[str]):
    """Return ``(goal literals, goal-chain actions)``."""
    g = to_nnf(goal)
    if not contains_or(g):
        lits = literals(g)
        if lits is not None:
            return tuple(lits), []
        aux_bits.append(GOAL_REACHED)
        return ((GOAL_REACHED, True),), []
    rewritten, rounds = eliminate_disjunctions([g], "aux-goal")
    aux_bits.extend(w for entries in rounds for w, _ in entries)
    steps = [_Step(f"goal-b-{r + 1}", [], TRUE,
                   [(psi, w, True) for w, phi in entries for psi in disjuncts(phi)], "goal")
             for r, entries in enumerate(rounds)]
    steps.append(_Step("goal-finish", [], rewritten[0], [(TRUE, GOAL_REACHED, True)], "goal"))
    aux_bits.append(GOAL_REACHED)
    steps = _link(steps, "aux-goal", aux_bits, turnstiles)
    actions = [_finish(s, "") for s in steps]
    if any(a is None for a in actions):
        return ((GOAL_REACHED, True),), []
    return ((GOAL_REACHED, True),), actions


def check_names(bits: list[str], actions: list[StripsAction]) -> None:
    for kind, names in (("bit", bits), ("action", [a.name for a in actions])):
        seen: dict[str, str] = {}
        for n in names:
            if n.lower() in seen:
                raise TypalError(f"{kind} name clash after lowering: {seen[n.lower()]!r} and {n!r}")
            seen[n.lower()] = n


def lower_model(model: BoolModel, max_params: int = 8) -> StripsModel:
    if max_params < 1:
        raise TypalError("max-params must be at least 1")
    aux_bits: list[str] = [P0]
    turnstiles: list[str] = [P0]
    actions: list[StripsAction] = []
    meta: dict[str, ChainMetadata] = {}
    for a in model.actions:
        lowered = lower_action(a, max_params, aux_bits, turnstiles)
        if lowered is None:
            continue
        steps, info = lowered
        actions.extend(steps)
        meta[a.name] = info
    goal, goal_steps = lower_goal(model.goal, aux_bits, turnstiles)
    actions.extend(goal_steps)
    bits = list(model.bits) + aux_bits
    check_names(bits, actions)
    return StripsModel(bits, model.init | {P0}, goal, actions, meta,
                       [s.name for s in goal_steps], turnstiles, max_params)
