"""PDDL emission, plan files and plan reconstruction.

State bits become 0-ary predicates.  Parameter bits become ``boolval``
parameters tested through the static predicate ``istrue``; the only objects
are ``btrue`` and ``bfalse``.

The module also contains a small reader for the emitted PDDL and a grounded
interpreter over it, used to check that the text means what the in-memory
STRIPS model means.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .adt import raise_value
from .booleanize import decode_value, map_leaves, type_shape
from .errors import DecodeError, PlanError, TypalError
from .strips import ChainMetadata, Literal, StripsAction, StripsModel
from .parser import parse_type

REQUIREMENTS = "(:requirements :strips :typing :negative-preconditions :conditional-effects)"


# -- emission ----------------------------------------------------------------

@dataclass(frozen=True)
class PddlDocument:
    domain: str
    problem: str


def _lit(name: str, value: bool, params: set[str]) -> str:
    atom = f"(istrue {name})" if name in params else f"({name})"
    return atom if value else f"(not {atom})"


def _conj(lits, params: set[str], indent: str) -> str:
    if not lits:
        return "(and)"
    if len(lits) == 1:
        return _lit(*lits[0], params)
    inner = f"\n{indent}  ".join(_lit(n, v, params) for n, v in lits)
    return f"(and {inner})"


def _action_text(a: StripsAction) -> str:
    params = set(a.params)
    lines = [f"  (:action {a.name}"]
    lines.append(f"    :parameters ({' '.join(a.params)} - boolval)" if a.params
                 else "    :parameters ()")
    lines.append(f"    :precondition {_conj(a.pre, params, '    ')}")
    effects = []
    for e in a.effects:
        target = f"({e.bit})" if e.value else f"(not ({e.bit}))"
        if e.cond:
            effects.append(f"(when {_conj(e.cond, params, '        ')} {target})")
        else:
            effects.append(target)
    if not effects:
        lines.append("    :effect (and))")
    else:
        body = "\n      ".join(effects)
        lines.append(f"    :effect (and\n      {body}))")
    return "\n".join(lines)


def emit_pddl(model: StripsModel, name: str = "typal") -> PddlDocument:
    name = re.sub(r"[^A-Za-z0-9_-]", "_", name) or "typal"
    if not name[0].isalpha():
        name = "d" + name
    for a in model.actions:
        for lits in [a.pre] + [e.cond for e in a.effects]:
            if not all(isinstance(n, str) and isinstance(v, bool) for n, v in lits):
                raise TypalError(f"internal: action {a.name} is not in STRIPS form")
    preds = "\n    ".join(["(istrue ?b - boolval)"] + [f"({b})" for b in model.bits])
    domain = "\n".join([
        f"(define (domain {name})",
        f"  {REQUIREMENTS}",
        "  (:types boolval)",
        f"  (:predicates\n    {preds})",
        *[_action_text(a) for a in model.actions],
        ")",
    ]) + "\n"
    init = ["(istrue btrue)"] + [f"({b})" for b in model.bits if b in model.init]
    goal = _conj(list(model.goal), set(), "    ")
    problem = "\n".join([
        f"(define (problem {name}-problem)",
        f"  (:domain {name})",
        "  (:objects btrue bfalse - boolval)",
        "  (:init\n    " + "\n    ".join(init) + ")",
        f"  (:goal {goal})",
        ")",
    ]) + "\n"
    return PddlDocument(domain, problem)


# -- plan files --------------------------------------------------------------

def parse_plan(text: str, model: StripsModel | None = None) -> list[tuple[str, tuple[bool, ...]]]:
    """Read a ``(name arg*)`` per line plan; ``;`` starts a comment.

    With a model, action names are resolved (exact match first, then
    case-insensitively) and arities are checked.
    """
    names = {}
    if model is not None:
        names = {a.name: a for a in model.actions}
        lower = {a.name.lower(): a for a in model.actions}
    plan = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\(\s*([^\s()]+)((?:\s+[^\s()]+)*)\s*\)", line)
        if not m:
            raise PlanError(f"malformed plan line: {raw.strip()!r}", (lineno, 1))
        name, args = m.group(1), m.group(2).split()
        values = []
        for arg in args:
            if arg.lower() not in ("btrue", "bfalse"):
                raise PlanError(f"unknown object {arg!r}", (lineno, 1))
            values.append(arg.lower() == "btrue")
        if model is not None:
            a = names.get(name) or lower.get(name.lower())
            if a is None:
                raise PlanError(f"unknown action {name!r}", (lineno, 1))
            if len(values) != len(a.params):
                raise PlanError(f"{a.name} expects {len(a.params)} arguments, got {len(values)}",
                                (lineno, 1))
            name = a.name
        plan.append((name, tuple(values)))
    return plan


def format_plan(plan) -> str:
    lines = []
    for name, args in plan:
        objs = " ".join("btrue" if v else "bfalse" for v in args)
        lines.append(f"({name}{' ' + objs if objs else ''})")
    return "\n".join(lines) + ("\n" if lines else "")


# -- reconstruction ----------------------------------------------------------

def _step_params(info: ChainMetadata) -> dict[str, list[str]]:
    """Parameter bits of every chain step, in parameter order."""
    out: dict[str, list[str]] = {s: [] for s in info.chain}
    for bits in info.param_bits.values():
        for b in bits:
            src = info.sources[b]
            if isinstance(src, str):
                out[src].append(b)
    order = {b: i for i, b in enumerate(b for bits in info.param_bits.values() for b in bits)}
    for s in out:
        out[s].sort(key=order.__getitem__)
    return out


def fold_plan(plan, meta: dict[str, ChainMetadata], goal_chain: list[str] = ()):
    """Fold chains back into original actions with their full parameter bit assignments.

    Returns ``[(action name, {param bit: bool})]``; bits that lowering fixed
    to constants are included.  Raises :class:`PlanError` on broken chains.
    """
    owner: dict[str, tuple[str, int]] = {}
    for name, info in meta.items():
        for i, step in enumerate(info.chain):
            owner[step] = (name, i)
    step_params = {name: _step_params(info) for name, info in meta.items()}
    goal_steps = set(goal_chain)
    out = []
    current: str | None = None
    pos = 0
    bits: dict[str, bool] = {}
    for k, (step, args) in enumerate(plan):
        if step in goal_steps:
            if current is not None:
                raise PlanError(f"broken chain: {step} interrupts {current} at step {k + 1}")
            continue
        if step not in owner:
            raise PlanError(f"unknown action {step!r} at step {k + 1}")
        name, i = owner[step]
        if current is None:
            if i != 0:
                raise PlanError(f"broken chain: {step} at step {k + 1} does not start {name}")
            current, pos, bits = name, 0, {}
        elif name != current or i != pos:
            raise PlanError(f"broken chain: expected {meta[current].chain[pos]} at step {k + 1}, "
                            f"got {step}")
        params = step_params[name][step]
        if len(args) != len(params):
            raise PlanError(f"{step} expects {len(params)} arguments, got {len(args)}")
        bits.update(zip(params, args))
        pos += 1
        if pos == len(meta[name].chain):
            for b, src in meta[name].sources.items():
                if isinstance(src, bool):
                    bits[b] = src
            out.append((name, bits))
            current = None
    if current is not None:
        raise PlanError(f"broken chain: plan ends inside {current}")
    return out


def reconstruct_plan(plan, meta: dict[str, ChainMetadata], goal_chain: list[str] = ()):
    """Fold chains back into source actions with decoded typed arguments.

    Returns a list of ``(action name, args)`` where each argument is a
    source-level literal value.
    """
    return [(name, _decode_args(meta[name], bits)) for name, bits in fold_plan(plan, meta, goal_chain)]


def _decode_args(info: ChainMetadata, values: dict[str, bool]) -> tuple:
    args = []
    for pname, lowered_text, source_text in info.params:
        lowered, source = parse_type(lowered_text), parse_type(source_text)
        names = iter(info.param_bits[pname])
        shape = type_shape(lowered)
        tree = _fill(shape, names, values)
        try:
            v = decode_value(lowered, tree, pname)
        except DecodeError as exc:
            raise PlanError(f"cannot decode argument {pname} of {info.action}: {exc}") from None
        args.append(raise_value(v, source))
    return tuple(args)


def _fill(shape, names, values):
    if shape is None:
        return values[next(names)]
    return tuple(_fill(s, names, values) for s in shape)


def lift_plan(plan, model: StripsModel) -> list[tuple[str, tuple[bool, ...]]]:
    """Expand a Boolean-level plan ``[(action, param bits)]`` into STRIPS chain steps.

    Useful when searching the STRIPS model directly is too expensive: the
    result can be validated against the STRIPS semantics.
    """
    params = {a.name: a.params for a in model.actions}
    out = []
    for name, binding in plan:
        info = model.meta.get(name)
        if info is None:
            raise PlanError(f"action {name!r} has no STRIPS chain")
        order = [b for bits in info.param_bits.values() for b in bits]
        values = dict(zip(order, binding))
        for step in info.chain:
            out.append((step, tuple(values[p] for p in params[step])))
    if model.goal_chain:
        out.extend((step, ()) for step in model.goal_chain)
    return out


# -- reading the emitted PDDL back -------------------------------------------

def parse_sexpr(text: str):
    tokens = re.findall(r"\(|\)|[^\s()]+", re.sub(r";[^\n]*", "", text))
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos] != ")":
                items.append(read())
            pos += 1
            return items
        if tok == ")":
            raise PlanError("unbalanced ')' in PDDL")
        return tok.lower()

    try:
        out = read()
    except IndexError:
        raise PlanError("unexpected end of PDDL text") from None
    return out


@dataclass
class GroundAction:
    params: list[str]
    pre: Any
    effect: Any


class PddlInterpreter:
    """Grounded semantics of an emitted domain/problem pair (delete-then-add)."""

    def __init__(self, domain_text: str, problem_text: str):
        dom = parse_sexpr(domain_text)
        prob = parse_sexpr(problem_text)
        self.actions: dict[str, GroundAction] = {}
        for item in dom[2:]:
            if item[0] == ":action":
                fields = dict(zip(item[2::2], item[3::2]))
                params = [p for p in fields[":parameters"] if p.startswith("?")]
                self.actions[item[1]] = GroundAction(params, fields[":precondition"],
                                                     fields[":effect"])
        sections = {s[0]: s[1:] for s in prob[2:]}
        self.static = {("istrue", "btrue")}
        self.init = frozenset(a[0] for a in sections[":init"] if len(a) == 1)
        self.goal = sections[":goal"][0]

    def _holds(self, f, state, binding) -> bool:
        head = f[0]
        if head == "and":
            return all(self._holds(g, state, binding) for g in f[1:])
        if head == "not":
            return not self._holds(f[1], state, binding)
        if head == "istrue":
            return ("istrue", binding.get(f[1], f[1])) in self.static
        return head in state

    def apply(self, state: frozenset, name: str, args: tuple[bool, ...]) -> frozenset:
        a = self.actions.get(name.lower())
        if a is None:
            raise PlanError(f"unknown action {name!r}")
        if len(args) != len(a.params):
            raise PlanError(f"{name} expects {len(a.params)} arguments")
        binding = {p: "btrue" if v else "bfalse" for p, v in zip(a.params, args)}
        if not self._holds(a.pre, state, binding):
            raise PlanError(f"precondition of {name} does not hold")
        adds, dels = set(), set()
        effects = a.effect[1:] if a.effect[0] == "and" else [a.effect]
        for eff in effects:
            if eff[0] == "when":
                if not self._holds(eff[1], state, binding):
                    continue
                eff = eff[2]
            if eff[0] == "not":
                dels.add(eff[1][0])
            else:
                adds.add(eff[0])
        return frozenset((state - dels) | adds)

    def is_goal(self, state: frozenset) -> bool:
        return self._holds(self.goal, state, {})

    def trace(self, plan) -> list[frozenset]:
        s = self.init
        out = [s]
        for name, args in plan:
            s = self.apply(s, name, args)
            out.append(s)
        return out
