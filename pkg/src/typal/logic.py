"""Propositional formulas over named Boolean variables.

Formulas are built through :func:`conj`, :func:`disj`, :func:`neg` and
:func:`iff`, which simplify on construction (constant folding, flattening,
duplicate removal, complementary literals).  Construction-time
simplification can be switched off with :func:`simplification` to inspect
raw translations.
"""

from __future__ import annotations

import contextlib
from contextvars import ContextVar
from typing import Callable, Iterable, Iterator, Mapping

_SIMPLIFY: ContextVar[bool] = ContextVar("typal_simplify", default=True)


@contextlib.contextmanager
def simplification(enabled: bool) -> Iterator[None]:
    token = _SIMPLIFY.set(enabled)
    try:
        yield
    finally:
        _SIMPLIFY.reset(token)


class Formula:
    __slots__ = ("_hash",)

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)

    def __invert__(self) -> "Formula":
        return neg(self)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return str(self)


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value
        self._hash = hash(("const", value))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Const) and other.value == self.value

    def __str__(self) -> str:
        return "T" if self.value else "F"


TRUE = Const(True)
FALSE = Const(False)


class Atom(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("atom", name))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Atom) and other.name == self.name

    def __str__(self) -> str:
        return self.name


class Neg(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self.arg = arg
        self._hash = hash(("not", arg))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Neg) and other._hash == self._hash and other.arg == self.arg

    def __str__(self) -> str:
        return f"!{self.arg}"


class _Nary(Formula):
    __slots__ = ("args",)
    tag = ""
    sep = ""

    def __init__(self, args: tuple[Formula, ...]):
        if not args:
            raise ValueError(f"{type(self).__name__} needs at least one argument")
        self.args = args
        self._hash = hash((self.tag, args))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return (type(other) is type(self) and other._hash == self._hash
                and other.args == self.args)

    def __str__(self) -> str:
        return "(" + self.sep.join(map(str, self.args)) + ")"


class Conj(_Nary):
    __slots__ = ()
    tag = "and"
    sep = " & "


class Disj(_Nary):
    __slots__ = ()
    tag = "or"
    sep = " | "


class Iff(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._hash = hash(("iff", left, right))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return (isinstance(other, Iff) and other._hash == self._hash
                and other.left == self.left and other.right == self.right)

    def __str__(self) -> str:
        return f"({self.left} <-> {self.right})"


def const(value: bool) -> Formula:
    return TRUE if value else FALSE


def is_literal(f: Formula) -> bool:
    return isinstance(f, Atom) or (isinstance(f, Neg) and isinstance(f.arg, Atom))


def complement(f: Formula) -> Formula:
    return f.arg if isinstance(f, Neg) else Neg(f)


def neg(f: Formula) -> Formula:
    if not _SIMPLIFY.get():
        return Neg(f)
    if isinstance(f, Const):
        return const(not f.value)
    if isinstance(f, Neg):
        return f.arg
    return Neg(f)


def _nary(cls, unit: Const, zero: Const, fs: Iterable[Formula]) -> Formula:
    if not _SIMPLIFY.get():
        args = tuple(fs)
        if not args:
            return unit
        return args[0] if len(args) == 1 else cls(args)
    out: dict[Formula, None] = {}
    stack = list(fs)
    stack.reverse()
    while stack:
        f = stack.pop()
        if isinstance(f, cls):
            stack.extend(reversed(f.args))
        elif f == zero:
            return zero
        elif f == unit:
            continue
        else:
            out[f] = None
    for f in out:
        if complement(f) in out:
            return zero
    if not out:
        return unit
    if len(out) == 1:
        return next(iter(out))
    return cls(tuple(out))


def conj(*fs: Formula) -> Formula:
    return _nary(Conj, TRUE, FALSE, fs)


def disj(*fs: Formula) -> Formula:
    return _nary(Disj, FALSE, TRUE, fs)


def conj_all(fs: Iterable[Formula]) -> Formula:
    return _nary(Conj, TRUE, FALSE, fs)


def disj_all(fs: Iterable[Formula]) -> Formula:
    return _nary(Disj, FALSE, TRUE, fs)


def iff(a: Formula, b: Formula) -> Formula:
    if not _SIMPLIFY.get():
        return Iff(a, b)
    if isinstance(a, Const):
        return b if a.value else neg(b)
    if isinstance(b, Const):
        return a if b.value else neg(a)
    if a == b:
        return TRUE
    if complement(a) == b:
        return FALSE
    return Iff(a, b)


def transform(f: Formula, leaf: Callable[[Formula], Formula]) -> Formula:
    """Rebuild ``f`` bottom-up through the smart constructors, mapping leaves."""
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, (Atom, Const)):
            out = leaf(g)
        elif isinstance(g, Neg):
            out = neg(go(g.arg))
        elif isinstance(g, Conj):
            out = conj_all(go(a) for a in g.args)
        elif isinstance(g, Disj):
            out = disj_all(go(a) for a in g.args)
        elif isinstance(g, Iff):
            out = iff(go(g.left), go(g.right))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[key] = out
        return out

    return go(f)


def simplify(f: Formula) -> Formula:
    """Apply all construction-time rewrites everywhere in ``f``.  Idempotent."""
    with simplification(True):
        return transform(f, lambda g: g)


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    return transform(f, lambda g: mapping.get(g.name, g) if isinstance(g, Atom) else g)


def restrict(f: Formula, values: Mapping[str, bool]) -> Formula:
    """Partially evaluate ``f`` under a partial assignment, simplifying as it goes."""
    with simplification(True):
        return transform(
            f, lambda g: const(values[g.name]) if isinstance(g, Atom) and g.name in values else g)


def rename(f: Formula, fn: Callable[[str], str]) -> Formula:
    return transform(f, lambda g: Atom(fn(g.name)) if isinstance(g, Atom) else g)


def to_nnf(f: Formula) -> Formula:
    """Push negations to atoms and expand ``Iff``; the result contains no Iff."""
    memo: dict[tuple[int, bool], Formula] = {}

    def go(g: Formula, positive: bool) -> Formula:
        key = (id(g), positive)
        if key in memo:
            return memo[key]
        if isinstance(g, Const):
            out = const(g.value == positive)
        elif isinstance(g, Atom):
            out = g if positive else neg(g)
        elif isinstance(g, Neg):
            out = go(g.arg, not positive)
        elif isinstance(g, Conj):
            parts = [go(a, positive) for a in g.args]
            out = conj_all(parts) if positive else disj_all(parts)
        elif isinstance(g, Disj):
            parts = [go(a, positive) for a in g.args]
            out = disj_all(parts) if positive else conj_all(parts)
        elif isinstance(g, Iff):
            a, b = g.left, g.right
            if positive:
                out = disj(conj(go(a, True), go(b, True)), conj(go(a, False), go(b, False)))
            else:
                out = disj(conj(go(a, True), go(b, False)), conj(go(a, False), go(b, True)))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[key] = out
        return out

    return go(f, True)


def is_nnf(f: Formula) -> bool:
    if isinstance(f, (Atom, Const)):
        return True
    if isinstance(f, Neg):
        return isinstance(f.arg, Atom)
    if isinstance(f, (Conj, Disj)):
        return all(is_nnf(a) for a in f.args)
    return False


def contains_or(f: Formula) -> bool:
    if isinstance(f, (Disj, Iff)):
        return True
    if isinstance(f, Neg):
        return contains_or(f.arg)
    if isinstance(f, Conj):
        return any(contains_or(a) for a in f.args)
    return False


def atoms(f: Formula) -> list[str]:
    seen: dict[str, None] = {}
    stack = [f]
    visited: set[int] = set()
    while stack:
        g = stack.pop()
        if id(g) in visited:
            continue
        visited.add(id(g))
        if isinstance(g, Atom):
            seen.setdefault(g.name)
        elif isinstance(g, Neg):
            stack.append(g.arg)
        elif isinstance(g, _Nary):
            stack.extend(reversed(g.args))
        elif isinstance(g, Iff):
            stack.extend((g.right, g.left))
    return list(seen)


def size(f: Formula) -> int:
    if isinstance(f, (Atom, Const)):
        return 1
    if isinstance(f, Neg):
        return 1 + size(f.arg)
    if isinstance(f, _Nary):
        return 1 + sum(size(a) for a in f.args)
    return 1 + size(f.left) + size(f.right)


def evaluate(f: Formula, env: Mapping[str, bool]) -> bool:
    if isinstance(f, Atom):
        return env[f.name]
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Neg):
        return not evaluate(f.arg, env)
    if isinstance(f, Conj):
        return all(evaluate(a, env) for a in f.args)
    if isinstance(f, Disj):
        return any(evaluate(a, env) for a in f.args)
    return evaluate(f.left, env) == evaluate(f.right, env)


def evaluate_masks(f: Formula, masks: Mapping[str, int], full: int,
                   memo: dict[int, int] | None = None) -> int:
    """Evaluate ``f`` on many assignments at once.

    ``masks[a]`` has bit ``k`` set iff atom ``a`` is true in assignment ``k``;
    ``full`` has one bit per assignment.  Returns the mask of satisfying
    assignments.
    """
    if memo is None:
        memo = {}

    def go(g: Formula) -> int:
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, Atom):
            out = masks[g.name]
        elif isinstance(g, Const):
            out = full if g.value else 0
        elif isinstance(g, Neg):
            out = full & ~go(g.arg)
        elif isinstance(g, Conj):
            out = full
            for a in g.args:
                out &= go(a)
        elif isinstance(g, Disj):
            out = 0
            for a in g.args:
                out |= go(a)
        else:
            out = full & ~(go(g.left) ^ go(g.right))
        memo[key] = out
        return out

    return go(f)


def truth_table(f: Formula, names: list[str] | None = None) -> int:
    """Truth table of ``f`` as a bitmask over all assignments to ``names``."""
    names = atoms(f) if names is None else names
    n = len(names)
    full = (1 << (1 << n)) - 1
    masks = {}
    for i, name in enumerate(names):
        m = 0
        for k in range(1 << n):
            if (k >> i) & 1:
                m |= 1 << k
        masks[name] = m
    return evaluate_masks(f, masks, full)


def equivalent(a: Formula, b: Formula) -> bool:
    names = sorted(set(atoms(a)) | set(atoms(b)))
    return truth_table(a, names) == truth_table(b, names)


def canonical(f: Formula) -> str:
    """String form that is invariant under reordering of And/Or/Iff arguments."""
    if isinstance(f, (Atom, Const)):
        return str(f)
    if isinstance(f, Neg):
        return "!" + canonical(f.arg)
    if isinstance(f, _Nary):
        return "(" + f.sep.join(sorted(canonical(a) for a in f.args)) + ")"
    return "(" + " <-> ".join(sorted((canonical(f.left), canonical(f.right)))) + ")"


def literals(f: Formula) -> list[tuple[str, bool]] | None:
    """Flatten a conjunction of literals into ``(atom, polarity)`` pairs.

    Returns None for ``FALSE``; raises ValueError when ``f`` is not a
    conjunction of literals.
    """
    if f == TRUE:
        return []
    if f == FALSE:
        return None
    out: dict[tuple[str, bool], None] = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Conj):
            stack.extend(reversed(g.args))
        elif isinstance(g, Atom):
            out[(g.name, True)] = None
        elif isinstance(g, Neg) and isinstance(g.arg, Atom):
            out[(g.arg.name, False)] = None
        elif g == TRUE:
            continue
        elif g == FALSE:
            return None
        else:
            raise ValueError(f"not a conjunction of literals: {f}")
    lits = list(out)
    if any((a, not p) in out for a, p in lits):
        return None
    return lits


def exactly_one(names: list[str]) -> Formula:
    bits = [Atom(n) for n in names]
    pairs = [disj(neg(bits[i]), neg(bits[j]))
             for i in range(len(bits)) for j in range(i + 1, len(bits))]
    return conj(disj_all(bits), *pairs)
