"""Type grammar of the modeling language and the literal values it denotes.

Literal values are plain Python objects so they can be hashed into search
states:

* ``bool`` -> ``bool``
* ``n..m`` -> ``int``
* enums -> item name (``str``)
* tuples and arrays -> ``tuple`` (arrays are ordered by ``domain_of(key)``)
* sets -> ``frozenset``
* records -> :class:`RecordValue`, unions -> :class:`UnionValue`
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Union

from .errors import DomainTooLarge

DEFAULT_DOMAIN_CAP = 2 ** 20


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty integer range {self.lo}..{self.hi}")

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


@dataclass(frozen=True)
class EnumType:
    items: tuple[str, ...]

    def __post_init__(self):
        if not self.items or len(set(self.items)) != len(self.items):
            raise ValueError(f"enum items must be distinct and nonempty: {self.items}")

    def __str__(self) -> str:
        return "{" + ", ".join(self.items) + "}"


@dataclass(frozen=True)
class TupleType:
    components: tuple["TypeExpr", ...]

    def __str__(self) -> str:
        return "<" + ", ".join(map(str, self.components)) + ">"


@dataclass(frozen=True)
class RecordType:
    """Fields are kept sorted by name, so field order never affects equality."""

    fields: tuple[tuple[str, "TypeExpr"], ...]

    def __post_init__(self):
        names = [n for n, _ in self.fields]
        if not names or len(set(names)) != len(names):
            raise ValueError(f"record fields must be distinct and nonempty: {names}")
        object.__setattr__(self, "fields", tuple(sorted(self.fields, key=lambda f: f[0])))

    def field_index(self, name: str) -> int | None:
        for i, (n, _) in enumerate(self.fields):
            if n == name:
                return i
        return None

    def __str__(self) -> str:
        return "{" + ", ".join(f"{n}: {t}" for n, t in self.fields) + "}"


@dataclass(frozen=True)
class UnionType:
    alternatives: tuple[tuple[str, "TypeExpr"], ...]

    def __post_init__(self):
        tags = [n for n, _ in self.alternatives]
        if not tags or len(set(tags)) != len(tags):
            raise ValueError(f"union tags must be distinct and nonempty: {tags}")

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.alternatives)

    def tag_index(self, tag: str) -> int | None:
        return self.tags.index(tag) if tag in self.tags else None

    def __str__(self) -> str:
        return "[" + ", ".join(f"{n}: {t}" for n, t in self.alternatives) + "]"


@dataclass(frozen=True)
class SetType:
    element: "TypeExpr"

    def __str__(self) -> str:
        return f"set<{self.element}>"


@dataclass(frozen=True)
class ArrayType:
    value: "TypeExpr"
    key: "TypeExpr"

    def __str__(self) -> str:
        return f"array<{self.key}, {self.value}>"


@dataclass(frozen=True)
class NamedType:
    """Reference to a type alias; only present before typechecking."""

    name: str

    def __str__(self) -> str:
        return self.name


TypeExpr = Union[BoolType, IntRange, EnumType, TupleType, RecordType, UnionType,
                 SetType, ArrayType, NamedType]

BOOL = BoolType()


@dataclass(frozen=True)
class RecordValue:
    fields: tuple[tuple[str, Any], ...]

    def __getitem__(self, name: str) -> Any:
        for n, v in self.fields:
            if n == name:
                return v
        raise KeyError(name)

    def replace(self, name: str, value: Any) -> "RecordValue":
        return RecordValue(tuple((n, value if n == name else v) for n, v in self.fields))


@dataclass(frozen=True)
class UnionValue:
    """A union value stores one payload slot per alternative.

    Only ``payloads[tags.index(tag)]`` is meaningful to the user; the other
    slots exist so that the value maps one-to-one onto the lowered tuple.
    """

    tag: str
    payloads: tuple[Any, ...]


def is_scalar(t: TypeExpr) -> bool:
    return isinstance(t, (BoolType, IntRange, EnumType))


def domain_size(t: TypeExpr) -> int:
    if isinstance(t, BoolType):
        return 2
    if isinstance(t, IntRange):
        return t.hi - t.lo + 1
    if isinstance(t, EnumType):
        return len(t.items)
    if isinstance(t, TupleType):
        return math.prod(domain_size(c) for c in t.components)
    if isinstance(t, RecordType):
        return math.prod(domain_size(c) for _, c in t.fields)
    if isinstance(t, UnionType):
        return len(t.alternatives) * math.prod(domain_size(c) for _, c in t.alternatives)
    if isinstance(t, SetType):
        return 2 ** domain_size(t.element)
    if isinstance(t, ArrayType):
        return domain_size(t.value) ** domain_size(t.key)
    raise TypeError(f"unresolved type {t}")


def domain_of(t: TypeExpr, cap: int = DEFAULT_DOMAIN_CAP) -> list:
    """All literal values of ``t`` in canonical order (tuples vary rightmost-fastest)."""
    size = domain_size(t)
    if size > cap:
        raise DomainTooLarge(f"domain of {t} has {size} values (cap {cap})")
    return _domain(t)


def _domain(t: TypeExpr) -> list:
    if isinstance(t, BoolType):
        return [False, True]
    if isinstance(t, IntRange):
        return list(range(t.lo, t.hi + 1))
    if isinstance(t, EnumType):
        return list(t.items)
    if isinstance(t, TupleType):
        return list(itertools.product(*(_domain(c) for c in t.components)))
    if isinstance(t, RecordType):
        names = [n for n, _ in t.fields]
        return [RecordValue(tuple(zip(names, combo)))
                for combo in itertools.product(*(_domain(c) for _, c in t.fields))]
    if isinstance(t, UnionType):
        out = []
        for tag in t.tags:
            for combo in itertools.product(*(_domain(c) for _, c in t.alternatives)):
                out.append(UnionValue(tag, combo))
        return out
    if isinstance(t, SetType):
        elems = _domain(t.element)
        return [frozenset(e for e, bit in zip(elems, bits) if bit)
                for bits in itertools.product((False, True), repeat=len(elems))]
    if isinstance(t, ArrayType):
        return list(itertools.product(_domain(t.value), repeat=domain_size(t.key)))
    raise TypeError(f"unresolved type {t}")


def default_value(t: TypeExpr) -> Any:
    """First value of ``domain_of(t)`` without enumerating the domain."""
    if isinstance(t, BoolType):
        return False
    if isinstance(t, IntRange):
        return t.lo
    if isinstance(t, EnumType):
        return t.items[0]
    if isinstance(t, TupleType):
        return tuple(default_value(c) for c in t.components)
    if isinstance(t, RecordType):
        return RecordValue(tuple((n, default_value(c)) for n, c in t.fields))
    if isinstance(t, UnionType):
        return UnionValue(t.tags[0], tuple(default_value(c) for _, c in t.alternatives))
    if isinstance(t, SetType):
        return frozenset()
    if isinstance(t, ArrayType):
        return (default_value(t.value),) * domain_size(t.key)
    raise TypeError(f"unresolved type {t}")


def key_index(key_type: TypeExpr, key: Any) -> int | None:
    """Position of ``key`` in ``domain_of(key_type)``, or None when outside it."""
    if isinstance(key_type, IntRange):
        return key - key_type.lo if key_type.lo <= key <= key_type.hi else None
    if isinstance(key_type, BoolType):
        return int(bool(key))
    if isinstance(key_type, EnumType):
        return key_type.items.index(key) if key in key_type.items else None
    dom = _domain(key_type)
    for i, k in enumerate(dom):
        if k == key:
            return i
    return None


def join(a: TypeExpr, b: TypeExpr) -> TypeExpr | None:
    """Least common type of ``a`` and ``b``: integer ranges widen to their hull.

    Array keys must match exactly; everything else recurses structurally.
    Returns None when the types are incompatible.
    """
    if isinstance(a, IntRange) and isinstance(b, IntRange):
        return IntRange(min(a.lo, b.lo), max(a.hi, b.hi))
    if type(a) is not type(b):
        return None
    if isinstance(a, (BoolType, EnumType)):
        return a if a == b else None
    if isinstance(a, TupleType):
        if len(a.components) != len(b.components):
            return None
        parts = [join(x, y) for x, y in zip(a.components, b.components)]
        return None if any(p is None for p in parts) else TupleType(tuple(parts))
    if isinstance(a, RecordType):
        if [n for n, _ in a.fields] != [n for n, _ in b.fields]:
            return None
        parts = [join(x, y) for (_, x), (_, y) in zip(a.fields, b.fields)]
        if any(p is None for p in parts):
            return None
        return RecordType(tuple(zip((n for n, _ in a.fields), parts)))
    if isinstance(a, UnionType):
        if a.tags != b.tags:
            return None
        parts = [join(x, y) for (_, x), (_, y) in zip(a.alternatives, b.alternatives)]
        if any(p is None for p in parts):
            return None
        return UnionType(tuple(zip(a.tags, parts)))
    if isinstance(a, SetType):
        el = join(a.element, b.element)
        return None if el is None else SetType(el)
    if isinstance(a, ArrayType):
        if a.key != b.key:
            return None
        v = join(a.value, b.value)
        return None if v is None else ArrayType(v, a.key)
    return None


def is_subtype(a: TypeExpr, b: TypeExpr) -> bool:
    return join(a, b) == b


def value_fits(v: Any, t: TypeExpr) -> bool:
    """Whether a value of a compatible type is also a value of ``t``."""
    if isinstance(t, IntRange):
        return t.lo <= v <= t.hi
    if isinstance(t, (BoolType, EnumType)):
        return True
    if isinstance(t, TupleType):
        return all(value_fits(x, c) for x, c in zip(v, t.components))
    if isinstance(t, RecordType):
        return all(value_fits(x, c) for (_, x), (_, c) in zip(v.fields, t.fields))
    if isinstance(t, UnionType):
        return all(value_fits(x, c) for x, (_, c) in zip(v.payloads, t.alternatives))
    if isinstance(t, SetType):
        return all(contains_value(t.element, x) for x in v)
    if isinstance(t, ArrayType):
        return all(value_fits(x, t.value) for x in v)
    raise TypeError(f"unresolved type {t}")


def contains_value(t: TypeExpr, v: Any) -> bool:
    """Membership of an arbitrary literal in ``domain_of(t)`` (type-directed)."""
    try:
        if isinstance(t, BoolType):
            return isinstance(v, bool)
        if isinstance(t, IntRange):
            return isinstance(v, int) and not isinstance(v, bool) and t.lo <= v <= t.hi
        if isinstance(t, EnumType):
            return v in t.items
        if isinstance(t, TupleType):
            return (isinstance(v, tuple) and len(v) == len(t.components)
                    and all(contains_value(c, x) for c, x in zip(t.components, v)))
        if isinstance(t, RecordType):
            return (isinstance(v, RecordValue)
                    and [n for n, _ in v.fields] == [n for n, _ in t.fields]
                    and all(contains_value(c, x) for (_, c), (_, x) in zip(t.fields, v.fields)))
        if isinstance(t, UnionType):
            return (isinstance(v, UnionValue) and v.tag in t.tags
                    and len(v.payloads) == len(t.alternatives)
                    and all(contains_value(c, x) for (_, c), x in zip(t.alternatives, v.payloads)))
        if isinstance(t, SetType):
            return isinstance(v, frozenset) and all(contains_value(t.element, x) for x in v)
        if isinstance(t, ArrayType):
            return (isinstance(v, tuple) and len(v) == domain_size(t.key)
                    and all(contains_value(t.value, x) for x in v))
    except TypeError:
        return False
    raise TypeError(f"unresolved type {t}")


def format_value(v: Any, t: TypeExpr) -> str:
    """Render a literal in the concrete syntax accepted by ``init`` declarations."""
    if isinstance(t, BoolType):
        return "true" if v else "false"
    if isinstance(t, IntRange):
        return str(v)
    if isinstance(t, EnumType):
        return v
    if isinstance(t, TupleType):
        return "<" + ", ".join(format_value(x, c) for x, c in zip(v, t.components)) + ">"
    if isinstance(t, RecordType):
        return "{" + ", ".join(f"{n}: {format_value(x, c)}"
                               for (n, x), (_, c) in zip(v.fields, t.fields)) + "}"
    if isinstance(t, UnionType):
        i = t.tags.index(v.tag)
        return f"{v.tag}({format_value(v.payloads[i], t.alternatives[i][1])})"
    if isinstance(t, SetType):
        order = _domain(t.element)
        elems = [e for e in order if e in v]
        return "{" + ", ".join(format_value(e, t.element) for e in elems) + "}"
    if isinstance(t, ArrayType):
        return "[" + ", ".join(format_value(x, t.value) for x in v) + "]"
    raise TypeError(f"unresolved type {t}")


def mangle_key(v: Any) -> str:
    """Bit-name fragment for a domain value (``-2`` -> ``m2``, tuples joined by ``_``)."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return f"m{-v}" if v < 0 else str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return "_".join(mangle_key(x) for x in v)
    if isinstance(v, RecordValue):
        return "_".join(mangle_key(x) for _, x in v.fields)
    if isinstance(v, UnionValue):
        return "_".join([v.tag] + [mangle_key(x) for x in v.payloads])
    if isinstance(v, frozenset):
        return "s" + "_".join(sorted(mangle_key(x) for x in v))
    raise TypeError(f"cannot mangle {v!r}")
