"""Shared helpers for the test suite."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from typal import logic
from typal.adt import lower_expr, lower_type, lower_value
from typal.booleanize import Translator, encode_decl, encode_value, leaves
from typal.errors import EvalError
from typal.oracle import eval_expr
from typal.syntax import free_vars
from typal.types import domain_of, domain_size

ROOT = Path(__file__).resolve().parent.parent
DOMAINS = ROOT / "domains"


def environments(names, types, limit=1 << 14, samples=10_000, seed=0):
    """All environments when there are at most ``limit``, else a seeded sample."""
    sizes = [domain_size(types[n]) for n in names]
    total = 1
    for s in sizes:
        total *= s
    doms = [domain_of(types[n]) for n in names]
    if total <= limit:
        return [dict(zip(names, combo)) for combo in itertools.product(*doms)], True
    rng = random.Random(seed)
    return [{n: rng.choice(d) for n, d in zip(names, doms)} for _ in range(samples)], False


def check_expr(e, env_types, limit=1 << 14, samples=10_000):
    """Compare the Booleanized expression with the interpreter on every environment.

    Environments are evaluated bit-parallel: atom ``a`` maps to a mask whose
    bit ``k`` is the value of ``a`` in environment ``k``.  Returns
    ``(checked, mismatches)``.
    """
    names = free_vars(e)
    lowered = lower_expr(e)
    ltypes = {n: lower_type(env_types[n]) for n in names}
    reprs = {n: encode_decl(n, ltypes[n]) for n in names}
    out = leaves(Translator(reprs).tr(lowered))
    envs, _ = environments(names, env_types, limit, samples)
    expected = [0] * len(out)
    valid = 0
    masks = {a.name: 0 for n in names for a in leaves(reprs[n])}
    for k, env in enumerate(envs):
        try:
            v = eval_expr(e, env)
        except EvalError:
            continue
        valid |= 1 << k
        for n in names:
            bits = leaves(encode_value(lower_value(env[n], env_types[n]), ltypes[n]))
            for atom, b in zip(leaves(reprs[n]), bits):
                if b == logic.TRUE:
                    masks[atom.name] |= 1 << k
        for i, b in enumerate(leaves(encode_value(lower_value(v, e.type), lowered.type))):
            if b == logic.TRUE:
                expected[i] |= 1 << k
    full = (1 << len(envs)) - 1
    memo = {}
    bad = 0
    for f, exp in zip(out, expected):
        got = logic.evaluate_masks(f, masks, full, memo)
        bad |= (got ^ exp) & valid
    mismatches = bin(bad).count("1")
    return bin(valid).count("1"), mismatches
