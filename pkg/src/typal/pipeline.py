"""End-to-end compilation: text -> typed model -> Boolean model -> STRIPS -> PDDL."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import logic
from .adt import lower_records_unions
from .booleanize import BoolModel, booleanize_model
from .oracle import (
    DEFAULT_STATE_CAP, BoolSemantics, SearchResult, SourceSemantics, StripsSemantics, bfs_solve,
    validate_plan,
)
from .pddl import PddlDocument, emit_pddl, lift_plan, reconstruct_plan
from .parser import parse_model
from .strips import StripsModel, lower_model
from .syntax import SourceModel
from .typecheck import typecheck
from .types import DEFAULT_DOMAIN_CAP, format_value


@dataclass
class PipelineConfig:
    max_params: int = 8
    simplify: bool = True
    domain_cap: int = DEFAULT_DOMAIN_CAP
    state_cap: int = DEFAULT_STATE_CAP


@dataclass
class Compiled:
    name: str
    source: SourceModel  # typechecked
    lowered: SourceModel
    bool_model: BoolModel
    strips: StripsModel

    def pddl(self) -> PddlDocument:
        return emit_pddl(self.strips, self.name)

    def stats(self) -> dict[str, int]:
        s = self.strips
        return {
            "state bits": len(self.bool_model.bits),
            "aux bits": len(s.bits) - len(self.bool_model.bits),
            "actions": len(self.bool_model.actions),
            "strips actions": len(s.actions),
            "aux actions": sum(1 for a in s.actions if a.kind != "main"),
            "effects": sum(len(a.effects) for a in s.actions),
        }


def compile_text(text: str, name: str = "typal", config: PipelineConfig | None = None) -> Compiled:
    config = config or PipelineConfig()
    with logic.simplification(config.simplify):
        source = typecheck(parse_model(text))
        lowered = lower_records_unions(source)
        bool_model = booleanize_model(lowered, config.domain_cap)
        for ba, sa in zip(bool_model.actions, source.actions):
            for bp, sp in zip(ba.params, sa.params):
                bp.source_type = sp.type
        strips = lower_model(bool_model, config.max_params)
    return Compiled(name, source, lowered, bool_model, strips)


def compile_file(path: str | Path, config: PipelineConfig | None = None) -> Compiled:
    path = Path(path)
    return compile_text(path.read_text(encoding="utf-8"), path.stem, config)


def write_outputs(c: Compiled, stem: str | Path) -> list[Path]:
    stem = Path(stem)
    if stem.parent and not stem.parent.exists():
        stem.parent.mkdir(parents=True)
    doc = c.pddl()
    files = [(Path(f"{stem}.domain.pddl"), doc.domain), (Path(f"{stem}.problem.pddl"), doc.problem),
             (Path(f"{stem}.meta"), c.strips.meta_json())]
    for p, text in files:
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return [p for p, _ in files]


@dataclass
class Solution:
    result: SearchResult
    strips_plan: list | None
    source_plan: list | None


def solve(c: Compiled, level: str = "strips", cap: int = DEFAULT_STATE_CAP) -> Solution:
    """Search at the given level and express the plan at the STRIPS and source levels.

    Source-level plans are validated against the reference interpreter before
    they are returned.
    """
    if level == "source":
        res = bfs_solve(SourceSemantics(c.source), cap)
        return Solution(res, None, res.plan)
    if level == "bool":
        res = bfs_solve(BoolSemantics(c.bool_model), cap)
        strips_plan = lift_plan(res.plan, c.strips) if res.solved else None
    elif level == "strips":
        res = bfs_solve(StripsSemantics(c.strips), cap)
        strips_plan = res.plan
    else:
        raise ValueError(f"unknown level {level!r}")
    if strips_plan is None:
        return Solution(res, None, None)
    check = validate_plan(StripsSemantics(c.strips), strips_plan)
    if not check.ok:
        raise AssertionError(f"internal: STRIPS plan does not validate: {check}")
    source_plan = reconstruct_plan(strips_plan, c.strips.meta, c.strips.goal_chain)
    check = validate_plan(SourceSemantics(c.source), source_plan)
    if not check.ok:
        raise AssertionError(f"internal: reconstructed plan does not validate: {check}")
    return Solution(res, strips_plan, source_plan)


def format_source_plan(c: Compiled, plan) -> str:
    lines = []
    for name, args in plan:
        action = c.source.action(name)
        text = ", ".join(format_value(v, p.type) for v, p in zip(args, action.params))
        lines.append(f"{name}({text})")
    return "\n".join(lines) + ("\n" if lines else "")
