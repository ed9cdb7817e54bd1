"""Command-line driver.

Exit codes: 0 success, 1 unsolvable or invalid plan, 2 input error,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import CapExceeded, DomainTooLarge, TypalError
from .oracle import StripsSemantics, validate_plan
from .pddl import parse_plan, reconstruct_plan
from .pipeline import (
    PipelineConfig, compile_file, format_source_plan, solve, write_outputs,
)
from .strips import load_meta
from .syntax import format_model

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="typal", description="Compile typed planning models to PDDL.")
    p.add_argument("command", choices=["compile", "solve", "validate", "reconstruct"])
    p.add_argument("file", help="model file (.tp)")
    p.add_argument("plan", nargs="?", help="plan file (validate, reconstruct)")
    p.add_argument("-o", "--output", metavar="STEM", help="output stem (default: input name)")
    p.add_argument("--max-params", type=int, default=8, metavar="N",
                   help="maximum parameter bits per STRIPS action (default 8)")
    p.add_argument("--no-simplify", action="store_true", help="disable formula simplification")
    p.add_argument("--dump", action="append", choices=["ast", "bool", "strips"], default=[],
                   help="print an intermediate representation (repeatable)")
    p.add_argument("--cap-states", type=int, default=1_000_000, metavar="N",
                   help="state-space cap for the internal planner")
    p.add_argument("--seed", type=int, default=0, help="accepted for reproducibility; "
                   "the pipeline itself is deterministic")
    p.add_argument("--level", choices=["strips", "bool", "source"], default="strips",
                   help="model level searched by 'solve' (default strips)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.max_params < 1 or args.cap_states < 1:
        print("error: --max-params and --cap-states must be positive", file=sys.stderr)
        return EXIT_INPUT
    if args.command in ("validate", "reconstruct") and not args.plan:
        print(f"error: {args.command} needs a plan file", file=sys.stderr)
        return EXIT_INPUT
    config = PipelineConfig(args.max_params, not args.no_simplify, state_cap=args.cap_states)
    try:
        return run(args, config)
    except (CapExceeded, DomainTooLarge) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except TypalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run(args, config: PipelineConfig) -> int:
    c = compile_file(args.file, config)
    for stage in args.dump:
        print(f"== {stage} ==")
        if stage == "ast":
            print(format_model(c.source), end="")
        elif stage == "bool":
            print(c.bool_model.describe())
        else:
            print(c.strips.describe())
    stem = args.output or str(Path(args.file).with_suffix(""))

    if args.command == "compile":
        for path in write_outputs(c, stem):
            print(f"wrote {path}")
        for key, value in c.stats().items():
            print(f"{key}: {value}")
        return EXIT_OK

    if args.command == "solve":
        sol = solve(c, args.level, args.cap_states)
        if sol.source_plan is None:
            print("unsolvable", file=sys.stderr)
            return EXIT_FAIL
        print(format_source_plan(c, sol.source_plan), end="")
        return EXIT_OK

    plan = parse_plan(Path(args.plan).read_text(encoding="utf-8"), c.strips)
    check = validate_plan(StripsSemantics(c.strips), plan)
    if args.command == "validate":
        print(check)
        return EXIT_OK if check.ok else EXIT_FAIL
    if not check.ok:
        print(check, file=sys.stderr)
        return EXIT_FAIL
    meta, goal_chain = c.strips.meta, c.strips.goal_chain
    meta_path = Path(f"{stem}.meta")
    if args.output and meta_path.exists():
        meta, goal_chain = load_meta(meta_path.read_text(encoding="utf-8"))
    print(format_source_plan(c, reconstruct_plan(plan, meta, goal_chain)), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
