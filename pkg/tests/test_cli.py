import hashlib
import shutil

import pytest

from typal.cli import main

from support import DOMAINS

BUCKETS_LINES = ["fill5()", "pour53()", "empty3()", "pour53()", "fill5()", "pour53()"]

# derived from a run of the compiler, then frozen
BUCKETS_HASHES = {
    "buckets.domain.pddl": "996bae18ad05fea8e19ab004555fa166acc25610ea418ecd5f71a42f25e8d3e6",
    "buckets.problem.pddl": "ecfc3c9fe85a7812d405974abfeec13c4fd9c90f7b2b2f44bd9de160e1017f15",
    "buckets.meta": "c88635dede10cd61e5fb1bcea9be3831ec9250219f52cfe668f5612e2a1aaca6",
}

SET_MODEL = ("var s: set<0..2>; init s = {}; goal s eq {0, 2};\n"
             "action a(p: set<0..2>) pre true eff s := p; end\n")


@pytest.fixture
def buckets(tmp_path):
    dst = tmp_path / "buckets.tp"
    shutil.copy(DOMAINS / "buckets.tp", dst)
    return dst


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_compile_writes_three_files(capsys, buckets):
    code, out, _ = run(capsys, "compile", buckets)
    assert code == 0
    assert "state bits: 10" in out and "actions: 6" in out
    for name, digest in BUCKETS_HASHES.items():
        assert hashlib.sha256((buckets.parent / name).read_bytes()).hexdigest() == digest


def test_output_stem(capsys, buckets, tmp_path):
    code, _, _ = run(capsys, "compile", buckets, "-o", tmp_path / "out" / "x")
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == [
        "x.domain.pddl", "x.meta", "x.problem.pddl"]


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "compile", tmp_path / "nosuch.tp")
    assert code == 2 and err.startswith("error:")


def test_syntax_error(capsys, tmp_path):
    bad = tmp_path / "bad.tp"
    bad.write_text("var x: ;")
    code, _, err = run(capsys, "compile", bad)
    assert code == 2 and "error" in err


def test_max_params_splits_actions(capsys, tmp_path):
    f = tmp_path / "s.tp"
    f.write_text(SET_MODEL)
    assert run(capsys, "compile", f, "--max-params", "1")[0] == 0
    domain = (tmp_path / "s.domain.pddl").read_text()
    for step in ("c-a-1", "c-a-2", "c-a-3"):
        assert f"(:action {step}" in domain
    assert "(:action c-a-4" not in domain


def test_solve_buckets(capsys, buckets):
    code, out, _ = run(capsys, "solve", buckets)
    assert code == 0 and out.splitlines() == BUCKETS_LINES


@pytest.mark.parametrize("level", ["bool", "source"])
def test_solve_at_other_levels(capsys, buckets, level):
    code, out, _ = run(capsys, "solve", buckets, "--level", level)
    assert code == 0 and out.splitlines() == BUCKETS_LINES


def test_solve_prints_parameters(capsys, tmp_path):
    f = tmp_path / "s.tp"
    f.write_text(SET_MODEL)
    code, out, _ = run(capsys, "solve", f, "--max-params", "1")
    assert code == 0 and out == "a({0, 2})\n"


def test_goal_already_true(capsys, tmp_path):
    f = tmp_path / "t.tp"
    f.write_text("var x: bool; init x = true; goal x;")
    assert run(capsys, "solve", f) == (0, "", "")


def test_unsolvable(capsys, tmp_path):
    f = tmp_path / "u.tp"
    f.write_text("var x: 0..1; init x = 0; goal x eq 1;\naction a() pre x eq 1 eff x := 0; end")
    code, _, err = run(capsys, "solve", f)
    assert code == 1 and "unsolvable" in err


def test_state_cap(capsys):
    code, _, err = run(capsys, "solve", DOMAINS / "perm2cube.tp", "--cap-states", "50")
    assert code == 3 and err.startswith("cap exceeded")


def test_dump(capsys, buckets):
    code, out, _ = run(capsys, "solve", buckets, "--dump", "ast", "--dump", "strips")
    assert code == 0
    assert "== ast ==" in out and "var b3: 0..3;" in out and "== strips ==" in out


def _plan_file(capsys, buckets, lines):
    run(capsys, "compile", buckets)
    plan = buckets.parent / "plan.txt"
    plan.write_text("".join(f"({line})\n" for line in lines))
    return plan


def _strips_plan(buckets):
    from typal.oracle import StripsSemantics, bfs_solve
    from typal.pipeline import compile_file
    c = compile_file(buckets)
    return [n for n, _ in bfs_solve(StripsSemantics(c.strips)).plan]


def test_validate_and_reconstruct(capsys, buckets):
    steps = _strips_plan(buckets)
    plan = _plan_file(capsys, buckets, steps)
    code, out, _ = run(capsys, "validate", buckets, plan)
    assert code == 0 and out == f"VALID, {len(steps)} steps\n"
    code, out, _ = run(capsys, "reconstruct", buckets, plan)
    assert code == 0 and out.splitlines() == BUCKETS_LINES


def test_validate_truncated_plan(capsys, buckets):
    steps = _strips_plan(buckets)[:-2]
    plan = _plan_file(capsys, buckets, steps)
    code, out, _ = run(capsys, "validate", buckets, plan)
    assert code == 1 and out == f"INVALID at step {len(steps)}: goal not reached\n"


def test_plan_for_another_domain(capsys, buckets):
    plan = _plan_file(capsys, buckets, ["drive bfalse"])
    code, _, err = run(capsys, "validate", buckets, plan)
    assert code == 2 and "unknown action" in err


def test_validate_needs_plan(capsys, buckets):
    assert run(capsys, "validate", buckets)[0] == 2
