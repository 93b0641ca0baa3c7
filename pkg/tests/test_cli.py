import json

import numpy as np
import pytest

from mmsubspace.cli import main
from mmsubspace.model import save_problem
from mmsubspace.solver import Trace
from conftest import instance_grid


@pytest.fixture
def problem_file(tmp_path):
    p = instance_grid(seed=3, dims=(3,), kinds=["hyperbolic"])[0]
    path = tmp_path / "p.json"
    save_problem(p, path)
    return path


def test_solve_converged_exit_zero(problem_file, tmp_path, capsys):
    code = main(["solve", "--problem", str(problem_file),
                 "--trace-out", str(tmp_path / "t")])
    assert code == 0
    out = capsys.readouterr().out
    assert "converged: True" in out
    assert (tmp_path / "t.csv").exists()
    assert (tmp_path / "t.json").exists()


def test_solve_max_iters_exit_two(problem_file, capsys):
    code = main(["solve", "--problem", str(problem_file), "--max-iters", "2",
                 "--grad-tol", "1e-14"])
    assert code == 2


def test_solve_writes_summary(problem_file, tmp_path):
    summary_path = tmp_path / "s.json"
    code = main(["solve", "--problem", str(problem_file), "--certify",
                 "--trace-out", str(tmp_path / "t"),
                 "--summary-out", str(summary_path)])
    assert code == 0
    s = json.loads(summary_path.read_text())
    for key in ("vartheta", "mu", "eta_lo", "eta_hi", "kappa_max", "n_eps",
                "all_inequalities_pass"):
        assert key in s
    assert s["all_inequalities_pass"] is True
    assert 0.0 < s["vartheta"] < 1.0
    assert s["n_eps"] >= 1


def test_summary_requires_certify(problem_file, tmp_path, capsys):
    code = main(["solve", "--problem", str(problem_file),
                 "--summary-out", str(tmp_path / "s.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_malformed_problem_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "dim": 2, "R": [[1.0, 2.0], [0.0, 1.0]], "r": [0.0, 0.0],
        "penalty": {"kind": "zero"},
    }))
    code = main(["solve", "--problem", str(bad)])
    assert code == 1
    assert "not symmetric" in capsys.readouterr().err


def test_missing_problem_file(tmp_path, capsys):
    code = main(["solve", "--problem", str(tmp_path / "nope.json")])
    assert code == 1


def test_verify_fresh_trace_passes(problem_file, tmp_path, capsys):
    main(["solve", "--problem", str(problem_file), "--certify",
          "--trace-out", str(tmp_path / "t")])
    code = main(["verify", "--problem", str(problem_file),
                 "--trace", str(tmp_path / "t.json")])
    assert code == 0
    assert "overall: PASS" in capsys.readouterr().out


def test_verify_detects_corrupted_objective(problem_file, tmp_path, capsys):
    main(["solve", "--problem", str(problem_file), "--certify",
          "--trace-out", str(tmp_path / "t")])
    d = json.loads((tmp_path / "t.json").read_text())
    # inflate one recorded objective: surrogate decrease must now fail
    mid = len(d["records"]) // 2
    d["records"][mid]["obj"] += 1.0
    (tmp_path / "t.json").write_text(json.dumps(d))
    code = main(["verify", "--problem", str(problem_file),
                 "--trace", str(tmp_path / "t.json")])
    assert code == 1
    assert "overall: FAIL" in capsys.readouterr().out


def test_verify_online_trace(problem_file, tmp_path, capsys):
    code = main(["solve", "--problem", str(problem_file), "--certify",
                 "--stream", "geometric:0.8", "--seed", "7",
                 "--trace-out", str(tmp_path / "t")])
    assert code == 0
    code = main(["verify", "--problem", str(problem_file),
                 "--trace", str(tmp_path / "t.json"),
                 "--stream", "geometric:0.8", "--seed", "7"])
    assert code == 0


def test_zero_iteration_trace_vacuous_pass(tmp_path, capsys):
    p = instance_grid(seed=3, dims=(3,), kinds=["hyperbolic"])[0]
    ppath = tmp_path / "p.json"
    save_problem(p, ppath)
    from mmsubspace.solver import SolveOptions, reference_minimizer, run_batch

    trace = run_batch(p, h1=reference_minimizer(p).h,
                      opts=SolveOptions(max_iters=5, grad_tol=1e-8, certify=True))
    assert trace.n_steps == 0
    trace.to_json(tmp_path / "t.json")
    code = main(["verify", "--problem", str(ppath), "--trace", str(tmp_path / "t.json")])
    assert code == 0


def test_demo_is_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["demo", "--seed", "5", "--out-dir", str(out1)]) == 0
    assert main(["demo", "--seed", "5", "--out-dir", str(out2)]) == 0
    t1 = (out1 / "comparison.txt").read_text()
    t2 = (out2 / "comparison.txt").read_text()
    assert t1 == t2
    names1 = sorted(f.name for f in out1.iterdir())
    assert names1 == sorted(f.name for f in out2.iterdir())
    for name in names1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_bad_subspace_spec(problem_file, capsys):
    code = main(["solve", "--problem", str(problem_file), "--subspace", "newton"])
    assert code == 1


def test_trace_roundtrip_preserves_verification(problem_file, tmp_path):
    main(["solve", "--problem", str(problem_file), "--certify",
          "--trace-out", str(tmp_path / "t")])
    trace = Trace.from_json(tmp_path / "t.json")
    assert trace.converged
    assert trace.meta["mode"] == "batch"
    csv_lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(csv_lines) == len(trace.records) + 1
