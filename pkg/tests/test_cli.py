import json
import subprocess
import sys

import numpy as np
import pytest

from convexcert import cli
from convexcert.generators import simplex_faces


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = cli.dispatch([*argv, "-o", str(out)])
    return code, json.loads(out.read_text())


@pytest.fixture
def square(tmp_path):
    return write(tmp_path / "C.json", {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]})


def test_separate_disjoint(tmp_path, square):
    p = write(tmp_path / "p.json", [2, 0.5])
    code, rep = run(tmp_path, "separate", "--point", p, "--set", square)
    assert code == 0 and rep["status"] == "ok"
    out = rep["outcome"]
    assert out["u"] == pytest.approx([1, 0]) and out["y"] == pytest.approx([1, 0.5])
    assert out["margin"] == pytest.approx(1.0)
    assert rep["version"] and rep["config"]["tol"] == 1e-9
    assert len(rep["instance_sha256"]) == 2


def test_separate_inside_is_negative(tmp_path, square):
    p = write(tmp_path / "p.json", [0.5, 0.5])
    code, rep = run(tmp_path, "separate", "--point", p, "--set", square)
    assert code == 2 and rep["status"] == "negative" and rep["outcome"]["inside"]


def test_separate_sets(tmp_path, square):
    K = write(tmp_path / "K.json", {"vertices": [[2, 2], [3, 2], [3, 3], [2, 3]]})
    code, rep = run(tmp_path, "separate", "--other", K, "--set", square)
    assert code == 0 and rep["outcome"]["margin"] == pytest.approx(2.0)
    code, rep = run(tmp_path, "separate", "--other", square, "--set", square)
    assert code == 2 and rep["outcome"]["intersect"]


def test_separate_needs_exactly_one_target(tmp_path, square):
    code, rep = run(tmp_path, "separate", "--set", square)
    assert code == 1 and rep["error"]["type"] == "ValueError"


def test_malformed_json_position(tmp_path, square):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": [[0, 0], [1, 0]')
    code, rep = run(tmp_path, "separate", "--point", str(bad), "--set", square)
    assert code == 64
    err = rep["error"]
    assert err["type"] == "MalformedJSON" and err["line"] == 1 and err["column"] == 29


def test_dimension_mismatch(tmp_path, square):
    p = write(tmp_path / "p.json", [1, 2, 3])
    code, rep = run(tmp_path, "separate", "--point", p, "--set", square)
    assert code == 65 and rep["error"]["type"] == "DimensionMismatch"


def test_missing_file_is_error(tmp_path, square):
    code, rep = run(tmp_path, "separate", "--point", str(tmp_path / "nope.json"), "--set", square)
    assert code == 1 and rep["status"] == "error"


def test_klee_check_simplex_faces(tmp_path):
    fam = write(tmp_path / "simplex_faces_3.json", {"polytopes": [{"vertices": P.vertices.tolist()} for P in simplex_faces(3)]})
    code, rep = run(tmp_path, "klee-check", "--family", fam)
    assert code == 2
    out = rep["outcome"]
    assert out["status"] == "union_not_convex" and out["sets"] == 5 and out["hypothesis_ii"]
    assert out["full_intersection"] is None
    assert len(out["union_convexity"]["counter_witness"]) == 5


def test_klee_check_positive(tmp_path):
    sq = lambda t: {"vertices": [[t, t], [t + 2, t], [t + 2, t + 2], [t, t + 2]]}
    fam = write(tmp_path / "f.json", {"polytopes": [sq(0), sq(0.5), sq(1)]})
    code, rep = run(tmp_path, "klee-check", "--family", fam)
    assert code == 0 and rep["outcome"]["status"] == "common_point"


def kkm_doc(level=1 / 3):
    E = np.eye(3)
    vals = []
    for i in range(3):
        j, k = [a for a in range(3) if a != i]
        t = level if i == 0 else 1 / 3
        vals.append({"vertices": [E[i].tolist(), (t * E[i] + (1 - t) * E[j]).tolist(), (t * E[i] + (1 - t) * E[k]).tolist()]})
    return {"domain_points": E.tolist(), "values": vals, "ambient": {"vertices": E.tolist()}, "resolution": 1 / 16}


def test_kkm_verify(tmp_path):
    code, rep = run(tmp_path, "kkm-verify", "-i", write(tmp_path / "k.json", kkm_doc()))
    assert code == 0 and rep["outcome"]["certified"]
    assert rep["outcome"]["intersection"] == pytest.approx([1 / 3] * 3)


def test_kkm_verify_violation(tmp_path):
    code, rep = run(tmp_path, "kkm-verify", "-i", write(tmp_path / "k.json", kkm_doc(0.9)))
    assert code == 2 and not rep["outcome"]["certified"]
    assert rep["outcome"]["violation"]["subset"]


def test_minimax_matching_pennies(tmp_path):
    doc = {"matrix": [[1, -1], [-1, 1]], "row_simplex": 2, "col_simplex": 2}
    code, rep = run(tmp_path, "minimax", "-i", write(tmp_path / "g.json", doc))
    assert code == 0
    assert rep["outcome"]["value"] == 0 and rep["outcome"]["x0"] == [0.5, 0.5]


def test_minimax_bad_simplex_size(tmp_path):
    doc = {"matrix": [[1, -1], [-1, 1]], "row_simplex": 3, "col_simplex": 2}
    code, _ = run(tmp_path, "minimax", "-i", write(tmp_path / "g.json", doc))
    assert code == 65


def test_minimax_registry_bifunction(tmp_path):
    box = {"vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}
    doc = {"X": box, "bifunction": {"name": "quadratic", "params": {
        "P": [[-2, 0], [0, -2]], "Q": [[2, 0], [0, 2]], "p": [1, 0], "q": [0, -1]}}}
    code, rep = run(tmp_path, "minimax", "-i", write(tmp_path / "q.json", doc))
    assert code == 0 and rep["outcome"]["method"] == "grid"
    assert rep["outcome"]["x0"] == pytest.approx([0.5, 0]) and rep["outcome"]["y0"] == pytest.approx([0, 0.5])


@pytest.mark.parametrize("lam,branch", [(-0.1, "A"), (0.1, "B")])
def test_alternative_matrix_game(tmp_path, lam, branch):
    doc = {"matrix": [[1, -1], [-1, 1]], "lam": lam}
    code, rep = run(tmp_path, "alternative", "-i", write(tmp_path / "a.json", doc))
    assert code == 0 and rep["outcome"]["branch"] == branch


def test_alternative_infsup_registry(tmp_path):
    doc = {"X": {"vertices": [[0], [1]]}, "bifunction": {"name": "quadratic", "params": {"P": [[2]]}}, "lam": 0.5}
    code, rep = run(tmp_path, "alternative", "-i", write(tmp_path / "a.json", doc))
    assert code == 0 and rep["outcome"]["form"] == "infsup"
    assert rep["outcome"]["branch"] == "A" and rep["outcome"]["witness"] == [1.0]


def test_vi_solve(tmp_path):
    doc = {"A": [[1, 0], [0, 1]], "ell": [2, 2], "X": {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}}
    code, rep = run(tmp_path, "vi-solve", "-i", write(tmp_path / "v.json", doc))
    assert code == 0 and rep["outcome"]["x"] == pytest.approx([1, 1])
    assert rep["outcome"]["residual"] <= 1e-9


def test_vi_solve_dimension(tmp_path):
    doc = {"A": [[1]], "ell": [2, 2], "X": {"vertices": [[0, 0], [1, 1]]}}
    code, _ = run(tmp_path, "vi-solve", "-i", write(tmp_path / "v.json", doc))
    assert code == 65


def test_vi_solve_noncoercive(tmp_path):
    doc = {"A": [[0, 1], [-1, 0]], "ell": [1, 1], "X": {"vertices": [[0, 0], [1, 1]]}}
    code, rep = run(tmp_path, "vi-solve", "-i", write(tmp_path / "v.json", doc))
    assert code == 1 and rep["error"]["type"] == "NonpositiveAlpha"


def test_minimize(tmp_path):
    doc = {"functional": {"name": "sqrt-norm"}, "X": None, "dim": 2, "anchor": [1, 1]}
    code, rep = run(tmp_path, "minimize", "-i", write(tmp_path / "m.json", doc))
    assert code == 0 and abs(rep["outcome"]["value"]) <= 1e-6
    doc = {"functional": {"name": "quadratic", "params": {"Q": [[2, 0], [0, 2]]}}, "X": {"vertices": [[1, 1], [2, 1], [2, 2], [1, 2]]}}
    code, rep = run(tmp_path, "minimize", "-i", write(tmp_path / "m.json", doc))
    assert code == 0 and rep["outcome"]["xbar"] == pytest.approx([1, 1], abs=1e-6)


def test_fixed_point(tmp_path):
    doc = {"maps": [{"A": [[0, -1], [1, 0]], "b": [0, 0]}], "X": {"vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}}
    code, rep = run(tmp_path, "fixed-point", "-i", write(tmp_path / "f.json", doc))
    assert code == 0 and rep["outcome"]["x"] == pytest.approx([0, 0])


def test_fixed_point_family(tmp_path):
    C = np.roll(np.eye(3), 1, axis=1)
    doc = {"maps": [{"A": C.T.tolist()}, {"A": (C @ C).T.tolist()}], "X": {"vertices": np.eye(3).tolist()}}
    code, rep = run(tmp_path, "fixed-point", "-i", write(tmp_path / "f.json", doc))
    assert code == 0 and rep["outcome"]["x"] == pytest.approx([1 / 3] * 3)
    assert max(rep["outcome"]["residuals"]) <= 1e-9


def test_verify_suite_single(tmp_path):
    code, rep = run(tmp_path, "verify-suite", "--suite", "kkm-barycentric", "--seed", "3")
    assert code == 0 and rep["outcome"]["passed"]
    (suite,) = rep["outcome"]["suites"]
    assert suite["suite"] == "kkm-barycentric" and suite["criterion"] == 5


def test_verify_suite_trial_override_and_config(tmp_path):
    cfg = write(tmp_path / "cfg.json", {"seed": 5, "trial_counts": {"minimax": 3}, "tol": 1e-10})
    code, rep = run(tmp_path, "verify-suite", "--suite", "minimax", "--config", cfg, "--tol", "1e-9")
    assert code == 0
    assert rep["config"]["seed"] == 5 and rep["config"]["tol"] == 1e-9
    assert rep["outcome"]["suites"][0]["trials"] == 5  # 3 random games plus 2 named ones


def test_env_tol_default(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.TOL_ENV, "1e-7")
    code, rep = run(tmp_path, "verify-suite", "--suite", "kkm-barycentric")
    assert rep["config"]["tol"] == 1e-7


def test_invalid_config_values(tmp_path):
    code, rep = run(tmp_path, "verify-suite", "--suite", "kkm-barycentric", "--resolution", "2")
    assert code == 1 and "resolution" in rep["error"]["message"]
    code, rep = run(tmp_path, "verify-suite", "--suite", "nope")
    assert code == 1


def test_unknown_subcommand_rejected():
    with pytest.raises(SystemExit):
        cli.dispatch(["frobnicate"])


def test_seventeen_digit_output():
    text = cli.dumps({"a": 0.1, "b": [1.0, 2], "c": float("nan"), "d": None, "e": True})
    doc = json.loads(text)
    assert "0.10000000000000001" in text
    assert doc["b"] == [1.0, 2] and doc["c"] == "nan" and doc["d"] is None and doc["e"] is True


def test_timing_flag(tmp_path):
    code, rep = run(tmp_path, "verify-suite", "--suite", "kkm-barycentric", "--timing")
    assert rep["timing_seconds"] >= 0


def test_console_script_to_stdout(tmp_path, square):
    p = write(tmp_path / "p.json", [2, 0.5])
    out = subprocess.run([sys.executable, "-m", "convexcert", "separate", "--point", p, "--set", square],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["outcome"]["margin"] == pytest.approx(1.0)


def test_suite_reports_are_byte_identical(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    texts = []
    for jobs in ("1", "2"):
        cli.dispatch(["verify-suite", "--suite", "all", "--seed", "11", "--jobs", jobs, "-o", "r.json",
                      *[f"--trials={name}=2" for name in cli.SUITES]])
        texts.append((tmp_path / "r.json").read_bytes())
    assert texts[0] == texts[1]
