import json
import subprocess
import sys

import pytest

from conftest import model_path
from superholonomy.cli import COMMANDS, main


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--out", str(out)])
    return code, out.read_bytes()


CASES = [
    ("curvature", "example"),
    ("transport", "rank11"),
    ("transport", "hybrid"),
    ("holonomy", "example"),
    ("compare", "product"),
    ("twofold", "example"),
    ("derham-wu", "drw"),
    ("fppf audit", "fppf"),
    ("fppf glue", "fppf"),
]


@pytest.mark.parametrize("command,model", CASES)
def test_commands_pass_and_are_deterministic(tmp_path, command, model):
    argv = [*command.split(), "--model", str(model_path(model))]
    code, first = run(tmp_path, *argv)
    assert code == 0
    _, second = run(tmp_path, *argv)
    assert first == second
    report = json.loads(first)
    assert report["verdict"] == "pass"
    assert report["command"] == command
    assert "seconds" not in report


def test_every_command_is_covered():
    assert {c for c, _ in CASES} == set(COMMANDS)


def test_rationals_are_strings(tmp_path):
    _, raw = run(tmp_path, "curvature", "--model", str(model_path("example")))
    comps = json.loads(raw)["results"]["components_at_base"]
    assert comps["th1,th1"]["entries"] == [[[{"indices": ["etaS1", "etaS2"], "coeff": "2"}]]]


def test_hybrid_numbers_are_formatted(tmp_path):
    _, raw = run(tmp_path, "transport", "--model", str(model_path("hybrid")))
    entry = json.loads(raw)["results"]["paths"]["g"]
    assert entry["mode"] == "hybrid"
    body = entry["numeric"]["1"]
    assert all(isinstance(x, str) and "e" in x for row in body for x in row)


def test_failing_verdict_exits_one(tmp_path):
    code, raw = run(tmp_path, "fppf", "glue", "--model", str(model_path("fppf_bad")))
    assert code == 1
    report = json.loads(raw)
    assert report["verdict"] == "fail"
    assert report["results"]["sections"]["bad"]["error"] == "no_descent"


def test_model_error_exits_two(tmp_path):
    bad = tmp_path / "bad.model"
    bad.write_text("manifold p=1 q=0\nbase L=1\ngamma x1 x1 x1 = 1 + \n")
    code, raw = run(tmp_path, "curvature", "--model", str(bad))
    assert code == 2
    err = json.loads(raw)["error"]
    assert err["code"] == "syntax_error" and err["line"] == 3 and err["column"]


def test_missing_file_and_unknown_command_exit_two(tmp_path):
    code, raw = run(tmp_path, "curvature", "--model", str(tmp_path / "nope.model"))
    assert code == 2 and json.loads(raw)["error"]["code"] == "io_error"
    code, raw = run(tmp_path, "frobnicate", "--model", str(model_path("example")))
    assert code == 2 and json.loads(raw)["error"]["code"] == "unknown_command"


def test_math_error_exits_three(tmp_path):
    code, raw = run(tmp_path, "compare", "--model", str(model_path("product")), "--lprime", "1")
    assert code == 3
    assert json.loads(raw)["error"]["code"] == "spec_insufficient"


def test_random_audit_options(tmp_path):
    code, raw = run(tmp_path, "fppf", "audit", "--model", str(model_path("fppf")), "--random", "50", "--seed", "4")
    assert code == 0
    assert json.loads(raw)["results"]["random"] == {"count": 50, "seed": 4, "disagreements": []}


def test_timings_flag(tmp_path):
    _, raw = run(tmp_path, "curvature", "--model", str(model_path("example")), "--timings")
    assert "seconds" in json.loads(raw)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "superholonomy.cli", "curvature", "--model",
                           str(model_path("flat"))], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["flat"] is True
