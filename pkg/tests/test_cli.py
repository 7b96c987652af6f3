import json
import subprocess
import sys

import numpy as np
import pytest

from lemniscate.cli import InputError, JobConfig, dumps, run

W2 = (2 - np.sqrt(3)) ** 2
Z2 = '{"coeffs":[[0,0],[0,0],[1,0]]}'


def report(out, command):
    return json.loads((out / f"{command}.json").read_text())


def test_fingerprint_of_z_squared(tmp_path, capsys):
    assert run(["fingerprint", "--poly", Z2, "--out", str(tmp_path), "--N", "256"]) == 0
    rep = report(tmp_path, "fingerprint")
    assert rep["status"] == "ok"
    zeros = np.array(rep["result"]["B"]["zeros"])
    assert np.max(np.abs(zeros)) < 1e-10
    assert json.loads(capsys.readouterr().out) == rep
    for name in ("k_csv", "svg", "curve_csv"):
        assert (tmp_path / rep["result"][name]).exists()


def test_invert_worked_case(tmp_path):
    code = run(["invert", "--blaschke", '{"theta":0,"zeros":[[0,0],[0.5,0]]}', "--out", str(tmp_path)])
    assert code == 0
    P = np.array(report(tmp_path, "invert")["result"]["P"]["coeffs"])
    assert np.max(np.abs(P[:, 0] + 1j * P[:, 1] - [-W2, 0, 1])) < 1e-6


def test_count_classes_cubic(tmp_path):
    code = run(["count-classes", "--n", "3", "--values", "[[0.2,0.1],[-0.3,0.05]]", "--out", str(tmp_path)])
    assert code == 0
    assert report(tmp_path, "count-classes")["result"]["count"] == 1


def test_trace_reports_components(tmp_path):
    assert run(["trace", "--poly", '{"coeffs":[[-2,0],[0,0],[1,0]]}', "--N", "256", "--out", str(tmp_path)]) == 0
    rep = report(tmp_path, "trace")["result"]
    assert rep["components"] == 2 and rep["proper"] is False
    assert rep["level_residual"] <= 1e-10


def test_verify(tmp_path):
    args = ["verify", "--poly1", '{"coeffs":[[0.3,0],[0,0],[1,0]]}', "--poly2", '{"coeffs":[[1.3,0],[2,0],[1,0]]}']
    assert run(args + ["--out", str(tmp_path)]) == 0
    assert report(tmp_path, "verify")["result"]["equivalent"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["fingerprint", "--poly", '{"coeffs":[1,2'],
        ["fingerprint", "--poly", '{"coeffs":[[1,0]]}'],
        ["fingerprint", "--poly", Z2, "--N", "300"],
        ["fingerprint", "--poly", Z2, "--tol", "conjugacy=-1"],
        ["fingerprint", "--poly", Z2, "--tol", "nonsense=1"],
        ["invert", "--blaschke", '{"theta":0,"zeros":[[1.5,0],[0,0]]}'],
        ["count-classes", "--n", "3", "--values", "[[0.2,0.1]]"],
        ["fingerprint", "--poly", "@/nonexistent/file.json"],
        ["trace"],
    ],
)
def test_bad_input_exit_code(argv, tmp_path):
    assert run(argv + ["--out", str(tmp_path)]) == 2


def test_not_proper_is_bad_input(tmp_path):
    assert run(["fingerprint", "--poly", '{"coeffs":[[-2,0],[0,0],[1,0]]}', "--out", str(tmp_path)]) == 2


def test_degenerate_is_numerical_failure(tmp_path):
    # z² - 2z has critical value -1 on the circle
    assert run(["fingerprint", "--poly", '{"coeffs":[[0,0],[-2,0],[1,0]]}', "--out", str(tmp_path)]) == 1


def test_residual_above_tolerance_exits_1(tmp_path):
    argv = ["fingerprint", "--poly", '{"coeffs":[[0.3,0],[0,0],[1,0]]}', "--N", "256", "--no-exterior"]
    assert run(argv + ["--tol", "conjugacy=1e-30", "--out", str(tmp_path)]) == 1


def test_determinism(tmp_path):
    argv = ["fingerprint", "--poly", '{"coeffs":[[0.1,0.2],[0,0],[1,0]]}', "--N", "256"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    strip = lambda p: "\n".join(l for l in (p / "fingerprint.json").read_text().splitlines() if "output_dir" not in l)  # noqa: E731
    assert strip(a) == strip(b)
    assert (a / "fingerprint_k.csv").read_bytes() == (b / "fingerprint_k.csv").read_bytes()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LEMNISCATE_OUTPUT_DIR", str(tmp_path))
    assert run(["verify", "--poly1", Z2, "--poly2", Z2]) == 0
    assert (tmp_path / "verify.json").exists()


def test_config_echoed(tmp_path):
    run(["verify", "--poly1", Z2, "--poly2", Z2, "--seed", "7", "--out", str(tmp_path)])
    cfg = report(tmp_path, "verify")["config"]
    assert cfg["seed"] == 7 and cfg["N"] == 1024 and cfg["tolerances"]["conjugacy"] == 1e-6


def test_job_config_validation():
    with pytest.raises(InputError):
        JobConfig("x", N=100)
    with pytest.raises(InputError):
        JobConfig("x", tolerances={"conjugacy": 0.0})


def test_dumps_float_format():
    assert dumps({"a": 0.1, "b": [1, 2.0]}) == '{\n  "a": 0.10000000000000001,\n  "b": [1, 2.0]\n}\n'
    assert json.loads(dumps({"x": 1 / 3}))["x"] == 1 / 3


def test_console_script_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "lemniscate.cli", "verify", "--poly1", Z2, "--poly2", Z2, "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert json.loads(out.stdout)["result"]["equivalent"] is True
