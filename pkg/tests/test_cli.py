import json
import subprocess
import sys

import numpy as np
import pytest

from toricfact.cli import RunConfig, eigen_surfaces, main


def run_cli(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_factorization_passes(capsys):
    code, out, err = run_cli(["verify", "factorization", "--no-timestamp"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["suite"] == "factorization"
    assert set(data) == {"suite", "params", "checks"}
    assert all(c["status"] == "pass" for c in data["checks"])
    assert "[PASS] factorization.symbolic_difference" in err


def test_numeric_backend_flags(capsys):
    code, out, _ = run_cli(["verify", "factorization", "--backend", "numeric", "--grid", "8", "--modes", "1"],
                           capsys)
    data = json.loads(out)
    assert code == 0 and [c["name"] for c in data["checks"]] == ["numeric_difference_grid8_N1"]
    assert "timing_ms" in data


@pytest.mark.parametrize("argv", [
    ["verify", "anticommutator", "--mutation", "drop_theta2"],
    ["verify", "factorization", "--mutation", "drop_dq_correction"],
    ["verify", "curvature", "--spec", "sphere", "--mutation", "drop_mean_curvature"],
])
def test_mutation_runs_exit_one(argv, capsys):
    code, out, _ = run_cli(argv, capsys)
    assert code == 1
    assert any(c["status"] == "fail" and c["residual"] > 1e-3 for c in json.loads(out)["checks"])


def test_same_seed_gives_identical_json(capsys):
    argv = ["verify", "torus", "--trials", "40", "--seed", "5", "--no-timestamp"]
    _, first, _ = run_cli(argv, capsys)
    _, second, _ = run_cli(argv, capsys)
    assert first == second


def test_out_file_written(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run_cli(["verify", "curvature", "--out", str(path), "--no-timestamp"], capsys)
    assert code == 0 and out == ""
    data = json.loads(path.read_text())
    assert data["suite"] == "curvature"
    assert any(c["name"].startswith("twisted.") for c in data["checks"])


@pytest.mark.parametrize("argv", [
    ["verify", "factorization", "--grid", "2"],
    ["verify", "nonsense"],
    ["verify", "positivity", "--support", "1,2,3"],
    ["spectrum", "--lowest", "0"],
    ["verify", "torus", "--theta", "nan"],
])
def test_usage_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 2


def test_runtime_usage_errors_exit_two(capsys):
    code, _, err = run_cli(["verify", "positivity", "--support", "0.5,0.4,0,0.1"], capsys)
    assert code == 2 and "empty" in err
    code, _, _ = run_cli(["verify", "anticommutator", "--mutation", "bogus"], capsys)
    assert code == 2


def test_unwritable_output_exit_three(tmp_path, capsys):
    code, _, _ = run_cli(["verify", "anticommutator", "--out", str(tmp_path / "missing" / "r.json")], capsys)
    assert code == 3


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig("verify", "torus", modes=-1).validate()
    RunConfig("verify", "torus", grid=4).validate()


def test_emit_eigen_surfaces_format(tmp_path, capsys):
    path = tmp_path / "s.csv"
    assert main(["emit", "eigen-surfaces", "--modes", "1", "--grid", "4", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "n1,n2,phi,psi,lambda"
    assert len(lines) == 1 + 9 * 16
    for field in lines[1].split(","):
        mantissa, exponent = field.split("e")
        assert len(mantissa.split(".")[1]) == 12 and len(exponent) == 3
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(data, eigen_surfaces(1, 4), rtol=1e-12)
    assert np.all(data[:, 4] >= 0)


def test_spectrum_small_grid(capsys):
    code, out, _ = run_cli(["spectrum", "--modes", "0", "--grid", "8", "--lowest", "2", "--no-timestamp"], capsys)
    data = json.loads(out)
    assert data["suite"] == "spectrum" and code in (0, 1)
    assert data["info"]["grid8"]["lowest"] > 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "toricfact", "verify", "anticommutator", "--no-timestamp"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["suite"] == "anticommutator"
