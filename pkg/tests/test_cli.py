import json
import subprocess
import sys

import numpy as np
import pytest

from nonholo.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert "skate  (n=3, m=2, r=1)" in out
    assert "parallel-points  (n=4, m=3, r=1)" in out
    code, out, _ = run(capsys, "list", "--json")
    infos = json.loads(out)
    assert [i["name"] for i in infos] == ["skate", "vertical-disc", "coaxial-discs", "parallel-points"]
    assert infos[2]["n"] == 5 and infos[2]["r"] == 3


def test_simulate_skate_circle(tmp_path, capsys):
    path = tmp_path / "circle.csv"
    code, _, _ = run(capsys, "simulate", "skate", "--method", "parametric", "--state", "0,0,0",
                     "--params-z", "1,1", "--step", "1e-3", "--t-end", "6.2832", "--output", str(path))
    assert code == 0
    data = np.loadtxt(path, delimiter=",", skiprows=1, usecols=range(8))
    t, x, y = data[:, 0], data[:, 1], data[:, 2]
    assert np.max(np.abs(x - np.sin(t))) < 1e-9
    assert np.max(np.abs(y - (1 - np.cos(t)))) < 1e-9


def test_simulate_vertical_disc_theta_acceleration(capsys):
    code, out, _ = run(capsys, "simulate", "vertical-disc", "--method", "implicit", "-p", "torque=1.5",
                       "-p", "A=0.5", "--record-every", "1", "--t-end", "0.2")
    assert code == 0
    data = np.loadtxt(out.splitlines()[1:], delimiter=",")
    theta_rate = data[:, 7]
    # d(theta dot)/dt = A3 / (m R^2 + A)
    assert np.allclose(np.diff(theta_rate) / np.diff(data[:, 0]), 1.5 / 1.5, rtol=1e-9)


def test_simulate_json_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "simulate", "coaxial-discs", "--format", "json", "--t-end", "0.1", "-o", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["system"] == "coaxial-discs" and doc["columns"][0] == "t"


@pytest.mark.parametrize(
    "argv,code,kind",
    [
        (["simulate", "sleigh"], 2, "unknown-system"),
        (["simulate", "skate", "--bogus"], 2, "usage"),
        (["simulate", "skate", "-p", "m=-1"], 2, "bad-parameter"),
        (["simulate", "skate", "-p", "mass=1"], 2, "bad-parameter"),
        (["simulate", "skate", "--state", "0,a,0"], 3, "malformed-state"),
        (["simulate", "skate", "--state", "0,0"], 3, "malformed-state"),
        (["simulate", "parallel-points", "--method", "implicit", "--state", "0,0,1,0", "--qdot", "1,0,0,1"], 3,
         "initial-state"),
        (["simulate", "parallel-points", "--method", "implicit", "--qdot", "0,0,0,0"], 3, "initial-state"),
        (["simulate", "parallel-points", "--params-z", "0,0,0.3"], 3, "initial-state"),
        (["simulate", "vertical-disc", "--method", "implicit", "--step", "0.5", "--t-end", "5"], 4, "drift"),
    ],
)
def test_error_paths(capsys, argv, code, kind):
    got, out, err = run(capsys, *argv)
    assert got == code
    lines = err.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith(f"error:{code}:{kind}:")


def test_projection_flag_avoids_drift_abort(capsys):
    code, _, _ = run(capsys, "simulate", "vertical-disc", "--method", "implicit", "--step", "0.5",
                     "--t-end", "5", "--project")
    assert code == 0


def test_verify_single_system_is_deterministic(capsys):
    code, out1, _ = run(capsys, "verify", "skate", "--seed", "42", "--samples", "10", "--no-trajectories")
    _, out2, _ = run(capsys, "verify", "skate", "--seed", "42", "--samples", "10", "--no-trajectories")
    assert code == 0 and out1 == out2
    doc = json.loads(out1)
    assert doc["passed"] and doc["seed"] == 42
    assert set(doc["reports"][0]) == {"check", "max_residual", "tolerance", "passed", "samples"}


def test_verify_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("NONHOLO_SEED", "7")
    _, out, _ = run(capsys, "verify", "skate", "--samples", "5", "--no-trajectories")
    assert json.loads(out)["seed"] == 7


def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify", "--all", "--samples", "20")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert {r["check"].split(":")[0] for r in doc["reports"]} == {
        "skate", "vertical-disc", "coaxial-discs", "parallel-points",
    }


def test_verify_with_fault_fails(capsys):
    code, out, _ = run(capsys, "verify", "vertical-disc", "--samples", "10", "--no-trajectories",
                       "--inject-fault", "projector")
    assert code == 1 and not json.loads(out)["passed"]


def test_compare_reports(capsys):
    code, out, _ = run(capsys, "compare", "coaxial-discs")
    assert code == 0
    dev = float(out.split("max |q_Z - q_D|: ")[1].split()[0])
    drift = float(out.split("det G_ab drift along Z: ")[1].split()[0])
    assert dev < 1e-6 and drift < 1e-10
    code, out, _ = run(capsys, "compare", "vertical-disc")
    agreement = float(out.split("agreement: max deviation ")[1].split()[0])
    assert agreement < 1e-6
    assert "reactive force profile" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nonholo", "simulate", "nope"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stderr.startswith("error:2:")
