import json
import math

import numpy as np
import pytest

from cfwave.cli import main
from cfwave.config import ConfigError, loads

ISO = "n = 2\nD = isotropic 1 1\neps0 = zero\neps1 = diag 1 0\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_config_parsing():
    cfg = loads("# comment\npotential = tilted_quartic 0.1  # trailing\nmodel = ModifiedCH\nL = 5\n")
    assert cfg.potential == "tilted_quartic 0.1" and cfg.model == "modified_ch" and cfg.L == 5.0
    assert loads("poly = 0.25,0,-0.5,0,0.25").potential.startswith("poly")
    assert loads(ISO + "t11 = 0.3").resolve_mu() == pytest.approx(0.3)
    assert loads("alpha = 1\nbeta = -0.1\nt11 = 0.3").resolve_mu() == pytest.approx(0.2)
    assert loads('{"mu": 0.2, "model": "classic_ac", "bc": "dirichlet(-1,1)"}').resolve_mu() == 0.2


@pytest.mark.parametrize("text", ["mu = 0.2\nalpha = 1", ISO + "mu = 0.1", "L = 5\nL = 6", "bogus = 1",
                                  "just a line", "model = classic_ch\nbc = dirichlet(-1,1)", "dx = -1",
                                  "n = 2\neps1 = identity"])
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        loads(text)


def test_flags_win():
    cfg = loads("alpha = 2\nbeta = 1", {"mu": 0.3})
    assert cfg.resolve_mu() == 0.3
    assert loads("dx = 0.1", {"dx": 0.05}).dx == 0.05


def test_reduce(tmp_path):
    out = tmp_path / "r"
    assert main(["reduce", "--config", write(tmp_path, "a.cfg", ISO), "--out", str(out)]) == 0
    data = json.loads((out / "reduction.json").read_text())
    assert data["alpha"] == 1.0 and data["gamma"] == 0.0 and data["valid"]
    assert data["c"] == pytest.approx(2.0)


def test_reduce_flags_a2(tmp_path):
    cfg = write(tmp_path, "a.cfg", "n = 2\nD = isotropic 1 1\neps1 = identity\n")
    assert main(["reduce", "--config", cfg, "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "reduction.json").read_text())
    assert data["a2_failed"] and data["a2_residual"] == pytest.approx(-8.0)


def test_reduce_invalid(tmp_path, capsys):
    cfg = write(tmp_path, "a.cfg", "n = 1\nD = -1\n")
    assert main(["reduce", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "positive definiteness" in capsys.readouterr().err
    assert main(["reduce", "--config", write(tmp_path, "b.cfg", "n = 2\nD = 1 2 3\n"), "--out", str(tmp_path)]) == 2


def test_profile_quartic(tmp_path):
    assert main(["profile", "--out", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "profile.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(data[:, 1] - np.tanh(data[:, 0] / math.sqrt(2)))) <= 1e-6
    assert (tmp_path / "profile.csv").read_text().startswith("xi,v,dv\n")
    fits = json.loads((tmp_path / "decay.json").read_text())
    assert {f["side"] for f in fits} == {"plus", "minus"}
    assert set(fits[0]) == {"side", "kind", "value", "expected", "r_squared"}


def test_profile_sextic(tmp_path):
    assert main(["profile", "--potential", "sextic_m1_2", "--out", str(tmp_path)]) == 0
    plus = next(f for f in json.loads((tmp_path / "decay.json").read_text()) if f["side"] == "plus")
    assert plus["kind"] == "algebraic" and plus["value"] == pytest.approx(1.0, rel=0.1)


def test_profile_unequal_wells(tmp_path, capsys):
    assert main(["profile", "--potential", "tilted_quartic 0.1", "--out", str(tmp_path)]) == 3
    assert "0.1997" in capsys.readouterr().err


def test_simulate_and_round_trip(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--model", "modified_ac", "--mu", "0.2", "--L", "8", "--dx", "0.05", "--t-end", "5"]
    assert main(args + ["--out", str(a)]) == 0
    speed = json.loads((a / "speed.json").read_text())
    assert speed["s_measured"] == pytest.approx(-0.2, rel=0.02)
    manifest = json.loads((a / "manifest.json").read_text())
    for key in ("model", "mu", "dx", "dt", "L", "t_end", "bc", "potential", "seed"):
        assert key in manifest
    assert (a / "trajectory.csv").read_text().startswith("t,front_position,mass,energy\n")
    assert (a / "snapshots.csv").read_text().startswith("t,x,v\n")
    assert main(["simulate", "--config", str(a / "manifest.json"), "--out", str(b)]) == 0
    for name in ("manifest.json", "snapshots.csv", "trajectory.csv", "speed.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_noise_is_seeded(tmp_path):
    base = ["simulate", "--model", "classic_ch", "--L", "4", "--dx", "0.4", "--t-end", "1"]
    cfg = write(tmp_path, "n.cfg", "noise = 0.01\nseed = 7\n")
    assert main(base + ["--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--config", cfg, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "snapshots.csv").read_bytes() == (tmp_path / "b" / "snapshots.csv").read_bytes()


def test_simulate_blowup_exit(tmp_path, capsys):
    args = ["simulate", "--mu", "0.2", "--L", "4", "--dx", "0.1", "--dt", "0.5", "--t-end", "2", "--out", str(tmp_path)]
    assert main(args) == 4
    assert "last valid time" in capsys.readouterr().err


def test_compare_round_trip(tmp_path):
    cfg = write(tmp_path, "c.cfg", "models = modified_ch, classic_ch\nL_ch = 8\ndx_ch = 0.4\nt_end_ch = 4\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["compare", "--config", cfg, "--jobs", "2", "--out", str(a)]) == 0
    assert main(["compare", "--config", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert (a / "comparison.csv").read_bytes() == (b / "comparison.csv").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    rows = (a / "comparison.csv").read_text().splitlines()
    assert len(rows) == 5 and all(r.split(",")[2] == "true" for r in rows[1:])


def test_other_errors_exit_one(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["profile", "--potential", "0,0,1", "--out", str(tmp_path)]) == 1
