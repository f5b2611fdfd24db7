import json

import numpy as np
import pytest

from greenvar.cli import main


def _run(tmp_path, command, cfg=None, *extra):
    out = tmp_path / f"out-{command}"
    argv = [command, "--out", str(out), *extra]
    if cfg is not None:
        path = tmp_path / f"{command}.json"
        path.write_text(json.dumps(cfg))
        argv += ["--config", str(path)]
    return main(argv), out


def _csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_green_disk(tmp_path):
    code, out = _run(tmp_path, "green", {"grid": 40})
    assert code == 0
    rows = _csv(out / "green.csv")
    hit = rows[(np.abs(rows[:, 0] - 0.5) < 1e-12) & (np.abs(rows[:, 1]) < 1e-12)]
    assert len(hit) == 1
    assert abs(hit[0, 2] - np.log(0.5) / (2 * np.pi)) < 1e-15
    for name in ("poisson.csv", "green.svg", "poisson.svg", "manifest.json"):
        assert (out / name).exists()
    man = json.loads((out / "manifest.json").read_text())
    assert set(man["outputs"]) == {"green.csv", "poisson.csv", "green.svg", "poisson.svg"}
    assert man["version"]


def test_output_dir_created(tmp_path):
    code, out = _run(tmp_path, "green", {"domain": {"type": "conformal", "coeffs": [1, 0.2]}},
                     "--resolution", "16")
    assert code == 0 and out.is_dir()


def test_bad_domain_names_field(tmp_path, capsys):
    code, _ = _run(tmp_path, "green", {"domain": {"type": "conformal", "coeffs": [1, 0.9]}})
    assert code == 2
    assert "domain.coeffs" in capsys.readouterr().err


def test_missing_domain_file(tmp_path, capsys):
    code, _ = _run(tmp_path, "green", {"domain": str(tmp_path / "nope.json")})
    assert code == 2
    assert "domain" in capsys.readouterr().err


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["green", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_sweep_table(tmp_path):
    code, out = _run(tmp_path, "sweep", {"operator": {"kind": "schrodinger", "u": "const(1)"},
                                         "eps": [0.2, 0.1, 0.05, 0.025]}, "--resolution", "64")
    assert code == 0
    rows = _csv(out / "sweep.csv")
    assert np.allclose(rows[:, 7], -1 / (8 * np.pi), atol=1e-10)
    rep = json.loads((out / "report.json").read_text())
    assert abs(rep["order_linear"] - 2) < 0.15
    assert "order_quadratic" in rep
    assert (out / "sweep.svg").read_text().startswith("<svg")


def test_sweep_beltrami(tmp_path):
    code, out = _run(tmp_path, "sweep", {"operator": {"kind": "beltrami", "u": "abs2"},
                                         "eps": [0.08, 0.04, 0.02, 0.01]}, "--resolution", "48")
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert abs(rep["first_variation"] + 1 / (2 * np.pi)) < 1e-10
    assert rep["second_variation"] is None


@pytest.mark.parametrize("eps", [[], [0.1, 0.05], [0.9, 0.1, 0.05, 0.02]])
def test_sweep_bad_eps(tmp_path, eps):
    code, _ = _run(tmp_path, "sweep", {"eps": eps})
    assert code == 2


def test_grow_radius(tmp_path):
    cfg = {"growth": {"dt": 0.01, "t_end": 0.5, "snapshot_every": 10, "nodes": 64}}
    code, out = _run(tmp_path, "grow", cfg)
    assert code == 0
    rows = _csv(out / "summary.csv")
    assert np.max(np.abs(rows[:, 3] / np.sqrt(1 + rows[:, 0] / np.pi) - 1)) < 1e-3
    assert np.all(np.diff(rows[:, 1]) > 0)
    lines = (out / "trajectory.jsonl").read_text().splitlines()
    assert len(lines) == len(rows)


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_grow_bad_dt(tmp_path, dt):
    code, _ = _run(tmp_path, "grow", {"growth": {"dt": dt}})
    assert code == 2


def test_inverse_round_trip_recorded(tmp_path):
    code, out = _run(tmp_path, "inverse", {"inverse": {"alphas": [1e-4, 1e-6, 1e-8, 1e-10]}}, "--resolution", "48")
    assert code == 0
    summary = json.loads((out / "inverse.json").read_text())
    assert summary["residual"] < 1e-6
    assert summary["alpha"] == 1e-10
    s = _csv(out / "spectrum.csv")[:, 1]
    assert np.all(np.diff(s) <= 0) and s[-1] > 0
    assert _csv(out / "residuals.csv").shape == (4, 4)


def test_inverse_empty_alphas(tmp_path):
    code, _ = _run(tmp_path, "inverse", {"inverse": {"alphas": []}})
    assert code == 2


def test_rerun_identical_bytes(tmp_path):
    cfg = {"inverse": {"alphas": [1e-6], "noise": 0.01}}
    _, a = _run(tmp_path, "inverse", cfg, "--resolution", "32", "--seed", "5")
    first = {p.name: p.read_bytes() for p in a.glob("*.csv")}
    _, b = _run(tmp_path, "inverse", cfg, "--resolution", "32", "--seed", "5")
    assert first == {p.name: p.read_bytes() for p in b.glob("*.csv")}


def test_oracle(tmp_path):
    code, out = _run(tmp_path, "oracle", {"operator": {"u": "const(1)"}, "oracle": {"eps": 0.1, "n_r": 64,
                                                                                       "n_theta": 64}})
    assert code == 0
    summary = json.loads((out / "oracle.json").read_text())
    assert summary["series_flux_rel_err"] < 1e-10
    assert summary["max_flux_rel_err"] < 1e-3
    assert summary["max_probe_rel_err"] < 2e-3


def test_oracle_needs_disk(tmp_path):
    code, _ = _run(tmp_path, "oracle", {"domain": {"type": "conformal", "coeffs": [1, 0.1]}})
    assert code == 2


def test_numerical_failure_exit_code(tmp_path):
    # a five-petal curve at 32 markers is too coarse for the MFS fit
    t = 2 * np.pi * np.arange(32) / 32
    pts = (1 + 0.35 * np.cos(5 * t)) * np.exp(1j * t)
    dom = tmp_path / "curve.json"
    dom.write_text(json.dumps({"type": "curve", "points": [[p.real, p.imag] for p in pts]}))
    code, _ = _run(tmp_path, "green", {"domain": str(dom)})
    assert code == 3


def test_unknown_command():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_zeta_off_boundary(tmp_path, capsys):
    cfg = {"domain": {"type": "conformal", "coeffs": [1, 0.2]}, "zeta": [1.0, 0.0]}
    code, _ = _run(tmp_path, "sweep", cfg, "--resolution", "16")
    assert code == 2
    assert "zeta" in capsys.readouterr().err
    cfg["zeta"] = [1.2, 0.0]
    code, out = _run(tmp_path, "green", cfg, "--resolution", "16")
    assert code == 0
