import csv
import json

import numpy as np
import pytest

from surfwave import dispersion as disp
from surfwave.cli import main
from surfwave.materials import MaterialPoint

SMALL = {
    "seed": 0,
    "material": {"rho": 1.0, "lam": 1.0, "mu": 1.0},
    "pair": {"plus": {"rho": 5.0, "lam": 1.0, "mu": 5.0}, "minus": {"rho": 1.0, "lam": 1.0, "mu": 1.0}},
    "point": {"xi": [3.0, 4.0], "slowness": 0.5},
    "scan": {"n": 50},
    "ray": {"x0": [0.5, -0.3], "xi0": [1.0, 0.5], "T": 0.5, "dt": 0.005},
    "packet": {"center": [12.0, 0.0], "width": 1.0, "n": 32},
    "synth": {"mode": "rayleigh", "data": "packet", "times": [0.0, 0.5], "x1": [-1, 1, 5], "x2": [-1, 1, 4]},
    "ellipse": {"mode": "rayleigh", "xi": [2.0, 0.0], "n": 32},
}


def run(tmp_path, cfg, command, name="out"):
    path = tmp_path / "cfg.json"
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    out = tmp_path / name
    return main([command, "--config", str(path), "--out", str(out)]), out


def test_speeds(tmp_path):
    code, out = run(tmp_path, SMALL, "speeds")
    assert code == 0
    data = json.loads((out / "speeds.json").read_text())
    assert data["c_R"] == disp.rayleigh_speed(MaterialPoint(1, 1, 1)).c_R
    assert data["c_ST"] == pytest.approx(0.9582524195, abs=1e-9)


def test_scan_csv_header_and_precision(tmp_path):
    code, out = run(tmp_path, SMALL, "scan")
    assert code == 0
    with (out / "rayleigh_scan.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s", "R"]
    s = np.array([float(r[0]) for r in rows[1:]])
    np.testing.assert_array_equal(s, np.linspace(0.0, 1.0, 52)[1:-1])
    assert (out / "stoneley_scan.csv").read_text().startswith("s,S,m1,m2\n")


@pytest.mark.parametrize("command,files", [
    ("symbol", ["symbol.json"]),
    ("diag", ["diag.json"]),
    ("trace", ["ray.csv"]),
    ("ellipse", ["ellipse.json"]),
    ("synth", ["field.csv", "field_meta.json"]),
])
def test_commands_are_deterministic(tmp_path, command, files):
    c1, o1 = run(tmp_path, SMALL, command, "a")
    c2, o2 = run(tmp_path, SMALL, command, "b")
    assert c1 == c2 == 0
    for f in files:
        assert (o1 / f).read_bytes() == (o2 / f).read_bytes()


def test_trace_and_field_headers(tmp_path):
    run(tmp_path, SMALL, "trace")
    _, out = run(tmp_path, SMALL, "synth")
    assert (tmp_path / "out" / "ray.csv").read_text().splitlines()[0] == "t,x1,x2,xi1,xi2,phase,det_jac,re_a0,im_a0"
    lines = (out / "field.csv").read_text().splitlines()
    assert lines[0] == "t,x1,x2,re_f1,im_f1,re_f2,im_f2,re_f3,im_f3"
    assert len(lines) == 1 + 2 * 5 * 4


def test_ellipse_reports_retrograde(tmp_path):
    _, out = run(tmp_path, SMALL, "ellipse")
    data = json.loads((out / "ellipse.json").read_text())
    assert data["retrograde"]["retrograde"] is True
    assert len(data["samples"]) == 32


@pytest.mark.parametrize("cfg,key", [
    ('{"material": {', "line 1"),
    ({"material": {"rho": 1.0, "lam": 1.0}}, "mu"),
    ({"materal": {}}, "materal"),
    ({**SMALL, "ray": {"x0": [0, 0], "xi0": [1, 0], "T": "long"}}, "ray.T"),
    ({**SMALL, "synth": {**SMALL["synth"], "mode": "love"}}, "synth.mode"),
])
def test_config_errors_exit_2_and_name_key(tmp_path, capsys, cfg, key):
    code, _ = run(tmp_path, cfg, "trace" if "ray" in key else ("synth" if "synth" in key else "speeds"))
    assert code == 2
    assert key in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys):
    cfg = {**SMALL, "ray": {"x0": [0, 0], "xi0": [1, 0], "T": 1.0, "dt": 0.5}}
    code, _ = run(tmp_path, cfg, "trace")
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_missing_stoneley_root_exits_3(tmp_path):
    same = {"rho": 2.0, "lam": 1.5, "mu": 1.2}
    cfg = {**SMALL, "pair": {"plus": same, "minus": same}, "ellipse": {"mode": "stoneley", "xi": [1.0, 0.0]}}
    code, _ = run(tmp_path, cfg, "ellipse")
    assert code == 3
