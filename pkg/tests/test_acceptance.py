"""Acceptance criteria 1 to 12, each at its stated tolerance.

The module runs ``surfwave verify`` twice as a subprocess.  Values and
section timings come from the first run; comparing both runs settles
determinism.  Each criterion adds one PASS/FAIL line to the terminal
summary.
"""

import json
import re
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import rayleigh_root_scan
from surfwave import dispersion as disp
from surfwave.materials import MaterialPoint

ROOT = Path(__file__).resolve().parents[1]
CONFIG = ROOT / "configs" / "default.json"


def _run_verify(out: Path):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "surfwave", "verify", "--config", str(CONFIG), "--out", str(out), "-v"],
        capture_output=True, text=True,
    )
    wall = time.perf_counter() - t0
    timings = {m[0]: float(m[1]) for m in re.findall(r"section (\w+): ([0-9.]+) s", proc.stderr)}
    return proc.returncode, wall, timings, out / "verify.json"


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("verify")
    return [_run_verify(base / name) for name in ("first", "second")]


@pytest.fixture(scope="module")
def checks(runs):
    report = json.loads(runs[0][3].read_text())
    return {c["name"]: c for c in report["checks"]}


@pytest.fixture(scope="module")
def timings(runs):
    return runs[0][2]


def _summary(checks, names):
    return ", ".join(f"{n.split('.', 1)[1]}={checks[n]['value']:.2e}" for n in names)


def _all_pass(checks, names):
    return all(checks[n]["passed"] for n in names)


def test_criterion_01_rayleigh_root(criterion):
    m = MaterialPoint(1.0, 1.0, 1.0)
    t0 = time.perf_counter()
    c = disp.rayleigh_speed(m).c_R
    dt = time.perf_counter() - t0
    ref = rayleigh_root_scan(1.0, 1.0, 1.0) / m.cs
    ok = abs(c / m.cs - 0.919402) < 1e-4 and abs(c / m.cs - ref) < 1e-4 and dt < 0.1
    criterion("1", ok, f"c_R/c_s={c / m.cs:.9f} oracle={ref:.9f} time={dt:.3f}s")
    assert ok


def test_criterion_02_root_uniqueness(criterion, checks, timings):
    names = ["dispersion.rayleigh_single_crossing", "dispersion.rayleigh_residual"]
    ok = _all_pass(checks, names) and timings["dispersion"] < 5
    criterion("2", ok, f"{_summary(checks, names)} section={timings['dispersion']:.1f}s")
    assert ok


def test_criterion_03_diagonalization(criterion, checks, timings):
    names = ["symbol.unitary", "symbol.offdiag", "symbol.m1_plus_m2", "symbol.m1_times_m2",
             "symbol.rayleigh_determinant", "symbol.m2_gt_m3_gt_0", "symbol.factorization"]
    ok = _all_pass(checks, names) and timings["symbol"] < 5
    criterion("3", ok, f"{_summary(checks, names)} section={timings['symbol']:.1f}s")
    assert ok


def test_criterion_04_stoneley_structure(criterion, checks, timings):
    names = ["dispersion.detM_times_factor_equals_S", "dispersion.stoneley_definiteness",
             "dispersion.identical_pair_no_root", "dispersion.stoneley_at_most_one_root"]
    ok = _all_pass(checks, names) and timings["dispersion"] < 10
    criterion("4", ok, f"{_summary(checks, names)} section={timings['dispersion']:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="det M equals S divided by the factor, not multiplied; see README")
def test_criterion_04_literal_det_m_form(criterion, checks):
    c = checks["dispersion.detM_equals_factor_times_S_literal"]
    ok = c["value"] < 1e-10
    criterion("4 (literal det M = factor * S)", ok, f"relative gap={c['value']:.2e}")
    assert ok


def test_criterion_05_ray_suite(criterion, checks, timings):
    names = ["ray.phase_constancy", "ray.hamiltonian_drift", "ray.fourth_order_ratio", "ray.flat_chart",
             "ray.bump_eikonal"]
    ok = _all_pass(checks, names) and checks["ray.fourth_order_ratio"]["value"] >= 8 and timings["ray"] < 30
    criterion("5", ok, f"{_summary(checks, names)} section={timings['ray']:.1f}s")
    assert ok


def test_criterion_06_transport(criterion, checks):
    names = ["ray.flat_oracle", "ray.hessian_vs_neighbours"]
    ok = _all_pass(checks, names)
    criterion("6", ok, _summary(checks, names))
    assert ok


def test_criterion_07_polarization(criterion, checks):
    names = ["synthesis.ellipsoid_residual", "synthesis.poisson_axis_ratio", "synthesis.retrograde_rayleigh",
             "synthesis.retrograde_flips_on_conjugation", "synthesis.retrograde_stoneley"]
    ok = _all_pass(checks, names)
    criterion("7", ok, _summary(checks, names))
    assert ok


def test_criterion_08_propagation(criterion, checks, timings):
    names = ["synthesis.packet_speed_rayleigh", "synthesis.packet_direction_rayleigh",
             "synthesis.packet_speed_stoneley", "synthesis.packet_direction_stoneley"]
    ok = _all_pass(checks, names) and timings["propagation"] < 60
    criterion("8", ok, f"{_summary(checks, names)} section={timings['propagation']:.1f}s")
    assert ok


def test_criterion_09_flat_oracles(criterion, checks):
    names = ["flat.pipeline_vs_spectrum", "flat.example1_outgoing", "flat.example2_peaks"]
    ok = _all_pass(checks, names)
    criterion("9", ok, _summary(checks, names) + " (line load in outgoing form)")
    assert ok


@pytest.mark.xfail(strict=True, reason="standing-wave line-load form is not the causal field; see README")
def test_criterion_09_literal_example1(criterion, checks):
    c = checks["flat.example1_literal"]
    ok = c["value"] < 1e-2
    criterion("9 (standing-wave line-load form)", ok, f"sup error={c['value']:.2e}")
    assert ok


def test_criterion_10_evanescent(criterion, checks):
    names = ["synthesis.evanescent_slopes", "synthesis.decay_ordering", "synthesis.evanescent_trace"]
    ok = _all_pass(checks, names)
    criterion("10", ok, _summary(checks, names))
    assert ok


def test_criterion_11_subprincipal(criterion, checks):
    names = ["symbol.r0_flat_zero", "symbol.r0_richardson"]
    ok = _all_pass(checks, names)
    criterion("11", ok, _summary(checks, names))
    assert ok


def test_criterion_12_determinism(criterion, runs):
    (code1, wall1, _, rep1), (code2, wall2, _, rep2) = runs
    same = rep1.read_bytes() == rep2.read_bytes()
    ok = same and code1 == 0 and code2 == 0 and max(wall1, wall2) < 180
    criterion("12", ok, f"identical={same} exit={code1},{code2} wall={wall1:.0f}s,{wall2:.0f}s")
    assert ok


def test_all_gating_checks_pass(checks):
    failed = [n for n, c in checks.items() if c["gating"] and not c["passed"]]
    assert not failed
    assert np.isfinite([c["value"] for c in checks.values()]).all()
