"""Command-line front end.

Exit codes: 0 success, 1 failed ``verify``, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections.abc import Mapping
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import dispersion as disp
from . import flat
from . import rays
from . import symbols as sym
from . import synthesis as syn
from .errors import ConfigError, NoStoneleyRoot, NumericalFailure, SurfwaveError
from .materials import (
    DEFAULT_BOX,
    EllipticPoint,
    MaterialPair,
    elastic_speeds,
    material_field_from_dict,
    metric_from_dict,
)
from .verify import VerifySettings, run_verify

log = logging.getLogger("surfwave")

COMMANDS = ("speeds", "scan", "symbol", "diag", "trace", "synth", "ellipse", "verify")

SCHEMA = {
    "material": None,
    "pair": {"plus": None, "minus": None},
    "metric": None,
    "box": None,
    "seed": None,
    "point": {"x": None, "xi": None, "slowness": None, "tau": None},
    "scan": {"n": None},
    "ray": {"x0": None, "xi0": None, "T": None, "dt": None},
    "packet": {"center": None, "width": None, "n": None, "x_center": None},
    "source": {"p": None, "A3": None, "T": None, "ds": None, "xi_max": None, "dxi": None},
    "synth": {"mode": None, "data": None, "times": None, "x1": None, "x2": None, "chart_n": None},
    "ellipse": {"mode": None, "xi": None, "a0": None, "n": None},
    "verify": {f.name: None for f in fields(VerifySettings) if f.name != "seed"},
}


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def _check_keys(d, schema, prefix=""):
    if not isinstance(d, Mapping):
        raise ConfigError(f"{prefix or 'config'} must be an object")
    for k, v in d.items():
        name = f"{prefix}.{k}" if prefix else k
        if k not in schema:
            raise ConfigError(f"unknown key {name!r}")
        if schema[k] is not None:
            _check_keys(v, schema[k], name)


def load_config(path) -> dict:
    """Read and schema-check a JSON config.

    Raises
    ------
    ConfigError
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    _check_keys(cfg, SCHEMA)
    return cfg


def _section(cfg, key) -> dict:
    if key not in cfg:
        raise ConfigError(f"missing key {key!r}")
    return cfg[key]


def _get(d, key, prefix, kind=float, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing key {prefix}.{key!r}" if prefix else f"missing key {key!r}")
        return default
    try:
        if kind is float:
            v = float(d[key])
            if not np.isfinite(v):
                raise ValueError
            return v
        if kind is int:
            v = d[key]
            if isinstance(v, bool) or int(v) != v:
                raise ValueError
            return int(v)
        if kind == "vec2":
            v = np.asarray(d[key], dtype=float)
            if v.shape != (2,) or not np.all(np.isfinite(v)):
                raise ValueError
            return v
        if kind == "list":
            v = [float(x) for x in d[key]]
            if not v:
                raise ValueError
            return v
        return kind(d[key])
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for key {prefix + '.' if prefix else ''}{key}") from None


def _box(cfg):
    if "box" not in cfg:
        return DEFAULT_BOX
    try:
        (a, b), (c, d) = cfg["box"]
        return ((float(a), float(b)), (float(c), float(d)))
    except (TypeError, ValueError):
        raise ConfigError("invalid value for key box") from None


def _material(cfg):
    return material_field_from_dict(_section(cfg, "material"), _box(cfg), "material")


def _pair(cfg, required=True):
    if "pair" not in cfg:
        if required:
            raise ConfigError("missing key 'pair'")
        return None
    p = cfg["pair"]
    for k in ("plus", "minus"):
        if k not in p:
            raise ConfigError(f"missing key pair.{k!r}")
    box = _box(cfg)
    return MaterialPair(material_field_from_dict(p["plus"], box, "pair.plus"),
                        material_field_from_dict(p["minus"], box, "pair.minus"))


def _metric(cfg):
    return metric_from_dict(cfg.get("metric"), _box(cfg), "metric")


def _axis(d, key, prefix):
    v = d.get(key)
    if v is None:
        raise ConfigError(f"missing key {prefix}.{key!r}")
    try:
        lo, hi, n = float(v[0]), float(v[1]), int(v[2])
        if n < 1 or (n > 1 and not hi > lo):
            raise ValueError
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"invalid value for key {prefix}.{key} (expected [lo, hi, n])") from None
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_json_ready(data), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format(float(v), ".17g") for v in row])


def _matrix(a):
    a = np.asarray(a)
    return [[complex(v) for v in row] for row in a]


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_speeds(cfg, out: Path, args) -> int:
    f = _material(cfg)
    m = f.point((0.0, 0.0))
    cs, cp = elastic_speeds(m)
    data = {"c_s": cs, "c_p": cp, "c_R": disp.rayleigh_speed(m).c_R}
    pair = _pair(cfg, required=False)
    if pair is not None:
        root = disp.stoneley_speed(pair)
        data["c_ST"] = root.c_ST if root.exists else None
    write_json(out / "speeds.json", data)
    return 0


def cmd_scan(cfg, out: Path, args) -> int:
    n = _get(cfg.get("scan", {}), "n", "scan", int, 200)
    if n < 2:
        raise ConfigError("invalid value for key scan.n")
    m = _material(cfg).point((0.0, 0.0))
    s = np.linspace(0.0, m.cs, n + 2)[1:-1]
    write_csv(out / "rayleigh_scan.csv", ["s", "R"], zip(s, disp.rayleigh_residual(s, m)))
    pair = _pair(cfg, required=False)
    if pair is not None:
        p, q = pair.points()
        s = np.linspace(0.0, min(p.cs, q.cs), n + 2)[1:-1]
        m1, m2 = disp.stoneley_eigenvalues(s, pair)
        write_csv(out / "stoneley_scan.csv", ["s", "S", "m1", "m2"], zip(s, disp.stoneley_residual(s, pair), m1, m2))
    return 0


def _point(cfg, f):
    d = _section(cfg, "point")
    x = _get(d, "x", "point", "vec2", np.zeros(2))
    xi = _get(d, "xi", "point", "vec2", required=True)
    g = _metric(cfg)
    if "tau" in d:
        tau = _get(d, "tau", "point")
    else:
        tau = _get(d, "slowness", "point", required=True) * float(g.norm(x, xi))
    return EllipticPoint(0.0, tuple(x), tau, tuple(xi)), g


def cmd_symbol(cfg, out: Path, args) -> int:
    f = _material(cfg)
    pt, g = _point(cfg, f)
    L = sym.dn_symbol(pt, f, g)
    U, Ui, Mo = sym.boundary_restriction_symbols(pt, f, g)
    data = {
        "point": {"x": pt.x, "xi": pt.xi, "tau": pt.tau},
        "dn": _matrix(L.entries),
        "U_out": _matrix(U.entries),
        "U_out_inv": _matrix(Ui.entries),
        "M_out": _matrix(Mo.entries),
    }
    pair = _pair(cfg, required=False)
    if pair is not None:
        J = sym.dn_jump_symbol(pt, pair, g)
        data["jump"] = _matrix(J.symbol.entries)
        data["jump_reduction"] = _matrix(J.reduction)
    write_json(out / "symbol.json", data)
    return 0


def cmd_diag(cfg, out: Path, args) -> int:
    f = _material(cfg)
    pt, g = _point(cfg, f)
    d = sym.diagonalize_dn(pt, f, g)
    data = {
        "point": {"x": pt.x, "xi": pt.xi, "tau": pt.tau},
        "W": _matrix(d.w),
        "eigenvalues": list(np.real(d.eigenvalues)),
        "k1": d.k1,
        "k2": d.k2,
        "e0": d.e0,
    }
    pair = _pair(cfg, required=False)
    if pair is not None:
        ds = sym.diagonalize_stoneley(pt, pair, g)
        data["stoneley"] = {"W": _matrix(ds.w), "eigenvalues": list(np.real(ds.eigenvalues)), "k1": ds.k1, "k2": ds.k2}
    write_json(out / "diag.json", data)
    return 0


def cmd_trace(cfg, out: Path, args) -> int:
    f = _material(cfg)
    g = _metric(cfg)
    d = _section(cfg, "ray")
    x0 = _get(d, "x0", "ray", "vec2", required=True)
    xi0 = _get(d, "xi0", "ray", "vec2", required=True)
    T = _get(d, "T", "ray", required=True)
    dt = _get(d, "dt", "ray", default=min(1e-2, T / 100))
    ray = rays.dynamic_ray(rays.trace_ray(x0, xi0, T, dt, f, g), f, g)
    logs = rays.transport_amplitude(ray, f, g)
    a0 = np.array([lg.a0 for lg in logs])
    rows = zip(ray.t, ray.x[:, 0], ray.x[:, 1], ray.xi[:, 0], ray.xi[:, 1], ray.phase, ray.det_jac, a0.real, a0.imag)
    write_csv(out / "ray.csv", ["t", "x1", "x2", "xi1", "xi2", "phase", "det_jac", "re_a0", "im_a0"], rows)
    return 0


def _packet(cfg):
    d = _section(cfg, "packet")
    return syn.WavePacketData.gaussian(
        _get(d, "center", "packet", "vec2", required=True),
        _get(d, "width", "packet", required=True),
        n=_get(d, "n", "packet", int, 128),
        x_center=_get(d, "x_center", "packet", "vec2", np.zeros(2)),
    )


def _source(cfg):
    d = _section(cfg, "source")
    return flat.example1_source(
        _get(d, "p", "source", required=True),
        A3=_get(d, "A3", "source", default=1.0),
        T=_get(d, "T", "source", default=10.0),
        ds=_get(d, "ds", "source", default=0.01),
        xi_max=_get(d, "xi_max", "source", default=200.0),
        dxi=_get(d, "dxi", "source", default=0.02),
    )


def cmd_synth(cfg, out: Path, args) -> int:
    d = _section(cfg, "synth")
    mode = _get(d, "mode", "synth", str, "rayleigh")
    kind = _get(d, "data", "synth", str, "packet")
    if mode not in ("rayleigh", "stoneley"):
        raise ConfigError("invalid value for key synth.mode (rayleigh or stoneley)")
    if kind not in ("packet", "source"):
        raise ConfigError("invalid value for key synth.data (packet or source)")
    times = _get(d, "times", "synth", "list", required=True)
    x_axes = (_axis(d, "x1", "synth"), _axis(d, "x2", "synth"))
    chart_n = _get(d, "chart_n", "synth", int, syn.CHART_N)
    g = _metric(cfg)
    data = _packet(cfg) if kind == "packet" else _source(cfg)
    model = _material(cfg) if mode == "rayleigh" else _pair(cfg)
    rows = []
    for t in times:
        if mode == "stoneley":
            fg = syn.stoneley_field(data, model, t, x_axes, g, chart_n=chart_n)
        elif kind == "packet":
            fg = syn.cauchy_field(data, t, x_axes, model, g, chart_n=chart_n)
        else:
            fg = syn.inhomogeneous_field(data, t, x_axes, model, g, chart_n=chart_n)
        P = fg.points.reshape(-1, 2)
        F = fg.f.reshape(-1, 3)
        for (x1, x2), f in zip(P, F):
            rows.append((t, x1, x2, f[0].real, f[0].imag, f[1].real, f[1].imag, f[2].real, f[2].imag))
    header = ["t", "x1", "x2", "re_f1", "im_f1", "re_f2", "im_f2", "re_f3", "im_f3"]
    write_csv(out / "field.csv", header, rows)
    write_json(out / "field_meta.json", {"label": "leading order", "mode": mode, "data": kind, "times": times})
    return 0


def cmd_ellipse(cfg, out: Path, args) -> int:
    d = _section(cfg, "ellipse")
    mode = _get(d, "mode", "ellipse", str, "rayleigh")
    xi = _get(d, "xi", "ellipse", "vec2", required=True)
    a0v = _get(d, "a0", "ellipse", "vec2", np.array([1.0, 0.0]))
    n = _get(d, "n", "ellipse", int, 32)
    g = _metric(cfg)
    x = (0.0, 0.0)
    if mode == "rayleigh":
        f = _material(cfg)
        c = float(rays.RayleighSpeed(f).speed(np.zeros(2)))
        tau = c * float(g.norm(np.zeros(2), xi))
        smp = syn.rayleigh_polarization(EllipticPoint(0.0, x, tau, tuple(xi)), complex(*a0v), f, g)
    elif mode == "stoneley":
        pair = _pair(cfg)
        root = disp.stoneley_speed(pair)
        if not root.exists:
            raise NoStoneleyRoot("pair has no Stoneley speed")
        tau = root.c_ST * float(g.norm(np.zeros(2), xi))
        smp = syn.stoneley_polarization(EllipticPoint(0.0, x, tau, tuple(xi)), complex(*a0v), pair, g)
    else:
        raise ConfigError("invalid value for key ellipse.mode (rayleigh or stoneley)")
    series = syn.polarization_series(smp, tau, n)
    rep = syn.retrograde_check(series)
    data = {
        "label": "leading order",
        "mode": mode,
        "p": list(smp.p),
        "samples": [
            {"t": s.t, "phase": s.phase, "re_p": s.re_p, "im_p": s.im_p,
             "ellipsoid_residual_re": s.ellipsoid_residual("re"), "ellipsoid_residual_im": s.ellipsoid_residual("im")}
            for s in series
        ],
        "retrograde": rep.as_dict(),
    }
    write_json(out / "ellipse.json", data)
    return 0


def cmd_verify(cfg, out: Path, args) -> int:
    d = cfg.get("verify", {})
    st = VerifySettings(seed=args.seed)
    for f in fields(VerifySettings):
        if f.name in d:
            setattr(st, f.name, _get(d, f.name, "verify", type(getattr(st, f.name))))
    timings = {}
    rep = run_verify(st, timings=timings)
    for name, sec in timings.items():
        log.info("section %s: %.1f s", name, sec)
    write_json(out / "verify.json", rep.as_dict())
    for c in rep.checks:
        tag = "PASS" if c.passed else ("FAIL" if c.gating else "INFO")
        print(f"{tag} {c.name} value={c.value:.3e} tol={c.tolerance:.1e}")
    return 0 if rep.passed else 1


HANDLERS = {
    "speeds": cmd_speeds,
    "scan": cmd_scan,
    "symbol": cmd_symbol,
    "diag": cmd_diag,
    "trace": cmd_trace,
    "synth": cmd_synth,
    "ellipse": cmd_ellipse,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surfwave", description="Rayleigh and Stoneley surface wave engine")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON scenario file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized checks (overrides config)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (computations are single-threaded)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = load_config(args.config)
        if args.seed is None:
            args.seed = _get(cfg, "seed", "", int, 0)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[args.command](cfg, out, args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, SurfwaveError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
