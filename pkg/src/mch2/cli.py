"""Command-line entry point.

    mch2 <command> [--config cfg.json] [--out dir] [--xi f] [--t f,...]
                   [--kmax f] [--grid-n n] [--tol f] [--threads n]

Commands: scatter, spectrum, solitons, asymptotics, evolve, compare, phase-atlas.

The config is a JSON object. Recognised keys (all optional unless the
command needs them):

    state       initial fields: inline object or path (see fields.load_state)
    scattering  path to a ScatteringData JSON written by ``scatter``
    spectrum    inline list or path; entries {"zeta": [re, im], "c": [re, im], "kind"}
    kgrid       {"n": 1024, "kmax": 8.0}
    grid        {"x0", "x1", "count"} for soliton and comparison grids
    y           {"lo", "hi", "count"} y-window for profiles
    xi, t       ray speed and time list
    evolve      EvolutionConfig overrides (dt_max, viscosity, sponge_fraction, ...)
    atlas       {"re": [lo, hi, n], "im": [lo, hi, n]}
    threshold   pass level for the compare L-infinity column
    mode        compare mode: "soliton" (default with a spectrum) or "asymptotics"

Every data file gets a ``<stem>.meta.json`` sidecar holding the effective
config. Errors are printed as JSON on stderr with exit status 2.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .asymptotics import asymptotic_profile
from .direct_scattering import ScatteringData, default_kgrid, find_spectrum, reflection
from .errors import Mch2Error
from .fields import FieldState, Grid, ddx, state_from_dict
from .pde_reference import EvolutionConfig, evolve, write_state_csv
from .phase import classify_region, write_atlas
from .soliton_rh import Pole, expand_partners, load_spectrum, reconstruct, spectrum_from_list, soliton_state

COMMANDS = ("scatter", "spectrum", "solitons", "asymptotics", "evolve", "compare", "phase-atlas")


class ConfigError(Exception):
    code = "invalid_config"


# --- config -------------------------------------------------------------------

def _parse_tlist(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {s!r}")


def build_parser():
    ap = argparse.ArgumentParser(prog="mch2", description="2-mCH scattering, solitons and asymptotics")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--xi", type=float)
    ap.add_argument("--t", type=_parse_tlist)
    ap.add_argument("--kmax", type=float)
    ap.add_argument("--grid-n", type=int, dest="grid_n")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--threads", type=int)
    return ap


def effective_config(args) -> dict:
    cfg = {}
    base = Path(".")
    if args.config is not None:
        if not args.config.exists():
            raise ConfigError(f"config file {args.config} not found")
        try:
            cfg = json.loads(args.config.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        base = args.config.parent
    cfg = dict(cfg)
    cfg["command"] = args.command
    cfg["_base"] = str(base)
    if args.xi is not None:
        cfg["xi"] = args.xi
    if args.t is not None:
        cfg["t"] = args.t
    if args.kmax is not None:
        cfg.setdefault("kgrid", {})["kmax"] = args.kmax
    if args.grid_n is not None:
        cfg["grid_n"] = args.grid_n
    if args.tol is not None:
        cfg["tol"] = args.tol
    threads = args.threads or int(os.environ.get("MCH2_THREADS", "0") or 0) or 1
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    cfg["threads"] = threads
    kg = cfg.setdefault("kgrid", {})
    kg.setdefault("n", 1024)
    kg.setdefault("kmax", 8.0)
    if not kg["kmax"] > 1.1:
        raise ConfigError("kmax must exceed 1.1")
    if "t" in cfg and not isinstance(cfg["t"], list):
        cfg["t"] = [float(cfg["t"])]
    return cfg


def _resolve(cfg, value):
    if isinstance(value, str):
        path = Path(cfg["_base"]) / value
        if not path.exists():
            raise ConfigError(f"referenced file {path} not found")
        return path
    return value


def _need(cfg, key):
    if key not in cfg:
        raise ConfigError(f"command {cfg['command']!r} needs {key!r}")
    return cfg[key]


def _state(cfg) -> FieldState:
    src = _resolve(cfg, _need(cfg, "state"))
    data = json.loads(src.read_text()) if isinstance(src, Path) else dict(src)
    if "grid" not in data:
        raise ConfigError("state needs a 'grid'")
    grid = _grid(data["grid"])
    if "grid_n" in cfg:
        if "p" in data:
            raise ConfigError("--grid-n applies to preset states only")
        grid = Grid.span(grid.x0, grid.x1, cfg["grid_n"])
    data["grid"] = grid.to_dict()
    return state_from_dict(data)


def _grid(g) -> Grid:
    if "x1" in g:
        return Grid.span(float(g["x0"]), float(g["x1"]), int(g["count"]))
    return Grid(float(g["x0"]), float(g["dx"]), int(g["count"]))


def _kgrid(cfg):
    return default_kgrid(int(cfg["kgrid"]["n"]), float(cfg["kgrid"]["kmax"]))


def _poles(cfg) -> list:
    src = _resolve(cfg, _need(cfg, "spectrum"))
    if isinstance(src, Path):
        pts = load_spectrum(src)
    else:
        pts = spectrum_from_list(src)
    return expand_partners(pts)


def _ygrid(cfg, centre=0.0, half=20.0, count=401):
    y = cfg.get("y", {})
    return np.linspace(float(y.get("lo", centre - half)), float(y.get("hi", centre + half)),
                       int(y.get("count", count)))


def _public(cfg):
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def _sidecar(path: Path, cfg, **extra):
    meta = {"config": _public(cfg), "file": path.name}
    meta.update(extra)
    path.with_name(path.stem + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True, default=_jsonable))


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serialisable: {type(v).__name__}")


def _fmt(v):
    return f"{v:.17g}"


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


# --- commands -------------------------------------------------------------------

def cmd_scatter(cfg, out: Path):
    state = _state(cfg)
    data = reflection(state, _kgrid(cfg), threads=cfg["threads"])
    data.write(out / "scatter.json", out / "r.csv")
    _sidecar(out / "scatter.json", cfg, diagnostics=data.diagnostics)
    _sidecar(out / "r.csv", cfg, columns=["k", "re_r", "im_r", "abs_r"])
    return {"max_abs_r": float(np.max(np.abs(data.r)))}


def _spectrum_of(cfg, state):
    kw = {"tol": cfg["tol"]} if "tol" in cfg else {}
    return find_spectrum(state, **kw)


def cmd_spectrum(cfg, out: Path):
    state = _state(cfg)
    spec = _spectrum_of(cfg, state)
    rows = [{"zeta": [p.zeta.real, p.zeta.imag], "c": [p.c.real, p.c.imag], "kind": p.kind,
             "aprime": [p.aprime.real, p.aprime.imag]} for p in spec]
    path = out / "spectrum.json"
    path.write_text(json.dumps({"count": len(rows), "spectrum": rows}, indent=2, sort_keys=True))
    _sidecar(path, cfg)
    return {"count": len(rows)}


def cmd_solitons(cfg, out: Path):
    poles = _poles(cfg)
    files = []
    for i, t in enumerate(cfg.get("t", [0.0])):
        prof = reconstruct(poles, _ygrid(cfg), t)
        path = out / f"soliton_{i:03d}.csv"
        prof.write(path)
        _sidecar(path, cfg, t=t, imag_residual=prof.imag_residual)
        files.append(path.name)
    return {"files": files}


def _scattering(cfg):
    if "scattering" in cfg:
        return ScatteringData.load(_resolve(cfg, cfg["scattering"]))
    return reflection(_state(cfg), _kgrid(cfg), threads=cfg["threads"])


def _asym_poles(cfg, data):
    if "spectrum" in cfg:
        return _poles(cfg)
    return expand_partners([Pole(p.zeta, p.c, p.kind) for p in data.spectrum])


def cmd_asymptotics(cfg, out: Path):
    xi = float(_need(cfg, "xi"))
    ts = _need(cfg, "t")
    data = _scattering(cfg)
    poles = _asym_poles(cfg, data)
    files = []
    for i, t in enumerate(ts):
        y = _ygrid(cfg, xi * t) if "y" in cfg else None
        prof = asymptotic_profile(poles, data, float(t), xi, y=y)
        path = out / f"asymptotics_{i:03d}.csv"
        prof.write(path)
        _sidecar(path, cfg, t=t, region=prof.region, **{k: prof.meta[k] for k in ("stationary_points", "nu")})
        files.append(path.name)
    return {"region": classify_region(xi).region, "files": files}


def _evolution_config(cfg, t_end):
    opts = dict(cfg.get("evolve", {}))
    opts.pop("t_end", None)
    return EvolutionConfig(t_end=t_end, **opts)


def _run_to(state, times, cfg):
    """Snapshots at each requested time (ascending), chaining evolutions."""
    snaps, drift, cur = [], [], state
    for t in sorted(times):
        if t < cur.t:
            raise ConfigError("times must be >= the initial time")
        if t > cur.t:
            tr = evolve(cur, _evolution_config(cfg, t - cur.t))
            cur = tr.final
            drift.append(tr.mass_drift)
        snaps.append(cur)
    return snaps, drift


def cmd_evolve(cfg, out: Path):
    state = _state(cfg)
    snaps, drift = _run_to(state, [state.t] + list(_need(cfg, "t")), cfg)
    files = []
    for i, s in enumerate(snaps):
        path = out / f"evolve_{i:03d}.csv"
        write_state_csv(path, s)
        _sidecar(path, cfg, t=s.t)
        files.append(path.name)
    return {"files": files, "mass_drift": drift}


def _errors(a, b, dx):
    d = a - b
    return float(np.max(np.abs(d))), float(np.sqrt(np.sum(d * d) * dx))


def _decay(ts, errs):
    ts, errs = np.asarray(ts, float), np.asarray(errs, float)
    ok = (ts > 0) & (errs > 0)
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(ts[ok]), np.log(errs[ok]), 1)[0])


def cmd_compare(cfg, out: Path):
    mode = cfg.get("mode", "soliton" if "spectrum" in cfg and "state" not in cfg else "asymptotics")
    ts = [float(t) for t in _need(cfg, "t")]
    threshold = float(cfg.get("threshold", cfg.get("tol", 1e-2)))
    rows = []
    if mode == "soliton":
        poles = _poles(cfg)
        grid = _grid(_need(cfg, "grid"))
        if "grid_n" in cfg:
            grid = Grid.span(grid.x0, grid.x1, cfg["grid_n"])
        s0 = soliton_state(poles, grid, 0.0)
        snaps, _ = _run_to(s0, ts, cfg)
        for t, s in zip(sorted(ts), snaps):
            ref = soliton_state(poles, grid, t)
            linf, l2 = _errors(s.p, ref.p, grid.dx)
            rows.append((t, linf, l2))
    elif mode == "asymptotics":
        xi = float(_need(cfg, "xi"))
        data = _scattering(cfg)
        poles = _asym_poles(cfg, data)
        state = _state(cfg)
        snaps, _ = _run_to(state, ts, cfg)
        for t, s in zip(sorted(ts), snaps):
            y = _ygrid(cfg, xi * t, 5.0, 201) if "y" in cfg else np.linspace(xi * t - 5, xi * t + 5, 201)
            prof = asymptotic_profile(poles, data, t, xi, y=y)
            pde = np.interp(prof.x, s.x, ddx(np.log(s.p), s.grid.dx))
            order = np.argsort(prof.x)
            dx = float(np.mean(np.diff(prof.x[order])))
            linf, l2 = _errors(pde, prof.log_px(), dx)
            rows.append((t, linf, l2))
    else:
        raise ConfigError(f"unknown compare mode {mode!r}")
    rate = _decay([r[0] for r in rows], [r[1] for r in rows])
    path = out / "compare.csv"
    _write_rows(path, ["t", "linf", "l2", "pass"],
                [(t, a, b, "1" if a < threshold else "0") for t, a, b in rows])
    _sidecar(path, cfg, mode=mode, threshold=threshold, decay_exponent=rate)
    return {"mode": mode, "linf": [r[1] for r in rows], "decay_exponent": rate}


def cmd_phase_atlas(cfg, out: Path):
    xi = float(_need(cfg, "xi"))
    at = cfg.get("atlas", {})
    re_lo, re_hi, re_n = at.get("re", [-4.0, 4.0, 401])
    im_lo, im_hi, im_n = at.get("im", [-4.0, 4.0, 401])
    re = np.linspace(re_lo, re_hi, int(re_n))
    im = np.linspace(im_lo, im_hi, int(im_n))
    path = out / "atlas.csv"
    write_atlas(path, xi, re, im)
    geom = classify_region(xi)
    _sidecar(path, cfg, region=geom.region, stationary_points=list(geom.points))
    return {"region": geom.region, "stationary_points": len(geom.points)}


HANDLERS = {
    "scatter": cmd_scatter, "spectrum": cmd_spectrum, "solitons": cmd_solitons,
    "asymptotics": cmd_asymptotics, "evolve": cmd_evolve, "compare": cmd_compare,
    "phase-atlas": cmd_phase_atlas,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = effective_config(args)
        os.environ["MCH2_THREADS"] = str(cfg["threads"])
        args.out.mkdir(parents=True, exist_ok=True)
        summary = HANDLERS[args.command](cfg, args.out)
    except (Mch2Error, ConfigError) as e:
        err = {"error": e.code, "message": str(e), "type": type(e).__name__}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError) as e:
        err = {"error": "invalid_input", "message": str(e), "type": type(e).__name__}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 2
    print(json.dumps({"command": args.command, **summary}, sort_keys=True, default=_jsonable))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
