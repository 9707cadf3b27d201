"""Direct method-of-lines solver for m_t + (w m)_x = 0, n_t + (w n)_x = 0.

The state is (m, n); each RK4 stage recovers p, q from the momenta and
rebuilds w = p q - 1. Used as the reference oracle for the spectral side.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import CFLViolation, PositivityLoss
from .fields import FieldState, Grid, conserved_mass, d2dx2, ddx, recover_pq

CFL_MAX = 0.4


@dataclass(frozen=True)
class EvolutionConfig:
    t_end: float
    dt: float | None = None          # None: pick 0.4*dx/max|w| capped at dt_max
    dt_max: float = 0.05
    viscosity: float = 0.0
    sponge_fraction: float = 0.10
    sponge_strength: float = 2.0
    snapshot_stride: int = 0         # 0: first and last only
    scheme: str = "rk4"

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.viscosity < 0:
            raise ValueError("viscosity must be >= 0")
        if self.scheme != "rk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


@dataclass
class Trajectory:
    config: EvolutionConfig
    snapshots: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    dt: float = 0.0
    steps: int = 0

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]

    @property
    def times(self):
        return [s.t for s in self.snapshots]

    @property
    def mass_drift(self) -> float:
        return float(max(abs(m - self.mass[0]) for m in self.mass)) if self.mass else 0.0

    def metadata(self):
        return {
            "scheme": self.config.scheme,
            "dt": self.dt,
            "steps": self.steps,
            "config": asdict(self.config),
            "grid": self.snapshots[0].grid.to_dict() if self.snapshots else None,
            "mass": self.mass,
            "conservation_drift": self.mass_drift,
        }

    def write(self, outdir, stem="evolve"):
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        files = []
        for i, s in enumerate(self.snapshots):
            path = outdir / f"{stem}_{i:04d}.csv"
            write_state_csv(path, s)
            files.append(path.name)
        meta = self.metadata()
        meta["files"] = files
        meta["times"] = self.times
        (outdir / f"{stem}.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        return files


def write_state_csv(path, s: FieldState):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "p", "q", "m", "n"])
        for row in zip(s.x, s.p, s.q, s.m, s.n):
            wr.writerow([f"{v:.17g}" for v in row])


def sponge_profile(grid: Grid, fraction: float = 0.10, strength: float = 2.0) -> np.ndarray:
    """Damping rate, zero in the interior and rising smoothly (sin^2) in the outer layers."""
    if fraction <= 0:
        return np.zeros(grid.count)
    width = fraction * (grid.x1 - grid.x0)
    x = grid.x
    d = np.minimum(x - grid.x0, grid.x1 - x)
    ramp = np.clip(1.0 - d / width, 0.0, 1.0)
    return strength * np.sin(0.5 * np.pi * ramp) ** 2


def _rhs(m, n, grid, sigma, nu):
    p, q = recover_pq(m, n, grid, check_tails=False)
    w = p * q - 1.0
    dm = -ddx(w * m, grid.dx)
    dn = -ddx(w * n, grid.dx)
    if sigma is not None:
        dm -= sigma * (m - 1.0)
        dn -= sigma * (n - 1.0)
    if nu > 0:
        dm += nu * d2dx2(m, grid.dx)
        dn += nu * d2dx2(n, grid.dx)
    return dm, dn


def _make_state(m, n, grid, t):
    if np.min(m) <= 0 or np.min(n) <= 0:
        raise PositivityLoss(f"momentum crossed zero at t={t:.6g}: min m={np.min(m):.3g}, min n={np.min(n):.3g}")
    return FieldState.from_mn(m, n, grid, t=t, check_tails=False)


def check_cfl(state: FieldState, dt: float):
    wmax = float(np.max(np.abs(state.w)))
    if wmax > 0 and abs(dt) > CFL_MAX * state.grid.dx / wmax:
        raise CFLViolation(f"dt={dt:.3g} exceeds {CFL_MAX}*dx/max|w| = {CFL_MAX * state.grid.dx / wmax:.3g}")


def step(state: FieldState, dt: float, sigma=None, viscosity: float = 0.0) -> FieldState:
    """One classical RK4 step. Negative dt integrates backwards (no sponge, no viscosity then)."""
    check_cfl(state, dt)
    g = state.grid
    m, n = state.m, state.n
    k1 = _rhs(m, n, g, sigma, viscosity)
    k2 = _rhs(m + 0.5 * dt * k1[0], n + 0.5 * dt * k1[1], g, sigma, viscosity)
    k3 = _rhs(m + 0.5 * dt * k2[0], n + 0.5 * dt * k2[1], g, sigma, viscosity)
    k4 = _rhs(m + dt * k3[0], n + dt * k3[1], g, sigma, viscosity)
    m1 = m + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    n1 = n + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return _make_state(m1, n1, g, state.t + dt)


def evolve(state0: FieldState, cfg: EvolutionConfig) -> Trajectory:
    g = state0.grid
    sigma = sponge_profile(g, cfg.sponge_fraction, cfg.sponge_strength) if cfg.sponge_fraction > 0 else None
    if cfg.dt is None:
        wmax = float(np.max(np.abs(state0.w)))
        dt = cfg.dt_max if wmax == 0 else min(cfg.dt_max, 0.5 * CFL_MAX * g.dx / wmax)
    else:
        dt = float(cfg.dt)
    nsteps = int(np.ceil(cfg.t_end / dt - 1e-12)) if cfg.t_end > 0 else 0
    if nsteps:
        dt = cfg.t_end / nsteps
    traj = Trajectory(cfg, [state0], [conserved_mass(state0)], dt, nsteps)
    s = state0
    for i in range(1, nsteps + 1):
        s = step(s, dt, sigma, cfg.viscosity)
        if i == nsteps or (cfg.snapshot_stride and i % cfg.snapshot_stride == 0):
            traj.snapshots.append(s)
            traj.mass.append(conserved_mass(s))
    return traj


_CENTRAL = {2: ((1.0,), 2.0), 4: ((8.0, -1.0), 12.0), 6: ((45.0, -9.0, 1.0), 60.0)}


def transport_residual(profile_at, t: float, dt: float, order: int = 6):
    """max |m_t + (w m)_x|, max |n_t + (w n)_x| for a profile sampled on a fixed y-grid.

    ``profile_at(t)`` returns an object with uniform ``y`` and samples x, p, q, m, n.
    Time derivatives at fixed x follow from those at fixed y:
    f_t|_x = f_t|_y - f_y x_t / x_y, and f_x = f_y / x_y.
    """
    w, den = _CENTRAL[order]
    c = profile_at(t)
    dy = c.y[1] - c.y[0]
    snaps = {j: profile_at(t + j * dt) for i in range(1, len(w) + 1) for j in (i, -i)}

    def d_t(name):
        return sum(wi * (getattr(snaps[i + 1], name) - getattr(snaps[-i - 1], name))
                   for i, wi in enumerate(w)) / (den * dt)
    xy = ddx(c.x, dy)
    xt = d_t("x")
    wq = c.p * c.q - 1.0
    out = []
    for name in ("m", "n"):
        f = getattr(c, name)
        r = d_t(name) - ddx(f, dy) * xt / xy + ddx(wq * f, dy) / xy
        out.append(float(np.max(np.abs(r))))
    return tuple(out)
