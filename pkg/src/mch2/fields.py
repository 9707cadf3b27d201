"""Sampled fields p, q on a uniform grid and the derived momenta m, n, w.

The 2-mCH system is carried in transport form

    m_t + (w m)_x = 0,   n_t + (w n)_x = 0,
    m = p + p_x,  n = q - q_x,  w = p q - 1,

with p, q -> 1 at both ends of the line.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import GridMismatch, NonPositiveMomentum, TailViolation

TAIL_TOL = 1e-8
TAIL_FRACTION = 0.05


@dataclass(frozen=True)
class Grid:
    x0: float
    dx: float
    count: int

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"grid spacing must be positive, got {self.dx}")
        if self.count < 16:
            raise ValueError(f"grid needs at least 16 points, got {self.count}")

    @classmethod
    def span(cls, a: float, b: float, count: int) -> "Grid":
        return cls(float(a), (b - a) / (count - 1), int(count))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.count)

    @property
    def x1(self) -> float:
        return self.x0 + self.dx * (self.count - 1)

    def to_dict(self):
        return {"x0": self.x0, "dx": self.dx, "count": self.count}


def ddx(f: np.ndarray, dx: float) -> np.ndarray:
    """4th-order centered first derivative with one-sided 5-point closures."""
    f = np.asarray(f)
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dx)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * dx)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * dx)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * dx)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * dx)
    return d


def d2dx2(f: np.ndarray, dx: float) -> np.ndarray:
    f = np.asarray(f)
    d = np.empty_like(f)
    d[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * dx * dx)
    # 2nd-order closures suffice: only used for the (optional) artificial diffusion
    d[:2] = (f[:2] - 2 * f[1:3] + f[2:4]) / dx**2
    d[-2:] = (f[-4:-2] - 2 * f[-3:-1] + f[-2:]) / dx**2
    return d


def cumtrapz_right(f: np.ndarray, dx: float) -> np.ndarray:
    """int_x^{x_end} f ds by the trapezoid rule, anchored at the right end."""
    seg = 0.5 * (f[1:] + f[:-1]) * dx
    out = np.zeros_like(f)
    out[:-1] = np.cumsum(seg[::-1])[::-1]
    return out


def integral_right(f: np.ndarray, dx: float) -> np.ndarray:
    """int_x^{x_end} f ds, 4th-order accurate (cubic panels).

    Uses the trapezoid sum plus the end-corrected Gregory terms per cell,
    which amounts to integrating the local cubic interpolant on each cell.
    """
    f = np.asarray(f)
    n = f.size
    cell = np.empty(n - 1, dtype=f.dtype)
    # cubic through i-1..i+2 integrated over [x_i, x_{i+1}]: (-1, 13, 13, -1)/24
    cell[1:-1] = (-f[:-3] + 13 * f[1:-2] + 13 * f[2:-1] - f[3:]) / 24
    cell[0] = (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24
    cell[-1] = (9 * f[-1] + 19 * f[-2] - 5 * f[-3] + f[-4]) / 24
    cell *= dx
    out = np.zeros_like(f)
    out[:-1] = np.cumsum(cell[::-1])[::-1]
    return out


@lru_cache(maxsize=64)
def _expint_weights(h: float):
    """Weights w_j with int_0^h e^{-(h-s)} f(x_i+s) ds ~= sum_j w_j f_{i-1+j}.

    Interior cells use the cubic through nodes i-1..i+2; the first cell the
    cubic through 0..3 (offsets 0..3 relative to i).
    """
    gx, gw = np.polynomial.legendre.leggauss(12)
    s = 0.5 * h * (gx + 1)
    ws = 0.5 * h * gw * np.exp(-(h - s))

    def lagrange(nodes):
        out = []
        for j, nj in enumerate(nodes):
            ell = np.ones_like(s)
            for k, nk in enumerate(nodes):
                if k != j:
                    ell *= (s - nk) / (nj - nk)
            out.append(np.sum(ws * ell))
        return np.array(out)

    interior = lagrange(h * np.array([-1.0, 0.0, 1.0, 2.0]))
    first = lagrange(h * np.array([0.0, 1.0, 2.0, 3.0]))
    last = lagrange(h * np.array([-2.0, -1.0, 0.0, 1.0]))
    return interior, first, last


def _left_anchored_solve(mu: np.ndarray, h: float) -> np.ndarray:
    """Solve P + P_x = mu with P -> 0 at the left end (integrating factor)."""
    interior, first, last = _expint_weights(float(h))
    n = mu.size
    forcing = np.empty(n - 1, dtype=mu.dtype)
    forcing[1:-1] = (
        interior[0] * mu[:-3] + interior[1] * mu[1:-2] + interior[2] * mu[2:-1] + interior[3] * mu[3:]
    )
    forcing[0] = first @ mu[:4]
    forcing[-1] = last @ mu[-4:]
    out = np.zeros_like(mu)
    out[1:] = lfilter([1.0], [1.0, -np.exp(-h)], forcing)
    return out


@dataclass(frozen=True)
class FieldState:
    grid: Grid
    t: float
    p: np.ndarray
    q: np.ndarray
    m: np.ndarray
    n: np.ndarray
    w: np.ndarray = field(repr=False)

    @classmethod
    def from_pq(cls, p, q, grid: Grid, t: float = 0.0, check_tails: bool = True) -> "FieldState":
        m, n, w = derive_momenta(p, q, grid, check_tails=check_tails)
        return cls(grid, float(t), np.asarray(p, float), np.asarray(q, float), m, n, w)

    @classmethod
    def from_mn(cls, m, n, grid: Grid, t: float = 0.0, check_tails: bool = True) -> "FieldState":
        m = np.asarray(m, float)
        n = np.asarray(n, float)
        p, q = recover_pq(m, n, grid, check_tails=check_tails)
        _check_positive(m, n)
        return cls(grid, float(t), p, q, m, n, p * q - 1.0)

    @property
    def x(self):
        return self.grid.x

    def to_dict(self):
        return {"grid": self.grid.to_dict(), "t": self.t, "p": self.p.tolist(), "q": self.q.tolist()}


def _check_positive(m, n):
    if np.min(m) <= 0 or np.min(n) <= 0:
        raise NonPositiveMomentum(f"min(m)={np.min(m):.6g}, min(n)={np.min(n):.6g}; need m, n > 0")


def tail_check(a: np.ndarray, name: str, tol: float = TAIL_TOL, fraction: float = TAIL_FRACTION):
    width = max(1, int(round(fraction * a.size)))
    dev = max(np.max(np.abs(a[:width] - 1.0)), np.max(np.abs(a[-width:] - 1.0)))
    if dev > tol:
        raise TailViolation(f"|{name} - 1| = {dev:.3g} in the outer {fraction:.0%} exceeds {tol:g}")


def derive_momenta(p, q, grid: Grid, check_tails: bool = True, tol: float = TAIL_TOL):
    """m = p + p_x, n = q - q_x, w = p q - 1."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    if p.shape != (grid.count,) or q.shape != (grid.count,):
        raise GridMismatch("p, q must have one sample per grid point")
    if check_tails:
        tail_check(p, "p", tol)
        tail_check(q, "q", tol)
    m = p + ddx(p, grid.dx)
    n = q - ddx(q, grid.dx)
    _check_positive(m, n)
    return m, n, p * q - 1.0


def recover_pq(m, n, grid: Grid, check_tails: bool = True, tol: float = TAIL_TOL):
    """Invert m = p + p_x (p -> 1 on the left) and n = q - q_x (q -> 1 on the right)."""
    m = np.asarray(m, float)
    n = np.asarray(n, float)
    if m.shape != (grid.count,) or n.shape != (grid.count,):
        raise GridMismatch("m, n must have one sample per grid point")
    if check_tails:
        tail_check(m, "m", tol)
        tail_check(n, "n", tol)
    p = 1.0 + _left_anchored_solve(m - 1.0, grid.dx)
    q = 1.0 + _left_anchored_solve((n - 1.0)[::-1], grid.dx)[::-1]
    return p, q


def conservation_residual(s0: FieldState, s1: FieldState) -> float:
    """Discrete L2 norm of d/dt sqrt(mn) + d/dx (w sqrt(mn)) between two snapshots."""
    if s0.grid != s1.grid:
        raise GridMismatch("states live on different grids")
    dt = s1.t - s0.t
    if dt < 0:
        raise ValueError("s1 must not precede s0")
    r0 = np.sqrt(s0.m * s0.n)
    r1 = np.sqrt(s1.m * s1.n)
    flux = 0.5 * (ddx(s0.w * r0, s0.grid.dx) + ddx(s1.w * r1, s1.grid.dx))
    if dt == 0:
        res = flux
    else:
        res = (r1 - r0) / dt + flux
    return float(np.sqrt(s0.grid.dx * np.sum(res**2)))


def conserved_mass(state: FieldState) -> float:
    """int (sqrt(mn) - 1) dx."""
    return float(np.sum(np.sqrt(state.m * state.n) - 1.0) * state.grid.dx)


# --- presets and I/O -------------------------------------------------------

def sech2(x, width=1.0, center=0.0):
    return 1.0 / np.cosh((x - center) / width) ** 2


def preset(name: str, grid: Grid, amplitude: float = 0.1, width: float = 1.0,
           center: float = 0.0, q_amplitude: float | None = None) -> FieldState:
    """Named analytic initial data.

    ``background``: p = q = 1.
    ``sech-bump``: p = 1 + a sech^2((x-c)/w), q = 1 + b sech^2((x-c)/w)
    with b defaulting to a.
    """
    x = grid.x
    if name == "background":
        one = np.ones(grid.count)
        return FieldState.from_pq(one, one.copy(), grid)
    if name == "sech-bump":
        b = amplitude if q_amplitude is None else q_amplitude
        bump = sech2(x, width, center)
        return FieldState.from_pq(1 + amplitude * bump, 1 + b * bump, grid)
    raise ValueError(f"unknown preset {name!r}")


def load_state(path) -> FieldState:
    return state_from_dict(json.loads(Path(path).read_text()))


def state_from_dict(data: dict) -> FieldState:
    """A preset description {"preset", "grid", options} or samples {"grid", "p", "q", "t"}."""
    if "preset" in data:
        g = data["grid"]
        opts = {k: v for k, v in data.items() if k not in ("preset", "grid")}
        return preset(data["preset"], Grid(g["x0"], g["dx"], g["count"]), **opts)
    g = data["grid"]
    grid = Grid(float(g["x0"]), float(g["dx"]), int(g["count"]))
    return FieldState.from_pq(np.array(data["p"], float), np.array(data["q"], float), grid,
                              t=float(data.get("t", 0.0)))
