"""Direct scattering: Jost solutions, a(k), b(k), r(k) and the discrete spectrum.

For real k the non-oscillatory conjugated system is integrated,

    Psi_x = -mt(x) [[b1, b2 e^{2ip}], [-b2 e^{-2ip}, -b1]] Psi,
    b1 = ik/(k^2-1),  b2 = i(k^2+1)/(2(k^2-1)),  p = g0(k) h(x) - 2k(k^2-1)/(k^2+1)^2 t,

with g0 = (k^2-1)/(4k) and Psi -> I at the respective end. Off the real
axis only the analytic columns are integrated, in the direction in which
the exponential factor is bounded.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (CountMismatch, IntegratorDivergence, NearSingularK, NonSimpleZero,
                     XDependenceDetected)
from .fields import FieldState, ddx, integral_right
from .phase import theta

EXCLUSION = 0.05
SUPPORT_TOL = 1e-15


def g0(k):
    return (k * k - 1) / (4 * k)


def time_phase(k):
    return -2 * k * (k * k - 1) / (k * k + 1) ** 2


def _betas(k):
    d = k * k - 1
    return 1j * k / d, 1j * (k * k + 1) / (2 * d)


@dataclass(frozen=True)
class AuxiliaryFunctions:
    x: np.ndarray
    mtilde: np.ndarray
    h: np.ndarray
    s: np.ndarray
    t: float
    dx: float

    def ptilde(self, k, idx=slice(None)):
        """p(x, k) on the grid (rows: k, columns: x)."""
        k = np.atleast_1d(np.asarray(k, complex))
        return g0(k)[:, None] * self.h[idx][None, :] + (time_phase(k) * self.t)[:, None]

    @property
    def support(self):
        nz = np.flatnonzero(np.abs(self.mtilde) > SUPPORT_TOL)
        if nz.size == 0:
            return None
        lo = max(nz[0] - 2, 0)
        hi = min(nz[-1] + 2, self.x.size - 1)
        if (hi - lo) % 2:
            if hi + 1 < self.x.size:
                hi += 1
            elif lo > 0:
                lo -= 1
            else:
                hi -= 1
        return lo, hi

    def refined(self, factor: int) -> "AuxiliaryFunctions":
        """Cubic-spline resampling of the support onto a grid ``factor`` times finer."""
        sup = self.support
        if sup is None or factor <= 1:
            return self
        lo, hi = sup
        lo, hi = max(lo - 4, 0), min(hi + 4, self.x.size - 1)
        if (hi - lo) % 2:
            lo = lo - 1 if lo > 0 else lo
            hi = hi if (hi - lo) % 2 == 0 else hi - 1
        xs = self.x[lo:hi + 1]
        xf = np.linspace(xs[0], xs[-1], factor * (xs.size - 1) + 1)
        res = lambda f: CubicSpline(xs, f[lo:hi + 1])(xf)
        return AuxiliaryFunctions(xf, res(self.mtilde), res(self.h), res(self.s), self.t, self.dx / factor)


def refinement_factor(aux, k, max_phase: float = 0.1) -> np.ndarray:
    """Per-k grid refinement keeping the phase advance per RK4 step below ``max_phase``."""
    k = np.asarray(k, complex)
    b1, b2 = _betas(k)
    rate = 2 * np.abs(g0(k)) * np.max(aux.s) + np.max(np.abs(aux.mtilde)) * (np.abs(b1) + np.abs(b2))
    f = np.ceil(2 * aux.dx * rate / max_phase).astype(int)
    return 2 ** np.ceil(np.log2(np.maximum(f, 1))).astype(int)


def auxiliary(state: FieldState) -> AuxiliaryFunctions:
    """mtilde = s - 1 + (m n_x - m_x n)/(2 m n), s = sqrt(mn), h(x) = x - int_x^inf (s - 1)."""
    dx = state.grid.dx
    m, n = state.m, state.n
    s = np.sqrt(m * n)
    mt = s - 1 + (m * ddx(n, dx) - ddx(m, dx) * n) / (2 * m * n)
    h = state.x - integral_right(s - 1, dx)
    return AuxiliaryFunctions(state.x, mt, h, s, state.t, dx)


def _check_k(k):
    k = np.atleast_1d(np.asarray(k, complex))
    for c in (0.0, 1.0, -1.0):
        if np.any(np.abs(k - c) < EXCLUSION * (1 - 1e-9)):
            raise NearSingularK(f"k within {EXCLUSION} of {c:g}")
    return k


# --- real-k transfer matrices -------------------------------------------------

def _coef_real(aux, k, i):
    """Coefficient matrices at grid node i, shape (nk, 2, 2)."""
    b1, b2 = _betas(k)
    e = np.exp(2j * (g0(k) * aux.h[i] + time_phase(k) * aux.t))
    mt = -aux.mtilde[i]
    A = np.empty((k.size, 2, 2), complex)
    A[:, 0, 0] = mt * b1
    A[:, 0, 1] = mt * b2 * e
    A[:, 1, 0] = -mt * b2 / e
    A[:, 1, 1] = -mt * b1
    return A


def _rk4_sweep(coef, Y, nodes, record, direction):
    """Integrate Y' = A Y over ``nodes`` (even spacing 2dx, midpoints at odd nodes).

    ``record`` lists node indices at which Y is copied out.
    """
    out = {}
    if nodes[0] in record:
        out[nodes[0]] = Y.copy()
    A2 = coef(nodes[0])
    for a in range(len(nodes) - 1):
        i0, i2 = nodes[a], nodes[a + 1]
        im = (i0 + i2) // 2
        h = direction * abs(i2 - i0)
        A0, Am, A2 = A2, coef(im), coef(i2)
        k1 = A0 @ Y
        k2 = Am @ (Y + 0.5 * h * k1)
        k3 = Am @ (Y + 0.5 * h * k2)
        k4 = A2 @ (Y + h * k3)
        Y = Y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if i2 in record:
            out[i2] = Y.copy()
    if not np.all(np.isfinite(Y)):
        raise IntegratorDivergence("non-finite Jost solution")
    return out


def _eval_points(lo, hi):
    span = hi - lo
    pts = [lo + 2 * ((span * f) // 4) for f in (1, 2, 3)] if span >= 12 else [lo, lo + 2 * (span // 4), hi]
    return sorted(set(pts))


def transfer_real(aux: AuxiliaryFunctions, k, refine: bool | int = True, check: bool = True):
    """a(k), b(k) for real k from Psi_- (left sweep) and Psi_+ (right sweep).

    ``refine=True`` integrates each k on a grid fine enough for its oscillation
    rate; an integer fixes the refinement factor for every k, which keeps the
    effective step proportional to dx (use this for convergence studies).
    Returns (a, b, spread) where spread is the max x_eval spread.
    """
    k = (_check_k(k) if check else np.atleast_1d(np.asarray(k, complex))).real.astype(float) + 0j
    if aux.support is None:
        return np.ones(k.size, complex), np.zeros(k.size, complex), 0.0
    if refine is True:
        fac = refinement_factor(aux, k)
    else:
        fac = np.full(k.size, max(int(refine), 1))
    a = np.empty(k.size, complex)
    b = np.empty(k.size, complex)
    spread = 0.0
    for f in np.unique(fac):
        sel = fac == f
        a[sel], b[sel], sp = _transfer_fixed(aux.refined(int(f)), k[sel])
        spread = max(spread, sp)
    return a, b, spread


def _transfer_fixed(aux, k, x_eval=None):
    sup = aux.support
    if sup is None:
        return np.ones(k.size, complex), np.zeros(k.size, complex), 0.0
    lo, hi = sup
    nodes = list(range(lo, hi + 1, 2))
    pts = x_eval or _eval_points(lo, hi)
    pts = [p for p in pts if p in nodes] or [nodes[len(nodes) // 2]]
    scale = aux.dx
    coef = lambda i: scale * _coef_real(aux, k, i)
    I = np.broadcast_to(np.eye(2, dtype=complex), (k.size, 2, 2)).copy()
    left = _rk4_sweep(coef, I, nodes, set(pts), +1)
    right = _rk4_sweep(coef, I.copy(), nodes[::-1], set(pts), -1)
    avals, bvals = [], []
    for p in pts:
        Pm, Pp = left[p], right[p]
        avals.append(Pm[:, 0, 0] * Pp[:, 1, 1] - Pm[:, 1, 0] * Pp[:, 0, 1])
        bvals.append(Pm[:, 0, 1] * Pp[:, 1, 1] - Pm[:, 1, 1] * Pp[:, 0, 1])
    avals, bvals = np.array(avals), np.array(bvals)
    a, b = avals[len(pts) // 2], bvals[len(pts) // 2]
    spread = float(np.max(np.abs(avals - a)) + np.max(np.abs(bvals - b))) if len(pts) > 1 else 0.0
    return a, b, spread


def _parallel(fn, k, threads):
    """Map ``fn`` over chunks of k; fn returns (a, b, spread)."""
    k = np.asarray(k)
    threads = threads or int(os.environ.get("MCH2_THREADS", "1") or 1)
    if threads <= 1 or k.size < 64:
        return fn(k)
    with ThreadPoolExecutor(threads) as ex:
        parts = list(ex.map(fn, np.array_split(k, threads)))
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
            max(p[2] for p in parts))


# --- Jost pair (single k, full samples) --------------------------------------

@dataclass(frozen=True)
class JostPair:
    k: complex
    x: np.ndarray
    phi_minus: np.ndarray     # (nx, 2, 2); for complex k only column 1 is meaningful
    phi_plus: np.ndarray      # (nx, 2, 2); for complex k only column 2 is meaningful
    ptilde: np.ndarray

    def det(self):
        return (np.linalg.det(self.phi_minus), np.linalg.det(self.phi_plus))


def _coef_plain(aux, k, i, col):
    """Unconjugated column system, Phi_x = -i g0 s [s3, Phi] - mt B Phi, restricted to a column."""
    b1, b2 = _betas(k)
    mt = aux.mtilde[i]
    lam = 1j * g0(k) * aux.s[i]
    A = np.empty((k.size, 2, 2), complex)
    A[:, 0, 0] = -mt * b1
    A[:, 0, 1] = -mt * b2
    A[:, 1, 0] = mt * b2
    A[:, 1, 1] = mt * b1
    if col == 0:
        A[:, 1, 1] += 2 * lam
    else:
        A[:, 0, 0] -= 2 * lam
    return A


def jost_solve(aux: AuxiliaryFunctions, state: FieldState, k: complex) -> JostPair:
    """Phi_-(x, k), Phi_+(x, k) sampled on the even sub-grid of the support.

    Real k: full matrices from the conjugated system. Complex k: the analytic
    columns only (Phi_-^(1) and Phi_+^(2) when Im k > 0).
    """
    kk = _check_k(k)
    sup = aux.support or (0, 2 * ((aux.x.size - 1) // 2))
    lo, hi = sup
    nodes = list(range(lo, hi + 1, 2))
    rec = set(nodes)
    x = aux.x[nodes]
    pt = aux.ptilde(kk, nodes)[0]
    I = np.eye(2, dtype=complex)[None]
    if abs(kk[0].imag) < 1e-15:
        coef = lambda i: aux.dx * _coef_real(aux, kk, i)
        L = _rk4_sweep(coef, I.copy(), nodes, rec, +1)
        R = _rk4_sweep(coef, I.copy(), nodes[::-1], rec, -1)
        E = np.exp(1j * pt)
        # undo the conjugation: Phi = e^{-ip s3} Psi e^{ip s3}
        def unconj(P):
            P = P.copy()
            P[:, 0, 1] *= E ** -2
            P[:, 1, 0] *= E ** 2
            return P
        pm = unconj(np.array([L[i][0] for i in nodes]))
        pp = unconj(np.array([R[i][0] for i in nodes]))
        return JostPair(complex(kk[0]), x, pm, pp, pt)
    up = kk[0].imag > 0
    c_minus, c_plus = (0, 1) if up else (1, 0)
    Lm = _rk4_sweep(lambda i: aux.dx * _coef_plain(aux, kk, i, c_minus),
                    I[:, :, [c_minus]].copy(), nodes, rec, +1)
    Rp = _rk4_sweep(lambda i: aux.dx * _coef_plain(aux, kk, i, c_plus),
                    I[:, :, [c_plus]].copy(), nodes[::-1], rec, -1)
    pm = np.zeros((len(nodes), 2, 2), complex)
    pp = np.zeros((len(nodes), 2, 2), complex)
    pm[:, :, c_minus] = np.array([Lm[i][0, :, 0] for i in nodes])
    pp[:, :, c_plus] = np.array([Rp[i][0, :, 0] for i in nodes])
    return JostPair(complex(kk[0]), x, pm, pp, pt)


def scattering_coeffs(jp: JostPair, tol: float = 1e-6):
    """a = det(Phi_-^(1), Phi_+^(2)), b = e^{2ip} det(Phi_-^(2), Phi_+^(2)) at three x_eval points."""
    n = jp.x.size
    pts = sorted({n // 4, n // 2, (3 * n) // 4})
    pm, pp = jp.phi_minus[pts], jp.phi_plus[pts]
    a = pm[:, 0, 0] * pp[:, 1, 1] - pm[:, 1, 0] * pp[:, 0, 1]
    if abs(jp.k.imag) < 1e-15:
        b = np.exp(2j * jp.ptilde[pts]) * (pm[:, 0, 1] * pp[:, 1, 1] - pm[:, 1, 1] * pp[:, 0, 1])
    else:
        b = np.full(len(pts), np.nan + 0j)
    ref = max(1.0, abs(a[len(pts) // 2]))
    spread = np.max(np.abs(a - a[len(pts) // 2])) / ref
    if np.isfinite(b).all():
        spread = max(spread, np.max(np.abs(b - b[len(pts) // 2])) / ref)
    if spread > tol:
        raise XDependenceDetected(f"scattering coefficients vary across x_eval by {spread:.3g}")
    return complex(a[len(pts) // 2]), complex(b[len(pts) // 2])


# --- complex k: a(k) and the proportionality constant --------------------------

def _columns_complex(aux, k, xi_node=None):
    """Phi_-^(1) and Phi_+^(2) at a common node for Im k > 0 (vectorized over k)."""
    k = _check_k(k)
    sup = aux.support
    if sup is None:
        return None, None, None
    lo, hi = sup
    nodes = list(range(lo, hi + 1, 2))
    mid = xi_node if xi_node is not None else nodes[len(nodes) // 2]
    e1 = np.zeros((k.size, 2, 1), complex)
    e1[:, 0] = 1
    e2 = np.zeros((k.size, 2, 1), complex)
    e2[:, 1] = 1
    left = [i for i in nodes if i <= mid]
    right = [i for i in nodes if i >= mid][::-1]
    L = _rk4_sweep(lambda i: aux.dx * _coef_plain(aux, k, i, 0), e1, left, {mid}, +1)
    R = _rk4_sweep(lambda i: aux.dx * _coef_plain(aux, k, i, 1), e2, right, {mid}, -1)
    return L[mid][:, :, 0], R[mid][:, :, 0], mid


def a_complex(aux, k):
    """a(k) for Im k > 0 (vectorized)."""
    k = np.atleast_1d(np.asarray(k, complex))
    u, v, _ = _columns_complex(aux, k)
    if u is None:
        return np.ones(k.size, complex)
    return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]


def a_eval(aux, k):
    """a(k) on either the real axis or the upper half-plane."""
    k = np.atleast_1d(np.asarray(k, complex))
    out = np.empty(k.size, complex)
    re = np.abs(k.imag) < 1e-15
    if re.any():
        out[re] = transfer_real(aux, k[re])[0]
    if (~re).any():
        out[~re] = a_complex(aux, k[~re])
    return out


# --- scattering data ----------------------------------------------------------

@dataclass(frozen=True)
class DiscretePoint:
    zeta: complex
    c: complex
    kind: str                  # "circle" | "quartet"
    partition: str | None = None
    aprime: complex = 0j

    def to_dict(self):
        d = {"zeta_re": self.zeta.real, "zeta_im": self.zeta.imag, "c_re": self.c.real,
             "c_im": self.c.imag, "kind": self.kind}
        if self.partition:
            d["partition"] = self.partition
        return d


@dataclass
class ScatteringData:
    kgrid: np.ndarray
    a: np.ndarray
    b: np.ndarray
    r: np.ndarray
    spectrum: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def r_func(self):
        """Cubic-spline interpolant of r on the real line; zero outside the sampled span."""
        k = self.kgrid
        order = np.argsort(k)
        ks, rs = k[order], self.r[order]
        sre, sim = CubicSpline(ks, rs.real), CubicSpline(ks, rs.imag)
        lo, hi = ks[0], ks[-1]

        def r(s):
            s = np.asarray(s, float)
            out = sre(s) + 1j * sim(s)
            return np.where((s < lo) | (s > hi), 0.0, out)
        return r

    def to_dict(self):
        return {
            "kgrid": self.kgrid.tolist(),
            "a_re": self.a.real.tolist(), "a_im": self.a.imag.tolist(),
            "b_re": self.b.real.tolist(), "b_im": self.b.imag.tolist(),
            "r_re": self.r.real.tolist(), "r_im": self.r.imag.tolist(),
            "spectrum": [p.to_dict() for p in self.spectrum],
            "diagnostics": self.diagnostics,
        }

    def write(self, json_path, csv_path=None):
        Path(json_path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True))
        if csv_path:
            write_r_csv(csv_path, self.kgrid, self.r)

    @classmethod
    def load(cls, path):
        d = json.loads(Path(path).read_text())
        c = lambda key: np.array(d[key + "_re"]) + 1j * np.array(d[key + "_im"])
        spec = [DiscretePoint(complex(p["zeta_re"], p["zeta_im"]), complex(p["c_re"], p["c_im"]), p["kind"])
                for p in d.get("spectrum", [])]
        return cls(np.array(d["kgrid"]), c("a"), c("b"), c("r"), spec, d.get("diagnostics", {}))


def write_r_csv(path, k, r):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "re_r", "im_r", "abs_r"])
        for kk, rr in zip(k, r):
            wr.writerow([f"{kk:.17g}", f"{rr.real:.17g}", f"{rr.imag:.17g}", f"{abs(rr):.17g}"])


def default_kgrid(n: int = 1024, kmax: float = 8.0, exclusion: float = EXCLUSION) -> np.ndarray:
    """Chebyshev-clustered points on [-kmax, kmax] with the disks around 0, +-1 removed.

    Symmetric under k -> -k.
    """
    segs = [(exclusion, 1 - exclusion), (1 + exclusion, kmax)]
    lengths = np.array([b - a for a, b in segs])
    half = n // 2
    counts = np.maximum(8, np.round(half * lengths / lengths.sum()).astype(int))
    counts[-1] = half - counts[:-1].sum()
    pos = []
    for (a, b), m in zip(segs, counts):
        j = np.arange(m)
        pos.append(0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * (j + 0.5) / m))
    pos = np.concatenate(pos)
    return np.concatenate([-pos[::-1], pos])


def reflection(state: FieldState, kgrid=None, threads: int | None = None, aux=None,
               refine: bool | int = True) -> ScatteringData:
    """r(k) = conj(b(k))/a(k) on a real grid, with symmetry and det S diagnostics."""
    k = default_kgrid() if kgrid is None else np.asarray(kgrid, float)
    _check_k(k)
    aux = aux or auxiliary(state)

    def work(kc):
        return transfer_real(aux, kc, refine)
    a, b, spread = _parallel(work, k, threads)
    r = np.conj(b) / a
    data = ScatteringData(k, a, b, r)
    data.diagnostics = symmetry_diagnostics(data)
    data.diagnostics["r0_extrapolated"] = abs(r_at_zero(aux))
    data.diagnostics["x_eval_spread"] = float(spread)
    return data


def det_S(a_k, b_k, a_mk, b_mk):
    return a_k * a_mk + b_k * b_mk


def symmetry_diagnostics(data: ScatteringData) -> dict:
    k, r = data.kgrid, data.r
    out = {}
    idx = {round(v, 14): i for i, v in enumerate(k)}
    pairs = [(i, idx[round(-v, 14)]) for i, v in enumerate(k) if round(-v, 14) in idx]
    if pairs:
        i, j = np.array(pairs).T
        out["odd_residual"] = float(np.max(np.abs(r[i] + np.conj(r[j]))))
        out["det_S_residual"] = float(np.max(np.abs(det_S(data.a[i], data.b[i], data.a[j], data.b[j]) - 1)))
    out["max_abs_r"] = float(np.max(np.abs(r))) if r.size else 0.0
    return out


def r_at_zero(aux, ks=(0.04, 0.03, 0.02)) -> complex:
    """Limit of r(k) as k -> 0 from direct solves inside the exclusion disk.

    For smooth data r decays faster than any power of k at the origin, so
    polynomial extrapolation is meaningless; the value at the smallest k is
    returned once the sampled sequence is monotonically decreasing.
    """
    ks = np.asarray(ks, float)
    a, b, _ = transfer_real(aux, ks, check=False)
    r = np.conj(b) / a
    mags = np.abs(r)
    if np.any(np.diff(mags) > 1e-14):
        # not yet in the decaying regime: report the largest sample as the bound
        return complex(r[np.argmax(mags)])
    return complex(r[-1])


# --- discrete spectrum --------------------------------------------------------

def _sector_contour(rmin, rmax, delta, n):
    """Closed positively oriented contour around {rmin < |k| < rmax, delta < arg k < pi/2 - delta}."""
    a0, a1 = delta, np.pi / 2 - delta
    t = np.linspace(0, 1, n, endpoint=False)
    ray0 = (rmin + (rmax - rmin) * t) * np.exp(1j * a0)
    arc1 = rmax * np.exp(1j * (a0 + (a1 - a0) * t))
    ray1 = (rmax - (rmax - rmin) * t) * np.exp(1j * a1)
    arc0 = rmin * np.exp(1j * (a1 - (a1 - a0) * t))
    return np.concatenate([ray0, arc1, ray1, arc0])


def winding_number(aux, contour, max_refine=6):
    pts = np.append(contour, contour[0])
    vals = a_complex(aux, pts)
    for _ in range(max_refine):
        d = np.angle(vals[1:] / vals[:-1])
        bad = np.flatnonzero(np.abs(d) > np.pi / 4)
        if bad.size == 0:
            break
        mids = 0.5 * (pts[bad] + pts[bad + 1])
        mv = a_complex(aux, mids)
        pts = np.insert(pts, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mv)
    d = np.angle(vals[1:] / vals[:-1])
    return int(round(np.sum(d) / (2 * np.pi)))


def _newton(aux, z, tol=1e-10, h=1e-6, maxit=40):
    for _ in range(maxit):
        av = a_complex(aux, np.array([z, z + h, z - h]))
        da = (av[1] - av[2]) / (2 * h)
        if abs(da) < 1e-12:
            raise NonSimpleZero(f"|a'| = {abs(da):.2e} near k = {z:.6g}")
        step = av[0] / da
        z = z - step
        if abs(av[0]) < tol and abs(step) < 1e-9:
            break
    av = a_complex(aux, np.array([z, z + h, z - h]))
    return z, av[0], (av[1] - av[2]) / (2 * h)


def norming_constant(aux, zeta, aprime):
    """c = beta / a'(zeta) with Phi_-^(1)(zeta) = beta e^{2ip} Phi_+^(2)(zeta)."""
    u, v, mid = _columns_complex(aux, np.array([zeta]))
    u, v = u[0], v[0]
    j = int(np.argmax(np.abs(v)))
    p = aux.ptilde(np.array([zeta]), [mid])[0, 0]
    beta = u[j] / v[j] * np.exp(-2j * p)
    return complex(beta / aprime)


def find_spectrum(state: FieldState, rmin: float = 1 - EXCLUSION, rmax: float = 10.0,
                  delta: float = 1.6 * EXCLUSION, circle_tol: float = 1e-6, tol: float = 1e-10,
                  seeds: int = 24, aux=None) -> list:
    """Zeros of a(k) in the first-quadrant sector; one representative per symmetry orbit."""
    aux = aux or auxiliary(state)
    if aux.support is None:
        return []
    contour = _sector_contour(rmin, rmax, delta, 200)
    count = winding_number(aux, contour)
    if count == 0:
        return []
    found = []
    for attempt in range(3):
        nr, na = seeds * 2 ** attempt, seeds * 2 ** attempt
        rr = np.geomspace(rmin * 1.001, rmax * 0.999, nr)
        aa = np.linspace(delta * 1.01, np.pi / 2 - delta * 1.01, na)
        K = (rr[:, None] * np.exp(1j * aa[None, :])).ravel()
        A = np.abs(a_complex(aux, K)).reshape(nr, na)
        cand = []
        for i in range(nr):
            for j in range(na):
                nb = A[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
                if A[i, j] <= nb.min():
                    cand.append(K[i * na + j])
        for z0 in cand:
            try:
                z, az, da = _newton(aux, z0, tol)
            except NonSimpleZero:
                raise
            if abs(az) > tol or not (rmin <= abs(z) <= rmax and delta <= np.angle(z) <= np.pi / 2 - delta):
                continue
            if all(abs(z - w) > 1e-7 for w, _ in found):
                found.append((z, da))
        if len(found) == count:
            break
    if len(found) != count:
        raise CountMismatch(f"winding number {count} but {len(found)} zeros refined")
    out = []
    for z, da in sorted(found, key=lambda v: np.angle(v[0])):
        if abs(da) < 1e-8:
            raise NonSimpleZero(f"|a'({z:.6g})| = {abs(da):.2e}")
        kind = "circle" if abs(abs(z) - 1) < circle_tol else "quartet"
        if kind == "circle":
            z = z / abs(z)
        out.append(DiscretePoint(complex(z), norming_constant(aux, z, da), kind, None, complex(da)))
    return out


def partition_spectrum(spec, xi: float, tol: float = 1e-10) -> list:
    """Tag each point grad (Im theta < 0) or delta (Im theta > 0)."""
    from .errors import BoundarySpectrum
    out = []
    for p in spec:
        im = theta(p.zeta, xi).imag
        if abs(im) < tol:
            raise BoundarySpectrum(f"Im theta({p.zeta:.6g}, {xi}) = {im:.2e}")
        out.append(DiscretePoint(p.zeta, p.c, p.kind, "nabla" if im < 0 else "delta", p.aprime))
    return out
