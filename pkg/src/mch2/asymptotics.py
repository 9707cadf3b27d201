"""Long-time asymptotic profiles: soliton part plus t^{-1/2} radiation.

Near a stationary point k_j the local variable is z = sqrt(2 t |theta''|) eta (k - k_j)
and the jump is mapped onto the canonical parabolic-cylinder model of
``collocation`` (with sigma_1 conjugation when eta = -1). The model's first
moment has the closed form

    M1 = [[0, -i b], [i nu / b, 0]],
    b = sqrt(2 pi) e^{i pi/4} e^{-pi nu/2} / (r_c Gamma(-i nu)),

where r_c is the model parameter. The contribution of k_j to
M^lo = I + t^{-1/2} sum A_j/(k - k_j) is then

    eta = +1:  A_j = (2|theta''|)^{-1/2} M1(-S)
    eta = -1:  A_j = -(2|theta''|)^{-1/2} s1 M1(-conj S) s1

with strength S = -r(k_j) T0(k_j)^{-2} (2 t |theta''|)^{i eta nu} e^{2 i t theta(k_j)}.

Global assembly: M = F E M^r T^{s3} with E = I + t^{-1/2} sum X_j/(k - k_j),
X_j = M^r(k_j) A_j M^r(k_j)^{-1}. The t^{-1/2} parts of the k = i
coefficients are obtained by differentiating in eps = t^{-1/2}, which also
picks up the dependence of F on E(0).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gamma

from .errors import DegenerateG, DegenerateG3, RegionBoundary, UnitReflection
from .fields import ddx
from .phase import (PhaseGeometry, TFunction, T0_beta_at, T_expansion_at_i, classify_region,
                    d2theta, theta)
from .soliton_rh import (F_expansion, I2, MeroSolution, Pole, S1, build_residue_system,
                      mj_at_zero, repair_rows, solve_mero)

DIAG_TOL = 1e-12


def _rcall(r):
    if r is None:
        return None
    return r.r_func() if hasattr(r, "r_func") else r


# --- PC model -----------------------------------------------------------------

def rho(k, r, geom: PhaseGeometry):
    """rho = r off I(xi), -r/(1-|r|^2) on I(xi)."""
    k = np.asarray(k, float)
    rf = _rcall(r)
    if rf is None:
        return np.zeros(k.shape, complex)
    rv = np.asarray(rf(k), complex)
    a2 = np.abs(rv) ** 2
    if np.any(a2 >= 1):
        raise UnitReflection("|r(k)| >= 1 on the evaluation set")
    return np.where(geom.contains(k), -rv / (1 - a2), rv)


def pc_beta(nu: float, rc: complex) -> complex:
    return np.sqrt(2 * np.pi) * np.exp(1j * np.pi / 4) * np.exp(-np.pi * nu / 2) / (rc * gamma(-1j * nu))


def pc_m1(nu: float, strength: complex, eta_sign: int = 1):
    """(m1_12, m1_21) of the model solution at k_j.

    The model parameter is r_c = -strength (eta = +1) or -conj(strength) (eta = -1);
    only its phase enters, the modulus being fixed by nu.
    """
    if nu < 0:
        raise ValueError("nu must be >= 0")
    if nu == 0 or strength == 0:
        return 0j, 0j
    rc = -strength if eta_sign > 0 else -np.conj(strength)
    rc = np.sqrt(-np.expm1(-2 * np.pi * nu)) * rc / abs(rc)
    b = pc_beta(nu, rc)
    return complex(-1j * b), complex(1j * nu / b)


@dataclass(frozen=True)
class PCContribution:
    kj: float
    nu: float
    eta: int
    strength: complex
    m1_12: complex
    m1_21: complex
    Aj: np.ndarray
    theta2: float = 0.0

    def to_dict(self):
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {"kj": self.kj, "nu": self.nu, "eta": self.eta, "strength": c(self.strength),
                "m1_12": c(self.m1_12), "m1_21": c(self.m1_21),
                "Aj": [[c(v) for v in row] for row in self.Aj]}


def local_contribution(geom: PhaseGeometry, r, tf: TFunction, t: float, y: float | None = None):
    """One PCContribution per stationary point at time t (and y = xi t unless given)."""
    rf = _rcall(r)
    y = geom.xi * t if y is None else y
    out = []
    for kj, eta in zip(geom.points, geom.eta):
        th2 = float(np.real(d2theta(kj, geom.xi)))
        # with b = e^{2ip} det(Phi_-^(2), Phi_+^(2)) the jump carries -r in the (2,1) slot
        r0 = -complex(rf(np.array([kj]))[0]) if rf is not None else 0j
        a2 = abs(r0) ** 2
        if a2 >= 1:
            raise UnitReflection(f"|r({kj})| >= 1")
        nu = float(-np.log1p(-a2) / (2 * np.pi))
        if nu == 0:
            out.append(PCContribution(kj, 0.0, eta, 0j, 0j, 0j, np.zeros((2, 2), complex), th2))
            continue
        T0 = T0_beta_at(kj, tf, eta)
        scale = 2 * t * abs(th2)
        ttheta = (kj * kj - 1) / (4 * kj) * y - 2 * kj * (kj * kj - 1) / (kj * kj + 1) ** 2 * t
        S = r0 * T0 ** -2 * scale ** (1j * eta * nu) * np.exp(2j * ttheta)
        m12, m21 = pc_m1(nu, S, eta)
        c = 1 / np.sqrt(2 * abs(th2))
        if eta > 0:
            A = c * np.array([[0, m12], [m21, 0]])
        else:
            A = -c * np.array([[0, m21], [m12, 0]])
        out.append(PCContribution(kj, nu, eta, S, m12, m21, A, th2))
    return out


# --- error function ----------------------------------------------------------

def _mr(sol, k):
    if sol is None:
        return I2
    if callable(sol):
        return np.asarray(sol(k), complex)
    return np.asarray(sol, complex)


def conjugated_residues(contribs, sol=None, ordering="derived"):
    """X_j: M^r A_j M^r^{-1} ("derived") or M^r^{-1} A_j M^r ("displayed")."""
    out = []
    for c in contribs:
        M = _mr(sol, complex(c.kj))
        Mi = np.linalg.inv(M)
        out.append(M @ c.Aj @ Mi if ordering == "derived" else Mi @ c.Aj @ M)
    return out


def error_expansion(contribs, sol=None, t: float | None = None, ordering="derived"):
    """(H0, H1) with E(k) = I + t^{-1/2}(H0 + H1 (k - i) + ...) near k = i.

    ``ordering="derived"`` uses X_j = M^r(k_j) A_j M^r(k_j)^{-1} and
    E - I = t^{-1/2} sum X_j/(k - k_j), so H0 = sum X_j/(i - k_j);
    ``"displayed"`` gives the alternative sum M^r^{-1} A_j M^r /(k_j - i).
    """
    H0 = np.zeros((2, 2), complex)
    H1 = np.zeros((2, 2), complex)
    for c, X in zip(contribs, conjugated_residues(contribs, sol, ordering)):
        d = (1j - c.kj) if ordering == "derived" else (c.kj - 1j)
        H0 += X / d
        H1 -= X / d ** 2
    return H0, H1


def E_eval(contribs, sol, k, eps):
    out = I2.copy()
    for c, X in zip(contribs, conjugated_residues(contribs, sol)):
        out = out + eps * X / (k - c.kj)
    return out


# --- assembly ----------------------------------------------------------------

def t_sigma(T0, T1):
    return np.diag([T0, 1 / T0]), np.diag([T1, -T1 / T0 ** 2])


def region_I_matrices(Mr_i, dMr_i, F1, F2, T0_i, T1_i):
    """(M0, M1) of M = F M^r T^{s3} at k = i."""
    Ts, dTs = t_sigma(T0_i, T1_i)
    M0 = F1 @ Mr_i @ Ts
    M1 = F2 @ Mr_i @ Ts + F1 @ dMr_i @ Ts + F1 @ Mr_i @ dTs
    return M0, M1


def region_II_III_matrices(Mr_i, dMr_i, F1, F2, T0_i, T1_i, H0, H1, dF1=None, dF2=None):
    """(M0^0, M0^1, M1^0, M1^1): M_l = M_l^0 + t^{-1/2} M_l^1 + ...

    dF1, dF2 are the t^{-1/2} parts of F(i), F'(i) induced by E(0) (zero if omitted).
    """
    dF1 = np.zeros((2, 2)) if dF1 is None else dF1
    dF2 = np.zeros((2, 2)) if dF2 is None else dF2
    Ts, dTs = t_sigma(T0_i, T1_i)
    A, B = Mr_i @ Ts, dMr_i @ Ts + Mr_i @ dTs
    M00 = F1 @ A
    M01 = F1 @ H0 @ A + dF1 @ A
    M10 = F2 @ A + F1 @ B
    M11 = F1 @ H1 @ A + F2 @ H0 @ A + F1 @ H0 @ B + dF1 @ B + dF2 @ A
    return M00, M01, M10, M11


def _fields(M0, M1, y):
    """x, p, q and the log-derivatives (log p)_x, (log q)_x on a uniform y-grid."""
    d = M0[:, 0, 0]
    if np.any(np.abs(d) < DIAG_TOL) or not np.all(np.isfinite(d)):
        raise DegenerateG3("M0_11 vanishes on the grid")
    tau = np.log(d)
    x = (y + 2 * tau).real
    p = (1 + 2 * M1[:, 1, 0] / d).real
    q = (1 + 2 * d * M1[:, 0, 1]).real
    if np.min(p) <= 0 or np.min(q) <= 0:
        raise DegenerateG("reconstructed p or q is not positive")
    dy = y[1] - y[0]
    xy = ddx(x, dy)
    return x, p, q, ddx(np.log(p), dy) / xy, ddx(np.log(q), dy) / xy


@dataclass
class AsymptoticProfile:
    y: np.ndarray
    x: np.ndarray
    p_sol: np.ndarray
    q_sol: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    S: np.ndarray
    region: str
    t: float
    xi: float | None = None
    p: np.ndarray | None = None        # reconstructed fields on the soliton branch
    q: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def log_px(self):
        """Two-term approximation of (log p)_x."""
        return self.p_sol + self.g1 / np.sqrt(self.t) if self.t > 0 else self.p_sol

    def log_qx(self):
        return self.q_sol + self.g2 / np.sqrt(self.t) if self.t > 0 else self.q_sol

    def write(self, path):
        path = Path(path)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["y", "x", "p_sol", "q_sol", "g1", "g2", "S"])
            for row in zip(self.y, self.x, self.p_sol, self.q_sol, self.g1, self.g2, self.S):
                wr.writerow([f"{v:.17g}" for v in row])
        meta = {"xi": self.xi, "region": self.region, "t": self.t}
        meta.update(self.meta)
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def assemble_region_I(y, M0, M1, t: float, region: str = "I", xi=None) -> AsymptoticProfile:
    """Soliton-only profile from stacked k = i coefficients (shape (ny, 2, 2))."""
    y = np.asarray(y, float)
    x, p, q, lp, lq = _fields(np.asarray(M0), np.asarray(M1), y)
    z = np.zeros_like(y)
    return AsymptoticProfile(y, x, lp, lq, z, z.copy(), x - y, region, t, xi, p, q)


def assemble_region_II_III(y, M00, M01, M10, M11, t: float, region: str = "II", xi=None,
                           h: float = 1e-4) -> AsymptoticProfile:
    """Profile with radiation terms: g = d/d eps of the log-derivatives at fixed y, eps = t^{-1/2}."""
    if t <= 0:
        raise ValueError("t must be positive")
    y = np.asarray(y, float)
    M00, M01, M10, M11 = (np.asarray(a) for a in (M00, M01, M10, M11))
    x, p, q, lp, lq = _fields(M00, M10, y)
    _, _, _, lp_p, lq_p = _fields(M00 + h * M01, M10 + h * M11, y)
    _, _, _, lp_m, lq_m = _fields(M00 - h * M01, M10 - h * M11, y)
    g1 = (lp_p - lp_m) / (2 * h)
    g2 = (lq_p - lq_m) / (2 * h)
    S = (x - y) + 2 * (M01[:, 0, 0] / M00[:, 0, 0]).real / np.sqrt(t)
    return AsymptoticProfile(y, y + S, lp, lq, g1, g2, S, region, t, xi, p, q)


# --- pipeline ------------------------------------------------------------------

def _tag(poles, xi):
    out = []
    for p in poles:
        im = theta(complex(p.zeta), xi).imag
        if abs(im) < 1e-10:
            raise RegionBoundary(f"pole {p.zeta} lies on Im theta = 0 at xi = {xi}")
        out.append(Pole(p.zeta, p.c, p.kind, "nabla" if im < 0 else "delta"))
    return out


def _k_i_data(poles, y, t, tf, contribs, eps):
    """M0, M1 at k = i for M = F E M^r T^{s3}, for each eps in ``eps``, and max|M^J(0)|."""
    if poles:
        sol = solve_mero(build_residue_system(poles, y, t, tf))
        mj0 = mj_at_zero(sol, tf)
        Mi, dMi = sol(1j), sol.derivative(1j)
    else:
        sol = None
        mj0 = mj_at_zero(MeroSolution(np.zeros(0, complex), np.zeros((0, 2, 2), complex)), tf)
        Mi, dMi = I2, np.zeros((2, 2), complex)
    T0, T1 = T_expansion_at_i(tf)
    Xs = conjugated_residues(contribs, sol)
    out = []
    for e in eps:
        E0 = I2 + sum((e * X / (0 - c.kj) for c, X in zip(contribs, Xs)), np.zeros((2, 2)))
        Ei = I2 + sum((e * X / (1j - c.kj) for c, X in zip(contribs, Xs)), np.zeros((2, 2)))
        dEi = sum((-e * X / (1j - c.kj) ** 2 for c, X in zip(contribs, Xs)), np.zeros((2, 2)))
        F1, F2 = F_expansion(E0 @ mj0)
        Ts, dTs = t_sigma(T0, T1)
        M0 = F1 @ Ei @ Mi @ Ts
        M1 = F2 @ Ei @ Mi @ Ts + F1 @ dEi @ Mi @ Ts + F1 @ Ei @ (dMi @ Ts + Mi @ dTs)
        out.append((M0, M1))
    return out, float(np.max(np.abs(mj0)))


def asymptotic_profile(poles, r, t: float, xi: float, y=None, half_width: float = 20.0,
                       count: int = 401, h: float = 1e-4) -> AsymptoticProfile:
    """Profile on a y-window around y = xi t with the phase geometry frozen at xi.

    ``r`` is a ScatteringData, a callable r(k) or None (reflectionless).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    geom = classify_region(xi)
    rf = _rcall(r)
    y = np.linspace(xi * t - half_width, xi * t + half_width, count) if y is None else np.asarray(y, float)
    tagged = _tag(list(poles), xi)
    tf = TFunction([p.zeta for p in tagged if p.partition == "nabla"], geom.intervals, rf)
    radiating = geom.region in ("II", "III")
    eps = (-h, 0.0, h) if radiating else (0.0,)

    def rows(ys):
        M0 = np.empty((len(eps), ys.size, 2, 2), complex)
        M1 = np.empty_like(M0)
        norms = np.zeros(ys.size)
        for i, yy in enumerate(ys):
            contribs = local_contribution(geom, rf, tf, t, yy) if radiating else []
            data, norms[i] = _k_i_data(tagged, yy, t, tf, contribs, eps)
            for j, (a, b) in enumerate(data):
                M0[j, i], M1[j, i] = a, b
        return [M0.swapaxes(0, 1), M1.swapaxes(0, 1)], norms

    (M0, M1), norms = rows(y)
    M0, M1 = repair_rows(y, [M0.copy(), M1.copy()], norms, rows)
    M0, M1 = M0.swapaxes(0, 1), M1.swapaxes(0, 1)
    contribs0 = local_contribution(geom, rf, tf, t, y[y.size // 2]) if radiating else []
    meta = {"stationary_points": list(geom.points), "eta": list(geom.eta),
            "nu": [c.nu for c in contribs0], "poles": len(tagged),
            "partition": [p.partition for p in tagged],
            "contributions_at_center": [c.to_dict() for c in contribs0]}
    if not radiating:
        prof = assemble_region_I(y, M0[0], M1[0], t, geom.region, xi)
    else:
        M01 = (M0[2] - M0[0]) / (2 * h)
        M11 = (M1[2] - M1[0]) / (2 * h)
        prof = assemble_region_II_III(y, M0[1], M01, M1[1], M11, t, geom.region, xi)
    prof.meta.update(meta)
    return prof
