"""Direct numerical solution of the parabolic-cylinder model problem.

Model (zeta-plane, principal branches, rays oriented left to right):

    S1 = e^{i pi/4} R+   V = [[1, 0], [r0 z^{-2i nu} e^{i z^2/2}, 1]]
    S2 = e^{3i pi/4} R+  V = [[1, -conj(r0)/(1-|r0|^2) z^{2i nu} e^{-i z^2/2}], [0, 1]]
    S3 = e^{-3i pi/4} R+ V = [[1, 0], [r0/(1-|r0|^2) z^{-2i nu} e^{i z^2/2}, 1]]
    S4 = e^{-i pi/4} R+  V = [[1, -conj(r0) z^{2i nu} e^{-i z^2/2}], [0, 1]]

with nu = -log(1 - |r0|^2)/(2 pi), M -> I, and M = I + M1/z + O(z^-2).

The singular integral equation mu - C_-[mu (V - I)] = I is discretized by
Nystrom on Gauss-Legendre panels, graded geometrically toward the junction
at z = 0. Target/panel pairs closer than two half-panel lengths use
product-integration weights exact for polynomials on the panel
(monomial recursion plus a Vandermonde solve). Nothing here depends on
special functions, so the result is an independent check of closed forms.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

RAYS = (
    (np.pi / 4, +1, "lower", False),
    (3 * np.pi / 4, -1, "upper", True),
    (-3 * np.pi / 4, -1, "lower", True),
    (-np.pi / 4, +1, "upper", False),
)


@lru_cache(maxsize=8)
def _gl(n):
    return np.polynomial.legendre.leggauss(n)


def _panel_breaks(rho_min, rmax, ratio, far_step):
    near = [rho_min]
    while near[-1] * ratio < 1.0:
        near.append(near[-1] * ratio)
    near.append(1.0)
    far = list(np.arange(1.0 + far_step, rmax + 1e-12, far_step))
    if far and far[-1] < rmax - 1e-12:
        far.append(rmax)
    return np.array(near + far)


@dataclass
class _Panel:
    a: complex
    b: complex
    nodes: np.ndarray
    weights: np.ndarray      # ds weights (complex)
    ray: int


def _build_panels(order, rho_min, rmax, ratio, far_step):
    gx, gw = _gl(order)
    breaks = _panel_breaks(rho_min, rmax, ratio, far_step)
    panels = []
    for j, (phi, sign, _, inward) in enumerate(RAYS):
        e = np.exp(1j * phi)
        segs = list(zip(breaks[:-1], breaks[1:]))
        if inward:
            segs = [(b, a) for a, b in segs[::-1]]
        for a, b in segs:
            A, B = a * e, b * e
            mid, half = 0.5 * (A + B), 0.5 * (B - A)
            panels.append(_Panel(A, B, mid + half * gx, half * gw, j))
    return panels


def _product_weights(u, w):
    """Weights W with sum_j W_j f(u_j) = int_{-1}^{1} f(u)/(u - w) du for deg f < n.

    A target on the open segment is taken as the limit from the right side.
    """
    n = u.size
    p = np.empty(n, complex)
    on = abs(w.imag) < 1e-14 and -1 < w.real < 1
    if on:
        x = w.real
        p[0] = np.log((1 - x) / (1 + x)) - 1j * np.pi
    else:
        p[0] = np.log(1 - w) - np.log(-1 - w)
    for k in range(1, n):
        p[k] = w * p[k - 1] + (1 - (-1) ** k) / k
    V = np.vander(u, n, increasing=True).T     # V[k, j] = u_j^k
    return np.linalg.solve(V, p)


def _rows_of_jump(z, ray, r0):
    """V - I at points z on a given ray, as the (0,1) or (1,0) entry."""
    nu = -np.log1p(-abs(r0) ** 2) / (2 * np.pi)
    phi, _, kind, _ = RAYS[ray]
    logz = np.log(np.abs(z)) + 1j * phi
    if ray == 0:
        return "21", r0 * np.exp(-2j * nu * logz) * np.exp(0.5j * z * z)
    if ray == 1:
        return "12", -np.conj(r0) / (1 - abs(r0) ** 2) * np.exp(2j * nu * logz) * np.exp(-0.5j * z * z)
    if ray == 2:
        return "21", r0 / (1 - abs(r0) ** 2) * np.exp(-2j * nu * logz) * np.exp(0.5j * z * z)
    return "12", -np.conj(r0) * np.exp(2j * nu * logz) * np.exp(-0.5j * z * z)


def solve_pc_model(r0: complex, order: int = 16, rho_min: float = 1e-12, rmax: float = 9.5,
                   ratio: float = 3.0, far_step: float = 1.0, near: float = 2.0):
    """Return (M1, info) for the model problem with parameter r0 (|r0| < 1)."""
    if not abs(r0) < 1:
        raise ValueError("need |r0| < 1")
    panels = _build_panels(order, rho_min, rmax, ratio, far_step)
    z = np.concatenate([p.nodes for p in panels])
    N = z.size
    gx, gw = _gl(order)
    # Cauchy matrix: C[i, j] so that (C_- f)(z_i) = sum_j C[i, j] f(z_j)
    C = np.empty((N, N), complex)
    col = 0
    for P in panels:
        mid, half = 0.5 * (P.a + P.b), 0.5 * (P.b - P.a)
        w = (z - mid) / half
        sl = slice(col, col + order)
        with np.errstate(divide="ignore", invalid="ignore"):
            C[:, sl] = gw[None, :] / (gx[None, :] - w[:, None])
        close = np.flatnonzero(np.abs(w) < near)
        for i in close:
            wi = w[i]
            if col <= i < col + order:
                wi = complex(gx[i - col], 0.0)
            C[i, sl] = _product_weights(gx, wi)
        col += order
    C /= 2j * np.pi
    # jump entries
    ent = np.empty(N, complex)
    kinds = []
    col = 0
    for P in panels:
        k, v = _rows_of_jump(P.nodes, P.ray, r0)
        ent[col:col + order] = v
        kinds += [k] * order
        col += order
    is12 = np.array([k == "12" for k in kinds])
    # mu (V - I): for "12" rays (V - I) = ent * E12, so (mu (V-I))_{.,1} = mu_{.,0} ent
    #             for "21" rays (V - I) = ent * E21, so (mu (V-I))_{.,0} = mu_{.,1} ent
    # unknown vector per row: [mu_0 (N), mu_1 (N)]
    A = np.eye(2 * N, dtype=complex)
    D12 = np.where(is12, ent, 0)
    D21 = np.where(~is12, ent, 0)
    A[:N, N:] -= C * D21[None, :]     # mu_0 - C[mu_1 ent21] = e
    A[N:, :N] -= C * D12[None, :]     # mu_1 - C[mu_0 ent12] = e
    rhs = np.zeros((2 * N, 2), complex)
    rhs[:N, 0] = 1
    rhs[N:, 1] = 1
    sol = np.linalg.solve(A, rhs)
    mu0, mu1 = sol[:N].T, sol[N:].T        # rows of mu: (row, node)
    wds = np.concatenate([p.weights for p in panels])
    M1 = np.zeros((2, 2), complex)
    for row in range(2):
        f0 = mu1[row] * D21       # column 0 of mu (V - I)
        f1 = mu0[row] * D12       # column 1
        M1[row, 0] = -np.sum(wds * f0) / (2j * np.pi)
        M1[row, 1] = -np.sum(wds * f1) / (2j * np.pi)
    return M1, {"nodes": N, "panels": len(panels)}


def pc_oracle(nu: float, phase: float = 0.0, **kw):
    """Oracle M1 for |r0|^2 = 1 - e^{-2 pi nu} and arg r0 = phase."""
    r0 = np.sqrt(-np.expm1(-2 * np.pi * nu)) * np.exp(1j * phase)
    return solve_pc_model(r0, **kw)[0], r0
