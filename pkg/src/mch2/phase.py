"""Phase function, stationary points, region geometry and the scalar T(k).

theta(k, xi) = (k^2 - 1) xi / (4k) - 2k (k^2 - 1) / (k^2 + 1)^2 with xi = y/t.

T(k) = prod_{grad} (k - conj z)/(k - z) * exp(J(k)),
J(k) = 1/(2 pi i) int_{I(xi)} log(1 - |r(s)|^2) / (s - k) ds,

so that T_+ = T_- (1 - |r|^2) on I(xi) and T -> 1 at infinity.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (BranchAmbiguity, OnJumpContour, ReflectionAtUnitModulus,
                     RegionBoundary, SingularK)

CRITICAL_XI = (-0.25, 0.0, 2.0)
XI_MARGIN = 1e-6
_P = np.polynomial.polynomial


def theta(k, xi):
    k = np.asarray(k, dtype=complex)
    if np.any(np.abs(k) < 1e-14) or np.any(np.abs(k * k + 1) < 1e-14):
        raise SingularK("theta is singular at k = 0 and k = +-i")
    k2 = k * k
    out = (k2 - 1) * xi / (4 * k) - 2 * k * (k2 - 1) / (k2 + 1) ** 2
    return out if out.ndim else complex(out)


def dtheta(k, xi):
    k = np.asarray(k, dtype=complex)
    k2 = k * k
    out = xi * (k2 + 1) / (4 * k2) + 2 * (k2 * k2 - 6 * k2 + 1) / (k2 + 1) ** 3
    return out if out.ndim else complex(out)


def d2theta(k, xi):
    k = np.asarray(k, dtype=complex)
    k2 = k * k
    # d/dk of the two terms of dtheta
    out = -xi / (2 * k * k2) + 2 * ((4 * k * k2 - 12 * k) * (k2 + 1) - 6 * k * (k2 * k2 - 6 * k2 + 1)) / (k2 + 1) ** 4
    return out if out.ndim else complex(out)


def _stationary_poly(xi):
    # 4k^2 (k^2+1)^3 theta'(k) = xi (k^2+1)^4 + 8 k^2 (k^4 - 6k^2 + 1)
    return _P.polyadd(xi * _P.polypow([1.0, 0.0, 1.0], 4), 8.0 * np.array([0, 0, 1, 0, -6, 0, 1.0]))


def check_xi(xi):
    for c in CRITICAL_XI:
        if abs(xi - c) < XI_MARGIN:
            raise RegionBoundary(f"xi={xi} is within {XI_MARGIN:g} of the critical value {c}")


def stationary_points(xi: float, tol: float = 1e-10) -> list:
    """Real roots of theta'(k) = 0, descending."""
    check_xi(xi)
    coeffs = _stationary_poly(xi)
    roots = _P.polyroots(coeffs)
    real = np.sort(roots[np.abs(roots.imag) < 1e-9 * np.maximum(1, np.abs(roots))].real)[::-1]
    out = []
    for k in real:
        for _ in range(50):
            d = dtheta(k, xi).real / d2theta(k, xi).real
            k -= d
            if abs(d) < 1e-15 * max(1.0, abs(k)):
                break
        if abs(dtheta(k, xi)) > tol:
            raise RegionBoundary(f"stationary point {k} failed to polish (residual {abs(dtheta(k, xi)):.2e})")
        out.append(float(k))
    return out


@dataclass(frozen=True)
class PhaseGeometry:
    xi: float
    region: str
    points: tuple
    eta: tuple
    intervals: tuple           # ((lo, hi), ...), possibly infinite ends
    nu: tuple = ()

    @property
    def n(self):
        return len(self.points)

    def contains(self, k):
        k = np.asarray(k, float)
        inside = np.zeros(k.shape, bool)
        for lo, hi in self.intervals:
            inside |= (k > lo) & (k < hi)
        return inside

    def to_dict(self):
        enc = lambda v: v if np.isfinite(v) else ("inf" if v > 0 else "-inf")
        return {"xi": self.xi, "region": self.region, "stationary_points": list(self.points),
                "eta": list(self.eta), "nu": list(self.nu),
                "intervals": [[enc(a), enc(b)] for a, b in self.intervals]}


def classify_region(xi: float) -> PhaseGeometry:
    """Region tag, ordered stationary points k1 > k2 > ..., signs eta and the set I(xi).

    Intervals are normalized to (min, max).
    """
    check_xi(xi)
    pts = stationary_points(xi)
    if xi > 2:
        region, intervals = "I", ()
    elif xi < -0.25:
        region, intervals = "IV", ((-np.inf, np.inf),)
    elif xi > 0:
        region = "II"
        intervals = ((pts[1], pts[0]), (pts[3], pts[2]))
    else:
        # the unbounded ends carry the same sign of theta' as the bounded intervals
        region = "III"
        intervals = ((-np.inf, pts[7]), (pts[6], pts[5]), (pts[4], pts[3]),
                     (pts[2], pts[1]), (pts[0], np.inf))
    expect = {"I": 0, "II": 4, "III": 8, "IV": 0}[region]
    if len(pts) != expect:
        raise RegionBoundary(f"found {len(pts)} stationary points at xi={xi}, expected {expect}")
    if region == "II":
        eta = tuple((-1) ** (j + 1) for j in range(1, 5))
    elif region == "III":
        eta = tuple((-1) ** j for j in range(1, 9))
    else:
        eta = ()
    return PhaseGeometry(float(xi), region, tuple(pts), eta, intervals)


def nu_of(r_abs2):
    r_abs2 = np.asarray(r_abs2, float)
    if np.any(r_abs2 >= 1):
        raise ReflectionAtUnitModulus("|r| >= 1 where nu is required")
    return -np.log1p(-r_abs2) / (2 * np.pi)


def nu_at(kj: float, r: Callable) -> float:
    """nu(k_j) = -(1/2pi) log(1 - |r(k_j)|^2); ``r`` is a callable of real k."""
    return float(nu_of(abs(r(kj)) ** 2))


def imtheta_signs(xi, re, im):
    """sign Im theta on a raster; used for the phase atlas."""
    K = re[None, :] + 1j * im[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        th = (K * K - 1) * xi / (4 * K) - 2 * K * (K * K - 1) / (K * K + 1) ** 2
    return np.sign(th.imag)


def write_atlas(path, xi, re, im):
    s = imtheta_signs(xi, re, im)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["re_k", "im_k", "sign_im_theta"])
        for a, y in enumerate(im):
            for b, x in enumerate(re):
                wr.writerow([f"{x:.17g}", f"{y:.17g}", f"{s[a, b]:.0f}"])


# --- T(k) -------------------------------------------------------------------

def _panels(lo, hi, breaks, levels=18, ratio=0.25):
    """Breakpoints on [lo, hi], geometrically graded toward the ends and ``breaks``."""
    pts = {lo, hi}
    for b in breaks:
        if lo < b < hi:
            pts.add(b)
    base = sorted(pts)
    out = []
    for a, b in zip(base[:-1], base[1:]):
        h = b - a
        left = [a + h * 0.5 * ratio ** j for j in range(levels)]
        right = [b - h * 0.5 * ratio ** j for j in range(levels)]
        out.extend([a, b] + left + right)
    return np.unique(np.array(out))


@dataclass
class TFunction:
    """Scalar T(k) for a fixed xi: Blaschke factors over grad poles and the Cauchy integral on I(xi).

    ``r`` is a callable on real arrays (may be None for r = 0). Infinite ends of
    I(xi) are truncated at +-kcut, beyond which r is taken to vanish.
    """
    nabla: Sequence[complex] = ()
    intervals: Sequence = ()
    r: Callable | None = None
    kcut: float = 8.0
    order: int = 16
    _nodes: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.nabla = tuple(complex(z) for z in self.nabla)
        ivs = []
        for lo, hi in self.intervals:
            lo, hi = max(lo, -self.kcut), min(hi, self.kcut)
            if hi > lo:
                ivs.append((lo, hi))
        self.intervals = tuple(ivs)
        gx, gw = np.polynomial.legendre.leggauss(self.order)
        self._nodes = []
        if self.r is None:
            return
        for lo, hi in self.intervals:
            br = _panels(lo, hi, [-1.0, 0.0, 1.0])
            a, b = br[:-1, None], br[1:, None]
            s = (0.5 * (b - a) * gx + 0.5 * (a + b)).ravel()
            w = (0.5 * (b - a) * gw).ravel()
            self._nodes.append((lo, hi, s, w, self._f(s)))

    @property
    def trivial(self):
        return not self.nabla and (self.r is None or not self.intervals)

    def _f(self, s):
        r2 = np.abs(self.r(np.asarray(s, float))) ** 2
        return np.log1p(-np.minimum(r2, 1 - 1e-15))

    def f(self, s):
        """log(1 - |r|^2)."""
        return np.zeros_like(np.asarray(s, float)) if self.r is None else self._f(s)

    def _J_one(self, node, k, deriv=0):
        lo, hi, s, w, f = node
        kk = np.asarray(k, complex).ravel()
        f0 = self._f(np.clip(kk.real, lo, hi))
        diff = f[:, None] - f0[None, :]
        den = s[:, None] - kk[None, :]
        if deriv == 0:
            smooth = np.sum(w[:, None] * diff / den, axis=0)
            sing = f0 * np.log((hi - kk) / (lo - kk))
        else:
            smooth = np.sum(w[:, None] * diff / den**2, axis=0)
            sing = f0 * (1 / (lo - kk) - 1 / (hi - kk))
        return ((smooth + sing) / (2j * np.pi)).reshape(np.shape(k))

    def _J(self, k, deriv=0):
        out = np.zeros(np.shape(k), complex)
        for node in self._nodes:
            out += self._J_one(node, k, deriv)
        return out

    def blaschke(self, k):
        k = np.asarray(k, complex)
        out = np.ones(k.shape, complex)
        for z in self.nabla:
            out *= (k - np.conj(z)) / (k - z)
        return out

    def dlog_blaschke(self, k):
        k = np.asarray(k, complex)
        out = np.zeros(k.shape, complex)
        for z in self.nabla:
            out += 1 / (k - np.conj(z)) - 1 / (k - z)
        return out

    def on_contour(self, k):
        k = np.asarray(k, complex)
        hit = np.zeros(k.shape, bool)
        for lo, hi, *_ in self._nodes:
            hit |= (np.abs(k.imag) < 1e-14) & (k.real >= lo) & (k.real <= hi)
        return hit

    def __call__(self, k):
        return T_eval(k, self)

    def residue(self, z):
        """Res_{k=z} T for a grad pole z."""
        out = (z - np.conj(z)) * np.exp(self._J(np.array([z]))[0])
        for w in self.nabla:
            if w != z:
                out *= (z - np.conj(w)) / (z - w)
        return complex(out)


def T_eval(k, tf: TFunction):
    k_arr = np.asarray(k, complex)
    if np.any(tf.on_contour(k_arr)):
        raise OnJumpContour("T is two-valued on I(xi); evaluate off the real axis")
    out = tf.blaschke(k_arr) * np.exp(tf._J(k_arr))
    return out if out.ndim else complex(out)


def T_expansion_at_i(tf: TFunction):
    """(T(i), T'(i))."""
    T0 = complex(T_eval(1j, tf))
    dlog = complex(tf.dlog_blaschke(np.array(1j))) + complex(tf._J(np.array([1j]), deriv=1)[0])
    return T0, T0 * dlog


def T0_beta_at(kj: float, tf: TFunction, eta: int):
    """T0(k_j) with T(k) ~ T0(k_j) [eta (k - k_j)]^{i eta nu(k_j)} as k -> k_j."""
    total = complex(tf.blaschke(np.array(kj, complex)))
    J = 0.0j
    hit = False
    for lo, hi, s, w, f in tf._nodes:
        if abs(kj - lo) < 1e-12 or abs(kj - hi) < 1e-12:
            if hit:
                raise BranchAmbiguity(f"k_j={kj} is an endpoint of two intervals")
            hit = True
            f0 = float(tf._f(np.array([kj]))[0])
            smooth = np.sum(w * (f - f0) / (s - kj))
            left = abs(kj - lo) < 1e-12
            if left != (eta == -1):
                raise BranchAmbiguity(f"eta={eta} inconsistent with the endpoint side of k_j={kj}")
            # singular log removed; the remaining log of the interval length is kept
            sing = f0 * np.log(hi - lo) * (1 if left else -1)
            J += (smooth + sing) / (2j * np.pi)
        else:
            J += tf._J_one((lo, hi, s, w, f), np.array([kj + 0j]))[0]
    return total * np.exp(J)
