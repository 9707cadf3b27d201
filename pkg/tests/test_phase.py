import numpy as np
import pytest

from mch2.errors import OnJumpContour, ReflectionAtUnitModulus, RegionBoundary, SingularK
from mch2.phase import (TFunction, T0_beta_at, T_eval, T_expansion_at_i, classify_region, imtheta_signs,
                        nu_at, nu_of, stationary_points, theta)


def test_theta_values():
    assert theta(1.0, 0.7) == 0
    assert theta(-1.0, 3.0) == 0
    assert theta(2.0, 0.0) == pytest.approx(-0.48, abs=1e-15)
    with pytest.raises(SingularK):
        theta(0.0, 1.0)
    with pytest.raises(SingularK):
        theta(1j, 1.0)


def test_theta_symmetries(rng):
    k = rng.normal(size=50) + 1j * rng.normal(size=50)
    for xi in (-0.3, 0.5, 3.0):
        assert np.max(np.abs(theta(-k, xi) + theta(k, xi))) < 1e-12
        assert np.max(np.abs(theta(-1 / k, xi) - theta(k, xi))) < 1e-12


@pytest.mark.parametrize("xi,count", [(3.0, 0), (1.0, 4), (-0.1, 8), (-0.5, 0)])
def test_stationary_counts(xi, count):
    pts = stationary_points(xi)
    assert len(pts) == count
    assert pts == sorted(pts, reverse=True)
    for k in pts:
        assert min(abs(-k - q) for q in pts) < 1e-10
        assert min(abs(-1 / k - q) for q in pts) < 1e-10


def test_count_map_per_region():
    expect = {"I": 0, "II": 4, "III": 8, "IV": 0}
    spans = {"I": (2.01, 8), "II": (0.01, 1.99), "III": (-0.249, -0.001), "IV": (-5, -0.26)}
    for region, (a, b) in spans.items():
        for xi in np.linspace(a, b, 100):
            g = classify_region(xi)
            assert g.region == region and g.n == expect[region]


def test_region_boundary():
    for xi in (2.0, 0.0, -0.25, 2.0 + 1e-8):
        with pytest.raises(RegionBoundary):
            stationary_points(xi)


def test_classify_intervals():
    assert classify_region(3.0).intervals == ()
    assert classify_region(-0.5).intervals == ((-np.inf, np.inf),)
    g = classify_region(1.0)
    assert g.region == "II" and len(g.intervals) == 2
    ends = sorted(v for iv in g.intervals for v in iv)
    assert np.allclose(ends, sorted(g.points))
    assert g.eta == (1, -1, 1, -1)
    g3 = classify_region(-0.1)
    assert g3.eta == tuple((-1) ** j for j in range(1, 9))


def test_nu():
    assert nu_of(0.0) == 0
    assert nu_of(1 - np.exp(-2 * np.pi)) == pytest.approx(1.0, abs=1e-14)
    assert nu_at(0.5, lambda k: 0.3 + 0 * k) > 0
    with pytest.raises(ReflectionAtUnitModulus):
        nu_of(1.0)


def test_atlas_crossings():
    re = np.linspace(-4, 4, 4001)
    s = imtheta_signs(1.0, re, np.array([1e-3]))[0]
    # drop the samples next to the poles at 0 and the points +-1 where Im theta
    # changes sign without a stationary point
    keep = (np.abs(re) > 0.02)
    changes = re[:-1][(np.diff(s) != 0) & keep[:-1] & keep[1:]]
    far = [c for c in changes if abs(abs(c) - 1) > 0.02]
    assert len(far) == 4
    pts = stationary_points(1.0)
    assert np.allclose(sorted(far), sorted(pts), atol=3e-3)


def _fd4(f, k, h=1e-3):
    return (8 * (f(k + h) - f(k - h)) - (f(k + 2 * h) - f(k - 2 * h))) / (12 * h)


def _bump_r(k):
    k = np.asarray(k, float)
    return 0.4 * np.exp(-(k - 0.6) ** 2) - 0.4 * np.exp(-(k + 0.6) ** 2) + 0j


def test_T_trivial():
    tf = TFunction()
    assert T_eval(0.3 + 0.2j, tf) == 1
    assert T_expansion_at_i(tf) == (1, 0)


def test_T_single_pole():
    z = np.exp(1j * np.pi / 3)
    tf = TFunction([z])
    T0, T1 = T_expansion_at_i(tf)
    assert T0 == pytest.approx((1j - np.conj(z)) / (1j - z), abs=1e-14)
    fd = _fd4(lambda k: T_eval(k, tf), 1j)
    assert abs(T1 - fd) < 1e-9


def test_T_plemelj_and_fd():
    g = classify_region(-0.5)
    tf = TFunction([], g.intervals, _bump_r)
    k = np.linspace(-2, 2, 9)
    for e in (1e-4,):
        ratio = T_eval(k + 1j * e, tf) / T_eval(k - 1j * e, tf)
    assert np.max(np.abs(ratio - (1 - np.abs(_bump_r(k)) ** 2))) < 1e-3
    with pytest.raises(OnJumpContour):
        T_eval(0.5, tf)
    T0, T1 = T_expansion_at_i(tf)
    fd = _fd4(lambda k: T_eval(k, tf), 1j)
    assert abs(T1 - fd) < 1e-8


def test_T_schwarz_reflection():
    g = classify_region(1.0)
    tf = TFunction([], g.intervals, _bump_r)
    k = np.array([0.3 + 0.4j, -1.2 + 0.1j, 2 + 1j])
    assert np.max(np.abs(T_eval(np.conj(k), tf) - 1 / np.conj(T_eval(k, tf)))) < 1e-12


def test_T0_beta_trivial_and_limit():
    g = classify_region(1.0)
    assert T0_beta_at(g.points[0], TFunction([], g.intervals, None), g.eta[0]) == 1
    tf = TFunction([], g.intervals, _bump_r)
    for kj, eta in zip(g.points, g.eta):
        T0 = T0_beta_at(kj, tf, eta)
        nu = nu_of(abs(_bump_r(kj)) ** 2)
        # T(k) ~ T0 [eta (k - kj)]^{i eta nu}: compare moduli along k = kj + eps e^{i phi}
        eps = 1e-6
        for phi in (np.pi / 4, 3 * np.pi / 4):
            k = kj + eps * np.exp(1j * phi)
            model = T0 * np.exp(1j * eta * nu * np.log(eta * (k - kj)))
            assert abs(abs(T_eval(k, tf)) / abs(model) - 1) < 1e-4
