import numpy as np
import pytest

from mch2.direct_scattering import (DiscretePoint, ScatteringData, auxiliary, default_kgrid, find_spectrum,
                                    jost_solve, partition_spectrum, reflection, scattering_coeffs,
                                    winding_number, _sector_contour)
from mch2.errors import BoundarySpectrum, NearSingularK
from mch2.fields import Grid, preset, sech2
from mch2.phase import theta
from mch2.soliton_rh import circle_pole, expand_partners, soliton_state

S1 = np.array([[0, 1], [1, 0]])


@pytest.fixture(scope="module")
def background():
    return preset("background", Grid.span(-20, 20, 1024))


def test_auxiliary_background(background):
    aux = auxiliary(background)
    assert np.all(aux.mtilde == 0)
    assert np.allclose(aux.h, background.x)
    assert aux.support is None


def test_auxiliary_small_bump():
    g = Grid.span(-30, 30, 4096)
    eps = 1e-4
    phi = sech2(g.x)
    s = preset("sech-bump", g, amplitude=eps)     # p = q = 1 + eps phi
    aux = auxiliary(s)
    # m = n to first order gives sqrt(mn) - 1 ~ eps phi; the cross term is O(eps) too
    assert np.max(np.abs(aux.mtilde - aux.mtilde[::-1])) < 1e-12     # mirror data
    assert np.max(np.abs(aux.mtilde)) < 5 * eps
    left = g.x < -3
    assert np.all(aux.h[left] < g.x[left])


def test_jost_background(background):
    aux = auxiliary(background)
    jp = jost_solve(aux, background, 0.7)
    assert np.allclose(jp.phi_minus, np.eye(2)) and np.allclose(jp.phi_plus, np.eye(2))
    assert scattering_coeffs(jp) == (1, 0)


def test_near_singular_k(background):
    aux = auxiliary(background)
    for k in (0.0, 1.01, -0.98):
        with pytest.raises(NearSingularK):
            jost_solve(aux, background, k)


def test_jost_det_and_symmetry(bump):
    aux = auxiliary(bump)
    for k in (0.4, 2.5, -1.7):
        jp = jost_solve(aux, bump, k)
        dm, dp = jp.det()
        assert np.max(np.abs(dm - 1)) < 1e-8 and np.max(np.abs(dp - 1)) < 1e-8
        assert np.max(np.abs(jp.phi_minus - S1 @ np.conj(jp.phi_minus) @ S1)) < 1e-10


def test_reflection_properties(bump_data):
    d = bump_data.diagnostics
    assert d["det_S_residual"] < 1e-8
    assert d["odd_residual"] < 1e-6
    assert np.all(np.abs(bump_data.r) < 1)
    k = bump_data.kgrid
    far = np.abs(k) > 7.5
    assert np.max(np.abs(bump_data.a[far] - 1)) < 0.05
    assert d["r0_extrapolated"] < 1e-6


def test_reflection_background(background):
    data = reflection(background, default_kgrid(64))
    assert np.max(np.abs(data.r)) < 1e-12


def test_default_kgrid():
    k = default_kgrid(1024, 8.0)
    assert k.size == 1024 and np.allclose(k, -k[::-1])
    assert np.min(np.abs(k)) > 0.05 and np.min(np.abs(np.abs(k) - 1)) > 0.05


def test_scattering_data_io(bump_data, tmp_path):
    bump_data.write(tmp_path / "s.json", tmp_path / "r.csv")
    back = ScatteringData.load(tmp_path / "s.json")
    assert np.array_equal(back.r, bump_data.r)
    assert (tmp_path / "r.csv").read_text().startswith("k,re_r,im_r,abs_r")
    f = back.r_func()
    assert abs(f(np.array([bump_data.kgrid[5]]))[0] - bump_data.r[5]) < 1e-12
    assert f(np.array([20.0]))[0] == 0


def test_empty_spectrum(background, bump):
    assert find_spectrum(background) == []
    assert find_spectrum(bump) == []


def test_recover_circle_soliton():
    psi = np.pi / 4
    st = soliton_state(expand_partners([circle_pole(psi)]), Grid.span(-30, 30, 2 ** 12))
    aux = auxiliary(st)
    spec = find_spectrum(st, aux=aux)
    assert len(spec) == 1 and spec[0].kind == "circle"
    assert abs(spec[0].zeta - np.exp(1j * psi)) < 1e-6
    assert abs(spec[0].c - 1j * np.exp(1j * psi)) < 1e-4
    assert winding_number(aux, _sector_contour(0.95, 10.0, 0.08, 200)) == len(spec)


def _boundary_xi(z):
    # Im theta(z, xi) is affine in xi
    a = theta(z, 1.0).imag - theta(z, 0.0).imag
    return -theta(z, 0.0).imag / a


def test_partition():
    assert partition_spectrum([], 1.0) == []
    z = np.exp(1j * np.pi / 3)
    pt = [DiscretePoint(z, 1j * z, "circle")]
    for xi in (10.0, 3.0, 0.5, -1.0):
        tag = partition_spectrum(pt, xi)[0].partition
        assert tag == ("nabla" if theta(z, xi).imag < 0 else "delta")
    xb = _boundary_xi(z)
    assert partition_spectrum(pt, xb - 0.1)[0].partition != partition_spectrum(pt, xb + 0.1)[0].partition
    with pytest.raises(BoundarySpectrum):
        partition_spectrum(pt, xb)
    # theta(-1/k) = theta(k): quartet partners share tags
    mu = 1.5 * np.exp(0.6j)
    q = [DiscretePoint(mu, 0.1, "quartet"), DiscretePoint(-1 / np.conj(mu), 0.1, "quartet")]
    for xi in (0.3, 2.5):
        a, _ = partition_spectrum(q, xi)
        assert (theta(mu, xi).imag < 0) == (a.partition == "nabla")
        assert abs(theta(-1 / mu, xi) - theta(mu, xi)) < 1e-12
