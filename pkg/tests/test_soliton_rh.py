import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from mch2.errors import InvalidSpectrum, NonInvertibleMJ0
from mch2.pde_reference import transport_residual
from mch2.phase import TFunction
from mch2.soliton_rh import (F_eval, F_expansion, I2, S1, Pole, build_residue_system, circle_pole,
                             expand_partners, expansion_at_i, load_spectrum, mj_at_zero, reconstruct,
                             soliton_state, solve_mero, speed)

ONE = expand_partners([circle_pole(np.pi / 4)])


def test_expand_partners():
    assert len(ONE) == 2
    assert ONE[1].zeta == pytest.approx(-np.conj(ONE[0].zeta))
    quad = expand_partners([Pole(1.5 * np.exp(0.5j), 0.3 + 0.1j, "quartet")])
    assert len(quad) == 4
    with pytest.raises(InvalidSpectrum):
        expand_partners([Pole(1.2 * np.exp(0.5j), 1j, "circle")])
    with pytest.raises(InvalidSpectrum):
        expand_partners([Pole(np.exp(0.5j), 1.0, "circle")])     # c/(i z) not real
    with pytest.raises(InvalidSpectrum):
        expand_partners([Pole(0.5 + 0.2j, 1.0, "quartet")])


def test_empty_system():
    sol = solve_mero(build_residue_system([], 0.0, 0.0))
    assert np.array_equal(sol(0.3 + 1j), I2)
    e = expansion_at_i(sol)
    assert np.array_equal(e.M0, I2) and np.all(e.M1 == 0)


def test_bare_couplings_at_t0():
    sys = build_residue_system(ONE, 0.0, 0.0)
    assert sys.coupling[0] == pytest.approx(ONE[0].c)
    assert sys.coupling[1] == pytest.approx(np.conj(ONE[0].c))
    assert list(sys.singular[:2]) == [0, 1]


def test_one_pole_closed_form():
    # single upper pole z with lower template and its conjugate: solve by hand
    p = circle_pole(np.pi / 3, 0.7)
    sol = solve_mero(build_residue_system([p], 0.3, 0.0))
    assert sol.residue_check() < 1e-12


def test_mero_invariants(rng):
    sol = solve_mero(build_residue_system(ONE, 0.4, 1.3))
    k = rng.normal(size=100) + 1j * rng.normal(size=100)
    M = sol(k)
    assert np.max(np.abs(np.linalg.det(M) - 1)) < 1e-10
    sym = S1 @ np.conj(sol(np.conj(k))) @ S1
    assert np.max(np.abs(M - sym)) < 1e-12
    assert np.max(np.abs(sol(1e8 + 0j) - I2)) < 1e-6


def test_expansion_fd():
    sol = solve_mero(build_residue_system(ONE, 0.2, 0.5))
    e = expansion_at_i(sol)
    h = 1e-3
    fd = (8 * (sol(1j + h) - sol(1j - h)) - (sol(1j + 2 * h) - sol(1j - 2 * h))) / (12 * h)
    assert np.max(np.abs(e.M1 - fd)) < 1e-9


def test_F_expansion():
    F1, F2 = F_expansion(I2)
    assert np.allclose(F1, I2) and np.allclose(F2, 0)
    mj0 = np.array([[1.2, 0.3j], [-0.3j, 0.9]])
    F1, F2 = F_expansion(mj0)
    h = 1e-5
    fd = (F_eval(mj0, 1j + h) - F_eval(mj0, 1j - h)) / (2 * h)
    assert np.max(np.abs(F2 - fd)) < 1e-8
    assert np.allclose(F1, F_eval(mj0, 1j))
    assert np.linalg.det(I2 + S1 / 1j) == pytest.approx(2.0)
    with pytest.raises(NonInvertibleMJ0):
        F_expansion(np.zeros((2, 2)))


def test_mj_at_zero():
    assert np.array_equal(mj_at_zero(solve_mero(build_residue_system([], 0.0, 0.0))), I2)
    sol = solve_mero(build_residue_system(ONE, 0.1, 0.0))
    mj0 = mj_at_zero(sol)
    S2 = np.array([[0, -1j], [1j, 0]])
    assert np.max(np.abs(mj0 - S2 @ mj0 @ S2)) < 1e-10
    # a nontrivial T: limit along i eps must settle
    tf = TFunction([], ((-0.5, 0.5),), lambda k: 0.2 * np.exp(-k ** 2) * np.sin(3 * k) + 0j)
    assert np.all(np.isfinite(mj_at_zero(sol, tf)))


def test_vacuum_reconstruct():
    prof = reconstruct([], np.linspace(-5, 5, 11))
    assert np.all(prof.p == 1) and np.all(prof.q == 1) and np.array_equal(prof.x, prof.y)


def test_one_soliton_solves_pde():
    y = np.linspace(-20, 20, 4001)
    rm, rn = transport_residual(lambda t: reconstruct(ONE, y, t), 0.0, 0.01)
    assert max(rm, rn) < 1e-6


def test_travelling_wave():
    y = np.linspace(-10, 10, 201)
    t = 1.7
    c = speed(ONE[0])
    p0 = reconstruct(ONE, y, 0.0)
    p1 = reconstruct(ONE, y + c * t, t)
    assert np.max(np.abs(p0.p - p1.p)) < 1e-8


def _peak(poles):
    # locate the maximum of |p - 1| on a coarse grid, then refine on a fine one
    y = np.linspace(-30, 30, 1201)
    y0 = y[np.argmax(np.abs(reconstruct(poles, y, 0.0).p - 1))]
    f = lambda v: -abs(reconstruct(poles, v + 1e-3 * np.arange(-4, 5), 0.0).p[4] - 1)
    res = minimize_scalar(f, bounds=(y0 - 0.1, y0 + 0.1), method="bounded", options={"xatol": 1e-10})
    return -res.fun, res.x


def test_gauge_invariance():
    # scaling the norming constant only translates the profile
    a, ya = _peak(ONE)
    b, yb = _peak(expand_partners([circle_pole(np.pi / 4, 3.0)]))
    assert abs(ya - yb) > 0.1
    assert abs(a - b) < 1e-8


def test_x_monotone_and_io(tmp_path):
    prof = reconstruct(ONE, np.linspace(-10, 10, 101), 0.5)
    assert np.all(np.diff(prof.x) > 0)
    prof.write(tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().startswith("y,x,p,q,m,n")
    (tmp_path / "spec.json").write_text('{"spectrum": [{"zeta": [0, 1.5], "c": [0.2, 0], "kind": "quartet"}]}')
    pts = load_spectrum(tmp_path / "spec.json")
    assert pts[0].zeta == 1.5j and pts[0].kind == "quartet"
