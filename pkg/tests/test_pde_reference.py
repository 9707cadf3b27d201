import numpy as np
import pytest

from mch2.errors import CFLViolation, PositivityLoss
from mch2.fields import FieldState, Grid, conservation_residual, preset
from mch2.pde_reference import EvolutionConfig, check_cfl, evolve, sponge_profile, step
from mch2.soliton_rh import circle_pole, expand_partners, soliton_state


def test_background_fixed_point():
    g = Grid.span(-20, 20, 256)
    tr = evolve(preset("background", g), EvolutionConfig(t_end=10.0, snapshot_stride=50))
    assert len(tr.snapshots) > 2
    for s in tr.snapshots:
        assert np.array_equal(s.p, tr.snapshots[0].p)
    assert tr.mass_drift == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(t_end=-1)
    with pytest.raises(ValueError):
        EvolutionConfig(t_end=1, scheme="euler")


def test_cfl_violation():
    g = Grid.span(-20, 20, 512)
    s = preset("sech-bump", g, amplitude=0.3)
    with pytest.raises(CFLViolation):
        check_cfl(s, 10.0)


def test_positivity_loss():
    g = Grid.span(-20, 20, 512)
    s = preset("background", g)
    bad = FieldState.from_mn(s.m.copy(), s.n.copy(), g)
    bad.m[200] = 1e-12
    with pytest.raises(PositivityLoss):
        step(bad, -0.05, sigma=np.full(g.count, 1e6))


def test_sponge_profile():
    g = Grid.span(-10, 10, 201)
    s = sponge_profile(g, 0.1, 2.0)
    assert s[100] == 0 and s[0] == pytest.approx(2.0) and np.all(s >= 0)
    assert np.all(sponge_profile(g, 0.0) == 0)


def test_time_reversal_order():
    g = Grid.span(-30, 30, 1024)
    s0 = preset("sech-bump", g, amplitude=0.2)
    errs = []
    for dt in (0.04, 0.02):
        back = step(step(s0, dt), -dt)
        errs.append(np.max(np.abs(back.m - s0.m)))
    assert errs[0] / errs[1] > 20


def test_bump_conservation():
    g = Grid.span(-40, 40, 2 ** 12)
    s0 = preset("sech-bump", g, amplitude=0.1)
    tr = evolve(s0, EvolutionConfig(t_end=5.0, sponge_fraction=0.0))
    assert tr.mass_drift < 1e-6
    assert tr.final.t == pytest.approx(5.0)
    meta = tr.metadata()
    assert meta["steps"] == tr.steps and meta["conservation_drift"] == tr.mass_drift


def test_conservation_residual_small_for_solution():
    g = Grid.span(-30, 30, 2048)
    s0 = preset("sech-bump", g, amplitude=0.1)
    res = []
    for dt in (0.02, 0.01):
        tr = evolve(s0, EvolutionConfig(t_end=dt, dt=dt, sponge_fraction=0.0))
        res.append(conservation_residual(s0, tr.final))
    assert res[1] < 1e-5


def test_soliton_translation():
    poles = expand_partners([circle_pole(np.pi / 4)])
    g = Grid.span(-30, 30, 2 ** 11)
    s0 = soliton_state(poles, g, 0.0)
    tr = evolve(s0, EvolutionConfig(t_end=0.5, sponge_fraction=0.0))
    ref = soliton_state(poles, g, 0.5)
    assert np.max(np.abs(tr.final.p - ref.p)) < 1e-5


def test_trajectory_write(tmp_path):
    g = Grid.span(-20, 20, 256)
    tr = evolve(preset("sech-bump", g, amplitude=0.05), EvolutionConfig(t_end=0.2))
    files = tr.write(tmp_path)
    assert (tmp_path / "evolve.json").exists() and len(files) == 2
    first = (tmp_path / files[0]).read_text().splitlines()
    assert first[0] == "x,p,q,m,n"
