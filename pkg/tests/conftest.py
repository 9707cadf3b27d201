import numpy as np
import pytest

from mch2.fields import Grid, preset


@pytest.fixture(scope="session")
def bump():
    """Small bump in p only; empty discrete spectrum."""
    return preset("sech-bump", Grid.span(-40, 40, 2 ** 12), amplitude=0.1, q_amplitude=0.0)


@pytest.fixture(scope="session")
def bump_data(bump):
    from mch2.direct_scattering import default_kgrid, reflection
    return reflection(bump, default_kgrid(256, 8.0))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
