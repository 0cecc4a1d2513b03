import numpy as np
import pytest

from vxsim.beams import BeamSet, lg_beams
from vxsim.grid import make_grid


@pytest.fixture(scope="session")
def grid16():
    # lx = 2*pi so integer wavenumbers land exactly on FFT bins
    return make_grid(16, 16, 2.0 * np.pi, 2.0 * np.pi)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64, 64, 16.0, 16.0)


@pytest.fixture(scope="session")
def grid128():
    return make_grid(128, 128, 16.0, 16.0)


@pytest.fixture(scope="session")
def weak_beams64(grid64):
    """Standard weak-probe vortex pair, |xi| well under 0.05."""
    return lg_beams(
        grid64, l1=1, l2=-1, probe_peak=0.3, probe_waist=2.0,
        control_peak=10.0, control_waist=6.0,
    )


@pytest.fixture
def uniform_beams():
    """Uniform amplitudes on a small grid; kinetic step is trivial there."""

    def build(grid, p1=0.0, p2=0.0, c1=0.0, c2=0.0, **kwargs):
        ones = np.ones(grid.shape)
        return BeamSet(
            grid=grid,
            p1=p1 * ones,
            p2=p2 * ones,
            c1=c1 * ones,
            c2=c2 * ones,
            l1=kwargs.pop("l1", 0),
            l2=kwargs.pop("l2", 0),
            **kwargs,
        )

    return build
