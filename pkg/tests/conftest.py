import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid48():
    from phasecalc.grids import GridSpec
    return GridSpec.balanced(48)


@pytest.fixture(scope="session")
def bargmann_setup():
    from phasecalc.bargmann import BargmannSetup, calibrate
    from phasecalc.grids import GridSpec
    S = BargmannSetup.standard(1)
    calibrate(S, GridSpec.balanced(64))
    return S


@pytest.fixture(scope="session")
def unit_windows(grid48):
    """Unit-lattice Gaussian partition on E x E* with its Weyl window operators."""
    from phasecalc.phase_space import Lattice
    from phasecalc.symbol_class import build_partition, window_operators
    fam = build_partition(Lattice.scaled(4), 1.0)
    return fam, window_operators(fam, (grid48, grid48))


def rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(np.max(np.abs(b)), 1e-300))
