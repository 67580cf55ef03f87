import numpy as np
import pytest

from drifttrack.driftsim import AebParams, generate_trace

PAPER_M = 119237


@pytest.fixture(scope="session")
def paper_trace():
    """The full-scale case-study trace; generated once per session."""
    return generate_trace(AebParams(seed=0), PAPER_M)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
