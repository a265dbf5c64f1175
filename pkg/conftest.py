import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

SEED = 20240517

settings.register_profile(
    "default",
    max_examples=50,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.register_profile("dev", max_examples=10, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size runs (deselect with -m 'not slow')")


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
