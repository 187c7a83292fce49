import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kepler_orbit.orbit_core import PhasePoint

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def generic_point():
    """A point off every symmetry axis with a bound, non-circular, inclined orbit."""
    return PhasePoint([0.5, 0.2, 0.3], [0.1, 0.6, -0.2])
