import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qcdma.codes import generate_random_code

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def pairs(n_c, count, seed=0):
    return [(generate_random_code(n_c, seed + 2 * i), generate_random_code(n_c, seed + 2 * i + 1)) for i in range(count)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
