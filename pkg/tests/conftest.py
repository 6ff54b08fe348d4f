import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mcavqe.model import FieldSpec, ModelParams

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

HALF_PI = 0.5 * math.pi
# sites 1,2 along +b, sites 3,4 along -b
CHAIN = np.array([HALF_PI] * 4 + [HALF_PI, HALF_PI, -HALF_PI, -HALF_PI])


@pytest.fixture
def params():
    return ModelParams()


@pytest.fixture
def zero_field():
    return FieldSpec(0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
