import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twophase_iso.cap_geometry import ProblemParams

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def draw_params(rng, dims=(2, 3, 4, 5), lo=0.2, hi=5.0, gamma_scale=1.2, canonical=False):
    """Random parameter set with log-uniform densities and volumes."""
    N = int(rng.choice(dims))
    rm, rp, vm, vp = np.exp(rng.uniform(math.log(lo), math.log(hi), 4))
    if canonical and vm / rm < vp / rp:
        rm, rp, vm, vp = rp, rm, vp, vm
    g = rng.uniform(0.0, gamma_scale * min(rm, rp))
    return ProblemParams(N, float(rm), float(rp), float(vm), float(vp), float(g))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
