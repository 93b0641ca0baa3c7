import numpy as np
import pytest

from mmsubspace.model import ProblemInstance, QuadraticData, ZeroPenalty
from mmsubspace.problems import random_instance


PENALTY_KINDS = ["zero", "tikhonov", "hyperbolic", "fair"]


@pytest.fixture
def diag14():
    """The worked 2x2 instance: R = diag(1, 4), r = 0, no penalty."""
    return ProblemInstance(QuadraticData(np.diag([1.0, 4.0]), np.zeros(2)), ZeroPenalty())


def instance_grid(seed=0, dims=(1, 2, 5, 20), kinds=PENALTY_KINDS, per_combo=None):
    """Deterministic list of random instances covering all penalty kinds."""
    rng = np.random.default_rng(seed)
    out = []
    for n in dims:
        for kind in kinds:
            out.append(random_instance(n, kind, rng, cond=10.0, lam=0.7, delta=0.6))
    return out
