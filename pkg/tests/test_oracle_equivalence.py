"""Suffix-statistics results versus naive per-candidate re-computation.

The production path computes every candidate fit from cumulative sums;
the oracle re-scans the subset and runs a two-pass regression for each
candidate separately.  Agreement within 1e-9 relative error on random
instances is the correctness argument for the O(n) profile.
"""

import numpy as np
import pytest

from lintail.estimator import PenaltyConfig, Sample, estimate_threshold, loss_profile
from lintail.simulation import r_threshold

from oracles import naive_profile, naive_threshold


def _random_instance(rng):
    """One random dataset: linear or kinked mean, uniform or skewed x."""
    n = int(rng.integers(20, 201))
    if rng.random() < 0.5:
        x = rng.uniform(0, 1, n)
    else:
        x = rng.beta(2.0, 1.2, n)
    if rng.random() < 0.5:
        a, b = rng.normal(size=2)
        mean = a + b * x
    else:
        u0 = float(rng.uniform(0.25, 0.75))
        delta = float(rng.normal(scale=1.5))
        mean = r_threshold(x, u0, delta)
    sigma = float(rng.uniform(0.01, 0.5))
    y = mean + sigma * rng.normal(size=n)
    c = float(rng.uniform(0.0, 0.05))
    return x, y, c


def _close(a, b, rel=1e-9):
    return abs(a - b) <= rel * (1.0 + abs(b))


@pytest.mark.parametrize("seed", range(100))
def test_profile_matches_naive_oracle(seed):
    rng = np.random.default_rng((2024, seed))
    x, y, c = _random_instance(rng)
    profile = loss_profile(Sample.from_xy(x, y), PenaltyConfig(c=c))
    reference = naive_profile(list(x), list(y), c)

    assert len(profile) == len(reference)
    for i, ref in enumerate(reference):
        assert profile.u[i] == ref["u"]
        assert profile.n_suffix[i] == ref["n_suffix"]
        assert _close(profile.alpha[i], ref["alpha"])
        assert _close(profile.beta[i], ref["beta"])
        assert _close(profile.loss[i], ref["loss"])
        assert _close(profile.penalized[i], ref["penalized"])


def test_threshold_matches_naive_oracle():
    rng = np.random.default_rng(77)
    for _ in range(25):
        x, y, c = _random_instance(rng)
        profile = loss_profile(Sample.from_xy(x, y), PenaltyConfig(c=c))
        assert estimate_threshold(profile).u_hat == naive_threshold(list(x), list(y), c)
