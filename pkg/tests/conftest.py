import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lintail import dataio
from lintail.estimator import PenaltyConfig, Sample, loss_profile

# Property tests run many numeric examples; the numba warm-up alone can
# blow a per-example deadline, so deadlines are off globally.
settings.register_profile(
    "lintail",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("lintail")


@pytest.fixture(scope="session")
def aq_sample():
    sample, dropped = dataio.read_csv(dataio.airquality_spec())
    assert dropped == 0
    return sample


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger any jit compilation once, before timed tests run."""
    rng = np.random.default_rng(0)
    sample = Sample.from_xy(rng.random(50), rng.random(50))
    loss_profile(sample, PenaltyConfig(c=0.1))
