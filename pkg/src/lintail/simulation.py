"""Monte Carlo harness for the threshold estimator.

The synthetic family is a fixed smooth shape g on [0, 1] continued
linearly beyond a chosen threshold u0 with a controllable slope jump
delta.  Covariates are uniform on (0, 1), noise is centered Gaussian.
Accuracy is summarized by the empirical mean absolute error (EMAE) of
the threshold estimate across replications.

Reproducibility contract
------------------------
Replication ``s`` of a scenario draws from
``numpy.random.default_rng((base_seed, s))``.  Gaussian noise is
produced by applying the inverse normal CDF to 53-bit uniforms rather
than by the generator's own ``normal`` method, because bit-generator
streams are frozen by numpy's compatibility policy while distribution
methods are not.  Every replication is therefore a pure function of
``(base_seed, s)``, independent of execution order, worker count, and
numpy version.
"""

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import EstimationError
from .estimator import (
    PenaltyConfig,
    Sample,
    _argmin_tie_low,
    estimate_threshold,
    loss_profile,
)

__all__ = [
    "Scenario",
    "ScenarioResult",
    "CSweepResult",
    "g",
    "g_prime",
    "r_threshold",
    "generate_sample",
    "run_scenario",
    "grid_runner",
    "sweep_scenario",
]


def _check_domain(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("x must lie in [0, 1]")
    return x


def g(x):
    """Baseline regression shape on [0, 1].

    Piecewise cubic: 4 x^2 (3 - 4x) on [0, 0.5] and
    (4/3) x (4 x^2 - 10 x + 7) - 1 on [0.5, 1].  The branches agree at
    0.5 (both give 1) and so do their derivatives (both give 0), so g is
    C^1 across the joint.
    """
    x = _check_domain(x)
    left = 4.0 * x * x * (3.0 - 4.0 * x)
    right = (4.0 / 3.0) * x * (4.0 * x * x - 10.0 * x + 7.0) - 1.0
    return np.where(x <= 0.5, left, right)


def g_prime(x):
    """Derivative of :func:`g`, branch-wise polynomial."""
    x = _check_domain(x)
    left = 24.0 * x - 48.0 * x * x
    right = (4.0 / 3.0) * (12.0 * x * x - 20.0 * x + 7.0)
    return np.where(x <= 0.5, left, right)


def r_threshold(x, u0, delta):
    """g below u0, its tangent line with an extra slope delta above.

    Continuous by construction: the linear branch starts at
    (u0, g(u0)) with slope g'(u0) + delta, so delta = 0 prolongs g
    smoothly and any other delta kinks the derivative at u0 while the
    function itself stays continuous.
    """
    if not 0.0 < u0 < 1.0:
        raise ValueError(f"u0 must lie in (0, 1), got {u0}")
    x = _check_domain(x)
    slope = float(g_prime(u0)) + delta
    level = float(g(u0))
    return np.where(x <= u0, g(x), slope * (x - u0) + level)


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo configuration."""

    u0: float
    delta: float
    sigma: float
    n: int
    penalty: PenaltyConfig
    nrep: int
    base_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.u0 < 1.0:
            raise ValueError(f"u0 must lie in (0, 1), got {self.u0}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.n < 10:
            raise ValueError(f"n must be at least 10, got {self.n}")
        if self.nrep < 1:
            raise ValueError(f"nrep must be at least 1, got {self.nrep}")


@dataclass(eq=False)
class ScenarioResult:
    """Replication-level estimates and their summary.

    Failed replications (estimator errors on a degenerate draw) carry
    NaN in the estimate arrays and are excluded from the EMAE and the
    quartiles; ``failures`` counts them.
    """

    emae: float
    u_hat: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    failures: int
    quartiles: dict


def _normal_from_uniforms(rng, size):
    """Inverse-CDF Gaussian draws from 53-bit uniforms (stream-stable)."""
    u = (rng.integers(0, 1 << 53, size=size) + 0.5) * (1.0 / (1 << 53))
    return ndtri(u)


def generate_sample(scenario: Scenario, rep_index: int) -> Sample:
    """Draw replication ``rep_index`` of the scenario, deterministically."""
    rng = np.random.default_rng((scenario.base_seed, rep_index))
    x = rng.random(scenario.n)
    noise = _normal_from_uniforms(rng, scenario.n)
    y = r_threshold(x, scenario.u0, scenario.delta) + scenario.sigma * noise
    return Sample.from_xy(x, y)


def _replicate(scenario: Scenario, rep_index: int):
    """(u_hat, alpha, beta) for one replication, NaNs on estimator failure."""
    sample = generate_sample(scenario, rep_index)
    try:
        est = estimate_threshold(loss_profile(sample, scenario.penalty))
    except EstimationError:
        return (math.nan, math.nan, math.nan)
    f = est.fit_at_u_hat
    return (est.u_hat, f.alpha, f.beta)


def _replicate_sweep(scenario: Scenario, rep_index: int, cs: np.ndarray):
    """u_hat for every c on one replication; one profile, many penalties."""
    sample = generate_sample(scenario, rep_index)
    try:
        profile = loss_profile(sample, dataclasses.replace(scenario.penalty, c=0.0))
    except EstimationError:
        return np.full(cs.size, math.nan)
    fvals = scenario.penalty.penalty_values(profile.u, default_shift=profile.shift)
    scale = float(profile.n) ** (-scenario.penalty.xi)
    out = np.empty(cs.size)
    for i, c in enumerate(cs):
        pl = profile.loss + (c * scale) * fvals
        out[i] = profile.u[_argmin_tie_low(profile.u, pl)]
    return out


def _fan_out(func, scenario, nrep, workers):
    """Run ``func(scenario, rep)`` for rep in range(nrep), maybe in parallel.

    Results land in a list indexed by replication, so the aggregate is
    identical no matter how the work was scheduled.
    """
    if workers is not None and workers > 1 and nrep > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, nrep // (workers * 8))
            results = list(
                pool.map(
                    func,
                    (scenario,) * nrep,
                    range(nrep),
                    chunksize=chunk,
                )
            )
        return results
    return [func(scenario, s) for s in range(nrep)]


def _quartiles(a):
    q1, med, q3 = np.percentile(a, [25.0, 50.0, 75.0])
    return (float(q1), float(med), float(q3))


def run_scenario(scenario: Scenario, workers: Optional[int] = None) -> ScenarioResult:
    """All replications of one scenario, summarized.

    ``workers`` > 1 fans the replications out to that many processes;
    the result is bit-identical to the serial run.
    """
    rows = _fan_out(_replicate, scenario, scenario.nrep, workers)
    arr = np.asarray(rows, dtype=np.float64)
    u_hat, alpha, beta = arr[:, 0], arr[:, 1], arr[:, 2]
    good = ~np.isnan(u_hat)
    failures = int(np.count_nonzero(~good))
    if failures < scenario.nrep:
        emae = float(np.mean(np.abs(u_hat[good] - scenario.u0)))
        quart = {
            "u_hat": _quartiles(u_hat[good]),
            "alpha": _quartiles(alpha[good]),
            "beta": _quartiles(beta[good]),
        }
    else:
        emae = math.nan
        quart = {}
    return ScenarioResult(
        emae=emae,
        u_hat=u_hat,
        alpha=alpha,
        beta=beta,
        failures=failures,
        quartiles=quart,
    )


def grid_runner(
    scenarios: Sequence[Scenario], workers: Optional[int] = None
) -> list:
    """Run a batch of scenarios; one (scenario, result) row each, in order."""
    return [(sc, run_scenario(sc, workers=workers)) for sc in scenarios]


@dataclass(eq=False)
class CSweepResult:
    """EMAE and u_hat quartiles as functions of the penalty constant c.

    Columns share replications: the same ``nrep`` samples are reused for
    every c (the loss profile does not depend on c), so differences
    along the c axis are paired rather than buried in resampling noise.
    """

    c: np.ndarray
    emae: np.ndarray
    q1: np.ndarray
    median: np.ndarray
    q3: np.ndarray
    failures: int
    u_hat: np.ndarray  # shape (nrep, len(c))


def sweep_scenario(
    scenario: Scenario, c_grid: Sequence[float], workers: Optional[int] = None
) -> CSweepResult:
    """EMAE-versus-c curve for one scenario, with paired replications."""
    cs = np.asarray(c_grid, dtype=np.float64)
    if cs.ndim != 1 or cs.size == 0:
        raise ValueError("c_grid must be a non-empty 1-d sequence")
    if np.any(~np.isfinite(cs)) or np.any(cs < 0):
        raise ValueError("c_grid must contain finite nonnegative values")

    func = _SweepTask(cs)
    rows = _fan_out(func, scenario, scenario.nrep, workers)
    u = np.vstack(rows)
    good = ~np.isnan(u[:, 0])
    failures = int(np.count_nonzero(~good))
    if failures == scenario.nrep:
        nanrow = np.full(cs.size, math.nan)
        return CSweepResult(cs, nanrow, nanrow, nanrow, nanrow, failures, u)
    ug = u[good]
    emae = np.abs(ug - scenario.u0).mean(axis=0)
    q1, med, q3 = np.percentile(ug, [25.0, 50.0, 75.0], axis=0)
    return CSweepResult(
        c=cs, emae=emae, q1=q1, median=med, q3=q3, failures=failures, u_hat=u
    )


class _SweepTask:
    """Picklable callable binding the c grid for process pools."""

    def __init__(self, cs):
        self.cs = cs

    def __call__(self, scenario, rep_index):
        return _replicate_sweep(scenario, rep_index, self.cs)
