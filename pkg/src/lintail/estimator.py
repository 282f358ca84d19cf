"""Threshold estimation by penalized suffix least squares.

The model: a regression function that is an arbitrary smooth shape up to
an unknown covariate value and exactly linear from there on.  For every
candidate threshold u we fit a straight line to the observations with
x >= u and record the mean squared residual.  That empirical loss is
flat (up to noise) for candidates at or above the true threshold and
grows below it, so the smallest near-minimizer of a penalized version of
the loss estimates the threshold.

The candidate set only needs the distinct observed x values: between two
consecutive sample points the suffix, and with it the loss, cannot
change.  Suffix sums make each candidate's fit O(1), see ``_kernels``.

Sketch of the objects involved::

    Sample --> SuffixStats --> LossProfile --> ThresholdEstimate
                                   ^
                             PenaltyConfig

All messages about infeasible inputs are raised as the dedicated types
in ``lintail.errors`` rather than returned as NaN.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateDesign, InsufficientSuffix, NoCandidates

__all__ = [
    "Sample",
    "SuffixStats",
    "LinearFit",
    "PenaltyConfig",
    "LossProfile",
    "ProfileEntry",
    "ThresholdEstimate",
    "RefitResult",
    "SweepResult",
    "build_suffix_stats",
    "suffix_ls_fit",
    "empirical_loss",
    "loss_profile",
    "estimate_threshold",
    "refit_beyond",
    "c_sweep",
    "estimate",
]

# Relative tolerance below which a suffix's centered x sum of squares is
# treated as zero spread (constant covariate).
VAR_TOL = 1e-12

# Two penalized values closer than this (relative to the minimum) count
# as an exact tie and the smaller candidate wins.
TIE_TOL = 1e-12


def _ceil_index(t):
    """Ceiling of ``t`` guarded against float fuzz from products like 0.95*n.

    0.95 * 100 evaluates to 95.00000000000001; a bare ceil would return
    96 and shift every quantile by one order statistic.  Backing off by a
    relative epsilon before rounding keeps exact multiples exact.
    """
    return int(math.ceil(t - 1e-9 * max(1.0, abs(t))))


@dataclass(eq=False)
class Sample:
    """Paired observations, with the ascending-x permutation precomputed.

    Treat instances as read-only: every routine here shares the arrays
    without copying.
    """

    x: np.ndarray
    y: np.ndarray
    sorted_by_x: np.ndarray

    @classmethod
    def from_xy(cls, x, y):
        """Validate and wrap raw covariate/response arrays.

        Raises
        ------
        ValueError
            on length mismatch, fewer than 3 points, or non-finite values.
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if x.size < 3:
            raise ValueError(f"need at least 3 observations, got {x.size}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("x and y must be finite (no NaN or Inf)")
        order = np.argsort(x, kind="stable")
        return cls(x=x, y=y, sorted_by_x=order)

    @property
    def n(self):
        return self.x.size

    def sorted_x(self):
        return self.x[self.sorted_by_x]

    def sorted_y(self):
        return self.y[self.sorted_by_x]


@dataclass(eq=False)
class SuffixStats:
    """Cumulative sums over suffixes of the x-sorted sample.

    Index k holds the count and the sums of x, x^2, y, y^2 and x*y over
    the observations with x >= x_(k).  Index 0 is the whole sample.
    """

    xo: np.ndarray
    yo: np.ndarray
    counts: np.ndarray
    sx: np.ndarray
    sxx: np.ndarray
    sy: np.ndarray
    syy: np.ndarray
    sxy: np.ndarray

    @property
    def n(self):
        return self.xo.size


class LinearFit(NamedTuple):
    """An intercept/slope fit restricted to one suffix."""

    alpha: float
    beta: float
    n_used: int
    rss: float
    mean_x: float
    mean_y: float

    def predict(self, x):
        return self.alpha + self.beta * np.asarray(x, dtype=np.float64)


_PENALTY_NAMES = ("pospart", "arctan", "tabulated")


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty weight schedule and search-region parameters.

    Attributes
    ----------
    c : float
        Nonnegative constant in the weight lambda_n = c * n**(-xi).
    xi : float
        Exponent, required inside (0, 1/2); the weight must vanish, but
        slower than n**(-1/2), for the estimator to stay consistent.
    penalty : str
        One of ``"pospart"`` (f(u) = max(u - shift, 0)), ``"arctan"``
        (f(u) = arctan(u), useful only when candidates are nonnegative),
        or ``"tabulated"`` (piecewise-linear interpolation of ``table``).
    shift : float or None
        Offset for the positive-part penalty.  None means "use the
        minimum observed x", which reduces to f(u) = u for covariates
        starting at 0 while keeping the penalty nonnegative in general.
    table : (array, array) or None
        Knot positions and values for the tabulated penalty.
    eta1 : float
        Tail mass defining the search cutoff gamma_n (the empirical
        (1 - eta1)-quantile of x) and the minimum suffix size.
    """

    c: float
    xi: float = 0.4
    penalty: str = "pospart"
    shift: Optional[float] = None
    table: Optional[tuple] = None
    eta1: float = 0.05

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c >= 0.0):
            raise ValueError(f"penalty constant c must be >= 0, got {self.c}")
        if not 0.0 < self.xi < 0.5:
            raise ValueError(f"xi must lie in (0, 1/2), got {self.xi}")
        if not 0.0 < self.eta1 < 1.0:
            raise ValueError(f"eta1 must lie in (0, 1), got {self.eta1}")
        if self.penalty not in _PENALTY_NAMES:
            raise ValueError(
                f"penalty must be one of {_PENALTY_NAMES}, got {self.penalty!r}"
            )
        if self.penalty == "tabulated":
            if self.table is None:
                raise ValueError("tabulated penalty requires a table")
            ku, kf = (np.asarray(a, dtype=np.float64) for a in self.table)
            if ku.ndim != 1 or ku.shape != kf.shape or ku.size < 2:
                raise ValueError("penalty table needs matching 1-d knot arrays")
            if np.any(np.diff(ku) <= 0):
                raise ValueError("penalty table knots must be strictly increasing")
            if np.any(kf < 0.0) or np.any(np.diff(kf) < 0.0):
                raise ValueError(
                    "penalty table values must be nonnegative and"
                    " non-decreasing (the interpolant inherits both)"
                )

    def lambda_n(self, n):
        """Realized penalty weight c * n**(-xi)."""
        return self.c * float(n) ** (-self.xi)

    def penalty_values(self, u, default_shift):
        """Evaluate f on an ascending candidate array and validate it.

        The function must be nonnegative and non-decreasing over the
        candidates actually used; arctan, for one, goes negative for
        u < 0, so this is checked per call rather than assumed.
        """
        u = np.asarray(u, dtype=np.float64)
        if self.penalty == "pospart":
            shift = default_shift if self.shift is None else self.shift
            vals = np.maximum(u - shift, 0.0)
        elif self.penalty == "arctan":
            vals = np.arctan(u)
        else:
            ku, kf = (np.asarray(a, dtype=np.float64) for a in self.table)
            vals = np.interp(u, ku, kf)
        if np.any(vals < 0.0):
            raise ValueError(
                f"penalty {self.penalty!r} is negative on the candidate set"
            )
        if np.any(np.diff(vals) < 0.0):
            raise ValueError(
                f"penalty {self.penalty!r} is decreasing on the candidate set"
            )
        return vals


class ProfileEntry(NamedTuple):
    """One candidate row of a loss profile."""

    u: float
    n_suffix: int
    alpha: float
    beta: float
    loss: float
    penalized: float


@dataclass(eq=False)
class LossProfile:
    """Per-candidate losses and penalized losses, ascending in u."""

    u: np.ndarray
    n_suffix: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    loss: np.ndarray
    penalized: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray
    gamma_n: float
    lambda_n: float
    shift: float
    n: int
    n_dropped_degenerate: int = 0

    def __len__(self):
        return self.u.size

    def entries(self) -> Iterator[ProfileEntry]:
        for i in range(self.u.size):
            yield ProfileEntry(
                float(self.u[i]),
                int(self.n_suffix[i]),
                float(self.alpha[i]),
                float(self.beta[i]),
                float(self.loss[i]),
                float(self.penalized[i]),
            )


@dataclass(eq=False)
class ThresholdEstimate:
    """Estimated threshold with the fits attached to it.

    ``covariance`` estimates the joint distribution of the refit
    coefficients; it is the plug-in of sigma^2 * E[1{X>=u+psi} XX^T]^{-1}
    divided by n, so its diagonal square roots are standard errors
    directly.
    """

    u_hat: float
    fit_at_u_hat: LinearFit
    n: int
    psi: float = 0.0
    fit_at_u_hat_plus_psi: Optional[LinearFit] = None
    sigma2_hat: Optional[float] = None
    covariance: Optional[np.ndarray] = None

    @property
    def std_errors(self):
        """(se_alpha, se_beta) from the covariance, or None before refit."""
        if self.covariance is None:
            return None
        d = np.sqrt(np.diag(self.covariance))
        return float(d[0]), float(d[1])

    @property
    def wald_z(self):
        """(z_alpha, z_beta) for the refit coefficients, or None."""
        if self.covariance is None or self.fit_at_u_hat_plus_psi is None:
            return None
        se = self.std_errors
        f = self.fit_at_u_hat_plus_psi
        return f.alpha / se[0], f.beta / se[1]


class RefitResult(NamedTuple):
    """Output of :func:`refit_beyond`."""

    fit: LinearFit
    sigma2_hat: float
    covariance: np.ndarray
    std_errors: tuple
    wald_z: tuple


def build_suffix_stats(sample: Sample) -> SuffixStats:
    """One right-to-left pass accumulating the suffix sums.

    The summation order (descending x) is fixed, so repeated calls on the
    same sample are bit-reproducible.
    """
    xo = sample.sorted_x()
    yo = sample.sorted_y()
    sx, sxx, sy, syy, sxy = _kernels.suffix_sums(xo, yo)
    counts = np.arange(xo.size, 0, -1, dtype=np.int64)
    return SuffixStats(
        xo=xo, yo=yo, counts=counts, sx=sx, sxx=sxx, sy=sy, syy=syy, sxy=sxy
    )


def _fit_at_index(stats: SuffixStats, k: int, var_tol: float) -> LinearFit:
    """Kernel-backed fit for the suffix starting at sorted index k."""
    starts = np.array([k], dtype=np.int64)
    counts = stats.counts[starts].astype(np.float64)
    alpha, beta, loss, mx, my, ok = _kernels.candidate_fits(
        starts, counts, stats.sx, stats.sxx, stats.sy, stats.syy, stats.sxy, var_tol
    )
    if not ok[0]:
        raise DegenerateDesign(
            f"suffix at index {k} has (numerically) constant x; cannot fit a line"
        )
    m = int(stats.counts[k])
    # The kernel reports the mean squared residual; scale back up.
    rss = float(loss[0]) * m
    return LinearFit(
        alpha=float(alpha[0]),
        beta=float(beta[0]),
        n_used=m,
        rss=rss,
        mean_x=float(mx[0]),
        mean_y=float(my[0]),
    )


def suffix_ls_fit(
    stats: SuffixStats, k: int, min_suffix: int = 3, var_tol: float = VAR_TOL
) -> LinearFit:
    """Least-squares line through the observations with x >= x_(k).

    Parameters
    ----------
    stats : SuffixStats
    k : int
        0-based index into the sorted order; the suffix starts there.
    min_suffix : int
        Smallest admissible suffix size (3 leaves one residual degree of
        freedom beyond the two coefficients).
    var_tol : float
        Relative degeneracy tolerance on the centered x sum of squares.

    Raises
    ------
    InsufficientSuffix
        if fewer than ``min_suffix`` observations remain.
    DegenerateDesign
        if the suffix x values are numerically constant.
    """
    if not 0 <= k < stats.n:
        raise IndexError(f"candidate index {k} out of range for n={stats.n}")
    if stats.counts[k] < min_suffix:
        raise InsufficientSuffix(
            f"suffix at index {k} has {int(stats.counts[k])} observations,"
            f" need at least {min_suffix}"
        )
    return _fit_at_index(stats, k, var_tol)


def empirical_loss(stats: SuffixStats, k: int, fit: LinearFit) -> float:
    """Mean squared residual of ``fit`` over its suffix, rss / n_k."""
    if fit.n_used != stats.counts[k]:
        raise ValueError(
            f"fit used {fit.n_used} observations but suffix {k} holds"
            f" {int(stats.counts[k])}; was it produced for another candidate?"
        )
    return fit.rss / float(stats.counts[k])


def loss_profile(sample: Sample, config: PenaltyConfig) -> LossProfile:
    """Evaluate loss and penalized loss at every admissible candidate.

    Candidates are the distinct observed x values not exceeding gamma_n,
    the empirical (1 - eta1)-quantile computed as the order statistic
    x_(ceil((1 - eta1) * n)).  Candidates whose suffix is smaller than
    max(3, ceil(eta1 * n)) are dropped, which guarantees at least an
    eta1 fraction of the sample above every admissible threshold.
    Degenerate candidates (constant x in the suffix) are excluded and
    counted in ``n_dropped_degenerate``.

    Raises
    ------
    NoCandidates
        if fewer than two candidates survive the filters.
    """
    stats = build_suffix_stats(sample)
    n = stats.n
    xo = stats.xo

    gamma_n = float(xo[_ceil_index((1.0 - config.eta1) * n) - 1])
    min_suffix = max(3, _ceil_index(config.eta1 * n))

    uniq, starts = np.unique(xo, return_index=True)
    keep = (uniq <= gamma_n) & (stats.counts[starts] >= min_suffix)
    starts = starts[keep].astype(np.int64)
    u = uniq[keep]
    if u.size < 2:
        raise NoCandidates(
            f"only {u.size} candidate(s) at or below gamma_n={gamma_n!r}"
            f" with suffix size >= {min_suffix}"
        )

    counts = stats.counts[starts]
    alpha, beta, loss, mx, my, ok = _kernels.candidate_fits(
        starts,
        counts.astype(np.float64),
        stats.sx,
        stats.sxx,
        stats.sy,
        stats.syy,
        stats.sxy,
        VAR_TOL,
    )
    dropped = int(np.count_nonzero(~ok))
    if dropped:
        u, counts = u[ok], counts[ok]
        alpha, beta, loss = alpha[ok], beta[ok], loss[ok]
        mx, my = mx[ok], my[ok]
    if u.size < 2:
        raise NoCandidates(
            f"only {u.size} non-degenerate candidate(s) remain"
            f" ({dropped} dropped for constant x)"
        )

    shift = float(xo[0]) if config.shift is None else float(config.shift)
    fvals = config.penalty_values(u, default_shift=shift)
    lam = config.lambda_n(n)
    penalized = loss + lam * fvals

    return LossProfile(
        u=u,
        n_suffix=counts,
        alpha=alpha,
        beta=beta,
        loss=loss,
        penalized=penalized,
        mean_x=mx,
        mean_y=my,
        gamma_n=gamma_n,
        lambda_n=lam,
        shift=shift,
        n=n,
        n_dropped_degenerate=dropped,
    )


def _argmin_tie_low(u, penalized):
    """Index of the smallest u whose penalized loss ties the minimum."""
    pmin = penalized.min()
    tol = TIE_TOL * (1.0 + abs(pmin))
    return int(np.argmax(penalized <= pmin + tol))


def estimate_threshold(profile: LossProfile) -> ThresholdEstimate:
    """Smallest candidate minimizing the penalized loss.

    Ties (within 1e-12 relative) break toward the smaller u: the target
    is defined as the smallest value above which the function is linear,
    so when the criterion cannot distinguish candidates the lower one is
    the faithful choice.
    """
    if len(profile) == 0:
        raise NoCandidates("empty loss profile")
    i = _argmin_tie_low(profile.u, profile.penalized)
    m = int(profile.n_suffix[i])
    fit = LinearFit(
        alpha=float(profile.alpha[i]),
        beta=float(profile.beta[i]),
        n_used=m,
        rss=float(profile.loss[i]) * m,
        mean_x=float(profile.mean_x[i]),
        mean_y=float(profile.mean_y[i]),
    )
    return ThresholdEstimate(u_hat=float(profile.u[i]), fit_at_u_hat=fit, n=profile.n)


def refit_beyond(
    sample: Sample,
    u_hat: float,
    psi: float = 0.0,
    min_suffix: int = 3,
    var_tol: float = VAR_TOL,
) -> RefitResult:
    """Line fit on {x >= u_hat + psi} with its asymptotic covariance.

    A positive offset psi restores smoothness: just above the threshold
    the estimated cut may still clip a few pre-threshold points, and the
    asymptotic normality of the coefficients is stated for the shifted
    fit.  The covariance returned is

        sigma2_hat * [ (1/n) sum_{x_i >= u_hat+psi} (1, x_i)(1, x_i)^T ]^{-1} / n

    whose diagonal square roots are the coefficient standard errors.

    Raises
    ------
    InsufficientSuffix, DegenerateDesign
    """
    if psi < 0:
        raise ValueError(f"psi must be nonnegative, got {psi}")
    stats = build_suffix_stats(sample)
    cut = u_hat + psi
    k = int(np.searchsorted(stats.xo, cut, side="left"))
    m = stats.n - k
    if m < min_suffix:
        raise InsufficientSuffix(
            f"only {m} observations with x >= {cut!r}, need at least {min_suffix}"
        )
    fit = _fit_at_index(stats, k, var_tol)
    sigma2 = fit.rss / (fit.n_used - 2)
    n = float(stats.n)
    moment = (
        np.array(
            [[float(m), stats.sx[k]], [stats.sx[k], stats.sxx[k]]], dtype=np.float64
        )
        / n
    )
    covariance = sigma2 * np.linalg.inv(moment) / n
    se = (float(np.sqrt(covariance[0, 0])), float(np.sqrt(covariance[1, 1])))
    z = (fit.alpha / se[0], fit.beta / se[1])
    return RefitResult(
        fit=fit, sigma2_hat=sigma2, covariance=covariance, std_errors=se, wald_z=z
    )


@dataclass(eq=False)
class SweepResult:
    """Estimated threshold as a function of the penalty constant."""

    c: np.ndarray
    u_hat: np.ndarray

    def pairs(self):
        return list(zip(self.c.tolist(), self.u_hat.tolist()))

    @property
    def plateau_starts(self):
        """(c, u_hat) at each grid point where the estimate changes."""
        out = []
        prev = None
        for ci, ui in zip(self.c.tolist(), self.u_hat.tolist()):
            if prev is None or ui != prev:
                out.append((ci, ui))
                prev = ui
        return out

    @property
    def value_set(self):
        return sorted(set(self.u_hat.tolist()))


def c_sweep(
    sample: Sample, config: PenaltyConfig, c_grid: Sequence[float]
) -> SweepResult:
    """Threshold estimate for every c in a non-decreasing grid.

    Only the penalty term depends on c, so the loss column is computed
    once and each grid point costs one pass over the candidates.  The
    estimate is a step function of c, non-increasing for a non-decreasing
    penalty (a larger weight can only push the argmin toward smaller u
    under the low tie-break).
    """
    cs = np.asarray(c_grid, dtype=np.float64)
    if cs.ndim != 1 or cs.size == 0:
        raise ValueError("c_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(cs) < 0):
        raise ValueError("c_grid must be non-decreasing")
    if np.any(~np.isfinite(cs)) or np.any(cs < 0):
        raise ValueError("c_grid must contain finite nonnegative values")

    profile = loss_profile(sample, dataclasses.replace(config, c=0.0))
    fvals = config.penalty_values(profile.u, default_shift=profile.shift)
    scale = float(profile.n) ** (-config.xi)
    u_hats = np.empty(cs.size, dtype=np.float64)
    for i, c in enumerate(cs):
        pl = profile.loss + (c * scale) * fvals
        u_hats[i] = profile.u[_argmin_tie_low(profile.u, pl)]
    return SweepResult(c=cs, u_hat=u_hats)


def estimate(
    sample: Sample, config: PenaltyConfig, psi: float = 0.0
) -> ThresholdEstimate:
    """Full pipeline: profile, minimize, then refit at u_hat + psi."""
    profile = loss_profile(sample, config)
    est = estimate_threshold(profile)
    refit = refit_beyond(sample, est.u_hat, psi)
    est.psi = psi
    est.fit_at_u_hat_plus_psi = refit.fit
    est.sigma2_hat = refit.sigma2_hat
    est.covariance = refit.covariance
    return est
