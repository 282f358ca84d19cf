"""Numeric kernels behind the loss profile.

Two interchangeable implementations live here: a pure numpy one and a
numba-compiled one.  Both consume the same x-sorted arrays and produce
bit-identical output, because every floating-point operation is written
in the same order in both paths and the numba functions are compiled
without ``fastmath`` (reassociation would break the equality).

Selection happens once at import time.  The numba path is used when the
package is importable and the environment variable ``LINTAIL_NO_NUMBA``
is unset or empty; otherwise the numpy path serves.  ``ACTIVE_IMPL``
records the choice so callers (and tests) can introspect it.

The kernels are deliberately small: running suffix sums over the sorted
sample, and per-candidate least-squares fits derived from those sums.
Everything above this level (quantile cutoffs, penalties, tie-breaking)
stays in plain Python where it is easier to audit.
"""

import os

import numpy as np

__all__ = [
    "NUMBA_OK",
    "ACTIVE_IMPL",
    "suffix_sums",
    "candidate_fits",
    "suffix_sums_numpy",
    "candidate_fits_numpy",
]

try:
    from numba import njit

    NUMBA_OK = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    NUMBA_OK = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap


def suffix_sums_numpy(xo, yo):
    """Running sums over suffixes of the x-sorted sample.

    Parameters
    ----------
    xo, yo : ndarray
        Covariate and response, both sorted by ascending covariate.

    Returns
    -------
    tuple of ndarray
        ``(sx, sxx, sy, syy, sxy)`` where element ``k`` sums over the
        observations with index >= k, i.e. those with x >= x_(k).

    Notes
    -----
    ``np.cumsum`` on the reversed arrays is a plain sequential running
    sum, so the accumulation order (descending x) matches the numba loop
    exactly and the two paths agree bit for bit.
    """
    sx = np.cumsum(xo[::-1])[::-1]
    sxx = np.cumsum((xo * xo)[::-1])[::-1]
    sy = np.cumsum(yo[::-1])[::-1]
    syy = np.cumsum((yo * yo)[::-1])[::-1]
    sxy = np.cumsum((xo * yo)[::-1])[::-1]
    return sx, sxx, sy, syy, sxy


@njit(cache=True, nogil=True)
def suffix_sums_numba(xo, yo):  # pragma: no cover - measured via path-agreement tests
    n = xo.shape[0]
    sx = np.empty(n)
    sxx = np.empty(n)
    sy = np.empty(n)
    syy = np.empty(n)
    sxy = np.empty(n)
    ax = axx = ay = ayy = axy = 0.0
    for k in range(n - 1, -1, -1):
        ax += xo[k]
        axx += xo[k] * xo[k]
        ay += yo[k]
        ayy += yo[k] * yo[k]
        axy += xo[k] * yo[k]
        sx[k] = ax
        sxx[k] = axx
        sy[k] = ay
        syy[k] = ayy
        sxy[k] = axy
    return sx, sxx, sy, syy, sxy


def candidate_fits_numpy(starts, counts, sx, sxx, sy, syy, sxy, var_tol):
    """Centered least squares for each candidate suffix.

    Parameters
    ----------
    starts : ndarray of int
        Index of the first observation of each candidate suffix in the
        sorted order.
    counts : ndarray of float
        Number of observations in each suffix.
    sx, sxx, sy, syy, sxy : ndarray
        Suffix sums as produced by :func:`suffix_sums_numpy`.
    var_tol : float
        Relative degeneracy tolerance: a candidate whose centered x sum
        of squares is <= ``var_tol`` times its raw x sum of squares is
        flagged as degenerate.

    Returns
    -------
    tuple
        ``(alpha, beta, loss, mean_x, mean_y, ok)`` arrays, one entry per
        candidate.  ``loss`` is the mean squared residual, clamped at 0.
        Degenerate candidates carry NaN coefficients and ``ok`` False.
    """
    mx = sx[starts] / counts
    my = sy[starts] / counts
    sxxc = sxx[starts] - sx[starts] * mx
    sxyc = sxy[starts] - sx[starts] * my
    syyc = syy[starts] - sy[starts] * my
    ok = sxxc > var_tol * sxx[starts]
    safe = np.where(ok, sxxc, 1.0)
    beta = np.where(ok, sxyc / safe, np.nan)
    alpha = np.where(ok, my - beta * mx, np.nan)
    rss = syyc - beta * beta * sxxc
    loss = np.where(ok, np.where(rss > 0.0, rss, 0.0) / counts, np.nan)
    return alpha, beta, loss, mx, my, ok


@njit(cache=True, nogil=True)
def candidate_fits_numba(
    starts, counts, sx, sxx, sy, syy, sxy, var_tol
):  # pragma: no cover - measured via path-agreement tests
    m = starts.shape[0]
    alpha = np.empty(m)
    beta = np.empty(m)
    loss = np.empty(m)
    mean_x = np.empty(m)
    mean_y = np.empty(m)
    ok = np.empty(m, dtype=np.bool_)
    for j in range(m):
        k = starts[j]
        cnt = counts[j]
        mx = sx[k] / cnt
        my = sy[k] / cnt
        sxxc = sxx[k] - sx[k] * mx
        sxyc = sxy[k] - sx[k] * my
        syyc = syy[k] - sy[k] * my
        mean_x[j] = mx
        mean_y[j] = my
        if sxxc > var_tol * sxx[k]:
            b = sxyc / sxxc
            rss = syyc - b * b * sxxc
            alpha[j] = my - b * mx
            beta[j] = b
            loss[j] = (rss if rss > 0.0 else 0.0) / cnt
            ok[j] = True
        else:
            alpha[j] = np.nan
            beta[j] = np.nan
            loss[j] = np.nan
            ok[j] = False
    return alpha, beta, loss, mean_x, mean_y, ok


_want_numba = NUMBA_OK and not os.environ.get("LINTAIL_NO_NUMBA")

if _want_numba:
    ACTIVE_IMPL = "numba"
    suffix_sums = suffix_sums_numba
    candidate_fits = candidate_fits_numba
else:
    ACTIVE_IMPL = "numpy"
    suffix_sums = suffix_sums_numpy
    candidate_fits = candidate_fits_numpy
