"""Threshold estimation for regressions that turn linear beyond a cutoff.

The public surface, re-exported here, follows the pipeline order:
build a :class:`Sample`, choose a :class:`PenaltyConfig`, then either
call :func:`estimate` for the full run or compose the steps yourself
(:func:`loss_profile`, :func:`estimate_threshold`, :func:`refit_beyond`,
:func:`c_sweep`).  Monte Carlo tooling lives in ``lintail.simulation``
and file handling in ``lintail.dataio``.
"""

from .errors import (
    ConfigError,
    DataError,
    DegenerateDesign,
    EstimationError,
    InsufficientSuffix,
    LintailError,
    MissingColumn,
    NoCandidates,
    ParseError,
    TooFewRows,
)
from .estimator import (
    LinearFit,
    LossProfile,
    PenaltyConfig,
    RefitResult,
    Sample,
    SuffixStats,
    SweepResult,
    ThresholdEstimate,
    build_suffix_stats,
    c_sweep,
    empirical_loss,
    estimate,
    estimate_threshold,
    loss_profile,
    refit_beyond,
    suffix_ls_fit,
)
from .simulation import (
    CSweepResult,
    Scenario,
    ScenarioResult,
    g,
    g_prime,
    generate_sample,
    grid_runner,
    r_threshold,
    run_scenario,
    sweep_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Sample",
    "SuffixStats",
    "LinearFit",
    "PenaltyConfig",
    "LossProfile",
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
    "LintailError",
    "EstimationError",
    "DegenerateDesign",
    "InsufficientSuffix",
    "NoCandidates",
    "DataError",
    "MissingColumn",
    "ParseError",
    "TooFewRows",
    "ConfigError",
]
