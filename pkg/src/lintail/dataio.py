"""Dataset ingestion and result serialization.

CSV in, CSV out, both through the stdlib ``csv`` module with RFC-4180
quoting.  Floats are printed with 17 significant digits so every value
round-trips to the same double.  Result files open with a short
``#``-prefixed preamble carrying scalar metadata (sample size, cutoff,
realized penalty weight); readers here skip and parse those lines,
generic CSV tools can drop them with a one-line filter.

The bundled airquality fixture (New York daily air measurements,
May to September 1973, complete cases only) lives in ``data/`` and is
exposed via :func:`airquality_path`.
"""

import configparser
import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from . import _svg
from .errors import ConfigError, MissingColumn, ParseError, TooFewRows
from .estimator import LossProfile, PenaltyConfig, Sample, SweepResult
from .simulation import Scenario, ScenarioResult

__all__ = [
    "DatasetSpec",
    "read_csv",
    "write_profile",
    "read_profile",
    "write_sweep",
    "read_sweep",
    "write_scenario_table",
    "read_scenario_config",
    "airquality_path",
    "airquality_spec",
]

MIN_ROWS = 3

PROFILE_COLUMNS = (
    "u",
    "n_suffix",
    "alpha",
    "beta",
    "loss",
    "penalized",
    "mean_x",
    "mean_y",
)

SWEEP_COLUMNS = ("c", "u_hat")

SCENARIO_COLUMNS = (
    "u0",
    "delta",
    "sigma",
    "n",
    "c",
    "xi",
    "eta1",
    "nrep",
    "base_seed",
    "emae",
    "failures",
    "q1_u_hat",
    "median_u_hat",
    "q3_u_hat",
    "q1_alpha",
    "median_alpha",
    "q3_alpha",
    "q1_beta",
    "median_beta",
    "q3_beta",
)


def _f17(v):
    """Format a float with 17 significant digits (lossless round-trip)."""
    return format(float(v), ".17g")


@dataclass(frozen=True)
class DatasetSpec:
    """Where to find the data and which columns to regress."""

    path: str
    x_column: str
    y_column: str
    na_markers: tuple = ("NA", "")


def airquality_path():
    """Filesystem path of the bundled airquality fixture."""
    return str(resources.files("lintail").joinpath("data/airquality.csv"))


def airquality_spec():
    """DatasetSpec for the bundled fixture: Ozone regressed on Wind."""
    return DatasetSpec(path=airquality_path(), x_column="Wind", y_column="Ozone")


def read_csv(spec: DatasetSpec):
    """Load the two selected columns, dropping rows with missing values.

    Returns
    -------
    (Sample, int)
        The parsed sample and the number of rows dropped because either
        selected cell matched a missing-data marker.

    Raises
    ------
    MissingColumn
        if a selected column is not in the header.
    ParseError
        if a retained cell is not a finite number (line numbers are
        1-based and count the header).
    TooFewRows
        if fewer than 3 complete rows remain.
    """
    with open(spec.path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TooFewRows(0, MIN_ROWS, spec.path) from None
        header = [h.strip() for h in header]
        try:
            xi = header.index(spec.x_column)
        except ValueError:
            raise MissingColumn(spec.x_column, spec.path) from None
        try:
            yi = header.index(spec.y_column)
        except ValueError:
            raise MissingColumn(spec.y_column, spec.path) from None

        xs, ys = [], []
        dropped = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            cells = []
            for col_idx, col_name in ((xi, spec.x_column), (yi, spec.y_column)):
                if col_idx >= len(row):
                    raise ParseError(lineno, col_name, "<missing cell>", spec.path)
                cells.append(row[col_idx].strip())
            if any(c in spec.na_markers for c in cells):
                dropped += 1
                continue
            vals = []
            for cell, col_name in zip(cells, (spec.x_column, spec.y_column)):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(lineno, col_name, cell, spec.path) from None
                if not math.isfinite(v):
                    raise ParseError(lineno, col_name, cell, spec.path)
                vals.append(v)
            xs.append(vals[0])
            ys.append(vals[1])

    if len(xs) < MIN_ROWS:
        raise TooFewRows(len(xs), MIN_ROWS, spec.path)
    return Sample.from_xy(xs, ys), dropped


def _write_rows(path, preamble, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, val in preamble:
            fh.write(f"# {key}={val}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _read_rows(path):
    """Split a result file into its preamble dict and csv rows."""
    meta = {}
    lines = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return meta, header, list(reader)


def write_profile(profile: LossProfile, path, svg_path=None):
    """Serialize a loss profile; optionally draw loss and PL against u."""
    preamble = [
        ("format", "lintail-profile-v1"),
        ("n", profile.n),
        ("gamma_n", _f17(profile.gamma_n)),
        ("lambda_n", _f17(profile.lambda_n)),
        ("shift", _f17(profile.shift)),
        ("n_dropped_degenerate", profile.n_dropped_degenerate),
    ]
    rows = [
        (
            _f17(profile.u[i]),
            int(profile.n_suffix[i]),
            _f17(profile.alpha[i]),
            _f17(profile.beta[i]),
            _f17(profile.loss[i]),
            _f17(profile.penalized[i]),
            _f17(profile.mean_x[i]),
            _f17(profile.mean_y[i]),
        )
        for i in range(len(profile))
    ]
    _write_rows(path, preamble, PROFILE_COLUMNS, rows)
    if svg_path is not None:
        _svg.line_plot(
            svg_path,
            [
                (profile.u, profile.loss, "loss"),
                (profile.u, profile.penalized, "penalized"),
            ],
            title="empirical loss by candidate threshold",
            xlabel="u",
            ylabel="loss",
        )


def read_profile(path) -> LossProfile:
    """Inverse of :func:`write_profile`."""
    meta, header, rows = _read_rows(path)
    if tuple(header) != PROFILE_COLUMNS:
        raise ParseError(1, ",".join(header), "unexpected profile header", path)
    cols = list(zip(*rows)) if rows else [[] for _ in PROFILE_COLUMNS]
    return LossProfile(
        u=np.array(cols[0], dtype=np.float64),
        n_suffix=np.array(cols[1], dtype=np.int64),
        alpha=np.array(cols[2], dtype=np.float64),
        beta=np.array(cols[3], dtype=np.float64),
        loss=np.array(cols[4], dtype=np.float64),
        penalized=np.array(cols[5], dtype=np.float64),
        mean_x=np.array(cols[6], dtype=np.float64),
        mean_y=np.array(cols[7], dtype=np.float64),
        gamma_n=float(meta["gamma_n"]),
        lambda_n=float(meta["lambda_n"]),
        shift=float(meta["shift"]),
        n=int(meta["n"]),
        n_dropped_degenerate=int(meta["n_dropped_degenerate"]),
    )


def write_sweep(sweep: SweepResult, path, svg_path=None):
    """Serialize u_hat(c); optionally draw the step function."""
    preamble = [("format", "lintail-sweep-v1")]
    for c, u in sweep.plateau_starts:
        preamble.append(("plateau_start", f"c={_f17(c)} u_hat={_f17(u)}"))
    rows = [(_f17(c), _f17(u)) for c, u in zip(sweep.c, sweep.u_hat)]
    _write_rows(path, preamble, SWEEP_COLUMNS, rows)
    if svg_path is not None:
        _svg.line_plot(
            svg_path,
            [(sweep.c, sweep.u_hat, "")],
            title="estimated threshold by penalty constant",
            xlabel="c",
            ylabel="u_hat",
            step=True,
        )


def read_sweep(path) -> SweepResult:
    """Inverse of :func:`write_sweep` (plateaus are recomputed)."""
    _, header, rows = _read_rows(path)
    if tuple(header) != SWEEP_COLUMNS:
        raise ParseError(1, ",".join(header), "unexpected sweep header", path)
    cs = np.array([r[0] for r in rows], dtype=np.float64)
    us = np.array([r[1] for r in rows], dtype=np.float64)
    return SweepResult(c=cs, u_hat=us)


def write_scenario_table(rows, path, svg_path=None):
    """One CSV row per (Scenario, ScenarioResult) pair, fixed column order.

    An empty input produces a header-only file.  With ``svg_path`` the
    EMAE is drawn against n, one series per distinct penalty constant.
    """
    out = []
    for sc, res in rows:
        q_u = res.quartiles.get("u_hat", (math.nan,) * 3)
        q_a = res.quartiles.get("alpha", (math.nan,) * 3)
        q_b = res.quartiles.get("beta", (math.nan,) * 3)
        out.append(
            (
                _f17(sc.u0),
                _f17(sc.delta),
                _f17(sc.sigma),
                sc.n,
                _f17(sc.penalty.c),
                _f17(sc.penalty.xi),
                _f17(sc.penalty.eta1),
                sc.nrep,
                sc.base_seed,
                _f17(res.emae),
                res.failures,
                *(_f17(v) for v in q_u),
                *(_f17(v) for v in q_a),
                *(_f17(v) for v in q_b),
            )
        )
    _write_rows(path, [("format", "lintail-scenarios-v1")], SCENARIO_COLUMNS, out)
    if svg_path is not None and rows:
        series = []
        by_c = {}
        for sc, res in rows:
            by_c.setdefault(sc.penalty.c, []).append((sc.n, res.emae))
        for c, pts in sorted(by_c.items()):
            pts.sort()
            series.append(
                ([p[0] for p in pts], [p[1] for p in pts], f"c={c:g}")
            )
        _svg.line_plot(
            svg_path,
            series,
            title="EMAE by sample size",
            xlabel="n",
            ylabel="EMAE",
        )


_REQUIRED_KEYS = ("u0", "delta", "sigma", "n", "nrep", "c")


def read_scenario_config(path) -> list:
    """Parse an INI scenario file into a list of Scenario objects.

    Each section describes one scenario block::

        [shrinking-jump]
        u0 = 0.5
        delta = -1
        sigma = 0.01
        n = 200, 1000, 2000
        c = 0.01
        nrep = 200
        seed = 20230815
        # optional: xi, eta1, penalty, shift

    ``n`` and ``c`` accept comma-separated lists; the block expands to
    their cartesian product (n-major order).  All expanded scenarios of
    a block share the seed, so estimates across c are paired.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read scenario config {path!r}")
    if not parser.sections():
        raise ConfigError(f"no scenario sections in {path!r}")

    scenarios = []
    for section in parser.sections():
        block = parser[section]
        missing = [k for k in _REQUIRED_KEYS if k not in block]
        if missing:
            raise ConfigError(
                f"[{section}] is missing required key(s): {', '.join(missing)}"
            )

        def _get(key, cast, default=None, sec=section, blk=block):
            if key not in blk:
                return default
            raw = blk[key]
            try:
                return cast(raw)
            except ValueError:
                raise ConfigError(
                    f"[{sec}] {key} = {raw!r} is not a valid {cast.__name__}"
                ) from None

        def _get_list(key, cast, sec=section, blk=block):
            raw = blk[key]
            try:
                return [cast(tok.strip()) for tok in raw.split(",") if tok.strip()]
            except ValueError:
                raise ConfigError(
                    f"[{sec}] {key} = {raw!r} is not a comma list of {cast.__name__}"
                ) from None

        ns = _get_list("n", int)
        cs = _get_list("c", float)
        if not ns or not cs:
            raise ConfigError(f"[{section}] n and c must be non-empty")
        try:
            for n in ns:
                for c in cs:
                    penalty = PenaltyConfig(
                        c=c,
                        xi=_get("xi", float, 0.4),
                        penalty=_get("penalty", str, "pospart"),
                        shift=_get("shift", float, None),
                        eta1=_get("eta1", float, 0.05),
                    )
                    scenarios.append(
                        Scenario(
                            u0=_get("u0", float),
                            delta=_get("delta", float),
                            sigma=_get("sigma", float),
                            n=n,
                            penalty=penalty,
                            nrep=_get("nrep", int),
                            base_seed=_get("seed", int, 0),
                        )
                    )
        except ValueError as exc:
            raise ConfigError(f"[{section}] {exc}") from None
    return scenarios
