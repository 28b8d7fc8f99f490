"""Evaluation corpora: a Lorenz-63 simulator and CSV ingestion with
sliding-window extraction."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import TimeSeries
from .exceptions import (
    MissingColumn,
    NonFiniteState,
    NonFiniteValue,
    ParseError,
    SeriesTooShort,
)
from .validation import as_float_matrix


@dataclass(frozen=True)
class LorenzConfig:
    """Parameters for the Lorenz-63 system integrated with fixed-step RK4.

    Defaults are the canonical chaotic settings.  ``transient`` burn-in steps
    are integrated and discarded before recording ``steps`` states.
    """

    steps: int
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01
    transient: int = 1000
    x0: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not 0.0 < self.dt <= 0.05:
            raise ValueError(f"dt must lie in (0, 0.05], got {self.dt}")
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if self.transient < 0:
            raise ValueError("transient must be nonnegative")
        if len(tuple(self.x0)) != 3:
            raise ValueError("x0 must have exactly 3 components")


def lorenz_derivative(state, sigma, rho, beta):
    x, y, z = state
    return (sigma * (y - x), x * (rho - z) - y, x * y - beta * z)


def rk4_step(state, dt, sigma, rho, beta):
    """One classical 4th-order Runge-Kutta step of the Lorenz system."""
    x, y, z = state
    k1 = lorenz_derivative(state, sigma, rho, beta)
    k2 = lorenz_derivative(
        (x + 0.5 * dt * k1[0], y + 0.5 * dt * k1[1], z + 0.5 * dt * k1[2]),
        sigma, rho, beta,
    )
    k3 = lorenz_derivative(
        (x + 0.5 * dt * k2[0], y + 0.5 * dt * k2[1], z + 0.5 * dt * k2[2]),
        sigma, rho, beta,
    )
    k4 = lorenz_derivative(
        (x + dt * k3[0], y + dt * k3[1], z + dt * k3[2]), sigma, rho, beta
    )
    c = dt / 6.0
    return (
        x + c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y + c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        z + c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )


def simulate_lorenz(config, rng=None):
    """Integrate the Lorenz system and return a (steps x 3) series.

    Deterministic given ``config``; ``rng`` is accepted for interface
    uniformity with stochastic sources but never consumed.  Raises
    :class:`NonFiniteState` (with the offending step index) if the
    integration diverges.
    """
    del rng
    state = tuple(float(v) for v in config.x0)
    out = np.empty((config.steps, 3))
    total = config.transient + config.steps
    for i in range(total):
        if i >= config.transient:
            out[i - config.transient] = state
        if i == total - 1:
            break
        state = rk4_step(state, config.dt, config.sigma, config.rho, config.beta)
        if not all(math.isfinite(v) for v in state):
            raise NonFiniteState(f"integration diverged at step {i + 1}", step=i + 1)
    return TimeSeries(out, dim_names=("x", "y", "z"))


@dataclass(frozen=True)
class WindowPair:
    """A contiguous (past, future) slice pair cut from a source series."""

    past: np.ndarray
    future: np.ndarray
    origin_index: int


def make_windows(series, p=16, q=32, stride=1):
    """Slide a (p past, q future) window over the series.

    Returns floor((T - p - q) / stride) + 1 pairs; ``past`` ends exactly
    where ``future`` begins.
    """
    values = as_float_matrix(series, "series")
    T = values.shape[0]
    if p < 1 or q < 1:
        raise ValueError("p and q must be at least 1")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    if T < p + q:
        raise SeriesTooShort(f"need at least p + q = {p + q} rows, got {T}")
    pairs = []
    for start in range(0, T - p - q + 1, stride):
        pairs.append(
            WindowPair(
                past=values[start : start + p],
                future=values[start + p : start + p + q],
                origin_index=start,
            )
        )
    return pairs


def sliding_windows(series, length, stride=1):
    """Stack all length-``length`` contiguous slices into an (N, length, d) array."""
    values = as_float_matrix(series, "series")
    T = values.shape[0]
    if T < length:
        raise SeriesTooShort(f"need at least {length} rows, got {T}")
    starts = range(0, T - length + 1, stride)
    return np.stack([values[s : s + length] for s in starts])


def load_csv(path, value_columns, timestamp_column=None):
    """Read a comma-separated file with a header row into a TimeSeries.

    Column order follows ``value_columns``; row order is preserved.  Cells
    must parse as finite reals ('.' decimal separator).  Timestamps are kept
    as floats when the whole column parses numerically, otherwise as strings.
    """
    value_columns = list(value_columns)
    if not value_columns:
        raise ValueError("value_columns must be nonempty")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, header row required") from None
        index = {name: i for i, name in enumerate(header)}
        for name in value_columns + ([timestamp_column] if timestamp_column else []):
            if name not in index:
                raise MissingColumn(f"column {name!r} not found in header {header}")
        cols = [index[name] for name in value_columns]
        ts_col = index[timestamp_column] if timestamp_column else None

        rows = []
        stamps = []
        for r, record in enumerate(reader):
            vals = []
            for name, c in zip(value_columns, cols):
                if c >= len(record):
                    raise ParseError(
                        f"row {r}: missing cell for column {name!r}", row=r, column=name
                    )
                raw = record[c].strip()
                try:
                    v = float(raw)
                except ValueError:
                    raise ParseError(
                        f"row {r}, column {name!r}: cannot parse {raw!r} as a real",
                        row=r,
                        column=name,
                    ) from None
                if not math.isfinite(v):
                    raise NonFiniteValue(
                        f"row {r}, column {name!r}: non-finite value {raw!r}",
                        row=r,
                        column=name,
                    )
                vals.append(v)
            rows.append(vals)
            if ts_col is not None:
                stamps.append(record[ts_col].strip())
    if len(rows) < 2:
        raise SeriesTooShort(f"{path}: need at least 2 data rows, got {len(rows)}")

    timestamps = None
    if ts_col is not None:
        try:
            timestamps = tuple(float(s) for s in stamps)
        except ValueError:
            timestamps = tuple(stamps)
    return TimeSeries(np.array(rows), dim_names=value_columns, timestamps=timestamps)


def write_csv(series, path, timestamp_header="timestamp"):
    """Write a TimeSeries as RFC-4180-style CSV with a header row.

    Floats are rendered with shortest round-trip repr, so rewriting the same
    series is byte-identical.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        has_ts = series.timestamps is not None
        header = ([timestamp_header] if has_ts else []) + list(series.dim_names)
        writer.writerow(header)
        for i, row in enumerate(series.values):
            cells = [repr(float(v)) for v in row]
            if has_ts:
                cells = [str(series.timestamps[i])] + cells
            writer.writerow(cells)
