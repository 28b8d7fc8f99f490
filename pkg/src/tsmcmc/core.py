"""Core domain types: time series container, differencing, z-score
normalization, and reproducible random streams."""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DegenerateDimension, SeriesTooShort
from .validation import as_float_matrix


@dataclass(frozen=True)
class TimeSeries:
    """A T x d matrix of finite real observations with optional timestamps.

    ``values`` is stored as a read-only float64 array.  ``timestamps``, when
    present, must be strictly increasing and of length T.
    """

    values: np.ndarray
    dim_names: tuple = None
    timestamps: tuple = None

    def __post_init__(self):
        values = as_float_matrix(self.values, "values")
        if values.shape[0] < 2:
            raise SeriesTooShort(f"series needs at least 2 rows, got {values.shape[0]}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

        names = self.dim_names
        if names is None:
            names = tuple(f"x{i}" for i in range(values.shape[1]))
        else:
            names = tuple(str(n) for n in names)
            if len(names) != values.shape[1]:
                raise ValueError(
                    f"got {len(names)} dim_names for {values.shape[1]} dimensions"
                )
        object.__setattr__(self, "dim_names", names)

        ts = self.timestamps
        if ts is not None:
            ts = tuple(ts)
            if len(ts) != values.shape[0]:
                raise ValueError("timestamps length must equal the number of rows")
            for a, b in zip(ts, ts[1:]):
                if not a < b:
                    raise ValueError("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)

    @property
    def t_len(self):
        return self.values.shape[0]

    @property
    def dims(self):
        return self.values.shape[1]


def first_differences(series):
    """Componentwise one-step changes: out[k] = x[k+1] - x[k], shape (T-1, d)."""
    values = as_float_matrix(series, "series")
    if values.shape[0] < 2:
        raise SeriesTooShort("differencing needs at least 2 rows")
    return np.diff(values, axis=0)


def accumulate_differences(diffs, start):
    """Inverse of :func:`first_differences`: rebuild the series from one-step
    changes and the initial value."""
    d = as_float_matrix(diffs, "diffs")
    x0 = np.asarray(start, dtype=np.float64).ravel()
    if x0.shape[0] != d.shape[1]:
        raise ValueError("start vector width must match the diff width")
    out = np.empty((d.shape[0] + 1, d.shape[1]))
    out[0] = x0
    np.cumsum(d, axis=0, out=out[1:])
    out[1:] += x0
    return out


class Normalizer(BaseEstimator, TransformerMixin):
    """Per-dimension z-score transform using population (divide-by-T) moments.

    ``transform`` maps each column to mean 0, standard deviation 1;
    ``inverse_transform`` undoes it exactly.  Constant columns raise
    :class:`DegenerateDimension`.
    """

    def fit(self, X, y=None):
        values = as_float_matrix(X, "X")
        self.mean_ = values.mean(axis=0)
        self.scale_ = values.std(axis=0)
        dead = np.flatnonzero(self.scale_ == 0.0)
        if dead.size:
            raise DegenerateDimension(
                f"constant column(s) at index {dead.tolist()} cannot be z-scored"
            )
        self.n_features_in_ = values.shape[1]
        return self

    def transform(self, X):
        self._check_fitted()
        values = as_float_matrix(X, "X")
        if values.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {values.shape[1]} columns, normalizer was fit on {self.n_features_in_}"
            )
        return (values - self.mean_) / self.scale_

    def inverse_transform(self, X):
        self._check_fitted()
        values = as_float_matrix(X, "X")
        return values * self.scale_ + self.mean_

    def _check_fitted(self):
        if not hasattr(self, "mean_"):
            raise RuntimeError("Normalizer is not fitted; call fit first")


@dataclass
class RandomStream:
    """Seeded, reproducible random source (PCG64 under the hood).

    Identical (seed, key) pairs yield identical draw sequences across runs
    and platforms.  A stream is single-owner; derive independent child
    streams with :meth:`spawn` instead of sharing one.
    """

    seed: int
    key: tuple = ()
    _gen: np.random.Generator = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(self.seed)
        self.key = tuple(int(k) for k in self.key)
        if self._gen is None:
            seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
            self._gen = np.random.Generator(np.random.PCG64(seq))

    def spawn(self, *key):
        """Child stream at (seed, key + new key); deterministic, independent."""
        return RandomStream(self.seed, self.key + tuple(int(k) for k in key))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def draw_seed(self):
        """A fresh 53-bit integer seed, safe to round-trip through JSON."""
        return int(self._gen.integers(0, 2**53))
