"""Empirical densities over first-order differences of a real series.

Both estimators model the joint density as a product of per-dimension
marginals: a full d-dimensional joint histogram is sample-starved for the
dimensionalities we target, and the product form keeps acceptance behavior
identical in one dimension.  Queries below the support floor (empty bins,
out-of-range points, far kernel tails) return ``epsilon_floor`` instead of
zero so acceptance ratios stay finite.
"""

import json

import numpy as np
from sklearn.base import BaseEstimator

from .core import first_differences
from .exceptions import DimensionMismatch, SeriesTooShort, ZeroRange
from .validation import as_float_matrix

SCHEMA_VERSION = 1

_SQRT_2PI = np.sqrt(2.0 * np.pi)


class _ProductDensity(BaseEstimator):
    """Shared fit plumbing and query-shape handling for both estimators."""

    def fit(self, X, y=None):
        values = as_float_matrix(X, "X")
        if values.shape[0] < 3:
            raise SeriesTooShort("need at least 3 rows (2 difference vectors)")
        return self.fit_diffs(first_differences(values))

    def fit_diffs(self, diffs):
        raise NotImplementedError

    def density(self, theta):
        """Evaluate the fitted density, never below ``epsilon_floor``.

        Accepts a single length-d vector (returns a float) or an (m, d)
        matrix of query points (returns an (m,) array).  Deterministic.
        """
        self._check_fitted()
        arr = np.asarray(theta, dtype=np.float64)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.dims_:
            got = arr.shape[-1] if arr.ndim else 0
            raise DimensionMismatch(f"theta has width {got}, expected {self.dims_}")
        if not np.isfinite(arr).all():
            raise ValueError("theta contains NaN or infinite entries")
        out = np.maximum(self._evaluate(arr), self.epsilon_floor)
        return float(out[0]) if single else out

    def _check_fitted(self):
        if not hasattr(self, "dims_"):
            raise RuntimeError(f"{type(self).__name__} is not fitted; call fit first")

    @staticmethod
    def _point_mass_factor(queries, value):
        # Degenerate dimension: all observed changes equal `value`.  Density
        # exists only at that point; exact hits contribute a neutral factor,
        # everything else falls to the epsilon floor via the zero product.
        return np.where(queries == value, 1.0, 0.0)


class HistogramDiffDensity(_ProductDensity):
    """Product of per-dimension equal-width histograms over [min, max].

    Each marginal integrates to 1 over its support; the joint therefore
    integrates to 1 over the product support.
    """

    def __init__(self, bins_per_dim=16, epsilon_floor=1e-12):
        self.bins_per_dim = bins_per_dim
        self.epsilon_floor = epsilon_floor

    def fit_diffs(self, diffs):
        diffs = as_float_matrix(diffs, "diffs")
        if self.bins_per_dim < 1:
            raise ValueError("bins_per_dim must be at least 1")
        n, d = diffs.shape
        edges = []
        dens = []
        bin_counts = []
        degenerate = []
        for i in range(d):
            col = diffs[:, i]
            lo, hi = col.min(), col.max()
            if lo == hi:
                degenerate.append(lo)
                edges.append(None)
                dens.append(None)
                bin_counts.append(None)
                continue
            counts, e = np.histogram(col, bins=self.bins_per_dim, range=(lo, hi))
            width = (hi - lo) / self.bins_per_dim
            edges.append(e)
            dens.append(counts / (n * width))
            bin_counts.append(counts)
            degenerate.append(None)
        if all(v is not None for v in degenerate):
            raise ZeroRange("every dimension's differences are constant")
        self.dims_ = d
        self.n_samples_ = n
        self.bin_edges_ = edges
        self.bin_densities_ = dens
        self.bin_counts_ = bin_counts
        self.degenerate_values_ = degenerate
        return self

    def _evaluate(self, queries):
        out = np.ones(queries.shape[0])
        for i in range(self.dims_):
            t = queries[:, i]
            if self.degenerate_values_[i] is not None:
                out *= self._point_mass_factor(t, self.degenerate_values_[i])
                continue
            e = self.bin_edges_[i]
            inside = (t >= e[0]) & (t <= e[-1])
            idx = np.minimum(
                np.searchsorted(e, t, side="right") - 1, len(e) - 2
            ).clip(min=0)
            out *= np.where(inside, self.bin_densities_[i][idx], 0.0)
        return out

    def to_dict(self):
        self._check_fitted()
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "histogram_product",
            "bins_per_dim": self.bins_per_dim,
            "epsilon_floor": self.epsilon_floor,
            "dims": self.dims_,
            "n_samples": self.n_samples_,
            "bin_edges": [None if e is None else e.tolist() for e in self.bin_edges_],
            "bin_counts": [
                None if c is None else c.tolist() for c in self.bin_counts_
            ],
            "bin_densities": [
                None if b is None else b.tolist() for b in self.bin_densities_
            ],
            "degenerate_values": self.degenerate_values_,
        }

    @classmethod
    def from_dict(cls, doc):
        est = cls(bins_per_dim=doc["bins_per_dim"], epsilon_floor=doc["epsilon_floor"])
        est.dims_ = doc["dims"]
        est.n_samples_ = doc["n_samples"]
        est.bin_edges_ = [None if e is None else np.array(e) for e in doc["bin_edges"]]
        est.bin_counts_ = [
            None if c is None else np.array(c) for c in doc["bin_counts"]
        ]
        est.bin_densities_ = [
            None if b is None else np.array(b) for b in doc["bin_densities"]
        ]
        est.degenerate_values_ = list(doc["degenerate_values"])
        return est


class KdeDiffDensity(_ProductDensity):
    """Product of per-dimension Gaussian kernel density estimates.

    Bandwidths follow Silverman's rule h_i = 1.06 * sigma_i * n^(-1/5)
    (population sigma), optionally scaled by ``bandwidth_scale``.  Strictly
    positive everywhere thanks to the epsilon floor.
    """

    def __init__(self, bandwidth_scale=1.0, epsilon_floor=1e-12):
        self.bandwidth_scale = bandwidth_scale
        self.epsilon_floor = epsilon_floor

    def fit_diffs(self, diffs):
        diffs = as_float_matrix(diffs, "diffs")
        if self.bandwidth_scale <= 0:
            raise ValueError("bandwidth_scale must be positive")
        n, d = diffs.shape
        sigma = diffs.std(axis=0)
        if (sigma == 0.0).all():
            raise ZeroRange("every dimension's differences are constant")
        self.dims_ = d
        self.n_samples_ = n
        self.samples_ = diffs.copy()
        self.bandwidths_ = self.bandwidth_scale * 1.06 * sigma * n ** (-0.2)
        return self

    def _evaluate(self, queries, chunk=512):
        out = np.ones(queries.shape[0])
        for start in range(0, queries.shape[0], chunk):
            q = queries[start : start + chunk]
            block = np.ones(q.shape[0])
            for i in range(self.dims_):
                h = self.bandwidths_[i]
                if h == 0.0:
                    block *= self._point_mass_factor(q[:, i], self.samples_[0, i])
                    continue
                u = (q[:, i, None] - self.samples_[None, :, i]) / h
                block *= np.exp(-0.5 * u * u).sum(axis=1) / (
                    self.n_samples_ * h * _SQRT_2PI
                )
            out[start : start + chunk] = block
        return out

    def to_dict(self):
        self._check_fitted()
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "gaussian_kde",
            "bandwidth_scale": self.bandwidth_scale,
            "epsilon_floor": self.epsilon_floor,
            "dims": self.dims_,
            "n_samples": self.n_samples_,
            "samples": self.samples_.tolist(),
            "bandwidths": self.bandwidths_.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        est = cls(
            bandwidth_scale=doc["bandwidth_scale"], epsilon_floor=doc["epsilon_floor"]
        )
        est.dims_ = doc["dims"]
        est.n_samples_ = doc["n_samples"]
        est.samples_ = np.array(doc["samples"])
        est.bandwidths_ = np.array(doc["bandwidths"])
        return est


_KINDS = {
    "histogram_product": HistogramDiffDensity,
    "gaussian_kde": KdeDiffDensity,
}


def fit_diff_density(series, kind="gaussian_kde", **params):
    """Fit the difference density of ``series`` with the chosen estimator.

    ``kind`` is ``"gaussian_kde"`` (default; smooth ratios avoid zero-density
    stalls in the acceptance loop) or ``"histogram_product"``.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown density kind {kind!r}, expected one of {sorted(_KINDS)}")
    return _KINDS[kind](**params).fit(series)


def density_from_dict(doc):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported density schema version {doc.get('schema_version')!r}")
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown density kind {kind!r}")
    return _KINDS[kind].from_dict(doc)


def save_density(estimator, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(estimator.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def load_density(path):
    with open(path, encoding="utf-8") as fh:
        return density_from_dict(json.load(fh))
