"""Conditional proposal sources: a uniform "sample the next value given the
recent past" contract, with built-in statistical samplers and helpers for
rolling out uncorrected trajectories."""

import warnings
from typing import Protocol, runtime_checkable

import numpy as np
from sklearn.base import BaseEstimator

from .core import RandomStream, first_differences
from .exceptions import (
    ContextTooShort,
    DimensionMismatch,
    InsufficientData,
    SeriesTooShort,
    SingularDesign,
)
from .validation import as_float_matrix, as_float_vector, check_context

# Random-stream lanes shared by rollout and the correction loop so that a
# correction run accepting every first proposal replays the plain rollout.
PROPOSAL_LANE = 0
DECISION_LANE = 1


@runtime_checkable
class ProposalSource(Protocol):
    """Contract for conditional next-value samplers.

    ``propose`` must return a finite length-``dims`` vector, be deterministic
    given (context, stream state), and never mutate the context.  Sources may
    additionally define ``on_step(index)`` to track which output position the
    caller is about to fill (replay-style sources need this) and
    ``propose_parts(context, rng) -> (mean, innovation)`` to expose their
    noise decomposition to wrappers.
    """

    dims: int
    context_len: int

    def propose(self, context, rng): ...


def step_stream(seed, step):
    """The proposal stream every driver uses for output position ``step``."""
    return RandomStream(seed).spawn(PROPOSAL_LANE, step)


class VarSource(BaseEstimator):
    """Vector autoregression of the given order, fit by least squares.

    Proposals are the deterministic VAR mean from the last ``order`` context
    rows plus Gaussian innovations with the fitted per-dimension residual
    standard deviation.
    """

    def __init__(self, order=16):
        self.order = order

    def fit(self, X, y=None):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        values = as_float_matrix(X, "X")
        T, d = values.shape
        L = self.order
        if T < 10 * L * d:
            raise InsufficientData(
                f"need T >= 10 * order * dims = {10 * L * d} rows, got {T}"
            )
        rows = T - L
        Z = np.ones((rows, 1 + L * d))
        for lag in range(1, L + 1):
            Z[:, 1 + (lag - 1) * d : 1 + lag * d] = values[L - lag : T - lag]
        Y = values[L:]
        coef, _, rank, _ = np.linalg.lstsq(Z, Y, rcond=None)
        if rank < Z.shape[1]:
            warnings.warn(
                "rank-deficient design matrix; refitting with ridge 1e-8",
                RuntimeWarning,
                stacklevel=2,
            )
            gram = Z.T @ Z + 1e-8 * np.eye(Z.shape[1])
            coef = np.linalg.solve(gram, Z.T @ Y)
            if (values.std(axis=0) == 0.0).all():
                raise SingularDesign("series is constant; no dynamics to fit")
        resid = Y - Z @ coef
        self.coef_ = coef
        self.intercept_ = coef[0].copy()
        self.lag_matrices_ = np.stack(
            [coef[1 + (lag - 1) * d : 1 + lag * d].T for lag in range(1, L + 1)]
        )
        self.residual_mean_ = resid.mean(axis=0)
        self.residual_std_ = resid.std(axis=0)
        self.dims_ = d
        return self

    @property
    def dims(self):
        self._check_fitted()
        return self.dims_

    @property
    def context_len(self):
        return self.order

    def predict_mean(self, context):
        """Deterministic VAR mean for the next value given the context."""
        self._check_fitted()
        ctx = check_context(context, self.dims_, min_rows=self.order)
        z = np.ones(self.coef_.shape[0])
        d = self.dims_
        for lag in range(1, self.order + 1):
            z[1 + (lag - 1) * d : 1 + lag * d] = ctx[-lag]
        return z @ self.coef_

    def propose_parts(self, context, rng):
        mean = self.predict_mean(context)
        innovation = rng.normal(0.0, self.residual_std_)
        return mean, innovation

    def propose(self, context, rng):
        mean, innovation = self.propose_parts(context, rng)
        return mean + innovation

    def _check_fitted(self):
        if not hasattr(self, "coef_"):
            raise RuntimeError("VarSource is not fitted; call fit first")


def fit_var(series, order):
    """Functional spelling of ``VarSource(order).fit(series)``."""
    return VarSource(order=order).fit(series)


class BootstrapSource(BaseEstimator):
    """Proposes last context value plus a uniformly resampled real difference.

    Every proposal's implied one-step change is a member of the training
    difference multiset by construction.
    """

    def fit(self, X, y=None):
        values = as_float_matrix(X, "X")
        if values.shape[0] < 2:
            raise SeriesTooShort("bootstrap source needs at least 2 rows")
        self.diffs_ = first_differences(values)
        self.dims_ = values.shape[1]
        return self

    @property
    def dims(self):
        if not hasattr(self, "diffs_"):
            raise RuntimeError("BootstrapSource is not fitted; call fit first")
        return self.dims_

    context_len = 1

    def propose(self, context, rng):
        ctx = check_context(context, self.dims)
        pick = int(rng.integers(0, self.diffs_.shape[0]))
        return ctx[-1] + self.diffs_[pick]


class BiasedSource:
    """Wraps a source with a constant drift and inflated innovation scale.

    Used to inject a controlled distribution shift when exercising the
    corrector.  ``noise_scale`` applies only where the inner source exposes
    its (mean, innovation) decomposition via ``propose_parts``.
    """

    def __init__(self, inner, drift, noise_scale=1.0):
        if noise_scale < 1.0:
            raise ValueError("noise_scale must be at least 1")
        self.inner = inner
        self.drift = as_float_vector(drift, dim=inner.dims, name="drift")
        self.noise_scale = float(noise_scale)
        self.metadata = {
            "drift": self.drift.tolist(),
            "noise_scale": self.noise_scale,
            "inner": type(inner).__name__,
        }

    @property
    def dims(self):
        return self.inner.dims

    @property
    def context_len(self):
        return self.inner.context_len

    def propose(self, context, rng):
        parts = getattr(self.inner, "propose_parts", None)
        if parts is not None:
            mean, innovation = parts(context, rng)
            return mean + self.noise_scale * innovation + self.drift
        return self.inner.propose(context, rng) + self.drift

    def on_step(self, index):
        hook = getattr(self.inner, "on_step", None)
        if hook is not None:
            hook(index)


class ReplaySource:
    """Plays back a fixed series: the proposal for step k is row k.

    The oracle source for exercising the corrector's identity limit; relies
    on the driver's ``on_step`` notifications to know the current position.
    """

    context_len = 1

    def __init__(self, values):
        self.values = as_float_matrix(values, "values")
        self.dims = self.values.shape[1]
        self._step = 0

    def on_step(self, index):
        if not 0 <= index < self.values.shape[0]:
            raise IndexError(f"step {index} outside replayed range")
        self._step = index

    def propose(self, context, rng):
        del context, rng
        return self.values[self._step].copy()


def rollout(source, warm_start, length, seed):
    """Free-running autoregressive rollout, warm-started with real values.

    The first ``len(warm_start)`` output rows are the warm start itself;
    later rows are proposals conditioned on the rolling synthetic history.
    Proposal draws use the same per-step streams as the correction loop.
    """
    warm = as_float_matrix(warm_start, "warm_start")
    d = source.dims
    if warm.shape[1] != d:
        raise DimensionMismatch(
            f"warm_start has width {warm.shape[1]}, source emits {d}"
        )
    p = source.context_len
    if warm.shape[0] < p:
        raise ContextTooShort(
            f"warm_start has {warm.shape[0]} rows, source needs {p}"
        )
    if length < warm.shape[0]:
        raise ValueError("length must be at least the warm start length")
    out = np.empty((length, d))
    w = warm.shape[0]
    out[:w] = warm
    for k in range(w, length):
        hook = getattr(source, "on_step", None)
        if hook is not None:
            hook(k)
        q = source.propose(out[k - p : k], step_stream(seed, k))
        q = as_float_vector(q, dim=d, name="proposal")
        out[k] = q
    return out
