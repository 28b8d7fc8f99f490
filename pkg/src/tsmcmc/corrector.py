"""Sequential construction of a corrected synthetic series.

Proposals from a conditional source are filtered through an
epsilon-smoothed Metropolis-Hastings acceptance rule on first-order
difference discrepancies: the chain state is the last accepted discrepancy
vector, and the target density is the empirical distribution of one-step
changes in the real series.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, clone

from .core import RandomStream
from .density import fit_diff_density
from .exceptions import CorrectionStepError, DimensionMismatch, TsmcmcError
from .generators import DECISION_LANE, PROPOSAL_LANE
from .validation import as_float_matrix, as_float_vector

_CONDITIONING_MODES = ("synthetic", "real", "mixed")


@dataclass(frozen=True)
class CorrectionConfig:
    """Knobs of the correction loop.

    ``beta`` blends the synthetic-history and real-history components of the
    candidate discrepancy; ``epsilon`` smooths the acceptance denominator;
    ``max_retries`` bounds proposals per step (the best-gamma candidate is
    force-accepted when exhausted, which guarantees termination);
    ``conditioning_mode`` picks the history proposals are conditioned on.
    """

    beta: float = 0.5
    epsilon: float = 1e-8
    max_retries: int = 64
    conditioning_mode: str = "synthetic"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        if self.conditioning_mode not in _CONDITIONING_MODES:
            raise ValueError(
                f"conditioning_mode must be one of {_CONDITIONING_MODES}"
            )


@dataclass
class CorrectionRun:
    """A corrected series plus per-step diagnostics."""

    corrected: np.ndarray
    acceptance_rate: float
    retries_per_step: np.ndarray
    theta_trace: np.ndarray
    forced_accepts: int
    accepted: int
    proposed: int
    metadata: dict = field(default_factory=dict)

    def diagnostics_dict(self):
        """JSON-ready diagnostics (the corrected values travel as CSV)."""
        return {
            "acceptance_rate": self.acceptance_rate,
            "accepted": self.accepted,
            "proposed": self.proposed,
            "forced_accepts": self.forced_accepts,
            "retries_per_step": self.retries_per_step.tolist(),
            "metadata": self.metadata,
        }

    def diagnostics_json(self):
        return json.dumps(self.diagnostics_dict(), sort_keys=True)


def candidate_discrepancy(q_next, v, s_t, beta, first_step=False, s_0=None):
    """Discrepancy vector for a candidate next value.

    Ordinarily ``(1 - beta) * (q_next - v) + beta * (q_next - s_t)`` where
    ``v`` is the last appended synthetic value and ``s_t`` the real value one
    step behind the candidate, so both terms are one-step changes.  On the
    very first step (no synthetic value exists yet) it is ``q_next - s_0``.
    """
    q = as_float_vector(q_next, name="q_next")
    if first_step:
        s0 = as_float_vector(s_0, dim=q.shape[0], name="s_0")
        return q - s0
    vv = as_float_vector(v, dim=q.shape[0], name="v")
    st = as_float_vector(s_t, dim=q.shape[0], name="s_t")
    return (1.0 - beta) * (q - vv) + beta * (q - st)


def acceptance_probability(pi_new, pi_cur, epsilon):
    """min(pi_new / (pi_cur + epsilon), 1): the epsilon-smoothed acceptance.

    Deliberately omits the Hastings proposal-ratio term; the chains module
    measures the stationary-law bias this introduces.
    """
    if not (np.isfinite(pi_new) and np.isfinite(pi_cur)):
        raise ValueError("densities must be finite")
    if pi_new < 0.0 or pi_cur < 0.0:
        raise ValueError("densities must be nonnegative")
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    return min(pi_new / (pi_cur + epsilon), 1.0)


def _context_for_step(mode, step, history, real, p):
    """Conditioning window for the proposal at output position ``step``.

    ``synthetic``: rolling buffer of the last p appended values, seeded with
    the first p real values (teacher-forced warm start).  ``real``: the p
    real values immediately before ``step`` (the warm-start window while
    fewer exist).  ``mixed``: alternates per step.
    """
    if mode == "mixed":
        mode = "synthetic" if step % 2 == 0 else "real"
    if mode == "real":
        return real[step - p : step] if step >= p else real[:p]
    return history


def correct_series(series, source, density, config):
    """Run the correction loop over ``series`` and return a CorrectionRun.

    Produces a synthetic counterpart of every row: at step k the source
    proposes a candidate for position k, its discrepancy is scored against
    the fitted difference density, and a uniform draw decides acceptance.
    Rejections re-propose at the same position; after ``max_retries``
    rejections the best-gamma candidate is appended and counted in
    ``forced_accepts``.  Bit-reproducible given (config.seed, series, source,
    density).
    """
    real = as_float_matrix(series, "series")
    T, d = real.shape
    if T < 2:
        raise ValueError("series must have at least 2 rows")
    if getattr(source, "dims") != d:
        raise DimensionMismatch(
            f"source emits {source.dims} dims, series has {d}"
        )
    probe = density.density(np.zeros(d))  # raises DimensionMismatch early
    del probe

    p = max(int(source.context_len), 1)
    if T < p:
        raise ValueError(f"series shorter than the conditioning window ({p})")
    root = RandomStream(config.seed)

    theta = real[1] - real[0]
    pi_cur = density.density(theta)
    history = real[:p].copy()  # rolling synthetic context, warm-started real
    out = np.empty((T, d))
    theta_trace = np.empty((T, d))
    retries_per_step = np.zeros(T, dtype=np.int64)
    v = None
    accepted = 0
    proposed = 0
    forced = 0

    beta = config.beta
    for k in range(T):
        hook = getattr(source, "on_step", None)
        if hook is not None:
            hook(k)
        context = _context_for_step(config.conditioning_mode, k, history, real, p)
        proposal_rng = root.spawn(PROPOSAL_LANE, k)
        decision_rng = root.spawn(DECISION_LANE, k)
        s_prev = real[k - 1] if k else None

        best = None
        chosen = None
        for _ in range(config.max_retries):
            try:
                q = as_float_vector(
                    source.propose(context, proposal_rng), dim=d, name="proposal"
                )
                # candidate_discrepancy, inlined for the hot loop
                if k == 0:
                    theta_new = q - real[0]
                else:
                    theta_new = (1.0 - beta) * (q - v) + beta * (q - s_prev)
                pi_new = density.density(theta_new)
            except TsmcmcError as e:
                raise CorrectionStepError(k, e) from e
            proposed += 1
            gamma = acceptance_probability(pi_new, pi_cur, config.epsilon)
            if best is None or gamma > best[0]:
                best = (gamma, q, theta_new, pi_new)
            if decision_rng.uniform() <= gamma:
                accepted += 1
                chosen = (q, theta_new, pi_new)
                break
            retries_per_step[k] += 1
        if chosen is None:
            forced += 1
            chosen = best[1:]

        q, theta, pi_cur = chosen
        v = q
        out[k] = q
        theta_trace[k] = theta
        history = np.vstack([history[1:], q]) if p > 1 else q[None, :]

    return CorrectionRun(
        corrected=out,
        acceptance_rate=accepted / proposed if proposed else 0.0,
        retries_per_step=retries_per_step,
        theta_trace=theta_trace,
        forced_accepts=forced,
        accepted=accepted,
        proposed=proposed,
        metadata={
            "beta": config.beta,
            "epsilon": config.epsilon,
            "max_retries": config.max_retries,
            "conditioning_mode": config.conditioning_mode,
            "seed": config.seed,
            "series_length": T,
            "dims": d,
            "density": type(density).__name__,
            "alignment": "output row k mirrors input row k; the real value "
            "consumed by the discrepancy at step k is row k-1",
            "joint_density": "product of per-dimension marginals",
        },
    )


class MetropolisCorrector(BaseEstimator):
    """Estimator-style front end: fit the difference density on the real
    series, then correct proposal sources against it.

    ``density`` is a density kind name or an unfitted density estimator
    instance (cloned and fit on the series).
    """

    def __init__(
        self,
        density="gaussian_kde",
        beta=0.5,
        epsilon=1e-8,
        max_retries=64,
        conditioning_mode="synthetic",
        seed=0,
    ):
        self.density = density
        self.beta = beta
        self.epsilon = epsilon
        self.max_retries = max_retries
        self.conditioning_mode = conditioning_mode
        self.seed = seed

    def fit(self, X, y=None):
        values = as_float_matrix(X, "X")
        if isinstance(self.density, str):
            self.density_ = fit_diff_density(values, kind=self.density)
        else:
            self.density_ = clone(self.density).fit(values)
        self.real_values_ = values
        return self

    def correct(self, source):
        if not hasattr(self, "density_"):
            raise RuntimeError("MetropolisCorrector is not fitted; call fit first")
        config = CorrectionConfig(
            beta=self.beta,
            epsilon=self.epsilon,
            max_retries=self.max_retries,
            conditioning_mode=self.conditioning_mode,
            seed=self.seed,
        )
        return correct_series(self.real_values_, source, self.density_, config)
