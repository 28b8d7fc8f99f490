"""Fidelity metrics comparing a real series against a synthetic one:
autocorrelation, skewness, kurtosis errors, R-squared, a discriminative
score from a post-hoc classifier, a train-on-synthetic-test-on-real
predictive score, and PCA plot data.

Moment-based metrics use population (divide-by-T) conventions throughout;
kurtosis is raw (a Gaussian scores 3).
"""

from dataclasses import asdict, dataclass

import numpy as np

from .datasets import sliding_windows
from .exceptions import (
    SeriesTooShort,
    TooFewPoints,
    TooFewWindows,
    ZeroVariance,
)
from .validation import as_float_matrix


@dataclass(frozen=True)
class MetricsConfig:
    lags: int = 32
    window_len: int = 32
    window_stride: int = 1
    classifier_epochs: int = 300
    classifier_lr: float = 0.1
    classifier_l2: float = 1e-4
    holdout: float = 0.2
    predictor_lag: int = 16
    ridge_lambda: float = 1e-3
    seed: int = 0


@dataclass
class PcaProjection:
    real_coords: np.ndarray
    gen_coords: np.ndarray
    explained_variance_ratio: np.ndarray


@dataclass
class MetricsReport:
    """The six scores with per-dimension breakdowns and plot-data sidecars."""

    acf_error: float
    skew_error: float
    kurt_error: float
    r2: float
    discriminative: float
    predictive: float
    per_dim: dict
    config: MetricsConfig
    acf_real: np.ndarray = None
    acf_gen: np.ndarray = None
    pca: PcaProjection = None

    def to_json_dict(self):
        return {
            "acf_error": self.acf_error,
            "skew_error": self.skew_error,
            "kurt_error": self.kurt_error,
            "r2": self.r2,
            "discriminative": self.discriminative,
            "predictive": self.predictive,
            "per_dim": self.per_dim,
            "config": asdict(self.config),
        }


def acf(x, lags):
    """Biased autocorrelation estimate at lags 1..lags (divide by T and by
    the population variance)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    T = x.shape[0]
    if lags < 1:
        raise ValueError("lags must be at least 1")
    if T <= lags:
        raise TooFewPoints(f"need more than {lags} points, got {T}")
    centered = x - x.mean()
    variance = (centered * centered).mean()
    if variance == 0.0:
        raise ZeroVariance("autocorrelation undefined for a constant series")
    out = np.empty(lags)
    for k in range(1, lags + 1):
        out[k - 1] = (centered[:-k] * centered[k:]).mean() / variance
    return out


def acf_matrix(series, lags):
    values = as_float_matrix(series, "series")
    return np.column_stack([acf(values[:, i], lags) for i in range(values.shape[1])])


def acf_error(real, gen, lags, per_dim=False):
    """Mean absolute gap between real and generated autocorrelations over
    lags 1..lags, computed per dimension and averaged."""
    a = acf_matrix(real, lags)
    b = acf_matrix(gen, lags)
    if a.shape[1] != b.shape[1]:
        raise ValueError("real and generated series must share dimensionality")
    dims = np.abs(a - b).mean(axis=0)
    return (float(dims.mean()), dims) if per_dim else float(dims.mean())


def _standardized_moment(values, order):
    centered = values - values.mean(axis=0)
    sigma = values.std(axis=0)
    if (sigma == 0.0).any():
        raise ZeroVariance("moment undefined for a constant dimension")
    return (centered**order).mean(axis=0) / sigma**order


def skewness_error(real, gen, per_dim=False):
    a = _standardized_moment(as_float_matrix(real), 3)
    b = _standardized_moment(as_float_matrix(gen), 3)
    dims = np.abs(a - b)
    return (float(dims.mean()), dims) if per_dim else float(dims.mean())


def kurtosis_error(real, gen, per_dim=False):
    a = _standardized_moment(as_float_matrix(real), 4)
    b = _standardized_moment(as_float_matrix(gen), 4)
    dims = np.abs(a - b)
    return (float(dims.mean()), dims) if per_dim else float(dims.mean())


def r2_score(real, gen, per_dim=False):
    """1 - SSres/SStot per dimension with index-aligned values, averaged.

    Can be negative when the generated series explains less variance than
    the real mean does.
    """
    y = as_float_matrix(real, "real")
    yhat = as_float_matrix(gen, "gen")
    if y.shape != yhat.shape:
        raise ValueError(f"shape mismatch: real {y.shape} vs gen {yhat.shape}")
    ss_tot = ((y - y.mean(axis=0)) ** 2).sum(axis=0)
    if (ss_tot == 0.0).any():
        raise ZeroVariance("R^2 undefined for a constant real dimension")
    ss_res = ((y - yhat) ** 2).sum(axis=0)
    dims = 1.0 - ss_res / ss_tot
    return (float(dims.mean()), dims) if per_dim else float(dims.mean())


# -- discriminative score ----------------------------------------------------


def window_features(windows):
    """Per-window feature vector: flattened values plus per-dimension mean,
    standard deviation, and lag-1 autocorrelation."""
    w = np.asarray(windows, dtype=np.float64)
    if w.ndim != 3:
        raise ValueError("windows must have shape (N, length, dims)")
    N = w.shape[0]
    mean = w.mean(axis=1)
    std = w.std(axis=1)
    centered = w - mean[:, None, :]
    var = (centered**2).mean(axis=1)
    cov1 = (centered[:, :-1, :] * centered[:, 1:, :]).mean(axis=1)
    lag1 = np.divide(cov1, var, out=np.zeros_like(cov1), where=var > 0)
    return np.hstack([w.reshape(N, -1), mean, std, lag1])


def fit_logistic_gd(X, y, lr=0.1, epochs=300, l2=1e-4):
    """Full-batch gradient descent on L2-regularized logistic loss.

    Returns (weights, bias).  Deterministic; callers standardize features.
    """
    w = np.zeros(X.shape[1])
    b = 0.0
    n = X.shape[0]
    for _ in range(epochs):
        z = X @ w + b
        prob = 1.0 / (1.0 + np.exp(-z))
        err = prob - y
        w -= lr * (X.T @ err / n + l2 * w)
        b -= lr * err.mean()
    return w, b


def fit_ridge_gd(X, Y, lam, lr, epochs):
    """Gradient-descent twin of the closed-form ridge solver, sharing the
    update structure of :func:`fit_logistic_gd`; used to cross-check the
    descent machinery against an exact solution."""
    W = np.zeros((X.shape[1], Y.shape[1]))
    b = np.zeros(Y.shape[1])
    n = X.shape[0]
    for _ in range(epochs):
        err = X @ W + b - Y
        W -= lr * (X.T @ err / n + lam * W)
        b -= lr * err.mean(axis=0)
    return W, b


def discriminative_score(
    real_windows, gen_windows, seed=0, epochs=300, lr=0.1, l2=1e-4, holdout=0.2
):
    """|held-out accuracy - 0.5| of a logistic classifier on window features.

    Real and generated windows are split 80/20 separately (stratified), the
    classifier trains on the combined training folds, and the score comes
    from the held-out folds.  0 means indistinguishable, 0.5 means
    perfectly separable.
    """
    wr = np.asarray(real_windows, dtype=np.float64)
    wg = np.asarray(gen_windows, dtype=np.float64)
    if wr.shape[0] < 20 or wg.shape[0] < 20:
        raise TooFewWindows(
            f"need at least 20 windows per side, got {wr.shape[0]} real, "
            f"{wg.shape[0]} generated"
        )
    Xr = window_features(wr)
    Xg = window_features(wg)
    X = np.vstack([Xr, Xg])
    y = np.concatenate([np.ones(len(Xr)), np.zeros(len(Xg))])

    rng = np.random.default_rng(seed)
    idx_r = rng.permutation(len(Xr))
    idx_g = len(Xr) + rng.permutation(len(Xg))
    cut_r = int(round((1.0 - holdout) * len(Xr)))
    cut_g = int(round((1.0 - holdout) * len(Xg)))
    train = np.concatenate([idx_r[:cut_r], idx_g[:cut_g]])
    test = np.concatenate([idx_r[cut_r:], idx_g[cut_g:]])
    if test.size == 0:
        raise TooFewWindows("holdout fraction leaves no test windows")

    mu = X[train].mean(axis=0)
    sd = X[train].std(axis=0)
    sd[sd == 0.0] = 1.0
    Z = (X - mu) / sd

    w, b = fit_logistic_gd(Z[train], y[train], lr=lr, epochs=epochs, l2=l2)
    accuracy = float((((Z[test] @ w + b) > 0.0).astype(float) == y[test]).mean())
    return abs(accuracy - 0.5)


# -- predictive score ---------------------------------------------------------


def _lag_design(values, lag):
    T, d = values.shape
    if T <= lag:
        raise SeriesTooShort(f"need more than {lag} rows, got {T}")
    rows = T - lag
    X = np.empty((rows, lag * d))
    for j in range(lag):
        X[:, j * d : (j + 1) * d] = values[j : j + rows]
    return X, values[lag:]


def fit_ridge_closed(X, Y, lam):
    """Closed-form ridge with an unpenalized intercept."""
    mu_x = X.mean(axis=0)
    mu_y = Y.mean(axis=0)
    Xc = X - mu_x
    Yc = Y - mu_y
    gram = Xc.T @ Xc / X.shape[0] + lam * np.eye(X.shape[1])
    W = np.linalg.solve(gram, Xc.T @ Yc / X.shape[0])
    b = mu_y - mu_x @ W
    return W, b


def predictive_score(real, gen, lag=16, ridge_lambda=1e-3, seed=0):
    """Train-on-synthetic-test-on-real one-step prediction error.

    A ridge predictor (inputs: the last ``lag`` values flattened) is fit on
    the generated series and evaluated as the mean squared one-step error on
    the real series.  Closed-form fit, so ``seed`` only tags the report.
    """
    del seed
    yv = as_float_matrix(real, "real")
    gv = as_float_matrix(gen, "gen")
    Xg, Yg = _lag_design(gv, lag)
    W, b = fit_ridge_closed(Xg, Yg, ridge_lambda)
    Xr, Yr = _lag_design(yv, lag)
    err = Xr @ W + b - Yr
    return float((err**2).sum(axis=1).mean())


# -- PCA ----------------------------------------------------------------------


def pca_projection(real_windows, gen_windows):
    """Project both window sets onto the top-2 components of the real set.

    Components are fit on real windows only, with a deterministic sign
    convention (the largest-magnitude loading is positive).
    """
    wr = np.asarray(real_windows, dtype=np.float64)
    wg = np.asarray(gen_windows, dtype=np.float64)
    Xr = wr.reshape(wr.shape[0], -1)
    Xg = wg.reshape(wg.shape[0], -1)
    if Xr.shape[1] != Xg.shape[1]:
        raise ValueError("window shapes must match between real and generated")
    mu = Xr.mean(axis=0)
    centered = Xr - mu
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2]
    for i in range(comps.shape[0]):
        j = np.argmax(np.abs(comps[i]))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    total_var = (centered**2).sum()
    explained = (svals[:2] ** 2) / total_var if total_var > 0 else np.zeros(2)
    return PcaProjection(
        real_coords=centered @ comps.T,
        gen_coords=(Xg - mu) @ comps.T,
        explained_variance_ratio=explained,
    )


# -- assembly -----------------------------------------------------------------


def evaluate(real, gen, config=None):
    """All six metrics plus the PCA sidecar, one shared seed."""
    if isinstance(config, MetricsConfig):
        cfg = config
    else:
        cfg = MetricsConfig(**(config or {}))
    yv = as_float_matrix(real, "real")
    gv = as_float_matrix(gen, "gen")
    lags = min(cfg.lags, yv.shape[0] // 4)
    if lags < 1:
        raise TooFewPoints("series too short for any autocorrelation lag")

    acf_e, acf_dims = acf_error(yv, gv, lags, per_dim=True)
    skew_e, skew_dims = skewness_error(yv, gv, per_dim=True)
    kurt_e, kurt_dims = kurtosis_error(yv, gv, per_dim=True)
    r2, r2_dims = r2_score(yv, gv, per_dim=True)

    wr = sliding_windows(yv, cfg.window_len, cfg.window_stride)
    wg = sliding_windows(gv, cfg.window_len, cfg.window_stride)
    ds = discriminative_score(
        wr,
        wg,
        seed=cfg.seed,
        epochs=cfg.classifier_epochs,
        lr=cfg.classifier_lr,
        l2=cfg.classifier_l2,
        holdout=cfg.holdout,
    )
    ps = predictive_score(
        yv, gv, lag=cfg.predictor_lag, ridge_lambda=cfg.ridge_lambda, seed=cfg.seed
    )
    return MetricsReport(
        acf_error=acf_e,
        skew_error=skew_e,
        kurt_error=kurt_e,
        r2=r2,
        discriminative=ds,
        predictive=ps,
        per_dim={
            "acf_error": acf_dims.tolist(),
            "skew_error": skew_dims.tolist(),
            "kurt_error": kurt_dims.tolist(),
            "r2": r2_dims.tolist(),
        },
        config=cfg,
        acf_real=acf_matrix(yv, lags),
        acf_gen=acf_matrix(gv, lags),
        pca=pca_projection(wr, wg),
    )
