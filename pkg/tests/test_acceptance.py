"""Acceptance gate: one test per criterion, each printing a PASS line with
its measured values and wall time.  Run with ``pytest -s tests/test_acceptance.py``
to see the lines as they complete.
"""

import json
import statistics
import time

import numpy as np
import pytest
from click.testing import CliRunner
from scipy.integrate import solve_ivp

from tsmcmc import (
    BiasedSource,
    ConditionalModel,
    CorrectionConfig,
    DiscreteChain,
    LorenzConfig,
    MetricsConfig,
    Normalizer,
    RandomStream,
    ReplaySource,
    VarSource,
    acceptance_probability,
    build_mh_kernel,
    conditional_shift_bound,
    correct_series,
    detailed_balance_gap,
    evaluate,
    fit_diff_density,
    modified_acceptance_bias,
    rollout,
    simulate_lorenz,
    skewness_error,
    kurtosis_error,
    acf,
    predictive_score,
    stationarity_gap,
)
from tsmcmc.cli import main as cli_main
from tsmcmc.datasets import rk4_step


def check(name, passed, detail, elapsed):
    line = f"{'PASS' if passed else 'FAIL'}: {name} ({detail}) [{elapsed:.2f}s]"
    print(line)
    assert passed, line


def random_target(rng, n):
    p = rng.uniform(0.05, 1.0, size=n)
    return p / p.sum()


def random_symmetric_proposal(rng, n):
    A = rng.uniform(0.1, 1.0, size=(n, n))
    B = 0.5 * (A + A.T)
    m = B.sum(axis=1).max() * 1.05
    Q = B / m
    np.fill_diagonal(Q, Q.diagonal() + 1.0 - Q.sum(axis=1))
    return Q


@pytest.fixture(scope="module")
def lorenz_real():
    series = simulate_lorenz(LorenzConfig(steps=2000))
    return Normalizer().fit(series.values).transform(series.values)


def test_detailed_balance_of_built_kernels():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 21))
        chain = build_mh_kernel(random_target(rng, n), random_symmetric_proposal(rng, n))
        worst = max(worst, detailed_balance_gap(chain))
    elapsed = time.perf_counter() - t0
    check(
        "detailed balance of 100 randomized MH kernels",
        worst <= 1e-12 and elapsed < 1.0,
        f"max violation {worst:.2e}, budget 1e-12",
        elapsed,
    )


def test_stationarity_implication_and_cycle_counterexample():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 21))
        chain = build_mh_kernel(random_target(rng, n), random_symmetric_proposal(rng, n))
        worst = max(worst, stationarity_gap(chain))
    cycle = DiscreteChain(pi=np.full(3, 1.0 / 3.0), P=np.roll(np.eye(3), 1, axis=1))
    cycle_ok = stationarity_gap(cycle) <= 1e-12 and detailed_balance_gap(cycle) > 0.3
    elapsed = time.perf_counter() - t0
    check(
        "detailed balance implies stationarity; 3-cycle stationary without it",
        worst <= 1e-10 and cycle_ok and elapsed < 1.0,
        f"max L1 residual {worst:.2e}; cycle balance gap {detailed_balance_gap(cycle):.3f}",
        elapsed,
    )


def test_conditional_shift_tv_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    violations = 0
    for _ in range(1000):
        nx, ny = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        cond = rng.uniform(0.01, 1.0, size=(nx, ny))
        cond /= cond.sum(axis=1, keepdims=True)
        model = ConditionalModel(cond, random_target(rng, nx), random_target(rng, nx))
        b = rng.choice(ny, size=int(rng.integers(1, ny + 1)), replace=False)
        res = conditional_shift_bound(model, b)
        if res.tv < res.bound - 1e-12:
            violations += 1
    worked = conditional_shift_bound(
        ConditionalModel([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5], [0.9, 0.1]), [1]
    )
    exact = abs(worked.tv - 0.24) < 1e-12 and abs(worked.bound - 0.24) < 1e-12
    elapsed = time.perf_counter() - t0
    check(
        "total-variation lower bound over 1000 randomized conditional models",
        violations == 0 and exact and elapsed < 5.0,
        f"violations {violations}; worked case tv=bound={worked.tv:.2f}",
        elapsed,
    )


def test_acceptance_rule_calibration():
    t0 = time.perf_counter()
    gamma = acceptance_probability(0.1, 0.2, 1e-8)
    draws = RandomStream(123).uniform(size=10**5)
    freq = float((draws <= gamma).mean())
    sigma = float(np.sqrt(gamma * (1.0 - gamma) / 10**5))
    elapsed = time.perf_counter() - t0
    check(
        "empirical acceptance frequency within 3-sigma of gamma",
        abs(freq - gamma) <= 3 * sigma and elapsed < 1.0,
        f"gamma {gamma:.6f}, freq {freq:.6f}, 3sigma {3 * sigma:.6f}",
        elapsed,
    )


def test_identity_limit_reproduces_series_bit_exactly(lorenz_real):
    t0 = time.perf_counter()
    density = fit_diff_density(lorenz_real)
    run = correct_series(
        lorenz_real,
        ReplaySource(lorenz_real),
        density,
        CorrectionConfig(beta=1.0, seed=11),
    )
    exact = np.array_equal(run.corrected, lorenz_real)
    elapsed = time.perf_counter() - t0
    check(
        "beta=1 with a perfect proposal reproduces the series bit-exactly",
        exact,
        f"T={len(lorenz_real)}, acceptance {run.acceptance_rate:.3f}",
        elapsed,
    )


def test_correction_efficacy_directional(lorenz_real):
    # Biased VAR source: drift 0.1 of each dimension's std, innovations
    # inflated 1.5x.  Order 1 keeps the fitted innovations non-degenerate
    # (higher orders interpolate the deterministic trajectory to machine
    # precision, leaving the filter nothing to select among), and the
    # proposals condition on real history so the injected drift cannot
    # compound through the conditioning window.
    t0 = time.perf_counter()
    density = fit_diff_density(lorenz_real)
    drift = 0.1 * lorenz_real.std(axis=0)
    rows = []
    for seed in range(20):
        source = BiasedSource(
            VarSource(order=1).fit(lorenz_real), drift=drift, noise_scale=1.5
        )
        raw = rollout(source, lorenz_real[:16], len(lorenz_real), seed)
        run = correct_series(
            lorenz_real,
            source,
            density,
            CorrectionConfig(conditioning_mode="real", seed=seed),
        )
        mcfg = MetricsConfig(seed=seed)
        rows.append((evaluate(lorenz_real, raw, mcfg), evaluate(lorenz_real, run.corrected, mcfg)))

    acf_wins = sum(cor.acf_error < raw.acf_error for raw, cor in rows)
    acf_reduction = statistics.median(
        1.0 - cor.acf_error / raw.acf_error for raw, cor in rows
    )
    med = lambda side, name: statistics.median(getattr(r[side], name) for r in rows)
    ok = (
        acf_wins >= 18
        and acf_reduction >= 0.2
        and med(1, "skew_error") < med(0, "skew_error")
        and med(1, "kurt_error") < med(0, "kurt_error")
        and med(1, "r2") > med(0, "r2")
        and med(1, "discriminative") < med(0, "discriminative")
    )
    elapsed = time.perf_counter() - t0
    check(
        "correction beats raw rollout directionally over 20 seeds",
        ok and elapsed < 180.0,
        f"ACF wins {acf_wins}/20, median reduction {acf_reduction:.0%}, "
        f"skew {med(0, 'skew_error'):.3f}->{med(1, 'skew_error'):.3f}, "
        f"kurt {med(0, 'kurt_error'):.3f}->{med(1, 'kurt_error'):.3f}, "
        f"r2 {med(0, 'r2'):.3f}->{med(1, 'r2'):.3f}, "
        f"ds {med(0, 'discriminative'):.3f}->{med(1, 'discriminative'):.3f}",
        elapsed,
    )


def test_metric_identity_axiom(lorenz_real):
    t0 = time.perf_counter()
    report = evaluate(lorenz_real, lorenz_real, MetricsConfig(seed=0))
    baseline = predictive_score(lorenz_real, lorenz_real)
    ok = (
        report.acf_error == 0.0
        and report.skew_error == 0.0
        and report.kurt_error == 0.0
        and report.r2 == 1.0
        and report.discriminative <= 0.1
        and report.predictive == baseline
    )
    elapsed = time.perf_counter() - t0
    check(
        "identical series scores (0, 0, 0, 1, <=0.1, baseline)",
        ok,
        f"ds {report.discriminative:.3f}, ps {report.predictive:.5f}",
        elapsed,
    )


def test_metric_oracles():
    t0 = time.perf_counter()
    # AR(1) autocorrelation against the analytic phi^k curve
    r = np.random.default_rng(0)
    x = np.zeros(10**5)
    eps = r.normal(size=10**5)
    for t in range(1, 10**5):
        x[t] = 0.5 * x[t - 1] + eps[t]
    acf_gap = max(abs(acf(x, 5)[k - 1] - 0.5**k) for k in range(1, 6))

    skew_gap = abs(
        skewness_error(
            np.random.default_rng(11).exponential(1.0, size=10**6),
            np.random.default_rng(12).normal(size=10**6),
        )
        - 2.0
    )
    # uniform kurtosis is exactly 1.8, so the Gaussian gap is 1.2
    kurt_gap = abs(
        kurtosis_error(
            np.random.default_rng(13).normal(size=10**6),
            np.random.default_rng(14).uniform(-1.0, 1.0, size=10**6),
        )
        - 1.2
    )
    elapsed = time.perf_counter() - t0
    check(
        "moment and autocorrelation oracles",
        acf_gap < 0.02 and skew_gap < 0.05 and kurt_gap < 0.05 and elapsed < 10.0,
        f"acf gap {acf_gap:.4f}, skew gap {skew_gap:.4f}, kurt gap {kurt_gap:.4f}",
        elapsed,
    )


def test_integrator_against_reference_and_boundedness():
    t0 = time.perf_counter()

    def rhs(t, s):
        x, y, z = s
        return [10.0 * (y - x), x * (28.0 - z) - y, x * y - 8.0 / 3.0 * z]

    dt = 0.001
    mine = np.array(rk4_step((1.0, 1.0, 1.0), dt, 10.0, 28.0, 8.0 / 3.0))
    ref = solve_ivp(rhs, (0.0, dt), [1.0, 1.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-13)
    step_err = np.abs(mine - ref.y[:, -1]).max()

    traj = simulate_lorenz(LorenzConfig(steps=10**5))
    bound = np.abs(traj.values).max()
    elapsed = time.perf_counter() - t0
    check(
        "one RK4 step within 1e-9 of the adaptive reference; trajectory bounded",
        step_err < 1e-9 and bound < 100.0,
        f"step error {step_err:.2e} at dt={dt}, max |coordinate| {bound:.1f} over 1e5 steps",
        elapsed,
    )


def test_modified_rule_bias_symmetric_and_asymmetric():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst_sym = 0.0
    for _ in range(5):
        n = int(rng.integers(3, 12))
        pi = random_target(rng, n)
        worst_sym = max(
            worst_sym,
            modified_acceptance_bias(pi, random_symmetric_proposal(rng, n), epsilon=0.0),
        )
    asym_report = []
    for _ in range(3):
        n = 6
        pi = random_target(rng, n)
        Q = rng.uniform(0.05, 1.0, size=(n, n))
        Q /= Q.sum(axis=1, keepdims=True)
        asym_report.append(modified_acceptance_bias(pi, Q, epsilon=0.0))
    elapsed = time.perf_counter() - t0
    check(
        "ratio-only rule matches standard MH for symmetric proposals",
        worst_sym <= 1e-9,
        f"symmetric worst L1 {worst_sym:.2e}; asymmetric distances (reported) "
        + ", ".join(f"{d:.3f}" for d in asym_report),
        elapsed,
    )


def test_compare_is_byte_reproducible(tmp_path):
    t0 = time.perf_counter()
    runner = CliRunner()
    out = tmp_path / "out"
    cfg = {
        "dataset": {"kind": "lorenz", "steps": 240},
        "windowing": {"p": 8, "q": 16, "stride": 1},
        "source": {"kind": "var", "order": 1},
        "metrics": {
            "lags": 16,
            "window_len": 16,
            "window_stride": 4,
            "classifier_epochs": 60,
            "predictor_lag": 8,
        },
        "seeds": [0, 1],
        "out_dir": str(out),
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))

    tracked = [
        "config.echo.json",
        "summary.json",
        "report_0.json",
        "report_1.json",
        "raw_0.csv",
        "raw_1.csv",
        "corrected_0.csv",
        "corrected_1.csv",
        "acf_0.csv",
        "acf_1.csv",
        "pca_0.csv",
        "pca_1.csv",
    ]
    snapshots = []
    for _ in range(2):
        result = runner.invoke(cli_main, ["compare", "--config", str(cfg_path)])
        assert result.exit_code == 0, result.output
        snapshots.append({name: (out / name).read_bytes() for name in tracked})

    mismatched = [name for name in tracked if snapshots[0][name] != snapshots[1][name]]
    elapsed = time.perf_counter() - t0
    check(
        "compare reruns emit byte-identical reports",
        not mismatched,
        f"{len(tracked)} files compared" + (f"; mismatched: {mismatched}" if mismatched else ""),
        elapsed,
    )
