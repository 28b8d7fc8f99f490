import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from tsmcmc import LorenzConfig, TimeSeries, load_csv, make_windows, simulate_lorenz, write_csv
from tsmcmc.datasets import rk4_step, sliding_windows
from tsmcmc.exceptions import (
    MissingColumn,
    NonFiniteState,
    NonFiniteValue,
    ParseError,
    SeriesTooShort,
)

CANON = dict(sigma=10.0, rho=28.0, beta=8.0 / 3.0)


def reference_step(state, dt, sigma=10.0, rho=28.0, beta=8.0 / 3.0):
    """Independent high-precision oracle: adaptive DOP853 integration."""

    def rhs(t, s):
        x, y, z = s
        return [sigma * (y - x), x * (rho - z) - y, x * y - beta * z]

    sol = solve_ivp(rhs, (0.0, dt), list(state), method="DOP853", rtol=1e-13, atol=1e-13)
    return sol.y[:, -1]


class TestLorenz:
    def test_single_step_matches_oracle_small_dt(self):
        mine = np.array(rk4_step((1.0, 1.0, 1.0), 0.001, **CANON))
        ref = reference_step((1.0, 1.0, 1.0), 0.001)
        assert np.abs(mine - ref).max() < 1e-9

    def test_single_step_error_at_default_dt(self):
        # At dt=0.01 the one-step truncation error is ~2e-6; anything much
        # larger would indicate a wrong tableau.
        mine = np.array(rk4_step((1.0, 1.0, 1.0), 0.01, **CANON))
        ref = reference_step((1.0, 1.0, 1.0), 0.01)
        assert np.abs(mine - ref).max() < 1e-5

    def test_fifth_order_one_step_convergence(self):
        errs = []
        for dt in (0.01, 0.005):
            mine = np.array(rk4_step((1.0, 1.0, 1.0), dt, **CANON))
            errs.append(np.abs(mine - reference_step((1.0, 1.0, 1.0), dt)).max())
        ratio = errs[0] / errs[1]
        assert 20.0 < ratio < 45.0  # local error scales like dt^5 (ratio 32)

    def test_zero_rho_fixed_point(self):
        cfg = LorenzConfig(steps=50, rho=0.0, x0=(0.0, 0.0, 0.0), transient=0)
        out = simulate_lorenz(cfg)
        assert np.array_equal(out.values, np.zeros((50, 3)))

    def test_deterministic(self):
        cfg = LorenzConfig(steps=200)
        a = simulate_lorenz(cfg)
        b = simulate_lorenz(cfg)
        assert np.array_equal(a.values, b.values)

    def test_transient_discards_prefix(self):
        long = simulate_lorenz(LorenzConfig(steps=60, transient=0))
        late = simulate_lorenz(LorenzConfig(steps=10, transient=50))
        assert np.allclose(long.values[50:], late.values, atol=0, rtol=0)

    def test_bounded_on_attractor(self):
        out = simulate_lorenz(LorenzConfig(steps=10**4))
        assert np.abs(out.values).max() < 100.0

    def test_divergence_raises_with_step_index(self):
        cfg = LorenzConfig(steps=10, rho=1e8, dt=0.05, transient=0)
        with pytest.raises(NonFiniteState) as err:
            simulate_lorenz(cfg)
        assert err.value.step is not None

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LorenzConfig(steps=10, dt=0.06)
        with pytest.raises(ValueError):
            LorenzConfig(steps=1)
        with pytest.raises(ValueError):
            LorenzConfig(steps=10, transient=-1)


class TestWindows:
    def test_count_for_long_series(self, rng):
        s = rng.normal(size=(100, 2))
        assert len(make_windows(s, p=16, q=32, stride=1)) == 53

    def test_single_window_boundary(self, rng):
        s = rng.normal(size=(48, 1))
        pairs = make_windows(s, p=16, q=32, stride=1)
        assert len(pairs) == 1
        assert np.array_equal(np.vstack([pairs[0].past, pairs[0].future]), s)

    def test_too_short(self, rng):
        with pytest.raises(SeriesTooShort):
            make_windows(rng.normal(size=(47, 1)), p=16, q=32, stride=1)

    def test_windows_are_contiguous_slices(self, rng):
        s = rng.normal(size=(80, 3))
        for pair in make_windows(s, p=5, q=7, stride=3):
            joined = np.vstack([pair.past, pair.future])
            assert np.array_equal(joined, s[pair.origin_index : pair.origin_index + 12])

    @given(
        T=st.integers(2, 300),
        p=st.integers(1, 20),
        q=st.integers(1, 40),
        stride=st.integers(1, 10),
    )
    def test_count_matches_closed_form(self, T, p, q, stride):
        s = np.arange(2 * T, dtype=float).reshape(T, 2)
        if T < p + q:
            with pytest.raises(SeriesTooShort):
                make_windows(s, p=p, q=q, stride=stride)
        else:
            assert len(make_windows(s, p=p, q=q, stride=stride)) == (T - p - q) // stride + 1

    def test_sliding_windows_shape(self, rng):
        s = rng.normal(size=(40, 2))
        w = sliding_windows(s, 8, stride=4)
        assert w.shape == (9, 8, 2)
        assert np.array_equal(w[1], s[4:12])


class TestCsv:
    def test_reads_literals(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b\n1.5,2\n-3,4.25\n0,1\n")
        s = load_csv(path, ["a", "b"])
        assert np.array_equal(s.values, [[1.5, 2.0], [-3.0, 4.25], [0.0, 1.0]])
        assert s.dim_names == ("a", "b")

    def test_column_order_follows_schema(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b\n1,2\n3,4\n")
        s = load_csv(path, ["b", "a"])
        assert np.array_equal(s.values, [[2.0, 1.0], [4.0, 3.0]])

    def test_nan_cell_reports_coordinates(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a\n1\nNaN\n3\n")
        with pytest.raises(NonFiniteValue) as err:
            load_csv(path, ["a"])
        assert err.value.row == 1 and err.value.column == "a"

    def test_unparseable_cell_reports_coordinates(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b\n1,2\n3,oops\n")
        with pytest.raises(ParseError) as err:
            load_csv(path, ["a", "b"])
        assert err.value.row == 1 and err.value.column == "b"

    def test_missing_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a\n1\n2\n")
        with pytest.raises(MissingColumn):
            load_csv(path, ["nope"])

    def test_timestamp_column(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("t,v\n0.5,1\n1.5,2\n")
        s = load_csv(path, ["v"], timestamp_column="t")
        assert s.timestamps == (0.5, 1.5)

    def test_string_timestamps_kept(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("t,v\n2016-07-01,1\n2016-07-02,2\n")
        s = load_csv(path, ["v"], timestamp_column="t")
        assert s.timestamps == ("2016-07-01", "2016-07-02")

    def test_write_read_round_trip(self, tmp_path, rng):
        s = TimeSeries(rng.normal(size=(20, 3)), dim_names=("x", "y", "z"))
        path = tmp_path / "out.csv"
        write_csv(s, path)
        back = load_csv(path, ["x", "y", "z"])
        assert np.array_equal(back.values, s.values)

    def test_rewrite_is_byte_identical(self, tmp_path, rng):
        s = TimeSeries(rng.normal(size=(20, 2)))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(s, a)
        write_csv(s, b)
        assert a.read_bytes() == b.read_bytes()
