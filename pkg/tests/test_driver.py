import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from stable_sde.driver import (
    IncrementGrid,
    ReplicationSeed,
    StableParams,
    coarsen,
    increment_matrix,
    integrated_density,
    integrated_density_sup,
    sample_increments,
    sample_standard_stable,
    transition_density,
)
from stable_sde.errors import AlignmentError, GridError, ParameterError


def ecf(x, xi):
    c = np.cos(xi * x)
    return c.mean(), c.std(ddof=1) / math.sqrt(c.size)


class TestSampler:
    def test_char_function_at_one(self):
        x = sample_standard_stable(np.random.default_rng(1), 1.5, 100_000)
        m, se = ecf(x, 1.0)
        assert abs(m - math.exp(-1.0)) <= 3 * se

    def test_char_function_at_zero_is_one(self):
        x = sample_standard_stable(np.random.default_rng(2), 1.3, 1000)
        assert np.cos(0.0 * x).mean() == 1.0

    def test_median_is_zero(self):
        x = sample_standard_stable(np.random.default_rng(3), 1.5, 100_000)
        # asymptotic s.e. of the median: 1 / (2 p(0) sqrt(N))
        se = 1.0 / (2 * transition_density(1.0, 0.0, 1.5) * math.sqrt(x.size))
        assert abs(np.median(x)) <= 3 * se

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5, 2.5, float("nan")])
    def test_alpha_range(self, alpha):
        with pytest.raises(ParameterError):
            sample_standard_stable(np.random.default_rng(0), alpha, 3)

    def test_small_alpha_tail_matches_density(self):
        x = sample_standard_stable(np.random.default_rng(4), 1.2, 200_000)
        # P(|Z| > 3) from the density
        p = 1.0 - 2 * integrate.quad(lambda a: transition_density(1.0, a, 1.2), 0, 3)[0]
        emp = np.mean(np.abs(x) > 3)
        assert abs(emp - p) <= 4 * math.sqrt(p * (1 - p) / x.size)


class TestSeeds:
    def test_determinism(self):
        times = np.linspace(0, 1, 9)
        a = sample_increments(ReplicationSeed(7, 3), StableParams(1.5), times)
        b = sample_increments(ReplicationSeed(7, 3), StableParams(1.5), times)
        assert np.array_equal(a.dZ, b.dZ)

    def test_degenerate_grid(self):
        a = sample_increments(ReplicationSeed(7, 0), StableParams(1.5), [0.0, 1.0])
        b = sample_increments(ReplicationSeed(7, 0), StableParams(1.5), [0.0, 1.0])
        assert len(a) == 1 and a.dZ[0] == b.dZ[0]

    def test_distinct_indices_differ(self):
        times = np.linspace(0, 1, 5)
        a = sample_increments(ReplicationSeed(7, 0), StableParams(1.5), times)
        b = sample_increments(ReplicationSeed(7, 1), StableParams(1.5), times)
        assert not np.array_equal(a.dZ, b.dZ)

    def test_matrix_rows_match_single_draws(self):
        times = np.linspace(0, 1, 17)
        M = increment_matrix(11, [4, 0, 9], times, 1.7)
        for row, idx in zip(M, [4, 0, 9]):
            single = sample_increments(ReplicationSeed(11, idx), StableParams(1.7), times)
            assert np.array_equal(row, single.dZ)

    @pytest.mark.parametrize("master,index", [(-1, 0), (2**64, 0), (0, -1)])
    def test_bad_seed(self, master, index):
        with pytest.raises(ParameterError):
            ReplicationSeed(master, index)


class TestIncrements:
    def test_single_interval_char_function(self):
        T = 0.5
        dz = increment_matrix(5, range(100_000), [0.0, T], 1.5)[:, 0]
        for xi in (0.5, 2.0):
            m, se = ecf(dz, xi)
            assert abs(m - math.exp(-T * xi**1.5)) <= 3 * se

    def test_two_halves_equal_one_interval(self):
        two = increment_matrix(21, range(20_000), [0.0, 0.5, 1.0], 1.5).sum(axis=1)
        one = increment_matrix(22, range(20_000), [0.0, 1.0], 1.5)[:, 0]
        assert stats.ks_2samp(two, one).pvalue > 0.01

    @pytest.mark.parametrize("times", [[0.0, 0.5, 0.5, 1.0], [0.1, 1.0], [0.0, 1.0, 0.5], [0.0]])
    def test_bad_grid(self, times):
        with pytest.raises(GridError):
            sample_increments(ReplicationSeed(0), StableParams(1.5), times)

    def test_grid_must_end_at_T(self):
        with pytest.raises(GridError):
            sample_increments(ReplicationSeed(0), StableParams(1.5, T=2.0), [0.0, 1.0])

    def test_csv(self):
        g = IncrementGrid([0.0, 0.5, 1.0], [0.25, -1.0])
        buf = io.StringIO()
        g.to_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t_start,t_end,dZ"
        assert lines[2] == "0.5,1.0,-1.0"

    def test_path_starts_at_zero(self):
        g = IncrementGrid([0.0, 0.5, 1.0], [0.25, -1.0])
        assert np.array_equal(g.path, [0.0, 0.25, -0.75])

    def test_length_mismatch(self):
        with pytest.raises(GridError):
            IncrementGrid([0.0, 1.0], [1.0, 2.0])

    def test_params(self):
        with pytest.raises(ParameterError):
            StableParams(1.5, T=0.0)
        with pytest.raises(ParameterError):
            StableParams(2.0)


class TestCoarsen:
    def test_identity(self):
        fine = sample_increments(ReplicationSeed(3), StableParams(1.5), np.linspace(0, 1, 9))
        same = coarsen(fine, fine.times)
        assert np.array_equal(same.dZ, fine.dZ) and np.array_equal(same.times, fine.times)

    def test_aggregation(self):
        fine = IncrementGrid(np.linspace(0, 1, 5), [1.0, 2.0, 3.0, 4.0])
        c = coarsen(fine, [0.0, 0.5, 1.0])
        assert np.array_equal(c.dZ, [3.0, 7.0])

    def test_not_subset(self):
        fine = IncrementGrid(np.linspace(0, 1, 5), [1.0, 2.0, 3.0, 4.0])
        with pytest.raises(AlignmentError):
            coarsen(fine, [0.0, 0.3, 1.0])
        with pytest.raises(AlignmentError):
            coarsen(fine, [0.0, 0.5])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32), st.lists(st.booleans(), min_size=15, max_size=15))
    def test_shared_values_exact(self, seed, keep):
        times = np.linspace(0, 1, 17)
        fine = sample_increments(ReplicationSeed(seed), StableParams(1.4), times)
        mask = np.array([True, *keep, True])
        c = coarsen(fine, times[mask])
        assert np.array_equal(c.path, fine.path[mask])
        assert math.isclose(c.dZ.sum(), fine.dZ.sum(), rel_tol=1e-12, abs_tol=1e-12 * np.abs(fine.dZ).sum())


class TestDensity:
    @pytest.mark.parametrize("s", [0.5, 1.0])
    @pytest.mark.parametrize("a", [0.0, 1.0])
    def test_gaussian_and_cauchy(self, s, a):
        gauss = math.exp(-a * a / (4 * s)) / math.sqrt(4 * math.pi * s)
        cauchy = s / (math.pi * (s * s + a * a))
        assert math.isclose(transition_density(s, a, 2.0), gauss, rel_tol=1e-6)
        assert math.isclose(transition_density(s, a, 1.0), cauchy, rel_tol=1e-6)

    def test_spot_values(self):
        # 1 / sqrt(4 pi) at s = 1
        assert math.isclose(transition_density(1.0, 0.0, 2.0), 0.2820948, rel_tol=1e-6)
        assert math.isclose(transition_density(1.0, 0.0, 1.0), 0.318310, rel_tol=1e-5)

    def test_even_and_vectorized(self):
        a = np.array([-2.0, -0.3, 0.3, 2.0])
        v = transition_density(0.7, a, 1.5)
        assert v.shape == a.shape
        assert v[0] == v[3] and v[1] == v[2]
        assert np.all(v > 0)

    @pytest.mark.parametrize("s,alpha", [(0.5, 1.5), (1.0, 1.2), (2.0, 1.8)])
    def test_normalization(self, s, alpha):
        mass = 2 * integrate.quad(lambda a: transition_density(s, a, alpha), 0, 200, limit=200)[0]
        assert 0.99 <= mass <= 1.0 + 1e-9

    def test_bad_time(self):
        with pytest.raises(ParameterError):
            transition_density(0.0, 0.0, 1.5)

    def test_integral_gaussian(self):
        S = 2.0
        assert math.isclose(integrated_density(0.0, S, 2.0), math.sqrt(S / math.pi), rel_tol=1e-7)

    def test_sup_at_zero_and_closed_form(self):
        alpha, M, K, T = 1.5, 10.0, 2.0, 1.0
        sup, info = integrated_density_sup(alpha, M, K, T, full_output=True)
        assert info["max_at_zero"] and info["monotone"]
        S = K**alpha * T
        closed = math.gamma(1 + 1 / alpha) / math.pi * S ** (1 - 1 / alpha) / (1 - 1 / alpha)
        assert math.isclose(sup, closed, rel_tol=1e-8)

    def test_sup_increasing_in_T(self):
        a = integrated_density_sup(1.5, 2.0, 1.0, 0.5, n_grid=4)
        b = integrated_density_sup(1.5, 2.0, 1.0, 1.0, n_grid=4)
        assert b > a

    def test_sup_bad_inputs(self):
        with pytest.raises(ParameterError):
            integrated_density_sup(1.5, -1.0, 1.0, 1.0)
