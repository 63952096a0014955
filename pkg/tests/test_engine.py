import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stable_sde.catalog import build_coefficient
from stable_sde.driver import IncrementGrid, ReplicationSeed, StableParams, increment_matrix, sample_increments
from stable_sde.engine import (
    CauchyBudget,
    Partition,
    PathGrid,
    cauchy_construction,
    coupled_batch,
    coupled_run,
    em_batch,
    eta,
    euler_maruyama,
    monitor_batch,
)
from stable_sde.errors import AlignmentError, GridError, ParameterError

EPS = np.finfo(float).eps


class TestPartition:
    def test_uniform_and_dyadic(self):
        p = Partition.uniform(1.0, 4)
        assert len(p) == 4 and p.mesh == 0.25 and p.T == 1.0
        assert Partition.dyadic(1.0, 2) == p
        assert hash(Partition.dyadic(1.0, 2)) == hash(p)
        assert Partition.from_mesh(2.0, 0.5) == Partition.uniform(2.0, 4)

    def test_bad(self):
        with pytest.raises(GridError):
            Partition.uniform(1.0, 0)
        with pytest.raises(GridError):
            Partition.from_mesh(1.0, 0.3)
        with pytest.raises(GridError):
            Partition([0.0, 0.5, 0.4, 1.0])

    def test_nesting(self):
        assert Partition.dyadic(1.0, 2).is_nested_in(Partition.dyadic(1.0, 4))
        assert not Partition.dyadic(1.0, 4).is_nested_in(Partition.dyadic(1.0, 2))
        assert not Partition.uniform(1.0, 3).is_nested_in(Partition.uniform(1.0, 4))


class TestEta:
    def test_examples(self):
        p = Partition.uniform(1.0, 4)
        assert eta(p, 0.0) == 0.0
        assert eta(p, 0.3) == 0.25
        assert eta(p, 0.25) == 0.25
        assert eta(p, 0.9999) == 0.75
        assert eta(p, 1.0) == 1.0
        assert np.array_equal(eta(p, np.array([0.1, 0.6])), [0.0, 0.5])

    @pytest.mark.parametrize("t", [-0.1, 1.1, float("nan")])
    def test_outside(self, t):
        with pytest.raises(ParameterError):
            eta(Partition.uniform(1.0, 4), t)


class TestScheme:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31), st.integers(0, 12), st.floats(-3, 3), st.floats(-5, 5))
    def test_constant_exactness_plain_callable(self, seed, level, c, x0):
        # no declared constant: the recursion itself must telescope
        times = Partition.dyadic(1.0, level).times
        drv = sample_increments(ReplicationSeed(seed), StableParams(1.5), times)
        X = em_batch(lambda t, x: c + 0 * x, x0, times, drv.dZ[None, :])[0]
        exact = x0 + c * drv.path
        k = np.arange(times.size)
        scale = abs(x0) + abs(c) * np.concatenate(([0.0], np.cumsum(np.abs(drv.dZ))))
        assert np.all(np.abs(X - exact) <= 4 * k * EPS * scale + 0.0)

    def test_declared_constant_is_exact(self):
        drv = sample_increments(ReplicationSeed(3), StableParams(1.5), Partition.dyadic(1.0, 10).times)
        c = build_coefficient({"id": "constant", "value": 0.8}, 1.5)
        path = euler_maruyama(c, 0.5, drv)
        assert np.array_equal(path.values, 0.5 + 0.8 * drv.path)

    def test_zero_coefficient(self):
        dZ = increment_matrix(1, range(5), Partition.dyadic(1.0, 6).times, 1.5)
        X = em_batch(lambda t, x: 0 * x, 2.0, Partition.dyadic(1.0, 6).times, dZ)
        assert np.all(X == 2.0)

    def test_one_step(self):
        X = em_batch(lambda t, x: 1 + x**2, 1.0, [0.0, 1.0], [[0.5]])
        assert X[0].tolist() == [1.0, 2.0]

    def test_sigma_frozen_at_left_knot(self):
        sig = lambda t, x: np.where(t < 0.5, 1.0, 3.0) + 0 * x
        X = em_batch(sig, 0.0, [0.0, 0.5, 1.0], [[1.0, 1.0]])
        assert X[0].tolist() == [0.0, 1.0, 4.0]

    def test_alignment(self):
        with pytest.raises(AlignmentError):
            em_batch(1.0, 0.0, [0.0, 0.5, 1.0], [[1.0]])
        drv = IncrementGrid([0.0, 0.5, 1.0], [1.0, 2.0])
        with pytest.raises(AlignmentError):
            euler_maruyama(1.0, 0.0, drv, partition=Partition.uniform(1.0, 4))

    def test_x0_bound(self):
        with pytest.raises(ParameterError):
            em_batch(1.0, 3.0, [0.0, 1.0], [[1.0]], M0=2.0)

    def test_bounded_coefficient_gives_finite_paths(self):
        times = Partition.dyadic(1.0, 10).times
        dZ = increment_matrix(4, range(200), times, 1.2)
        X = em_batch(build_coefficient("holder", 1.2), 0.0, times, dZ)
        assert np.all(np.isfinite(X))
        # |X_k - x0| <= M1 * sum |dZ|
        assert np.all(np.abs(X[:, -1]) <= 2.0 * np.abs(dZ).sum(axis=1) + 1e-12)

    def test_path_grid(self):
        pg = PathGrid(np.array([0.0, 1.0]), np.array([1.0, 2.0]), 1.0)
        with pytest.raises(ValueError):
            pg.values[0] = 5.0
        buf = io.StringIO()
        pg.to_csv(buf)
        assert buf.getvalue().splitlines() == ["t,X", "0.0,1.0", "1.0,2.0"]
        with pytest.raises(GridError):
            PathGrid(np.array([0.0, 1.0]), np.array([0.0, 2.0]), 1.0)


class TestCoupling:
    def setup_method(self):
        self.fine = sample_increments(ReplicationSeed(9), StableParams(1.5), Partition.dyadic(1.0, 8).times)
        self.coef = build_coefficient("holder", 1.5)

    def test_identity_partition(self):
        fine, same = coupled_run(self.coef, 0.2, self.fine, [Partition.dyadic(1.0, 8)])
        assert np.array_equal(fine.values, same.values)
        assert np.array_equal(same.monitor_values, fine.values)

    def test_shared_knots(self):
        fine, coarse = coupled_run(self.coef, 0.2, self.fine, [Partition.dyadic(1.0, 3)])
        idx = np.arange(0, 257, 32)
        assert np.array_equal(coarse.monitor_values[idx], coarse.values)
        assert np.array_equal(coarse.on(fine.times, "step")[idx], coarse.values)

    def test_em_interpolation(self):
        _, coarse = coupled_run(self.coef, 0.2, self.fine, [Partition.dyadic(1.0, 2)])
        s = 70  # fine knot inside [0.25, 0.5)
        k = 1
        Z = self.fine.path
        expect = coarse.values[k] + self.coef.evaluate(0.25, np.array([coarse.values[k]]))[0] * (Z[s] - Z[64])
        assert math.isclose(coarse.monitor_values[s], expect, rel_tol=1e-14)

    def test_constant_agreement(self):
        c = build_coefficient({"id": "constant", "value": 1.3}, 1.5)
        fine, *coarse = coupled_run(c, 0.0, self.fine, [Partition.dyadic(1.0, l) for l in (1, 4, 6)])
        for p in coarse:
            assert np.array_equal(p.monitor_values, fine.values)

    def test_batch_matches_single(self):
        times = Partition.dyadic(1.0, 8).times
        dZ = increment_matrix(9, [0], times, 1.5)
        sup, X, end = coupled_batch(self.coef, 0.2, times, dZ, [Partition.dyadic(1.0, 3)])
        fine, coarse = coupled_run(self.coef, 0.2, self.fine, [Partition.dyadic(1.0, 3)])
        assert np.allclose(X[0], fine.values, rtol=1e-14, atol=1e-14)
        assert math.isclose(sup[0, 0], np.max(np.abs(coarse.monitor_values - fine.values)), rel_tol=1e-12)
        assert end[0, 0] == coarse.values[-1]

    def test_unknown_interpolation(self):
        with pytest.raises(ParameterError):
            monitor_batch(self.coef, np.zeros((1, 3)), [0, 0.5, 1], [0, 0.25, 0.5, 0.75, 1], np.zeros((1, 5)), "x")

    def test_errors_shrink_for_most_seeds(self):
        fine = Partition.dyadic(1.0, 14).times
        dZ = increment_matrix(12345, range(200), fine, 1.5)
        sup, _, _ = coupled_batch(self.coef, 0.0, fine, dZ, [Partition.dyadic(1.0, 4), Partition.dyadic(1.0, 8)])
        assert np.mean(sup[:, 1] < sup[:, 0]) >= 0.9


class TestCauchy:
    def test_budget(self):
        b = CauchyBudget.dyadic(0.1, 0.2, [2, 3, 4, 5])
        assert np.allclose(b.eps, [0.1, 0.02, 0.004])
        assert math.isclose(b.weighted_sum(), b.closed_form_sum(), rel_tol=1e-12)
        assert math.isclose(b.weighted_sum(), 4 * 0.1 + 16 * 0.02 + 64 * 0.004, rel_tol=1e-12)
        assert b.summable
        assert not CauchyBudget.dyadic(0.1, 0.5, [2, 3]).summable

    def test_budget_validation(self):
        with pytest.raises(ParameterError):
            CauchyBudget.dyadic(0.1, 1.5, [2, 3])
        with pytest.raises(ParameterError):
            CauchyBudget.dyadic(0.1, 0.5, [3, 2])
        with pytest.raises(AlignmentError):
            CauchyBudget(0.1, 0.5, [Partition.uniform(1.0, 2), Partition.uniform(1.0, 3)])

    def test_constant_is_exact(self):
        c = build_coefficient("constant", 1.5)
        rep = cauchy_construction(c, 0.0, CauchyBudget.dyadic(0.1, 0.5, [2, 4, 6]), 1, 100, 1.25, 1.5)
        assert np.all(rep.estimates == 0.0) and rep.passed
        assert [r["i"] for r in rep.rows()] == [1, 2]

    def test_deterministic(self):
        b = CauchyBudget.dyadic(0.2, 0.5, [2, 4, 6])
        coef = build_coefficient("holder", 1.5)
        r1 = cauchy_construction(coef, 0.0, b, 5, 60, 1.25, 1.5)
        r2 = cauchy_construction(coef, 0.0, b, 5, 60, 1.25, 1.5, chunk=7)
        assert np.array_equal(r1.estimates, r2.estimates)

    def test_beta_range(self):
        with pytest.raises(ParameterError):
            cauchy_construction(1.0, 0.0, CauchyBudget.dyadic(0.1, 0.5, [2, 3]), 1, 50, 1.6, 1.5)
