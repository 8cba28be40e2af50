import math

import numpy as np
import pytest

from adaptive_conformal.simgen import (
    ArmaSpec, FriedmanSpec, ShiftSpec, estimate_D, friedman_mean, gen_arma_noise, gen_friedman, gen_shift_stream,
    make_rng, oracle_predictor, ridge_predictions,
)


def friedman_reference(row):
    x1, x2, x3, x4, x5 = row[:5]
    return 10 * math.sin(math.pi * x1 * x2) + 20 * (x3 - 0.5) ** 2 + 10 * x4 + 5 * x5


class TestRng:
    def test_same_seed_same_stream(self):
        assert np.array_equal(make_rng(7).normal(size=5), make_rng(7).normal(size=5))
        assert not np.array_equal(make_rng(7).normal(size=5), make_rng(8).normal(size=5))

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(ValueError):
            make_rng(seed)


class TestArma:
    def test_innovation_variance(self):
        assert ArmaSpec(0.1, 0.1).innovation_variance == pytest.approx(9.9 / 1.03)
        assert ArmaSpec(0.0, 0.0).innovation_variance == 10.0

    def test_nonstationary_rejected(self):
        with pytest.raises(ValueError):
            ArmaSpec(1.0, 0.5)

    @pytest.mark.parametrize("psi", [0.1, 0.8, 0.9])
    def test_long_run_variance(self, psi):
        eps = gen_arma_noise(ArmaSpec(psi, psi, length=100_000, burn_in=500), seed=2024)
        assert eps.size == 100_000
        assert abs(eps.var() / 10.0 - 1) < 0.05

    def test_white_noise_case(self):
        eps = gen_arma_noise(ArmaSpec(0.0, 0.0, length=50_000), seed=3)
        assert abs(eps.var() / 10.0 - 1) < 0.05
        assert abs(np.corrcoef(eps[1:], eps[:-1])[0, 1]) < 0.02

    def test_recursion(self):
        # the filter implements e_t = psi e_{t-1} + xi_t + ma xi_{t-1} from a zero state
        spec = ArmaSpec(0.6, 0.3, length=30, burn_in=0)
        eps = gen_arma_noise(spec, seed=9)
        xi = make_rng(9).normal(0.0, math.sqrt(spec.innovation_variance), size=30)
        prev_e = prev_xi = 0.0
        for t in range(30):
            e = 0.6 * prev_e + xi[t] + 0.3 * prev_xi
            assert eps[t] == pytest.approx(e, rel=1e-12, abs=1e-12)
            prev_e, prev_xi = e, xi[t]


class TestFriedman:
    def test_mean_matches_reference(self):
        data = gen_friedman(FriedmanSpec(length=600), ArmaSpec(0.8, 0.8), seed=5)
        assert data.X.shape == (600, 6)
        ref = np.array([friedman_reference(row) for row in data.X])
        np.testing.assert_allclose(data.mean, ref, rtol=0, atol=1e-12)

    def test_deterministic(self):
        a = gen_friedman(FriedmanSpec(), ArmaSpec(0.9, 0.9), seed=11)
        b = gen_friedman(FriedmanSpec(), ArmaSpec(0.9, 0.9), seed=11)
        assert np.array_equal(a.y, b.y) and np.array_equal(a.X, b.X)

    def test_oracle(self):
        assert oracle_predictor(np.zeros(6)) == 5.0
        x = np.array([0.3, 0.4, 0.9, 0.1, 0.5, 0.2])
        x2 = x.copy()
        x2[5] = 0.99
        assert oracle_predictor(x) == oracle_predictor(x2)
        data = gen_friedman(FriedmanSpec(length=50), ArmaSpec(0.1, 0.1), seed=1)
        assert np.array_equal(oracle_predictor(data.X), data.mean)
        with pytest.raises(ValueError):
            oracle_predictor(np.zeros(5))

    def test_friedman_mean_vectorised(self):
        X = np.random.default_rng(0).uniform(size=(10, 6))
        assert friedman_mean(X).shape == (10,)


class TestShift:
    def test_no_shift(self):
        mu, y = gen_shift_stream(ShiftSpec(), seed=1)
        assert np.all(mu == 0)
        assert y.size == 500
        assert ShiftSpec().sigmas().tolist() == [0.2] * 500

    def test_shift_sd(self):
        sds = [gen_shift_stream(ShiftSpec(shift_delta=0.5), seed=s)[1][250:].std() for s in range(1, 51)]
        assert abs(np.mean(sds) / 0.7 - 1) < 0.10
        first = [gen_shift_stream(ShiftSpec(shift_delta=0.5), seed=s)[1][:250].std() for s in range(1, 51)]
        assert abs(np.mean(first) / 0.2 - 1) < 0.10


class TestRidge:
    def test_uses_only_past(self):
        data = gen_friedman(FriedmanSpec(length=120), ArmaSpec(0.1, 0.1), seed=2)
        p1 = ridge_predictions(data.X, data.y)
        y2 = data.y.copy()
        y2[60:] += 100
        p2 = ridge_predictions(data.X, y2)
        np.testing.assert_array_equal(p1[:61], p2[:61])
        assert p1[0] == 0.0

    def test_learns(self):
        data = gen_friedman(FriedmanSpec(length=600), ArmaSpec(0.1, 0.1), seed=2)
        p = ridge_predictions(data.X, data.y)
        late = np.mean((p[300:] - data.y[300:]) ** 2)
        assert late < np.var(data.y[300:])


class TestEstimateD:
    def test_examples(self):
        assert estimate_D([1, -3, 2]) == 3.0
        assert estimate_D([1, -3, 2], (1, 1)) == 1.0
        assert estimate_D([0.5], (1, 1)) == 0.5

    def test_zero_floor(self, caplog):
        assert estimate_D([0.0, 0.0]) == 1e-9
        assert "flooring" in caplog.text

    @pytest.mark.parametrize("window", [(0, 2), (2, 5), (3, 2)])
    def test_bad_window(self, window):
        with pytest.raises(ValueError):
            estimate_D([1.0, 2.0, 3.0], window)
