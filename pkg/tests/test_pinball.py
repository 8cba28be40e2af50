import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptive_conformal.algorithms import pinball, pinball_subgradient, quantile_loss


class TestPinball:
    # over-shooting the radius costs (1 - alpha) per unit, under-shooting costs alpha
    @pytest.mark.parametrize("theta, r, alpha, expected", [
        (1.0, 0.5, 0.8, 0.1),
        (0.0, 1.0, 0.8, 0.8),
        (0.3, 0.3, 0.37, 0.0),
        (2.0, 0.0, 0.5, 1.0),
    ])
    def test_examples(self, theta, r, alpha, expected):
        assert pinball(theta, r, alpha) == pytest.approx(expected, abs=1e-15)

    def test_returns_float_for_scalars(self):
        assert isinstance(pinball(1.0, 0.0, 0.9), float)

    def test_vectorised(self):
        got = pinball(np.array([0.0, 1.0, 2.0]), 1.0, 0.9)
        np.testing.assert_allclose(got, [0.9, 0.0, 0.1])

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.01, 0.99), st.floats(-10, 10))
    def test_subgradient_inequality(self, theta, r, alpha, other):
        # L(other) >= L(theta) + g * (other - theta) for the recorded subgradient
        err = int(r > theta)
        g = pinball_subgradient(theta, r, err, alpha)
        lhs = pinball(other, r, alpha)
        rhs = pinball(theta, r, alpha) + g * (other - theta)
        assert lhs >= rhs - 1e-9 * (1 + abs(other) + abs(theta))

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.01, 0.99))
    def test_nonnegative(self, theta, r, alpha):
        assert pinball(theta, r, alpha) >= 0


class TestSubgradient:
    @pytest.mark.parametrize("err, alpha, expected", [(1, 0.8, -0.8), (0, 0.8, 0.2), (0, 0.5, 0.5)])
    def test_examples(self, err, alpha, expected):
        assert pinball_subgradient(0.0, 0.0, err, alpha) == pytest.approx(expected, abs=1e-15)


class TestQuantileLoss:
    def test_minimised_at_empirical_quantile(self, rng):
        y = rng.normal(size=400)
        grid = np.linspace(-3, 3, 2001)
        losses = [quantile_loss(g, y, 0.05).sum() for g in grid]
        best = grid[int(np.argmin(losses))]
        assert abs(best - np.quantile(y, 0.05)) < 0.05

    def test_asymmetric(self):
        assert quantile_loss(0.0, 1.0, 0.9) == pytest.approx(0.9)
        assert quantile_loss(1.0, 0.0, 0.9) == pytest.approx(0.1)
