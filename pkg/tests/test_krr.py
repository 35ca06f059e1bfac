import math

import numpy as np
import pytest

from gkrr.data import Dataset, generate_synthetic
from gkrr.kernel import kernel_matrix
from gkrr.krr import KrrModel, fit, gradient_fd, load_model, predict, save_model
from gkrr.linalg import FactorizationError, singular_extremes


def analytic_gradient(model, x_star):
    """sum_i alpha_i * (-(x*-x_i)/sigma^2) * k(d_i): direct differentiation."""
    x_star = np.asarray(x_star, dtype=float)
    diff = x_star[None, :] - model.train_features
    d2 = np.sum(diff**2, axis=1)
    k = np.exp(-d2 / (2 * model.sigma**2))
    return -(model.alpha * k) @ diff / model.sigma**2


class TestFit:
    def test_single_point_no_ridge(self):
        data = Dataset(np.array([[0.0]]), np.array([2.0]))
        m = fit(data, 1.0, 0.0)
        np.testing.assert_array_equal(m.alpha, [2.0])
        assert predict(m, np.array([[0.0]]))[0] == 2.0

    def test_single_point_with_ridge(self):
        data = Dataset(np.array([[0.0]]), np.array([2.0]))
        m = fit(data, 1.0, 1.0)
        np.testing.assert_allclose(m.alpha, [1.0], rtol=1e-15)
        assert predict(m, np.array([[0.0]]))[0] == pytest.approx(1.0, rel=1e-15)

    def test_interpolation_at_lam_zero(self):
        rng = np.random.default_rng(21)
        X = np.sort(rng.uniform(-2, 2, size=5)).reshape(-1, 1)
        y = rng.normal(size=5)
        data = Dataset(X, y)
        m = fit(data, 0.4, 0.0)
        np.testing.assert_allclose(predict(m, X), y, atol=1e-6)

    def test_residual_invariant(self):
        data = generate_synthetic(30, 0.1, seed=1)
        m = fit(data, 0.5, 1e-3)
        K = kernel_matrix(data.features, None, 0.5)
        resid = np.linalg.norm((K + 1e-3 * np.eye(30)) @ m.alpha - data.response)
        assert resid <= 1e-8 * (np.linalg.norm(data.response) + 1)

    def test_duplicate_rows_lam_zero_fails(self):
        data = Dataset(np.array([[1.0], [1.0]]), np.array([0.0, 1.0]))
        with pytest.raises(FactorizationError, match="sigma may be too large"):
            fit(data, 1.0, 0.0)

    def test_shrinkage(self):
        data = generate_synthetic(25, 0.1, seed=2)
        norms = [
            np.linalg.norm(fit(data, 0.3, lam).alpha) for lam in (1e-4, 1e-2, 1.0, 10.0)
        ]
        assert all(a >= b for a, b in zip(norms, norms[1:]))


class TestPredict:
    def test_far_query_decays_to_zero(self):
        data = generate_synthetic(10, 0.1, seed=3)
        m = fit(data, 0.2, 1e-3)
        x_far = np.array([[5.0 + 20 * 0.2 + 1.0]])
        bound = math.exp(-200.0) * np.abs(m.alpha).sum()
        assert abs(predict(m, x_far)[0]) <= max(bound, 1e-80)

    def test_empty_input(self):
        data = generate_synthetic(5, 0.1, seed=4)
        m = fit(data, 0.5, 1e-3)
        assert predict(m, np.empty((0, 1))).shape == (0,)

    def test_column_mismatch(self):
        data = generate_synthetic(5, 0.1, seed=5)
        m = fit(data, 0.5, 1e-3)
        with pytest.raises(ValueError, match="columns"):
            predict(m, np.zeros((2, 3)))


class TestGradientFd:
    def test_flat_at_training_point_of_constant_model(self):
        data = Dataset(np.array([[0.0]]), np.array([3.0]))
        m = fit(data, 1.0, 0.0)
        g = gradient_fd(m, np.array([0.0]))
        assert abs(g[0]) <= 1e-6

    def test_single_point_analytic_value(self):
        data = Dataset(np.array([[0.0]]), np.array([1.0]))
        m = fit(data, 1.0, 0.0)
        g = gradient_fd(m, np.array([1.0]), step=1e-5)
        assert g[0] == pytest.approx(-math.exp(-0.5), abs=1e-6)

    def test_matches_analytic_gradient(self):
        rng = np.random.default_rng(6)
        data = Dataset(rng.normal(size=(12, 3)), rng.normal(size=12))
        m = fit(data, 0.9, 1e-2)
        for _ in range(5):
            x_star = rng.normal(size=3)
            g_fd = gradient_fd(m, x_star)
            g_an = analytic_gradient(m, x_star)
            np.testing.assert_allclose(g_fd, g_an, atol=1e-5)

    def test_step_validation(self):
        data = generate_synthetic(5, 0.1, seed=7)
        m = fit(data, 0.5, 1e-3)
        with pytest.raises(ValueError):
            gradient_fd(m, np.array([0.0]), step=0.0)


class TestBoundChain:
    def test_three_factor_bound_random_instances(self):
        # ||grad f||_2 <= sqrt(n) ||y||_2 * max_i ||grad k_i||_1 * 1/(s_min+lam)
        from gkrr.kernel import gradient_one_norm_bound

        rng = np.random.default_rng(8)
        checked = 0
        for _ in range(100):
            n = int(rng.integers(3, 21))
            p = int(rng.integers(1, 4))
            lam = float(rng.choice([0.0, 1e-3, 1.0]))
            X = rng.uniform(-1, 1, size=(n, p))
            y = rng.normal(size=n)
            data = Dataset(X, y)
            sigma = 0.5 * float(np.ptp(X))
            try:
                m = fit(data, sigma, lam)
            except FactorizationError:
                continue
            s_min = singular_extremes(kernel_matrix(X, None, sigma))[1]
            outer = math.sqrt(n) * np.linalg.norm(y) / (s_min + lam)
            x_star = rng.uniform(-1.2, 1.2, size=p)
            g = np.linalg.norm(gradient_fd(m, x_star))
            bound = outer * gradient_one_norm_bound(X, x_star, sigma)
            assert g <= bound * (1 + 1e-8)
            # the cap variant: middle factor replaced by 1/(sigma sqrt(e))
            cap_bound = outer / (sigma * math.sqrt(math.e))
            assert g <= cap_bound * (1 + 1e-8)
            checked += 1
        assert checked >= 90


class TestSerialization:
    def test_round_trip_value_exact(self, tmp_path):
        data = generate_synthetic(17, 0.1, seed=9)
        m = fit(data, 0.345, 1e-3)
        path = tmp_path / "model.csv"
        save_model(m, path)
        back = load_model(path)
        assert back.sigma == m.sigma and back.lam == m.lam
        np.testing.assert_array_equal(back.train_features, m.train_features)
        np.testing.assert_array_equal(back.alpha, m.alpha)

    def test_round_trip_prediction_identical(self, tmp_path):
        data = generate_synthetic(20, 0.1, seed=10)
        m = fit(data, 0.2, 1e-3)
        path = tmp_path / "model.csv"
        save_model(m, path)
        back = load_model(path)
        q = np.linspace(-5, 5, 50).reshape(-1, 1)
        np.testing.assert_array_equal(predict(back, q), predict(m, q))

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("#nope\n")
        with pytest.raises(ValueError, match="#meta"):
            load_model(path)

    def test_alpha_length_validation(self):
        with pytest.raises(ValueError, match="alpha"):
            KrrModel(np.zeros((3, 1)), np.zeros(2), 1.0, 0.0)

    def test_model_copies_caller_arrays(self):
        X = np.ones((2, 1))
        alpha = np.ones(2)
        m = KrrModel(X, alpha, 1.0, 0.0)
        X[0, 0] = 99.0  # caller arrays stay writable and unaliased
        alpha[0] = 99.0
        assert m.train_features[0, 0] == 1.0
        assert m.alpha[0] == 1.0
