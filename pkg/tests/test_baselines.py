import numpy as np
import pytest

from cspca import baselines, evaluation, linalg
from cspca.errors import BadRank, NonBinaryLabels, SingularScatter, TooFewFeatures


def unit(v):
    return v / np.linalg.norm(v)


def angle(a, b):
    c = abs(float(unit(a) @ unit(b)))
    return float(np.arccos(min(c, 1.0)))


class TestPCA:
    def test_single_nonzero_column(self):
        rng = np.random.default_rng(0)
        X = np.zeros((10, 3))
        X[:, 1] = rng.standard_normal(10)
        m = baselines.pca_fit(X, 1)
        np.testing.assert_allclose(np.abs(m.W[:, 0]), [0, 1, 0], atol=1e-12)

    def test_full_basis_explains_everything(self):
        X = np.random.default_rng(1).standard_normal((50, 4))
        m = baselines.pca_fit(X, 4)
        Xc, _ = linalg.center_columns(X)
        assert evaluation.variance_explained(Xc, m.W) == pytest.approx(1.0, abs=1e-12)

    def test_stretched_direction(self):
        rng = np.random.default_rng(2)
        t = rng.standard_normal(500)
        noise = 0.01 * rng.standard_normal((500, 2))
        X = np.outer(t, [1.0, 1.0]) * 5 + noise
        Xc, _ = linalg.center_columns(X)
        # covariance eigen-oracle: leading eigenvector of the 2x2 scatter
        a, b, d = Xc[:, 0] @ Xc[:, 0], Xc[:, 0] @ Xc[:, 1], Xc[:, 1] @ Xc[:, 1]
        lam = (a + d) / 2 + np.sqrt(((a - d) / 2) ** 2 + b**2)
        oracle = unit(np.array([b, lam - a]))
        m = baselines.pca_fit(X, 1)
        assert angle(m.W[:, 0], oracle) < 1e-6
        assert angle(m.W[:, 0], np.array([1.0, 1.0])) < 1e-2

    def test_bad_rank(self):
        with pytest.raises(BadRank):
            baselines.pca_fit(np.eye(3), 4)


class TestRBF:
    def test_identical_rows(self):
        np.testing.assert_allclose(baselines.rbf_kernel(np.ones((4, 2)), 1.0), np.ones((4, 4)))

    def test_huge_sigma(self):
        Y = np.random.default_rng(3).standard_normal((5, 2))
        K = baselines.rbf_kernel(Y, 1e8)
        assert np.max(np.abs(K - 1.0)) < 1e-8

    def test_closed_form(self):
        sigma = 0.7
        Y = np.array([[0.0, 0.0], [sigma, sigma]])  # distance sqrt(2) sigma
        K = baselines.rbf_kernel(Y, sigma)
        assert K[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-14)
        np.testing.assert_allclose(np.diag(K), 1.0)

    def test_median_heuristic(self):
        assert baselines.median_heuristic([[0.0], [1.0], [3.0]]) == pytest.approx(2.0)


class TestHSIC:
    def test_identity_kernel_is_pca(self):
        X = np.array([[1.0, 2.0, 0.5], [-1.0, 0.0, 2.5]])
        m = baselines.hsic_spca_fit(X, [0.0, 1.0], 1, kernel="delta", task="classification")
        assert np.max(linalg.principal_angles(m.W, baselines.pca_fit(X, 1).W)) < 1e-8

    def test_all_ones_kernel_is_degenerate(self):
        X = np.random.default_rng(4).standard_normal((8, 3))
        m = baselines.hsic_spca_fit(X, np.ones(8), 2, kernel="delta", task="classification")
        assert m.params["degenerate"]
        np.testing.assert_allclose(m.eigenvalues, 0.0, atol=1e-10)

    def test_rayleigh_monte_carlo(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((12, 5))
        Y = rng.standard_normal((12, 1))
        m = baselines.hsic_spca_fit(X, Y, 1, kernel="rbf", sigma=1.3)
        Xc, _ = linalg.center_columns(X)
        Q = Xc.T @ baselines.rbf_kernel(Y, 1.3) @ Xc
        best = m.W[:, 0] @ Q @ m.W[:, 0]
        for _ in range(1000):
            v = unit(rng.standard_normal(5))
            assert v @ Q @ v <= best + 1e-10 * abs(best)

    def test_delta_requires_binary(self):
        with pytest.raises(NonBinaryLabels):
            baselines.hsic_spca_fit(np.eye(4), [[0.2], [1.0], [3.0], [0.0]], 1, kernel="delta")

    def test_continuous_in_sigma(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((15, 4))
        Y = rng.standard_normal((15, 1))
        a = baselines.hsic_spca_fit(X, Y, 2, sigma=0.8).eigenvalues.sum()
        b = baselines.hsic_spca_fit(X, Y, 2, sigma=0.8 * 1.001).eigenvalues.sum()
        assert abs(a - b) / abs(a) < 1e-2

    def test_large_sigma_degenerates(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((10, 3))
        Y = rng.standard_normal((10, 1))
        m = baselines.hsic_spca_fit(X, Y, 1, sigma=1e6)
        Xc, _ = linalg.center_columns(X)
        assert m.eigenvalues[0] < 1e-8 * np.linalg.norm(Xc) ** 2

    def test_centered_kernel_flag(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((10, 3))
        labels = np.array([0, 1] * 5, dtype=float)
        m = baselines.hsic_spca_fit(X, labels, 1, kernel="delta", center_kernel=True,
                                    task="classification")
        assert m.params["center_kernel"]


class TestBair:
    def test_zero_threshold_is_pca(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((20, 6))
        y = rng.standard_normal(20)
        m = baselines.bair_fit(X, y, 0.0, 3)
        assert len(m.params["kept"]) == 6
        assert np.max(linalg.principal_angles(m.W, baselines.pca_fit(X, 3).W)) < 1e-8

    def test_signal_feature_only(self):
        rng = np.random.default_rng(10)
        y = rng.standard_normal(40)
        X = np.column_stack([y, 0.05 * rng.standard_normal((40, 4))])
        Xc, _ = linalg.center_columns(X)
        beta = np.abs(baselines.bair_scores(Xc, y - y.mean()))
        assert beta[0] > beta[1:].max()
        theta = (beta[0] + beta[1:].max()) / 2
        m = baselines.bair_fit(X, y, theta, 1)
        assert m.params["kept"] == [0]
        np.testing.assert_allclose(np.abs(m.W[:, 0]), [1, 0, 0, 0, 0])

    def test_threshold_too_high(self):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((10, 3))
        y = rng.standard_normal(10)
        Xc, _ = linalg.center_columns(X)
        top = np.abs(baselines.bair_scores(Xc, y - y.mean())).max()
        with pytest.raises(TooFewFeatures):
            baselines.bair_fit(X, y, top * 1.01, 1)

    def test_cv_single_value(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((20, 4))
        y = rng.standard_normal((20, 1))
        theta, report = baselines.bair_cv_threshold(X, y, [0.0], 1, K=4, seed=0)
        assert theta == 0.0
        assert report.fold_scores.shape == (1, 4)

    def test_cv_huge_threshold_loses(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((20, 4))
        y = rng.standard_normal((20, 1))
        theta, report = baselines.bair_cv_threshold(X, y, [0.0, 1e12], 1, K=4, seed=0)
        assert theta == 0.0
        assert np.isinf(report.avg_scores[1])
        assert report.failures

    def test_cv_matches_exhaustive_scoring(self):
        rng = np.random.default_rng(14)
        n = 60
        y = rng.standard_normal(n)
        X = np.column_stack([y + 0.1 * rng.standard_normal(n), rng.standard_normal((n, 5))])
        Xc, _ = linalg.center_columns(X)
        beta = np.sort(np.abs(baselines.bair_scores(Xc, y - y.mean())))
        grid = [0.0, (beta[-1] + beta[-2]) / 2]
        theta, report = baselines.bair_cv_threshold(X, y[:, None], grid, 1, K=5, seed=3)

        # independent oracle: manual K-fold loop with the same shuffled folds
        perm = np.random.default_rng(3).permutation(n)
        folds = np.array_split(perm, 5)
        oracle = []
        for t in grid:
            errs = []
            for j in range(5):
                val = folds[j]
                tr = np.setdiff1d(np.arange(n), val)
                try:
                    m = baselines.bair_fit(X[tr], y[tr], t, 1)
                except TooFewFeatures:
                    errs.append(np.inf)
                    continue
                z_tr = (X[tr] - m.x_means) @ m.W
                z_val = (X[val] - m.x_means) @ m.W
                A = np.column_stack([np.ones(len(tr)), z_tr])
                coef = np.linalg.lstsq(A, y[tr], rcond=None)[0]
                pred = coef[0] + z_val @ coef[1:]
                errs.append(np.mean((pred - y[val]) ** 2))
            oracle.append(np.mean(errs))
        np.testing.assert_allclose(report.avg_scores, oracle, rtol=1e-10)
        assert theta == grid[int(np.argmin(oracle))]


class TestPLS:
    def test_first_weight_direction(self):
        rng = np.random.default_rng(15)
        X = rng.standard_normal((30, 5))
        v = unit(rng.standard_normal(5))
        Y = X @ v
        m = baselines.pls_fit(X, Y[:, None], 1)
        Xc, _ = linalg.center_columns(X)
        assert angle(m.params["weights"][:, 0], Xc.T @ Xc @ v) < 1e-10

    def test_exact_linear_map(self):
        # v is a right singular vector of the centred design, so one
        # latent component reproduces Y = X v exactly
        rng = np.random.default_rng(16)
        n, p = 40, 6
        U, _ = np.linalg.qr(rng.standard_normal((n, p)))
        U = U - U.mean(axis=0)
        U, _ = np.linalg.qr(U)
        V, _ = np.linalg.qr(rng.standard_normal((p, p)))
        X = U @ np.diag([5.0, 4.0, 3.0, 2.0, 1.5, 1.0]) @ V.T
        v = V[:, 2]
        Y = (X @ v)[:, None]
        m = baselines.pls_fit(X, Y, 1)
        resid = baselines.pls_predict(m, X) - Y
        assert np.mean(resid**2) < 1e-10

    def test_noise_response(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((2000, 3))
        y = rng.standard_normal((2000, 1))
        m = baselines.pls_fit(X, y, 1)
        t = m.transform(X)[:, 0]
        Xc, _ = linalg.center_columns(X)
        assert t @ t <= np.linalg.eigvalsh(Xc.T @ Xc).max() * (1 + 1e-12)
        assert abs(np.corrcoef(t, y[:, 0])[0, 1]) < 0.1

    def test_one_dimensional(self):
        x = np.random.default_rng(18).standard_normal((10, 1))
        m = baselines.pls_fit(x, x, 1)
        assert abs(m.params["weights"][0, 0]) == pytest.approx(1.0)
        np.testing.assert_allclose(m.transform(x), (x - x.mean()) * m.params["weights"][0, 0], atol=1e-12)

    def test_multi_response_scores_orthogonal(self):
        rng = np.random.default_rng(19)
        X = rng.standard_normal((50, 8))
        Y = X[:, :3] @ rng.standard_normal((3, 2)) + 0.1 * rng.standard_normal((50, 2))
        m = baselines.pls_fit(X, Y, 3)
        T = m.transform(X)
        G = T.T @ T
        np.testing.assert_allclose(G - np.diag(np.diag(G)), 0.0, atol=1e-8 * np.trace(G))
        np.testing.assert_allclose(m.params["weights"].T @ m.params["weights"], np.eye(3), atol=1e-10)


class TestLDA:
    def test_symmetric_isotropic_design(self):
        # each class is its mean +/- a along every axis, so S_w = 4 a^2 I
        M0, M1, a = np.array([0.0, 0.0, 0.0]), np.array([1.0, 2.0, -0.5]), 0.3
        offsets = np.vstack([a * np.eye(3), -a * np.eye(3)])
        X = np.vstack([M0 + offsets, M1 + offsets])
        labels = np.r_[np.zeros(6), np.ones(6)]
        m = baselines.lda_fit(X, labels, ridge=0.0)
        assert angle(m.W[:, 0], M1 - M0) < 1e-12
        assert m.W[:, 0] @ (M1 - M0) > 0

    def test_singular_scatter(self):
        X = np.random.default_rng(20).standard_normal((4, 6))
        with pytest.raises(SingularScatter):
            baselines.lda_fit(X, [0, 0, 1, 1], ridge=0.0)

    def test_closed_form_anisotropic(self):
        rng = np.random.default_rng(21)
        X0 = rng.standard_normal((30, 2)) @ np.array([[2.0, 0.0], [0.6, 0.5]])
        X1 = rng.standard_normal((25, 2)) @ np.array([[2.0, 0.0], [0.6, 0.5]]) + [1.0, 1.0]
        X = np.vstack([X0, X1])
        labels = np.r_[np.zeros(30), np.ones(25)]
        Sw = np.zeros((2, 2))
        for cls in (X0, X1):
            mu = cls.mean(axis=0)
            for row in cls:
                Sw += np.outer(row - mu, row - mu)
        expected = unit(np.linalg.solve(Sw, X1.mean(0) - X0.mean(0)))
        m = baselines.lda_fit(X, labels, ridge=0.0)
        np.testing.assert_allclose(m.W[:, 0], expected, atol=1e-8)

    def test_label_swap_flips_sign(self):
        rng = np.random.default_rng(22)
        X = rng.standard_normal((20, 3))
        labels = np.r_[np.zeros(10), np.ones(10)]
        a = baselines.lda_fit(X, labels).W[:, 0]
        b = baselines.lda_fit(X, 1 - labels).W[:, 0]
        np.testing.assert_allclose(a, -b, atol=1e-12)

    def test_default_ridge(self):
        rng = np.random.default_rng(23)
        X = rng.standard_normal((6, 10))
        m = baselines.lda_fit(X, [0, 0, 0, 1, 1, 1])
        assert m.params["ridge"] > 0
        assert np.isfinite(m.W).all()


@pytest.mark.parametrize("method", ["pca", "hsic", "bair"])
def test_orthonormal_loadings(method):
    rng = np.random.default_rng(24)
    X = rng.standard_normal((25, 7))
    y = rng.standard_normal((25, 1))
    m = {"pca": lambda: baselines.pca_fit(X, 3),
         "hsic": lambda: baselines.hsic_spca_fit(X, y, 3),
         "bair": lambda: baselines.bair_fit(X, y, 0.0, 3)}[method]()
    np.testing.assert_allclose(m.W.T @ m.W, np.eye(3), atol=1e-8)
