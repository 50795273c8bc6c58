import numpy as np
import pytest

from texnoise.classifiers import (
    GnbConfig,
    KnnConfig,
    LabeledFeatures,
    LogRegConfig,
    MlpConfig,
    evaluate,
    logreg_objective,
    mlp_objective,
    predict,
    train,
)


def blobs(rng, centers, n_per, scale):
    X, y = [], []
    for label, c in enumerate(centers):
        X.append(rng.normal(c, scale, (n_per, len(c))))
        y.extend([label] * n_per)
    return np.vstack(X), np.array(y)


def xor_data(rng, n_per=25, scale=0.08):
    X0a = rng.normal((0, 0), scale, (n_per, 2))
    X0b = rng.normal((1, 1), scale, (n_per, 2))
    X1a = rng.normal((0, 1), scale, (n_per, 2))
    X1b = rng.normal((1, 0), scale, (n_per, 2))
    X = np.vstack([X0a, X0b, X1a, X1b])
    y = np.array([0] * (2 * n_per) + [1] * (2 * n_per))
    return X, y


def relative_error(a, b):
    return abs(a - b) / max(1e-8, abs(a), abs(b))


class TestEvaluate:
    def test_exact_cases(self):
        assert evaluate([1, 2, 3], [1, 2, 3]) == 1.0
        assert evaluate([1, 1, 1], [2, 2, 2]) == 0.0
        assert evaluate([1, 2, 3, 4], [1, 2, 3, 0]) == 0.75

    def test_errors(self):
        with pytest.raises(ValueError):
            evaluate([1, 2], [1])
        with pytest.raises(ValueError):
            evaluate([], [])


class TestKnn:
    def test_stores_training_data_verbatim(self):
        rng = np.random.default_rng(0)
        X, y = blobs(rng, [(0, 0), (3, 3)], 10, 0.5)
        model = train(KnnConfig(3), LabeledFeatures(X, y))
        assert model.train_features is model.train_features
        assert np.array_equal(model.train_features, X)
        assert model.train_features.shape == X.shape

    def test_k1_recovers_training_labels(self):
        rng = np.random.default_rng(1)
        X, y = blobs(rng, [(0, 0), (4, 0), (0, 4)], 15, 0.3)
        model = train(KnnConfig(1), LabeledFeatures(X, y))
        assert evaluate(predict(model, X), y) == 1.0

    def test_vote_tie_prefers_lower_label(self):
        X = np.array([[0.0], [2.0]])
        y = np.array([1, 0])
        model = train(KnnConfig(2), LabeledFeatures(X, y))
        # Both neighbors vote once; the lower label (0) must win.
        assert predict(model, np.array([[1.0]]))[0] == 0

    def test_distance_tie_prefers_lower_label(self):
        X = np.array([[0.0], [2.0], [10.0]])
        y = np.array([2, 1, 0])
        model = train(KnnConfig(1), LabeledFeatures(X, y))
        # Query at 1.0 is equidistant from labels 2 and 1 -> pick 1.
        assert predict(model, np.array([[1.0]]))[0] == 1

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(2)
        X, y = blobs(rng, [(0, 0), (3, 3)], 20, 0.8)
        Xt = rng.normal(1.5, 2.0, (30, 2))
        model = train(KnnConfig(5), LabeledFeatures(X, y))
        perm = rng.permutation(len(y))
        model_p = train(KnnConfig(5), LabeledFeatures(X[perm], y[perm]))
        assert np.array_equal(predict(model, Xt), predict(model_p, Xt))


class TestGnb:
    def test_disjoint_supports_boundary_near_half(self):
        rng = np.random.default_rng(3)
        X = np.concatenate([rng.normal(0.0, 0.01, 50), rng.normal(1.0, 0.01, 50)])
        y = np.array([0] * 50 + [1] * 50)
        model = train(GnbConfig(), LabeledFeatures(X[:, None], y))
        grid = np.linspace(-0.2, 1.2, 1401)[:, None]
        preds = predict(model, grid)
        flip = grid[np.flatnonzero(np.diff(preds))[0], 0]
        assert 0.45 < flip < 0.55

    def test_log_joint_matches_closed_form(self):
        rng = np.random.default_rng(4)
        X, y = blobs(rng, [(0, 1), (2, -1)], 20, 0.5)
        model = train(GnbConfig(), LabeledFeatures(X, y))
        pts = rng.normal(1, 1, (5, 2))
        got = model.log_joint(pts)
        # Independent oracle: per-class Gaussian log density from the fitted
        # moments, computed term by term.
        for c in range(2):
            prior = np.log((y == c).mean())
            for i, x in enumerate(pts):
                ll = prior
                for j in range(2):
                    mu = model.means[c, j]
                    var = model.variances[c, j]
                    ll += -0.5 * (
                        np.log(2 * np.pi * var) + (x[j] - mu) ** 2 / var
                    )
                assert relative_error(got[i, c], ll) < 1e-12

    def test_scores_finite_with_floored_variance(self):
        X = np.array([[0.0, 5.0]] * 10 + [[1.0, 5.0]] * 10)  # second feature constant
        y = np.array([0] * 10 + [1] * 10)
        model = train(GnbConfig(), LabeledFeatures(X, y))
        scores = model.log_joint(np.array([[0.5, 5.0], [100.0, -100.0]]))
        assert np.isfinite(scores).all()

    def test_constant_column_argmax_invariance(self):
        rng = np.random.default_rng(5)
        X, y = blobs(rng, [(0, 0), (2, 2)], 25, 0.6)
        Xc = np.hstack([X, np.full((len(y), 1), 3.7)])
        Xt = rng.normal(1, 1.5, (40, 2))
        Xtc = np.hstack([Xt, np.full((40, 1), 3.7)])
        a = predict(train(GnbConfig(), LabeledFeatures(X, y)), Xt)
        b = predict(train(GnbConfig(), LabeledFeatures(Xc, y)), Xtc)
        assert np.array_equal(a, b)

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(6)
        X, y = blobs(rng, [(0, 0), (3, 1)], 30, 0.7)
        Xt = rng.normal(1.5, 1.5, (25, 2))
        perm = rng.permutation(len(y))
        a = predict(train(GnbConfig(), LabeledFeatures(X, y)), Xt)
        b = predict(train(GnbConfig(), LabeledFeatures(X[perm], y[perm])), Xt)
        assert np.array_equal(a, b)


class TestLogReg:
    def test_separable_blobs_high_train_accuracy(self):
        rng = np.random.default_rng(7)
        X, y = blobs(rng, [(0, 0), (5, 0)], 100, 1.0)  # 5 sigma separation
        model = train(LogRegConfig(), LabeledFeatures(X, y))
        assert evaluate(predict(model, X), y) >= 0.99

    def test_multiclass(self):
        rng = np.random.default_rng(8)
        X, y = blobs(rng, [(0, 0), (6, 0), (0, 6)], 60, 1.0)
        model = train(LogRegConfig(), LabeledFeatures(X, y))
        assert evaluate(predict(model, X), y) >= 0.98

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        X = rng.normal(0, 1, (10, 5))
        y_idx = rng.integers(0, 3, 10)
        Y = np.eye(3)[y_idx]
        W = rng.normal(0, 0.5, (5, 3))
        b = rng.normal(0, 0.5, 3)
        l2 = 0.7
        _, dW, db = logreg_objective(W, b, X, Y, l2)
        h = 1e-6

        def loss_at(Wc, bc):
            return logreg_objective(Wc, bc, X, Y, l2)[0]

        for idx in [(0, 0), (2, 1), (4, 2), (3, 0)]:
            Wp, Wm = W.copy(), W.copy()
            Wp[idx] += h
            Wm[idx] -= h
            fd = (loss_at(Wp, b) - loss_at(Wm, b)) / (2 * h)
            assert relative_error(fd, dW[idx]) < 1e-4
        for j in range(3):
            bp, bm = b.copy(), b.copy()
            bp[j] += h
            bm[j] -= h
            fd = (loss_at(W, bp) - loss_at(W, bm)) / (2 * h)
            assert relative_error(fd, db[j]) < 1e-4

    def test_xor_is_a_control(self):
        rng = np.random.default_rng(10)
        X, y = xor_data(rng)
        model = train(LogRegConfig(), LabeledFeatures(X, y))
        assert evaluate(predict(model, X), y) < 0.8

    def test_constant_column_argmax_invariance(self):
        rng = np.random.default_rng(11)
        X, y = blobs(rng, [(0, 0), (4, 1)], 40, 0.8)
        Xt = rng.normal(2, 2, (30, 2))
        a = predict(train(LogRegConfig(), LabeledFeatures(X, y)), Xt)
        Xc = np.hstack([X, np.full((len(y), 1), 2.2)])
        Xtc = np.hstack([Xt, np.full((30, 1), 2.2)])
        b = predict(train(LogRegConfig(), LabeledFeatures(Xc, y)), Xtc)
        assert np.array_equal(a, b)

    def test_all_zero_column_is_ignored(self):
        rng = np.random.default_rng(12)
        X, y = blobs(rng, [(0, 0), (4, 0)], 30, 0.8)
        Xz = np.hstack([X, np.zeros((len(y), 1))])
        Xt = rng.normal(2, 2, (20, 2))
        a = predict(train(LogRegConfig(), LabeledFeatures(X, y)), Xt)
        b = predict(
            train(LogRegConfig(), LabeledFeatures(Xz, y)),
            np.hstack([Xt, np.full((20, 1), 0.3)]),
        )
        assert np.array_equal(a, b)

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(13)
        X, y = blobs(rng, [(0, 0), (5, 0)], 50, 0.9)
        Xt = rng.normal(2.5, 2, (30, 2))
        perm = rng.permutation(len(y))
        a = predict(train(LogRegConfig(), LabeledFeatures(X, y)), Xt)
        b = predict(train(LogRegConfig(), LabeledFeatures(X[perm], y[perm])), Xt)
        assert np.array_equal(a, b)


class TestMlp:
    def test_xor_reaches_high_train_accuracy(self):
        rng = np.random.default_rng(14)
        X, y = xor_data(rng)
        model = train(MlpConfig(hidden=100, seed=3), LabeledFeatures(X, y))
        assert evaluate(predict(model, X), y) >= 0.95

    def test_gradients_match_finite_differences_at_init(self):
        rng = np.random.default_rng(15)
        X = rng.normal(0, 1, (12, 6))
        y_idx = rng.integers(0, 3, 12)
        Y = np.eye(3)[y_idx]
        init = np.random.Generator(np.random.Philox(5))
        params = [
            init.uniform(-0.4, 0.4, (6, 7)),
            init.uniform(-0.1, 0.1, 7),
            init.uniform(-0.4, 0.4, (7, 3)),
            init.uniform(-0.1, 0.1, 3),
        ]
        _, grads = mlp_objective(params, X, Y)
        h = 1e-6
        probe = np.random.default_rng(16)
        for arr_i in range(4):
            flat = params[arr_i].ravel()
            for pos in probe.choice(flat.size, size=min(6, flat.size), replace=False):
                orig = flat[pos]
                flat[pos] = orig + h
                up = mlp_objective(params, X, Y)[0]
                flat[pos] = orig - h
                down = mlp_objective(params, X, Y)[0]
                flat[pos] = orig
                fd = (up - down) / (2 * h)
                assert relative_error(fd, grads[arr_i].ravel()[pos]) < 1e-3

    def test_bitwise_reproducible(self):
        rng = np.random.default_rng(17)
        X, y = blobs(rng, [(0, 0), (2, 2), (4, 0)], 20, 0.5)
        cfg = MlpConfig(hidden=16, epochs=50, seed=9)
        m1 = train(cfg, LabeledFeatures(X, y))
        m2 = train(cfg, LabeledFeatures(X, y))
        for a, b in zip(m1.params, m2.params):
            assert np.array_equal(a, b)

    def test_seed_changes_model(self):
        rng = np.random.default_rng(18)
        X, y = blobs(rng, [(0, 0), (3, 3)], 15, 0.5)
        m1 = train(MlpConfig(hidden=8, epochs=5, seed=1), LabeledFeatures(X, y))
        m2 = train(MlpConfig(hidden=8, epochs=5, seed=2), LabeledFeatures(X, y))
        assert not np.array_equal(m1.params[0], m2.params[0])

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(19)
        X, y = blobs(rng, [(0, 0), (5, 5)], 30, 0.8)
        Xt = rng.normal(2.5, 2.5, (20, 2))
        perm = rng.permutation(len(y))
        cfg = MlpConfig(hidden=12, epochs=60, seed=4)
        a = predict(train(cfg, LabeledFeatures(X, y)), Xt)
        b = predict(train(cfg, LabeledFeatures(X[perm], y[perm])), Xt)
        assert np.array_equal(a, b)


class TestContract:
    def test_single_class_rejected(self):
        X = np.zeros((5, 2))
        with pytest.raises(ValueError, match="2 classes"):
            train(KnnConfig(), LabeledFeatures(X, np.zeros(5, dtype=int)))

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(20)
        X, y = blobs(rng, [(0,), (3,)], 10, 0.5)
        model = train(KnnConfig(), LabeledFeatures(X, y))
        with pytest.raises(ValueError, match="dimension mismatch"):
            predict(model, np.zeros((2, 3)))

    def test_deterministic_training_all_models(self):
        rng = np.random.default_rng(21)
        X, y = blobs(rng, [(0, 0), (3, 0), (0, 3)], 25, 0.6)
        Xt = rng.normal(1, 2, (40, 2))
        for cfg in (KnnConfig(), GnbConfig(), LogRegConfig(max_iters=200), MlpConfig(epochs=30)):
            a = predict(train(cfg, LabeledFeatures(X, y)), Xt)
            b = predict(train(cfg, LabeledFeatures(X, y)), Xt)
            assert np.array_equal(a, b)

    def test_float32_pipeline(self):
        rng = np.random.default_rng(22)
        X, y = blobs(rng, [(0, 0), (4, 4)], 30, 0.7)
        X32 = X.astype(np.float32)
        for cfg in (KnnConfig(), GnbConfig(), LogRegConfig(max_iters=300), MlpConfig(epochs=40)):
            model = train(cfg, LabeledFeatures(X32, y))
            acc = evaluate(predict(model, X32), y)
            assert acc >= 0.95
