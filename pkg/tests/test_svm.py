import numpy as np
import pytest

from anonwalks.kernels import KernelSpec, gram
from anonwalks.svm import (SmoConvergenceError, kkt_violation, solve_binary,
                           svm_predict, svm_train)


def fit_predict(x, labels, spec, C):
    gm = gram(x, spec, check_psd=False)
    model = svm_train(gm.values, labels, C)
    return model, svm_predict(model, gm.values)


class TestBinarySolver:
    def test_two_point_separable(self):
        x = np.array([[1.0, 0.0], [-1.0, 0.0]])
        k = gram(x, KernelSpec("inner"), check_psd=False).values
        y = np.array([1.0, -1.0])
        alpha, bias, passes, converged = solve_binary(k, y, C=10.0)
        assert converged
        assert abs(alpha @ y) < 1e-8
        f = k @ (alpha * y) + bias
        assert np.all(np.sign(f) == y)
        assert kkt_violation(k, y, alpha, bias, 10.0) <= 1e-3 + 1e-9

    def test_xor_with_rbf(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([-1.0, 1.0, 1.0, -1.0])
        k = gram(x, KernelSpec("rbf", sigma=0.5)).values
        alpha, bias, _, converged = solve_binary(k, y, C=10.0)
        assert converged
        f = k @ (alpha * y) + bias
        assert np.all(np.sign(f) == y)

    def test_alpha_bounds(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(30, 3))
        y = np.where(x[:, 0] + 0.3 * rng.normal(size=30) > 0, 1.0, -1.0)
        for c in (0.01, 1.0, 10.0):
            k = gram(x, KernelSpec("rbf", sigma=1.0)).values
            alpha, bias, _, converged = solve_binary(k, y, C=c)
            assert converged
            assert np.all(alpha >= 0.0) and np.all(alpha <= c)
            assert abs(alpha @ y) < 1e-8

    def test_conflicting_duplicate_labels(self):
        x = np.array([[0.5, 0.5], [0.5, 0.5], [2.0, 2.0]])
        y = np.array([1.0, -1.0, 1.0])
        k = gram(x, KernelSpec("inner"), check_psd=False).values
        alpha, bias, _, converged = solve_binary(k, y, C=1.0)
        assert converged
        f = k @ (alpha * y) + bias
        assert np.any(np.sign(f) != y)

    def test_kkt_on_separable_problem(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 2))
        y = np.where(x[:, 0] > 0, 1.0, -1.0)
        x[:, 0] += y  # widen the margin
        k = gram(x, KernelSpec("inner"), check_psd=False).values
        alpha, bias, _, converged = solve_binary(k, y, C=100.0)
        assert converged
        assert kkt_violation(k, y, alpha, bias, 100.0) <= 1e-3 + 1e-9
        f = k @ (alpha * y) + bias
        assert np.all(np.sign(f) == y)

    def test_decision_invariant_under_training_order(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(25, 2))
        y = np.where(x[:, 1] > 0, 1.0, -1.0)
        x[:, 1] += 0.5 * y
        k = gram(x, KernelSpec("rbf", sigma=1.0)).values
        alpha, bias, _, _ = solve_binary(k, y, C=5.0)
        f = k @ (alpha * y) + bias
        perm = rng.permutation(25)
        kp = k[np.ix_(perm, perm)]
        alpha_p, bias_p, _, _ = solve_binary(kp, y[perm], C=5.0)
        f_p = kp @ (alpha_p * y[perm]) + bias_p
        np.testing.assert_allclose(f_p, f[perm], atol=5e-3)

    def test_nonconvergence_error_carries_pair(self):
        x = np.array([[1.0, 0.0], [-1.0, 0.0], [0.9, 0.1], [-0.9, -0.1]])
        labels = np.array([0, 1, 0, 1])
        k = gram(x, KernelSpec("inner"), check_psd=False).values
        with pytest.raises(SmoConvergenceError, match=r"\(0, 1\)"):
            svm_train(k, labels, C=1.0, max_iter=0)


class TestMulticlass:
    def three_clusters(self, n_per=8, seed=3):
        rng = np.random.default_rng(seed)
        centers = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]])
        x = np.concatenate([c + 0.3 * rng.normal(size=(n_per, 2))
                            for c in centers])
        labels = np.repeat([0, 1, 2], n_per)
        return x, labels

    def test_training_points_recovered(self):
        x, labels = self.three_clusters()
        model, pred = fit_predict(x, labels, KernelSpec("rbf", sigma=1.0), 10.0)
        assert np.array_equal(pred, labels)

    def test_two_class_equals_binary(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(20, 2))
        labels = (x[:, 0] > 0).astype(int)
        x[:, 0] += 2 * (2 * labels - 1)
        k = gram(x, KernelSpec("inner"), check_psd=False).values
        model = svm_train(k, labels, C=10.0)
        pred = svm_predict(model, k)
        alpha, bias, _, _ = solve_binary(k, np.where(labels == 0, 1.0, -1.0),
                                         C=10.0)
        f = k @ (alpha * np.where(labels == 0, 1.0, -1.0)) + bias
        binary_pred = np.where(f >= 0, 0, 1)
        assert np.array_equal(pred, binary_pred)

    def test_vote_aggregation_matches_manual_count(self):
        x, labels = self.three_clusters()
        gm = gram(x, KernelSpec("rbf", sigma=1.0))
        model = svm_train(gm.values, labels, C=10.0)
        rows = gm.values[:5]
        votes = np.zeros((5, 3), dtype=int)
        for pc in model.pairs:
            dec = pc.decision(rows)
            for t in range(5):
                votes[t, pc.positive if dec[t] >= 0 else pc.negative] += 1
        expected = np.argmax(votes, axis=1)
        assert np.array_equal(svm_predict(model, rows), expected)

    def test_tie_breaks_to_lowest_class(self):
        # a 3-cycle of pairwise decisions gives one vote per class
        x, labels = self.three_clusters()
        gm = gram(x, KernelSpec("rbf", sigma=1.0))
        model = svm_train(gm.values, labels, C=10.0)
        centroid = gm.values[:len(labels)].mean(axis=0, keepdims=True)
        votes = np.zeros(3, dtype=int)
        for pc in model.pairs:
            dec = pc.decision(centroid)[0]
            votes[pc.positive if dec >= 0 else pc.negative] += 1
        pred = svm_predict(model, centroid)[0]
        assert pred == np.flatnonzero(votes == votes.max())[0]

    def test_row_length_mismatch(self):
        x, labels = self.three_clusters()
        gm = gram(x, KernelSpec("rbf", sigma=1.0))
        model = svm_train(gm.values, labels, C=1.0)
        with pytest.raises(ValueError, match="shorter"):
            svm_predict(model, gm.values[:2, :3])

    def test_validation(self):
        with pytest.raises(ValueError, match="classes"):
            svm_train(np.eye(3), np.zeros(3, dtype=int), C=1.0)
        with pytest.raises(ValueError, match="C"):
            svm_train(np.eye(4), np.array([0, 0, 1, 1]), C=0.0)
