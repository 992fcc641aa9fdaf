"""Soft-margin kernel SVM trained by sequential minimal optimization on a
precomputed Gram matrix, with one-vs-one multiclass voting.

Pair selection follows the maximal-violating-pair rule: each step pairs the
worst offender of the upper optimality bound with the worst offender of the
lower bound, measured without a bias term. This selection has a convergence
proof and, unlike the classic two-loop heuristic with an error cache, does
not stall on rank-deficient kernels with duplicated rows. Training is
deterministic for a fixed input order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


class SmoConvergenceError(RuntimeError):
    def __init__(self, pair, iterations):
        super().__init__(
            f"SMO did not converge for class pair {pair} within "
            f"{iterations} iterations")
        self.pair = pair


@njit(cache=True, inline="always")
def _pair_step(K, y, alpha, g, C, eps, i, j):
    """One analytic step on the pair (i, j); g caches y_k - f_k."""
    alph1 = alpha[i]
    alph2 = alpha[j]
    y1 = y[i]
    y2 = y[j]
    s = y1 * y2
    if s > 0:
        lo = max(0.0, alph1 + alph2 - C)
        hi = min(C, alph1 + alph2)
    else:
        lo = max(0.0, alph2 - alph1)
        hi = min(C, C + alph2 - alph1)
    if lo >= hi:
        return False
    k11 = K[i, i]
    k12 = K[i, j]
    k22 = K[j, j]
    eta = k11 + k22 - 2.0 * k12
    e1 = -g[i]  # f_i - y_i
    e2 = -g[j]
    if eta > 0.0:
        a2 = alph2 + y2 * (e1 - e2) / eta
        if a2 < lo:
            a2 = lo
        elif a2 > hi:
            a2 = hi
    else:
        # objective is linear (or concave) along the pair direction:
        # compare the two clip bounds; constant terms cancel
        f1 = y1 * e1 - alph1 * k11 - s * alph2 * k12
        f2 = y2 * e2 - s * alph1 * k12 - alph2 * k22
        l1 = alph1 + s * (alph2 - lo)
        h1 = alph1 + s * (alph2 - hi)
        psi_lo = (l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11
                  + 0.5 * lo * lo * k22 + s * lo * l1 * k12)
        psi_hi = (h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11
                  + 0.5 * hi * hi * k22 + s * hi * h1 * k12)
        if psi_lo < psi_hi - eps:
            a2 = lo
        elif psi_lo > psi_hi + eps:
            a2 = hi
        else:
            return False
    if abs(a2 - alph2) < eps * (a2 + alph2 + eps):
        return False
    # snap float dust onto the box so index-set membership stays exact;
    # the partner is recomputed from the snapped value, preserving the
    # equality constraint; the margin stays above the step-significance
    # guard so surviving windows always admit a step
    snap = 1e-9 * C
    if a2 - lo < snap:
        a2 = lo
    elif hi - a2 < snap:
        a2 = hi
    a1 = alph1 + s * (alph2 - a2)
    if a1 < snap:
        a2 += s * a1
        a1 = 0.0
    elif a1 > C - snap:
        a2 += s * (a1 - C)
        a1 = C
    # the adjustment above can push a2 off its bound by float dust
    if a2 < snap:
        a2 = 0.0
    elif a2 > C - snap:
        a2 = C
    d1 = y1 * (a1 - alph1)
    d2 = y2 * (a2 - alph2)
    for k in range(g.shape[0]):
        g[k] -= d1 * K[i, k] + d2 * K[j, k]
    alpha[i] = a1
    alpha[j] = a2
    return True


@njit(cache=True, nogil=True)
def _smo(K, y, C, tol, eps, max_iter):
    """Minimize the dual objective; returns (alpha, gap, iterations, ok).

    Optimal within tolerance when the largest upper-set score minus the
    smallest lower-set score is at most 2*tol; the bias then fits between
    them. Ties in the arg-scans resolve to the lowest index.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    g = y.astype(np.float64).copy()  # y_k - f_k with f = 0 initially
    it = 0
    gap = np.inf
    while it < max_iter:
        i = -1
        j = -1
        up = -np.inf
        lo = np.inf
        for k in range(n):
            in_up = (alpha[k] < C and y[k] > 0.0) or (alpha[k] > 0.0 and y[k] < 0.0)
            in_lo = (alpha[k] < C and y[k] < 0.0) or (alpha[k] > 0.0 and y[k] > 0.0)
            if in_up and g[k] > up:
                up = g[k]
                i = k
            if in_lo and g[k] < lo:
                lo = g[k]
                j = k
        gap = up - lo
        if i < 0 or j < 0 or gap <= 2.0 * tol:
            return alpha, gap, it, True
        stepped = _pair_step(K, y, alpha, g, C, eps, i, j)
        if not stepped:
            # the best pair can be numerically stuck (degenerate kernel
            # rows); any violating pair makes progress, so scan in index
            # order before giving up
            for ii in range(n):
                if not ((alpha[ii] < C and y[ii] > 0.0)
                        or (alpha[ii] > 0.0 and y[ii] < 0.0)):
                    continue
                for jj in range(n):
                    if ii == jj:
                        continue
                    if not ((alpha[jj] < C and y[jj] < 0.0)
                            or (alpha[jj] > 0.0 and y[jj] > 0.0)):
                        continue
                    if g[ii] - g[jj] <= 2.0 * tol:
                        continue
                    if _pair_step(K, y, alpha, g, C, eps, ii, jj):
                        stepped = True
                        break
                if stepped:
                    break
        if not stepped:
            return alpha, gap, it, False
        it += 1
    return alpha, gap, it, False


def _recompute_bias(K, y, alpha, C):
    """Canonical threshold: midpoint of the interval the optimality
    conditions leave for it, which caps the worst per-point violation at
    half the final pair gap."""
    f0 = K @ (alpha * y)
    g = y - f0
    interior = (alpha > 0) & (alpha < C)
    lower = interior | ((alpha <= 0) & (y > 0)) | ((alpha >= C) & (y < 0))
    upper = interior | ((alpha <= 0) & (y < 0)) | ((alpha >= C) & (y > 0))
    b_min = g[lower].max() if lower.any() else -np.inf
    b_max = g[upper].min() if upper.any() else np.inf
    if not np.isfinite(b_min):
        return float(b_max)
    if not np.isfinite(b_max):
        return float(b_min)
    return float(0.5 * (b_min + b_max))


@dataclass
class PairClassifier:
    """Binary decision function for one class pair over the training set."""

    positive: int
    negative: int
    sv_indices: np.ndarray   # indices into the training set
    sv_coef: np.ndarray      # alpha_i * y_i on support vectors
    bias: float

    def decision(self, kernel_rows):
        return kernel_rows[:, self.sv_indices] @ self.sv_coef + self.bias


@dataclass
class SvmModel:
    classes: np.ndarray
    pairs: list
    C: float


def solve_binary(K, y, C, tol=1e-3, max_iter=200_000):
    """Dual coefficients for labels y in {-1, +1} on a precomputed kernel."""
    y = np.asarray(y, dtype=np.float64)
    K = np.ascontiguousarray(K, dtype=np.float64)
    alpha, gap, iterations, converged = _smo(K, y, C, tol, 1e-12, max_iter)
    bias = _recompute_bias(K, y, alpha, C)
    return alpha, float(bias), int(iterations), bool(converged)


def svm_train(gram_values, labels, C, tol=1e-3, max_iter=200_000) -> SvmModel:
    """One binary SMO problem per unordered class pair."""
    labels = np.asarray(labels, dtype=np.int64)
    if C <= 0:
        raise ValueError("C must be > 0")
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("need at least 2 classes to train")
    pairs = []
    for ai in range(classes.size):
        for bi in range(ai + 1, classes.size):
            a, b = int(classes[ai]), int(classes[bi])
            idx = np.flatnonzero((labels == a) | (labels == b))
            y = np.where(labels[idx] == a, 1.0, -1.0)
            sub = gram_values[np.ix_(idx, idx)]
            alpha, bias, iterations, converged = solve_binary(
                sub, y, C, tol=tol, max_iter=max_iter)
            if not converged:
                raise SmoConvergenceError((a, b), max_iter)
            sv = np.flatnonzero(alpha > 0)
            pairs.append(PairClassifier(a, b, idx[sv], alpha[sv] * y[sv], bias))
    return SvmModel(classes, pairs, float(C))


def svm_predict(model: SvmModel, kernel_rows) -> np.ndarray:
    """One-vs-one majority vote; ties go to the lowest class id.

    ``kernel_rows`` holds kernel values of each test graph against the full
    training set the model was fitted on, in training order.
    """
    kernel_rows = np.atleast_2d(np.asarray(kernel_rows, dtype=np.float64))
    n_test = kernel_rows.shape[0]
    votes = np.zeros((n_test, model.classes.size), dtype=np.int64)
    class_pos = {int(c): i for i, c in enumerate(model.classes)}
    for pc in model.pairs:
        if pc.sv_indices.size and pc.sv_indices.max() >= kernel_rows.shape[1]:
            raise ValueError("kernel rows shorter than the training set")
        dec = pc.decision(kernel_rows)
        votes[dec >= 0, class_pos[pc.positive]] += 1
        votes[dec < 0, class_pos[pc.negative]] += 1
    return model.classes[np.argmax(votes, axis=1)]


def kkt_violation(K, y, alpha, bias, C) -> float:
    """Largest violation of the optimality conditions, for verification."""
    f = K @ (alpha * y) + bias
    margin = y * f
    viol = np.zeros_like(margin)
    at_zero = alpha <= 0
    at_c = alpha >= C
    interior = ~at_zero & ~at_c
    viol[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    viol[interior] = np.abs(1.0 - margin[interior])
    viol[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    return float(viol.max()) if viol.size else 0.0
