"""Regression-to-grade: fit a numeric predictor, then snap to a grade.

Two interchangeable backends:

* least_squares (default): minimum-norm linear least squares with an
  unpenalized intercept, computed by conjugate gradient on the ridge-damped
  normal equations of the centered system (damping 1e-6; required because
  the feature count can exceed the row count, leaving the plain normal
  equations singular).
* epsilon_svr: linear epsilon-insensitive support vector regression solved
  by SMO-style pairwise coordinate ascent on the dual.

Prediction for both: clamp the numeric estimate to [1, 5], round half away
from zero; class_scores[g] = -|estimate - g|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import (N_GRADES, ModelSpec, PredictionOutcome, check_dim,
                   validate_training_data)

RIDGE_DAMPING = 1e-6
_CG_REL_TOL = 1e-10
SVR_TOL = 1e-3
SVR_MAX_UPDATES = 10_000


def round_half_away_from_zero(value: float) -> int:
    # Grades are positive, so half-away-from-zero is floor(v + 0.5).
    return int(math.floor(value + 0.5))


def _cg_normal_equations(Xc: np.ndarray, yc: np.ndarray, damping: float) -> np.ndarray:
    """Jacobi-preconditioned CG on (Xc'Xc + damping*I) w = Xc'yc, matrix-free."""
    d = Xc.shape[1]
    rhs = Xc.T @ yc
    norm_rhs = float(np.linalg.norm(rhs))
    w = np.zeros(d)
    if norm_rhs == 0.0:
        return w
    diag = np.sum(Xc * Xc, axis=0) + damping
    r = rhs.copy()
    z = r / diag
    p = z.copy()
    rz = float(r @ z)
    for _ in range(max(2 * d, 200)):
        ap = Xc.T @ (Xc @ p) + damping * p
        pap = float(p @ ap)
        if pap <= 0.0:
            break
        step = rz / pap
        w += step * p
        r -= step * ap
        if np.linalg.norm(r) <= _CG_REL_TOL * norm_rhs:
            break
        z = r / diag
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next
    return w


def _svr_smo(K: np.ndarray, y: np.ndarray, C: float, epsilon: float,
             tol: float = SVR_TOL,
             max_updates: int = SVR_MAX_UPDATES) -> tuple[np.ndarray, float, bool]:
    """Maximal-violating-pair ascent on the epsilon-SVR dual.

    Works on beta_i = alpha_i - alpha_i* in [-C, C] with sum(beta) = 0.
    Returns (beta, b, converged).
    """
    n = y.size
    beta = np.zeros(n)
    u = np.zeros(n)  # u = K @ beta
    converged = False
    for _ in range(max_updates):
        g = y - u
        up = g - np.where(beta >= 0.0, epsilon, -epsilon)
        dn = -g - np.where(beta <= 0.0, epsilon, -epsilon)
        up[beta >= C] = -np.inf
        dn[beta <= -C] = -np.inf
        i = int(np.argmax(up))
        j = int(np.argmax(dn))
        if i == j:
            # A single index cannot move both ways; try the runner-up on
            # whichever side loses less.
            up2 = up.copy()
            up2[i] = -np.inf
            dn2 = dn.copy()
            dn2[j] = -np.inf
            i2, j2 = int(np.argmax(up2)), int(np.argmax(dn2))
            if up2[i2] + dn[j] >= up[i] + dn2[j2]:
                i = i2
            else:
                j = j2
        if not np.isfinite(up[i]) or not np.isfinite(dn[j]) or up[i] + dn[j] <= tol:
            converged = True
            break
        t = _best_pair_move(K, y, u, beta, i, j, C, epsilon)
        if t == 0.0:
            converged = True
            break
        beta[i] += t
        beta[j] -= t
        u += t * (K[:, i] - K[:, j])
    b = _svr_bias(beta, y, u, C, epsilon)
    return beta, b, converged


def _best_pair_move(K, y, u, beta, i, j, C, epsilon) -> float:
    """Exact maximizer of the dual gain for the move beta_i += t, beta_j -= t."""
    lo = max(-C - beta[i], beta[j] - C)
    hi = min(C - beta[i], beta[j] + C)
    if hi <= lo:
        return 0.0
    eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
    gi = y[i] - u[i]
    gj = y[j] - u[j]

    def gain(t: float) -> float:
        return ((gi - gj) * t - 0.5 * eta * t * t
                - epsilon * (abs(beta[i] + t) - abs(beta[i]))
                - epsilon * (abs(beta[j] - t) - abs(beta[j])))

    candidates = [lo, hi, -beta[i], beta[j]]
    if eta > 0.0:
        for si in (-1.0, 1.0):
            for sj in (-1.0, 1.0):
                candidates.append((gi - gj - epsilon * si + epsilon * sj) / eta)
    best_t, best_gain = 0.0, 0.0
    for t in candidates:
        t = min(max(t, lo), hi)
        g = gain(t)
        if g > best_gain + 1e-15:
            best_t, best_gain = t, g
    return best_t


def _svr_bias(beta, y, u, C, epsilon) -> float:
    inner = 1e-10
    g = y - u
    free_pos = (beta > inner) & (beta < C - inner)
    free_neg = (beta < -inner) & (beta > -C + inner)
    estimates = np.concatenate([g[free_pos] - epsilon, g[free_neg] + epsilon])
    if estimates.size:
        return float(estimates.mean())
    lower, upper = [], []
    for bi, gi in zip(beta, g):
        if bi >= C - inner:
            upper.append(gi - epsilon)
        elif bi <= -C + inner:
            lower.append(gi + epsilon)
        else:
            lower.append(gi - epsilon)
            upper.append(gi + epsilon)
    lo = max(lower) if lower else min(upper)
    hi = min(upper) if upper else max(lower)
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class RegressionModel:
    weights: np.ndarray
    intercept: float
    n_features: int
    backend: str
    warnings: tuple[str, ...] = ()

    def numeric_estimate(self, x) -> float:
        x = check_dim(x, self.n_features)
        return float(x @ self.weights + self.intercept)

    def predict(self, x) -> PredictionOutcome:
        estimate = min(max(self.numeric_estimate(x), 1.0), float(N_GRADES))
        grade = round_half_away_from_zero(estimate)
        grade = min(max(grade, 1), N_GRADES)
        scores = -np.abs(estimate - np.arange(1, N_GRADES + 1, dtype=float))
        return PredictionOutcome(grade, scores)


def fit(spec: ModelSpec, X, y) -> RegressionModel:
    X, y = validate_training_data(X, y)
    yf = y.astype(float)
    if spec.regression_backend == "least_squares":
        xmean = X.mean(axis=0)
        ymean = float(yf.mean())
        w = _cg_normal_equations(X - xmean, yf - ymean, RIDGE_DAMPING)
        return RegressionModel(w, ymean - float(xmean @ w), X.shape[1],
                               "least_squares")
    K = X @ X.T
    beta, b, converged = _svr_smo(K, yf, spec.C, spec.epsilon)
    warnings = () if converged else ("svr: update cap reached",)
    return RegressionModel(X.T @ beta, b, X.shape[1], "epsilon_svr", warnings)
