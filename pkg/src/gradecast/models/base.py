"""Shared model types: specs, prediction outcomes, validation helpers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("svm", "regression", "tree", "nb", "knn", "random", "majority")
REGRESSION_BACKENDS = ("least_squares", "epsilon_svr")
N_GRADES = 5

# Finite stand-in score for grades absent from the training set; argmax can
# never pick it while any real score exists.
SCORE_FLOOR = float(-np.finfo(np.float64).max)


class DimensionMismatch(ValueError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected {expected} features, got {got}")


@dataclass(frozen=True)
class ModelSpec:
    """Which model to train plus its hyperparameters.

    Defaults: RBF-kernel SVM settings C=1.0 with gamma = 1 / n_features,
    k=5 neighbors, least-squares regression backend, epsilon=0.1 for the
    SVR backend.  ``seed`` only matters for the random baseline.
    """

    kind: str
    C: float = 1.0
    k: int = 5
    regression_backend: str = "least_squares"
    epsilon: float = 0.1
    seed: int = 0
    gamma_mode: str = "inverse_dim"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.regression_backend not in REGRESSION_BACKENDS:
            raise ValueError(f"unknown regression backend {self.regression_backend!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.gamma_mode != "inverse_dim":
            raise ValueError(f"unknown gamma mode {self.gamma_mode!r}")


@dataclass(frozen=True, eq=False)
class PredictionOutcome:
    """Predicted grade plus one finite score per grade (index 0 = F)."""

    grade: int
    class_scores: np.ndarray

    def __post_init__(self):
        if self.class_scores.shape != (N_GRADES,):
            raise ValueError("class_scores must have one entry per grade")
        if not np.all(np.isfinite(self.class_scores)):
            raise ValueError("class_scores must be finite")
        if not 1 <= self.grade <= N_GRADES:
            raise ValueError(f"grade {self.grade} outside 1..{N_GRADES}")


def argmax_lower_grade(scores: np.ndarray) -> int:
    """Grade with the highest score; exact ties go to the lower grade."""
    return int(np.argmax(scores)) + 1


def check_dim(x: np.ndarray, n_features: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n_features,):
        raise DimensionMismatch(n_features, x.shape[0] if x.ndim == 1 else -1)
    return x


def validate_training_data(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError("X must be a non-empty 2-D matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("y must have one label per row of X")
    if np.any((y < 1) | (y > N_GRADES)):
        raise ValueError(f"labels must be grades 1..{N_GRADES}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be finite")
    return X, y
