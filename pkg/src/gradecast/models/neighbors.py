"""K-nearest-neighbors classifier (Euclidean metric, uniform votes)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import (N_GRADES, ModelSpec, PredictionOutcome, check_dim,
                   validate_training_data)


@dataclass(frozen=True, eq=False)
class Knn:
    train_x: np.ndarray
    train_y: np.ndarray
    k: int
    n_features: int
    warnings: tuple[str, ...] = ()

    def predict(self, x) -> PredictionOutcome:
        x = check_dim(x, self.n_features)
        d2 = np.sum((self.train_x - x) ** 2, axis=1)
        # Stable sort: equal distances rank by lower training-row index.
        order = np.argsort(d2, kind="stable")[:self.k]
        votes = np.bincount(self.train_y[order], minlength=N_GRADES + 1)[1:]
        scores = votes / self.k
        top = votes.max()
        tied = np.flatnonzero(votes == top) + 1
        if tied.size == 1:
            grade = int(tied[0])
        else:
            # Vote tie: the tied class owning the nearest neighbor wins.
            tied_set = set(int(g) for g in tied)
            grade = next(int(self.train_y[i]) for i in order
                         if int(self.train_y[i]) in tied_set)
        return PredictionOutcome(grade, scores)


def fit(spec: ModelSpec, X, y) -> Knn:
    X, y = validate_training_data(X, y)
    return Knn(X, y, min(spec.k, X.shape[0]), X.shape[1])
