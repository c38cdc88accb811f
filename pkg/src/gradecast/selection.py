"""Variance-threshold feature selection and min-max normalization.

Only the two per-question families are filtered: a performance column
survives iff its population variance strictly exceeds t_perf, a
submission-count column iff it strictly exceeds t_subs.  The 13 summary
columns are always kept.  Variances are computed on raw, pre-normalization
values; normalization (optional) comes after masking.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .features import GROUP_PERF, GROUP_SUBS, FeatureMatrix

SWEEP_THRESHOLDS = ((0.00, 0.00), (0.02, 0.05), (0.03, 0.07), (0.04, 0.10))


class SweepFailure(RuntimeError):
    """A model-training failure during the sweep, tagged with its combination."""

    def __init__(self, thresholds: tuple[float, float], cause: BaseException):
        super().__init__(f"threshold combination {thresholds}: {cause}")
        self.thresholds = thresholds


@dataclass(frozen=True, eq=False)
class SelectionMask:
    kept: np.ndarray                    # bool flag per original column
    thresholds: tuple[float, float]     # (t_perf, t_subs)


@dataclass(frozen=True, eq=False)
class Preprocessor:
    """Column mask plus optional min-max stats, fitted on training rows only."""

    kept: np.ndarray
    mins: np.ndarray | None
    ranges: np.ndarray | None

    def transform(self, values: np.ndarray) -> np.ndarray:
        out = np.asarray(values, dtype=float)[:, self.kept]
        if self.mins is None:
            return out.copy()
        scaled = np.zeros_like(out)
        moving = self.ranges > 0
        scaled[:, moving] = (out[:, moving] - self.mins[moving]) / self.ranges[moving]
        return scaled


def column_variance(values: np.ndarray, column: int) -> float:
    """Population variance of one column."""
    col = np.asarray(values, dtype=float)[:, column]
    return float(np.mean((col - col.mean()) ** 2))


def variance_mask(values: np.ndarray, groups, t_perf: float, t_subs: float) -> np.ndarray:
    variances = np.var(np.asarray(values, dtype=float), axis=0)
    tags = np.asarray(groups)
    kept = np.ones(variances.size, dtype=bool)
    perf = tags == GROUP_PERF
    subs = tags == GROUP_SUBS
    kept[perf] = variances[perf] > t_perf
    kept[subs] = variances[subs] > t_subs
    return kept


def apply_variance_threshold(matrix: FeatureMatrix, t_perf: float,
                             t_subs: float) -> SelectionMask:
    kept = variance_mask(matrix.values, matrix.groups, t_perf, t_subs)
    return SelectionMask(kept=kept, thresholds=(float(t_perf), float(t_subs)))


def apply_mask(matrix: FeatureMatrix, mask: SelectionMask) -> FeatureMatrix:
    kept = mask.kept
    return FeatureMatrix(
        matrix.row_ids,
        tuple(n for n, k in zip(matrix.names, kept) if k),
        tuple(g for g, k in zip(matrix.groups, kept) if k),
        matrix.values[:, kept].copy(),
    )


def minmax_normalize(matrix: FeatureMatrix,
                     mask: SelectionMask | None = None) -> FeatureMatrix:
    """Rescale every column to [0, 1]; constant columns map to 0.

    If a mask is given it is applied first, so only kept columns are scaled.
    """
    if mask is not None:
        matrix = apply_mask(matrix, mask)
    values = matrix.values
    mins = values.min(axis=0)
    ranges = values.max(axis=0) - mins
    scaled = np.zeros_like(values)
    moving = ranges > 0
    scaled[:, moving] = (values[:, moving] - mins[moving]) / ranges[moving]
    return FeatureMatrix(matrix.row_ids, matrix.names, matrix.groups, scaled)


def fit_preprocessor(values: np.ndarray, groups, t_perf: float, t_subs: float,
                     normalize: bool) -> Preprocessor:
    """Fit mask (and min-max stats when normalizing) on the given rows."""
    values = np.asarray(values, dtype=float)
    kept = variance_mask(values, groups, t_perf, t_subs)
    if not normalize:
        return Preprocessor(kept=kept, mins=None, ranges=None)
    sub = values[:, kept]
    mins = sub.min(axis=0)
    ranges = sub.max(axis=0) - mins
    return Preprocessor(kept=kept, mins=mins, ranges=ranges)


@dataclass(frozen=True)
class ThresholdSweepResult:
    accuracies: dict[tuple[float, float], float]
    winner: tuple[float, float]


def threshold_sweep(dataset, model_spec, normalize: bool = False,
                    jobs: int = 1) -> ThresholdSweepResult:
    """Leave-one-out accuracy for each fixed threshold combination.

    The winner is the combination with the highest accuracy; exact ties go
    to the lexicographically smaller (t_perf, t_subs) pair.
    """
    from .evaluation import accuracy, loocv_matrix
    from .features import assemble_feature_matrix

    matrix = assemble_feature_matrix(dataset)
    y = np.array([int(rec.final_grade) for rec in dataset.students])
    accuracies: dict[tuple[float, float], float] = {}
    for combo in SWEEP_THRESHOLDS:
        try:
            preds = loocv_matrix(matrix, y, model_spec, thresholds=combo,
                                 normalize=normalize, jobs=jobs)
        except Exception as exc:
            raise SweepFailure(combo, exc) from exc
        accuracies[combo] = accuracy(preds)
    winner = min(accuracies, key=lambda combo: (-accuracies[combo], combo))
    return ThresholdSweepResult(accuracies, winner)


def write_mask_json(mask: SelectionMask, names, path) -> None:
    payload = {
        "t_perf": mask.thresholds[0],
        "t_subs": mask.thresholds[1],
        "kept": [n for n, k in zip(names, mask.kept) if k],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
