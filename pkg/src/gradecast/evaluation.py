"""Leave-one-out evaluation: harness, metrics, and report rendering.

Each fold holds out one student.  Feature selection and normalization
statistics are fitted on the remaining rows only, the model is retrained,
and the held-out row is transformed with the fold's own statistics before
prediction, so nothing about the held-out student leaks into fold
preparation.  ``global_prep=True`` switches to the fit-once alternative for
comparison.  Folds are independent and deterministic: each derives its own
seed from (master seed, fold index), so thread count cannot change results.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .features import FeatureMatrix, assemble_feature_matrix
from .ingest import Dataset, Grade
from .models import ModelSpec, PredictionOutcome, train
from .rng import mix_seed
from .selection import Preprocessor, fit_preprocessor

N_GRADES = 5
DEFAULT_THRESHOLDS = (0.02, 0.05)

# Report rows follow the conventional comparison-table order.
MODEL_ORDER = ("svm", "linreg", "svr", "tree", "nb", "knn", "random", "majority")
DISPLAY_NAMES = {
    "svm": "SVM",
    "linreg": "Lin. Reg",
    "svr": "SVR",
    "tree": "Decision Tree",
    "nb": "Naive Bayes",
    "knn": "KNN",
    "random": "Random",
    "majority": "All A",
}


@dataclass(frozen=True, eq=False)
class LooPrediction:
    student_id: str
    true_grade: int
    outcome: PredictionOutcome
    fold_index: int


@dataclass(frozen=True)
class EvalReport:
    n: int
    accuracy: float
    mse: float
    micro_ap: float
    auroc: float
    f1_micro: float
    distance_histogram: tuple[int, int, int, int, int]
    auroc_degenerate: bool = False


def prepare_fold_preprocessors(matrix: FeatureMatrix,
                               thresholds: tuple[float, float],
                               normalize: bool,
                               global_prep: bool = False) -> list[Preprocessor]:
    """One preprocessor per fold, each fitted without its held-out row."""
    n = matrix.values.shape[0]
    t_perf, t_subs = thresholds
    if global_prep:
        prep = fit_preprocessor(matrix.values, matrix.groups, t_perf, t_subs, normalize)
        return [prep] * n
    preps = []
    for i in range(n):
        keep = np.ones(n, dtype=bool)
        keep[i] = False
        preps.append(fit_preprocessor(matrix.values[keep], matrix.groups,
                                      t_perf, t_subs, normalize))
    return preps


def loocv_matrix(matrix: FeatureMatrix, y: np.ndarray, spec: ModelSpec,
                 thresholds: tuple[float, float] = DEFAULT_THRESHOLDS,
                 normalize: bool = False, global_prep: bool = False,
                 jobs: int = 1, preprocessors: list[Preprocessor] | None = None,
                 warning_sink: list | None = None) -> list[LooPrediction]:
    values = matrix.values
    y = np.asarray(y, dtype=int)
    n = values.shape[0]
    if n < 2:
        raise ValueError("leave-one-out needs at least 2 rows")
    preps = preprocessors
    if preps is None:
        preps = prepare_fold_preprocessors(matrix, thresholds, normalize, global_prep)

    def run_fold(i: int) -> LooPrediction:
        keep = np.ones(n, dtype=bool)
        keep[i] = False
        prep = preps[i]
        fold_spec = replace(spec, seed=mix_seed(spec.seed, i))
        model = train(fold_spec, prep.transform(values[keep]), y[keep])
        if warning_sink is not None and model.warnings:
            warning_sink.extend(f"fold {i}: {w}" for w in model.warnings)
        outcome = model.predict(prep.transform(values[i:i + 1])[0])
        return LooPrediction(matrix.row_ids[i], int(y[i]), outcome, i)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_fold, range(n)))
    return [run_fold(i) for i in range(n)]


def loocv(dataset: Dataset, spec: ModelSpec,
          thresholds: tuple[float, float] = DEFAULT_THRESHOLDS,
          normalize: bool = False, global_prep: bool = False,
          jobs: int = 1, warning_sink: list | None = None) -> list[LooPrediction]:
    matrix = assemble_feature_matrix(dataset)
    y = np.array([int(rec.final_grade) for rec in dataset.students])
    return loocv_matrix(matrix, y, spec, thresholds=thresholds,
                        normalize=normalize, global_prep=global_prep,
                        jobs=jobs, warning_sink=warning_sink)


def _correct_count(preds) -> int:
    return sum(1 for p in preds if p.outcome.grade == p.true_grade)


def accuracy(preds) -> float:
    return _correct_count(preds) / len(preds)


def mse(preds) -> float:
    # Integer accumulation keeps the histogram identity exact.
    ssd = sum((p.outcome.grade - p.true_grade) ** 2 for p in preds)
    return ssd / len(preds)


def distance_histogram(preds) -> tuple[int, int, int, int, int]:
    counts = [0] * N_GRADES
    for p in preds:
        counts[abs(p.outcome.grade - p.true_grade)] += 1
    return tuple(counts)


def f1_micro(preds) -> float:
    """Micro-averaged F1 from pooled per-class confusion counts."""
    tp = fp = fn = 0
    for grade in range(1, N_GRADES + 1):
        tp += sum(1 for p in preds if p.outcome.grade == grade and p.true_grade == grade)
        fp += sum(1 for p in preds if p.outcome.grade == grade and p.true_grade != grade)
        fn += sum(1 for p in preds if p.outcome.grade != grade and p.true_grade == grade)
    return 2 * tp / (2 * tp + fp + fn)


def micro_average_precision(preds) -> float:
    """AP over the pooled one-vs-rest (indicator, score) pairs, 5 per student.

    Ranking is by score descending; exact score ties keep (student index,
    class index) order.
    """
    n = len(preds)
    scores = np.empty(n * N_GRADES)
    labels = np.empty(n * N_GRADES, dtype=bool)
    for i, p in enumerate(preds):
        scores[i * N_GRADES:(i + 1) * N_GRADES] = p.outcome.class_scores
        labels[i * N_GRADES:(i + 1) * N_GRADES] = False
        labels[i * N_GRADES + p.true_grade - 1] = True
    student_idx = np.repeat(np.arange(n), N_GRADES)
    class_idx = np.tile(np.arange(N_GRADES), n)
    order = np.lexsort((class_idx, student_idx, -scores))
    hits = np.cumsum(labels[order])
    positions = np.flatnonzero(labels[order]) + 1
    return float(np.sum(hits[positions - 1] / positions) / n)


def auroc_correct(preds) -> tuple[float, bool]:
    """AUROC for "prediction exactly correct" scored by max class score.

    Scores are min-max rescaled over the run (a monotone map; recorded
    convention).  Computed with the Mann-Whitney rank statistic, ties
    counted 1/2.  If all predictions are correct or all incorrect the task
    is degenerate: returns (0.5, True).
    """
    raw = np.array([float(p.outcome.class_scores.max()) for p in preds])
    labels = np.array([p.outcome.grade == p.true_grade for p in preds])
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5, True
    span = raw.max() - raw.min()
    scores = (raw - raw.min()) / span if span > 0 else np.zeros_like(raw)
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j < scores.size and sorted_scores[j] == sorted_scores[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j - 1) + 1.0   # average rank, 1-based
        i = j
    u = float(ranks[labels].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg), False


def summarize(preds) -> EvalReport:
    """Compute all metrics and assert the internal identities."""
    n = len(preds)
    acc = accuracy(preds)
    err = mse(preds)
    hist = distance_histogram(preds)
    f1 = f1_micro(preds)
    auc, degenerate = auroc_correct(preds)
    assert f1 == acc, "micro-F1 must equal accuracy for single-label grades"
    assert sum(hist) == n, "distance histogram must cover every prediction"
    assert err == sum(d * d * h for d, h in enumerate(hist)) / n, \
        "MSE must match its distance-histogram decomposition"
    return EvalReport(n, acc, err, micro_average_precision(preds), auc, f1,
                      hist, degenerate)


def render_report(reports: dict[str, EvalReport]) -> str:
    """Markdown metric and distance tables, one row per model."""
    keys = [k for k in MODEL_ORDER if k in reports]
    keys += [k for k in sorted(reports) if k not in MODEL_ORDER]
    lines = [
        "## Leave-one-out metrics",
        "",
        "| Model | Accuracy | Mean Square Error | Average Precision (Micro) | AUROC | f1 score |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for key in keys:
        r = reports[key]
        name = DISPLAY_NAMES.get(key, key)
        flag = " (degenerate)" if r.auroc_degenerate else ""
        lines.append(f"| {name} | {100.0 * r.accuracy:.1f}% | {r.mse:.3f} "
                     f"| {r.micro_ap:.3f} | {r.auroc:.3f}{flag} | {r.f1_micro:.3f} |")
    lines += [
        "",
        "## Distance between predicted and actual grade",
        "",
        "| Model | 0 | 1 | 2 | 3 | 4 |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for key in keys:
        hist = reports[key].distance_histogram
        name = DISPLAY_NAMES.get(key, key)
        lines.append("| " + " | ".join([name, *[str(c) for c in hist]]) + " |")
    return "\n".join(lines) + "\n"


def write_predictions_csv(preds, path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment is not None:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["student_id", "true_grade", "predicted_grade",
                         "score_F", "score_D", "score_C", "score_B", "score_A"])
        for p in preds:
            writer.writerow([p.student_id,
                             Grade(p.true_grade).letter,
                             Grade(p.outcome.grade).letter,
                             *[f"{s:.10g}" for s in p.outcome.class_scores]])
