"""Early course-grade prediction from homework submission logs.

Pipeline: ingest raw submission/gradebook CSVs, extract per-student
features from the first weeks of activity, select features by variance
thresholds, train small from-scratch classifiers, and score them with
leave-one-out cross-validation.  A seeded synthetic-cohort generator
provides desk-scale data with a known grade distribution.
"""
from .evaluation import EvalReport, LooPrediction, loocv, render_report, summarize
from .features import FeatureMatrix, assemble_feature_matrix
from .ingest import Dataset, Grade, StudentRecord, SubmissionEvent, load_dataset
from .models import ModelSpec, PredictionOutcome, train
from .selection import apply_variance_threshold, threshold_sweep
from .synth import CohortConfig, generate_cohort, write_cohort

__version__ = "0.1.0"

__all__ = [
    "CohortConfig",
    "Dataset",
    "EvalReport",
    "FeatureMatrix",
    "Grade",
    "LooPrediction",
    "ModelSpec",
    "PredictionOutcome",
    "StudentRecord",
    "SubmissionEvent",
    "apply_variance_threshold",
    "assemble_feature_matrix",
    "generate_cohort",
    "load_dataset",
    "loocv",
    "render_report",
    "summarize",
    "threshold_sweep",
    "train",
    "write_cohort",
    "__version__",
]
