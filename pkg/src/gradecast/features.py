"""Feature extraction from a parsed dataset.

Five column families, concatenated in a fixed order:

* per-question performance, one binary column per question (ever correct)
* submissions per question, one count column per question
* response-time summary, 4 columns
* sessions per assignment, 4 columns
* gradebook scores, 5 columns (hw1..hw4, test1)

For Q questions that is 2Q + 13 columns.  A session is a maximal run of a
student's submissions within one assignment where adjacent timestamps are
at most two hours apart; response times are the gaps between adjacent
submissions inside a session, so they never exceed two hours.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import Dataset, StudentRecord, SubmissionEvent

SESSION_GAP_SECONDS = 7200       # adjacent tries more than 2 h apart start a new session
QUICK_RESPONSE_SECONDS = 12.0    # faster than 5 submissions per minute

GROUP_PERF = "perf"
GROUP_SUBS = "subs"
GROUP_RT = "rt"
GROUP_SESS = "sess"
GROUP_SCORE = "score"

RT_FEATURE_NAMES = ("rt:long_n", "rt:quick_n", "rt:long_f", "rt:quick_f")
SESSION_FEATURE_NAMES = tuple(f"sess:a{a}" for a in range(1, 5))
SCORE_FEATURE_NAMES = ("score:hw1", "score:hw2", "score:hw3", "score:hw4", "score:test1")


@dataclass(frozen=True)
class Session:
    student_id: str
    assignment_id: int
    events: tuple[SubmissionEvent, ...]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Student-by-feature matrix with per-column names and family tags."""

    row_ids: tuple[str, ...]
    names: tuple[str, ...]
    groups: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.row_ids), len(self.names)):
            raise ValueError("feature matrix shape disagrees with its labels")
        if len(self.groups) != len(self.names):
            raise ValueError("one group tag per column required")


def per_question_performance(dataset: Dataset) -> np.ndarray:
    """Binary matrix: 1 iff the student ever answered the question correctly."""
    out = np.zeros((len(dataset.students), dataset.n_questions))
    rows = dataset.student_rows
    for ev in dataset.events:
        if ev.correct:
            out[rows[ev.student_id], dataset.question_catalog[ev.question_id][1]] = 1.0
    return out


def submissions_per_question(dataset: Dataset) -> np.ndarray:
    """Count matrix of submissions per (student, question); 0 when untouched."""
    out = np.zeros((len(dataset.students), dataset.n_questions))
    rows = dataset.student_rows
    for ev in dataset.events:
        out[rows[ev.student_id], dataset.question_catalog[ev.question_id][1]] += 1.0
    return out


def segment_sessions(dataset: Dataset, student_id: str,
                     assignment_id: int) -> list[Session]:
    """Greedy time-ordered session segmentation for one student-assignment.

    A gap of exactly SESSION_GAP_SECONDS still belongs to the same session;
    only a strictly larger gap starts a new one.
    """
    if student_id not in dataset.student_rows:
        raise KeyError(student_id)
    events = [ev for ev in dataset.events_for(student_id)
              if ev.assignment_id == assignment_id]
    events.sort(key=lambda e: (e.timestamp, e.question_id, e.attempt_number))
    sessions: list[Session] = []
    current: list[SubmissionEvent] = []
    for ev in events:
        if current and ev.timestamp - current[-1].timestamp > SESSION_GAP_SECONDS:
            sessions.append(Session(student_id, assignment_id, tuple(current)))
            current = []
        current.append(ev)
    if current:
        sessions.append(Session(student_id, assignment_id, tuple(current)))
    return sessions


def sessions_per_assignment(dataset: Dataset) -> np.ndarray:
    out = np.zeros((len(dataset.students), 4))
    for i, rec in enumerate(dataset.students):
        for assignment in range(1, 5):
            out[i, assignment - 1] = len(segment_sessions(dataset, rec.student_id, assignment))
    return out


def response_times(dataset: Dataset, student_id: str) -> list[int]:
    """Within-session gaps between the student's adjacent submissions."""
    gaps: list[int] = []
    for assignment in range(1, 5):
        for session in segment_sessions(dataset, student_id, assignment):
            ts = [ev.timestamp for ev in session.events]
            gaps.extend(b - a for a, b in zip(ts, ts[1:]))
    return gaps


def response_time_features(dataset: Dataset) -> np.ndarray:
    """Per student: [long_count, quick_count, long_fraction, quick_fraction].

    "Long" is measured against mean + 2 standard deviations of all response
    times in the dataset (population statistics, strict >); "quick" is a
    response under 12 seconds (strict <).  Fractions are per student and 0
    for students with no response times.
    """
    per_student = [response_times(dataset, rec.student_id) for rec in dataset.students]
    out = np.zeros((len(dataset.students), 4))
    pooled = [t for gaps in per_student for t in gaps]
    if not pooled:
        return out
    arr = np.asarray(pooled, dtype=float)
    mu = float(arr.mean())
    sigma = float(np.sqrt(np.mean((arr - mu) ** 2)))
    long_cut = mu + 2.0 * sigma
    for i, gaps in enumerate(per_student):
        if not gaps:
            continue
        g = np.asarray(gaps, dtype=float)
        long_n = int(np.sum(g > long_cut))
        quick_n = int(np.sum(g < QUICK_RESPONSE_SECONDS))
        out[i] = (long_n, quick_n, long_n / g.size, quick_n / g.size)
    return out


def score_features(dataset: Dataset) -> np.ndarray:
    """Raw gradebook columns: hw1..hw4 then test1."""
    return np.array([[*rec.hw_scores, rec.test_score] for rec in dataset.students],
                    dtype=float)


def assemble_feature_matrix(dataset: Dataset) -> FeatureMatrix:
    """Concatenate all families into the canonical 2Q + 13 column layout."""
    q = dataset.n_questions
    blocks = [
        (per_question_performance(dataset), [f"perf:q{i}" for i in range(q)], GROUP_PERF),
        (submissions_per_question(dataset), [f"subs:q{i}" for i in range(q)], GROUP_SUBS),
        (response_time_features(dataset), list(RT_FEATURE_NAMES), GROUP_RT),
        (sessions_per_assignment(dataset), list(SESSION_FEATURE_NAMES), GROUP_SESS),
        (score_features(dataset), list(SCORE_FEATURE_NAMES), GROUP_SCORE),
    ]
    names: list[str] = []
    groups: list[str] = []
    for _, block_names, tag in blocks:
        names.extend(block_names)
        groups.extend([tag] * len(block_names))
    values = np.hstack([block for block, _, _ in blocks])
    row_ids = tuple(rec.student_id for rec in dataset.students)
    return FeatureMatrix(row_ids, tuple(names), tuple(groups), values)


def write_features_csv(matrix: FeatureMatrix, path,
                       header_comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment is not None:
            fh.write(f"# {header_comment}\n")
        fh.write(",".join(("student_id", *matrix.names)) + "\n")
        for sid, row in zip(matrix.row_ids, matrix.values):
            fh.write(",".join((sid, *[repr(float(v)) for v in row])) + "\n")
