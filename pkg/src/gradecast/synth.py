"""Seeded synthetic-cohort generator.

Produces a submission log plus gradebook with the same shape as a real
course export: students with latent ability, questions with latent
difficulty, attempt-until-correct submission behaviour with per-type
attempt caps, session-structured timestamps, and letter grades cut to an
exact target distribution.

Streams are keyed per question and per student, so any one student's data
is reproducible without generating the rest of the cohort.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import Grade, StudentRecord, SubmissionEvent, write_gradebook, write_submissions
from .rng import substream

DEFAULT_GRADE_COUNTS = (26, 10, 22, 72, 119)   # F, D, C, B, A

COURSE_START = 1_357_000_000        # early-January epoch seconds
ASSIGNMENT_SPACING = 9 * 86400      # four assignments fit in six weeks
START_JITTER = 3 * 86400            # students begin up to 3 days late
SESSION_BREAK = 10_800              # >= 3 h between sessions; also > the
                                    # 2 h gap that ends a session downstream
SESSION_BREAK_SCALE = 3_600.0
GAP_LOG_MEDIAN = np.log(40.0)       # in-session gaps: right-skewed, ~40 s
GAP_LOG_SIGMA = 1.0
MAX_GAP = 7_200                     # in-session gap may not end the session
TEST_NOISE = 0.3

_QUESTION_STREAM = 1
_STUDENT_STREAM = 2


class InfeasibleConfig(ValueError):
    """Cohort parameters that cannot produce a valid cohort."""


def _logistic(x):
    # tanh form avoids overflow for large negative x
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class CohortConfig:
    n_students: int = 249
    n_questions: int = 409
    n_assignments: int = 4
    boolean_question_fraction: float = 0.2
    max_attempts_boolean: int = 1
    max_attempts_other: int = 3
    grade_counts: tuple[int, int, int, int, int] = DEFAULT_GRADE_COUNTS
    ability_spread: float = 1.5
    difficulty_spread: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_students < 1:
            raise InfeasibleConfig("n_students must be at least 1")
        if self.n_assignments != 4:
            raise InfeasibleConfig("exactly 4 assignments are supported")
        if self.n_questions < self.n_assignments:
            raise InfeasibleConfig("need at least one question per assignment")
        if not 0.0 <= self.boolean_question_fraction <= 1.0:
            raise InfeasibleConfig("boolean_question_fraction must lie in [0, 1]")
        if self.max_attempts_boolean < 1 or self.max_attempts_other < 1:
            raise InfeasibleConfig("attempt caps must be at least 1")
        counts = tuple(int(c) for c in self.grade_counts)
        if len(counts) != 5 or any(c < 0 for c in counts):
            raise InfeasibleConfig("grade_counts must be 5 non-negative integers")
        if sum(counts) != self.n_students:
            raise InfeasibleConfig(
                f"grade_counts sum to {sum(counts)}, expected {self.n_students}")
        object.__setattr__(self, "grade_counts", counts)
        if self.ability_spread < 0 or self.difficulty_spread < 0:
            raise InfeasibleConfig("spreads must be non-negative")


@dataclass(frozen=True)
class QuestionInfo:
    question_id: str
    assignment_id: int
    difficulty: float
    is_boolean: bool
    max_attempts: int


def _pad_ids(prefix: str, count: int) -> list[str]:
    width = len(str(count))
    return [f"{prefix}{i:0{width}d}" for i in range(1, count + 1)]


def question_bank(config: CohortConfig) -> tuple[QuestionInfo, ...]:
    """Latent difficulties and attempt caps, keyed off the config seed."""
    ids = _pad_ids("q", config.n_questions)
    blocks = np.array_split(np.arange(config.n_questions), config.n_assignments)
    assignment_of = np.empty(config.n_questions, dtype=int)
    for a, block in enumerate(blocks, start=1):
        assignment_of[block] = a
    bank = []
    for q, qid in enumerate(ids):
        rng = substream(config.seed, _QUESTION_STREAM, q)
        difficulty = config.difficulty_spread * float(rng.standard_normal())
        is_boolean = bool(rng.random() < config.boolean_question_fraction)
        cap = config.max_attempts_boolean if is_boolean else config.max_attempts_other
        bank.append(QuestionInfo(qid, int(assignment_of[q]), difficulty,
                                 is_boolean, cap))
    return tuple(bank)


@dataclass(frozen=True, eq=False)
class _StudentDraws:
    ability: float
    test_noise: float
    attempt_rolls: np.ndarray = field(repr=False)   # (n_questions, max cap)


def _student_draws(config: CohortConfig, student_index: int, rng) -> _StudentDraws:
    ability = config.ability_spread * float(rng.standard_normal())
    noise = TEST_NOISE * float(rng.standard_normal())
    cap = max(config.max_attempts_boolean, config.max_attempts_other)
    rolls = rng.random((config.n_questions, cap))
    return _StudentDraws(ability, noise, rolls)


def _attempt_outcomes(p_success: float, rolls: np.ndarray, cap: int) -> list[bool]:
    """Correct flags for one (student, question): stop on success or cap."""
    outcomes = []
    for k in range(cap):
        success = bool(rolls[k] < p_success)
        outcomes.append(success)
        if success:
            break
    return outcomes


def generate_cohort(config: CohortConfig):
    """Return (events, records): a full synthetic course.

    Every student attempts every question.  Grades are assigned by ranking
    students on the 60/40 test/homework blend and cutting the ranking at
    the configured grade counts, lowest scores first.
    """
    bank = question_bank(config)
    student_ids = _pad_ids("s", config.n_students)
    by_assignment: dict[int, list[int]] = {a: [] for a in range(1, config.n_assignments + 1)}
    for q, info in enumerate(bank):
        by_assignment[info.assignment_id].append(q)

    events: list[SubmissionEvent] = []
    hw_scores = np.zeros((config.n_students, config.n_assignments))
    test_scores = np.zeros(config.n_students)

    for s, sid in enumerate(student_ids):
        rng = substream(config.seed, _STUDENT_STREAM, s)
        draws = _student_draws(config, s, rng)
        test_scores[s] = 100.0 * float(_logistic(draws.ability + draws.test_noise))

        for a in range(1, config.n_assignments + 1):
            question_indices = by_assignment[a]
            attempt_plan = []   # (question index, correct flags)
            for q in question_indices:
                info = bank[q]
                p = float(_logistic(draws.ability - info.difficulty))
                flags = _attempt_outcomes(p, draws.attempt_rolls[q], info.max_attempts)
                attempt_plan.append((q, flags))

            solved = sum(1 for _, flags in attempt_plan if flags[-1])
            hw_scores[s, a - 1] = 100.0 * solved / len(question_indices)

            n_events = sum(len(flags) for _, flags in attempt_plan)
            n_sessions = int(rng.integers(1, 4))
            jitter = int(rng.integers(0, START_JITTER))
            flat = [(q, k, correct)
                    for q, flags in attempt_plan
                    for k, correct in enumerate(flags, start=1)]
            chunks = np.array_split(np.arange(n_events), n_sessions)

            t = COURSE_START + (a - 1) * ASSIGNMENT_SPACING + jitter
            started = False
            for chunk in chunks:
                if chunk.size == 0:
                    continue
                if started:
                    t += SESSION_BREAK + int(rng.exponential(SESSION_BREAK_SCALE))
                started = True
                for offset, idx in enumerate(chunk):
                    if offset > 0:
                        gap = int(np.clip(rng.lognormal(GAP_LOG_MEDIAN, GAP_LOG_SIGMA),
                                          1, MAX_GAP))
                        t += gap
                    q, attempt_number, correct = flat[idx]
                    events.append(SubmissionEvent(sid, bank[q].question_id, a,
                                                  t, attempt_number, correct))

    final_numeric = 0.6 * test_scores + 0.4 * hw_scores.mean(axis=1)
    grades = _assign_grades(final_numeric, config.grade_counts)

    records = tuple(
        StudentRecord(student_ids[s],
                      tuple(float(x) for x in hw_scores[s]),
                      float(test_scores[s]),
                      Grade(grades[s]))
        for s in range(config.n_students))
    return tuple(events), records


def _assign_grades(final_numeric: np.ndarray, counts) -> np.ndarray:
    """Exact target distribution: rank ascending, cut at cumulative counts."""
    order = np.argsort(final_numeric, kind="stable")
    grades = np.empty(final_numeric.size, dtype=int)
    start = 0
    for grade, count in enumerate(counts, start=1):
        grades[order[start:start + count]] = grade
        start += count
    return grades


def write_cohort(config: CohortConfig, out_dir, header_comment: str | None = None):
    """Write submissions.csv and gradebook.csv under out_dir; return paths."""
    import os

    events, records = generate_cohort(config)
    os.makedirs(out_dir, exist_ok=True)
    sub_path = os.path.join(out_dir, "submissions.csv")
    gb_path = os.path.join(out_dir, "gradebook.csv")
    write_submissions(events, sub_path, header_comment=header_comment)
    write_gradebook(records, gb_path, header_comment=header_comment)
    return sub_path, gb_path
