"""Small builders shared across test modules."""
from __future__ import annotations

from gradecast.ingest import Grade, StudentRecord, SubmissionEvent, build_dataset


def event(student="s1", question="q1", assignment=1, timestamp=0,
          attempt=1, correct=False):
    return SubmissionEvent(student, question, assignment, timestamp,
                           attempt, correct)


def record(student="s1", hw=(100.0, 100.0, 100.0, 100.0), test=100.0, grade="A"):
    return StudentRecord(student, tuple(float(h) for h in hw), float(test),
                         Grade.from_letter(grade))


def dataset_from(events, records):
    return build_dataset(tuple(events), tuple(records))
