import numpy as np
import pytest

from gradecast.features import assemble_feature_matrix
from gradecast.ingest import build_dataset
from gradecast.synth import CohortConfig, generate_cohort

# One line per end-to-end acceptance check, echoed after the run so the
# checklist is visible even under pytest's output capture.
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.write_sep("=", "acceptance checklist")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_cohort():
    """40-student cohort shared by read-only tests."""
    config = CohortConfig(n_students=40, n_questions=60,
                          grade_counts=(5, 3, 6, 11, 15), seed=9)
    events, records = generate_cohort(config)
    return build_dataset(events, records)


@pytest.fixture(scope="session")
def small_matrix(small_cohort):
    matrix = assemble_feature_matrix(small_cohort)
    y = np.array([int(r.final_grade) for r in small_cohort.students])
    return matrix, y
