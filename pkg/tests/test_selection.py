import numpy as np
import pytest

import gradecast.evaluation
from gradecast.features import assemble_feature_matrix
from gradecast.models import ModelSpec
from gradecast.selection import (
    SWEEP_THRESHOLDS,
    SweepFailure,
    apply_mask,
    apply_variance_threshold,
    column_variance,
    fit_preprocessor,
    minmax_normalize,
    threshold_sweep,
    variance_mask,
    write_mask_json,
)
from helpers import dataset_from, event, record
from oracles import variance_oracle


def matrix_of(values, groups):
    values = np.asarray(values, dtype=float)
    names = [f"{g}:c{j}" for j, g in enumerate(groups)]
    from gradecast.features import FeatureMatrix
    ids = tuple(f"s{i}" for i in range(values.shape[0]))
    return FeatureMatrix(ids, tuple(names), tuple(groups), values)


class TestVariance:
    def test_binary_three_quarters(self):
        v = column_variance(np.array([[1.0], [1.0], [1.0], [0.0]]), 0)
        assert v == 0.1875

    def test_constant_column(self):
        assert column_variance(np.array([[7.0], [7.0]]), 0) == 0.0

    def test_unit_deviations(self):
        assert column_variance(np.array([[0.0], [2.0]]), 0) == 1.0

    def test_matches_loop_oracle_on_random_matrices(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            values = rng.integers(0, 4, size=(int(rng.integers(2, 10)),
                                              int(rng.integers(1, 8)))).astype(float)
            expected = variance_oracle(values)
            got = [column_variance(values, j) for j in range(values.shape[1])]
            assert np.allclose(got, expected, rtol=0, atol=1e-12)


class TestThresholding:
    def test_all_ones_removed_even_at_zero(self):
        fm = matrix_of([[1, 0], [1, 1]], ["perf", "perf"])
        mask = apply_variance_threshold(fm, 0.0, 0.0)
        assert mask.kept.tolist() == [False, True]

    def test_binary_p99_removed_at_002(self):
        column = [[1.0]] * 99 + [[0.0]]
        fm = matrix_of(column, ["perf"])
        assert abs(column_variance(fm.values, 0) - 0.0099) < 1e-12
        assert apply_variance_threshold(fm, 0.02, 0.0).kept.tolist() == [False]
        assert apply_variance_threshold(fm, 0.0, 0.0).kept.tolist() == [True]

    def test_only_performance_and_submission_blocks_filtered(self):
        fm = matrix_of([[1, 1, 1, 1, 1]] * 3,
                       ["perf", "subs", "rt", "sess", "score"])
        mask = apply_variance_threshold(fm, 0.9, 0.9)
        assert mask.kept.tolist() == [False, False, True, True, True]

    def test_blocks_use_their_own_thresholds(self):
        # variance of [1,0] is 0.25: keep iff threshold < 0.25, strictly.
        fm = matrix_of([[1, 1], [0, 0]], ["perf", "subs"])
        assert apply_variance_threshold(fm, 0.25, 0.2).kept.tolist() == [False, True]
        assert apply_variance_threshold(fm, 0.2, 0.25).kept.tolist() == [True, False]

    def test_monotone_in_thresholds(self):
        rng = np.random.default_rng(77)
        values = rng.random((12, 9))
        groups = ["perf"] * 4 + ["subs"] * 4 + ["score"]
        prev = None
        for t in (0.0, 0.02, 0.05, 0.2):
            kept = variance_mask(values, tuple(groups), t, t)
            if prev is not None:
                assert np.all(kept <= prev)
            prev = kept


class TestNormalization:
    def test_linear_rescale(self):
        fm = matrix_of([[0.0], [50.0], [100.0]], ["score"])
        out = minmax_normalize(fm)
        assert out.values[:, 0].tolist() == [0.0, 0.5, 1.0]

    def test_constant_column_maps_to_zero(self):
        fm = matrix_of([[7.0], [7.0]], ["score"])
        assert minmax_normalize(fm).values.tolist() == [[0.0], [0.0]]

    def test_binary_columns_are_fixed_points(self):
        fm = matrix_of([[0, 1], [1, 0], [1, 1]], ["perf", "perf"])
        assert np.array_equal(minmax_normalize(fm).values, fm.values)

    def test_idempotent_on_own_output(self):
        rng = np.random.default_rng(3)
        fm = matrix_of(rng.random((6, 4)) * 30, ["score"] * 4)
        once = minmax_normalize(fm)
        twice = minmax_normalize(once)
        assert np.array_equal(once.values, twice.values)

    def test_commutes_with_row_permutation(self):
        rng = np.random.default_rng(4)
        values = rng.random((8, 5)) * 10
        groups = ["perf", "subs", "rt", "sess", "score"]
        fm = matrix_of(values, groups)
        perm = rng.permutation(8)
        fm_perm = matrix_of(values[perm], groups)
        direct = minmax_normalize(apply_mask(fm, apply_variance_threshold(fm, 0.01, 0.01)))
        swapped = minmax_normalize(apply_mask(fm_perm,
                                              apply_variance_threshold(fm_perm, 0.01, 0.01)))
        assert np.array_equal(direct.values[perm], swapped.values)


class TestPreprocessor:
    def test_transform_masks_then_scales(self):
        values = np.array([[0.0, 5.0, 1.0], [0.0, 15.0, 3.0]])
        prep = fit_preprocessor(values, ("perf", "score", "score"), 0.0, 0.0, True)
        out = prep.transform(values)
        assert out.shape == (2, 2)
        assert out.tolist() == [[0.0, 0.0], [1.0, 1.0]]

    def test_held_out_rows_are_not_clamped(self):
        train = np.array([[0.0], [10.0]])
        prep = fit_preprocessor(train, ("score",), 0.0, 0.0, True)
        assert prep.transform(np.array([[20.0]]))[0, 0] == 2.0
        assert prep.transform(np.array([[-10.0]]))[0, 0] == -1.0

    def test_without_normalization_values_pass_through(self):
        train = np.array([[0.0, 3.0], [1.0, 9.0]])
        prep = fit_preprocessor(train, ("perf", "score"), 0.0, 0.0, False)
        assert np.array_equal(prep.transform(train), train)


class TestSweep:
    def test_four_entries_and_tie_goes_to_smallest(self, small_cohort):
        result = threshold_sweep(small_cohort, ModelSpec(kind="majority"))
        assert len(result.accuracies) == 4
        assert set(result.accuracies) == set(SWEEP_THRESHOLDS)
        # Majority ignores features entirely, so all four accuracies tie.
        assert len(set(result.accuracies.values())) == 1
        assert result.winner == (0.00, 0.00)

    def test_model_error_is_tagged_with_thresholds(self, small_cohort, monkeypatch):
        def boom(spec, X, y):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(gradecast.evaluation, "train", boom)
        with pytest.raises(SweepFailure) as err:
            threshold_sweep(small_cohort, ModelSpec(kind="majority"))
        assert err.value.thresholds == SWEEP_THRESHOLDS[0]

    def test_near_constant_cohort_drops_below_2q(self):
        # 30% of questions are solved first-try by everyone, so both their
        # performance and submission columns are exactly constant.
        n_students, n_questions = 12, 30
        constant = set(range(9))
        events, records = [], []
        for s in range(n_students):
            sid = f"s{s:02d}"
            records.append(record(student=sid, grade="A" if s % 2 else "B"))
            for q in range(n_questions):
                qid = f"q{q:02d}"
                assignment = 1 + q % 4
                t = 100000 * s + 100 * q
                if q in constant:
                    events.append(event(sid, qid, assignment, t, 1, True))
                elif s % 3 == 0:
                    events.append(event(sid, qid, assignment, t, 1, False))
                    events.append(event(sid, qid, assignment, t + 30, 2, True))
                else:
                    events.append(event(sid, qid, assignment, t, 1, s % 2 == 0))
        ds = dataset_from(events, records)
        fm = assemble_feature_matrix(ds)
        assert fm.values.shape[1] == 2 * n_questions + 13

        result = threshold_sweep(ds, ModelSpec(kind="majority"))
        mask = apply_variance_threshold(fm, *result.winner)
        kept = int(mask.kept.sum())
        assert kept < 2 * n_questions

        variances = variance_oracle(fm.values)
        t_perf, t_subs = result.winner
        for j, (g, v) in enumerate(zip(fm.groups, variances)):
            if g == "perf":
                assert mask.kept[j] == (v > t_perf)
            elif g == "subs":
                assert mask.kept[j] == (v > t_subs)
            else:
                assert mask.kept[j]


class TestMaskJson:
    def test_schema_is_pure_json(self, tmp_path, small_cohort):
        import json

        fm = assemble_feature_matrix(small_cohort)
        mask = apply_variance_threshold(fm, 0.02, 0.05)
        out = tmp_path / "mask.json"
        write_mask_json(mask, fm.names, out)
        payload = json.loads(out.read_text())
        assert set(payload) == {"t_perf", "t_subs", "kept"}
        assert payload["t_perf"] == 0.02
        assert payload["t_subs"] == 0.05
        assert payload["kept"] == [n for n, k in zip(fm.names, mask.kept) if k]
