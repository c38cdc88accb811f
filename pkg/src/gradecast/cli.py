"""Command-line front end: synth, extract, evaluate, sweep.

Exit codes: 0 all requested work completed; 2 argument or input-parsing
failure; 3 a model failed during evaluation (partial results are still
written).  Warnings go to stderr.  Every CSV artifact starts with a
``# run-config:`` comment and report.md with an HTML comment carrying the
resolved settings, so any output is reproducible from its own header.
The header omits the thread count, which cannot affect results.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import evaluation, selection
from .features import assemble_feature_matrix, write_features_csv
from .ingest import IngestError, load_dataset
from .models import ModelSpec
from .synth import CohortConfig, InfeasibleConfig, write_cohort

MODEL_CHOICES = ("svm", "linreg", "svr", "tree", "nb", "knn",
                 "random", "majority", "all")
# "all" expands to the standard comparison set; svr stays opt-in.
ALL_MODELS = ("svm", "linreg", "tree", "nb", "knn", "random", "majority")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL_FAILURE = 3

_UNSET = None


def _thresholds_arg(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers, e.g. 0.02,0.05")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grade_counts_arg(text: str) -> tuple[int, ...]:
    try:
        counts = tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if len(counts) != 5:
        raise argparse.ArgumentTypeError("expected five comma-separated counts (F,D,C,B,A)")
    return counts


def _models_arg(text: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    if not names:
        raise argparse.ArgumentTypeError("no model named")
    for name in names:
        if name not in MODEL_CHOICES:
            raise argparse.ArgumentTypeError(
                f"unknown model {name!r}; choose from {', '.join(MODEL_CHOICES)}")
    expanded: list[str] = []
    for name in names:
        for resolved in (ALL_MODELS if name == "all" else (name,)):
            if resolved not in expanded:
                expanded.append(resolved)
    return tuple(expanded)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradecast",
        description="Predict final course grades from early homework submission logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_UNSET,
                        help="master seed (default 0)")
    common.add_argument("--config", help="JSON file with the same keys as the flags; "
                                         "explicit flags take precedence")
    common.add_argument("--out-dir", default=_UNSET, help="output directory (default .)")

    p_synth = sub.add_parser("synth", parents=[common],
                             help="generate a synthetic cohort")
    p_synth.add_argument("--students", type=int, default=_UNSET)
    p_synth.add_argument("--questions", type=int, default=_UNSET)
    p_synth.add_argument("--boolean-fraction", type=float, default=_UNSET)
    p_synth.add_argument("--ability-spread", type=float, default=_UNSET)
    p_synth.add_argument("--difficulty-spread", type=float, default=_UNSET)
    p_synth.add_argument("--grade-counts", type=_grade_counts_arg, default=_UNSET,
                         help="five comma-separated counts for F,D,C,B,A")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--submissions", default=_UNSET, help="submission log CSV")
    inputs.add_argument("--gradebook", default=_UNSET, help="gradebook CSV")

    p_extract = sub.add_parser("extract", parents=[common, inputs],
                               help="write the feature matrix as features.csv")

    hyper = argparse.ArgumentParser(add_help=False)
    hyper.add_argument("--C", dest="c", type=float, default=_UNSET,
                       help="SVM / SVR box constraint (default 1.0)")
    hyper.add_argument("--k", type=int, default=_UNSET, help="KNN neighbours (default 5)")
    hyper.add_argument("--epsilon", type=float, default=_UNSET,
                       help="SVR insensitive-tube width (default 0.1)")
    hyper.add_argument("--thresholds", type=_thresholds_arg, default=_UNSET,
                       help="variance cutoffs t_perf,t_subs (default 0.02,0.05)")
    hyper.add_argument("--normalize", action="store_true", default=_UNSET,
                       help="min-max normalize kept columns per fold")
    hyper.add_argument("--global-prep", action="store_true", default=_UNSET,
                       help="fit selection/normalization once on all rows "
                            "instead of per fold")
    hyper.add_argument("--jobs", type=int, default=_UNSET,
                       help="fold-level worker threads (default 1)")

    p_eval = sub.add_parser("evaluate", parents=[common, inputs, hyper],
                            help="leave-one-out evaluation -> report.md + predictions")
    p_eval.add_argument("--model", type=_models_arg, default=_UNSET,
                        help="comma-separated subset of "
                             f"{', '.join(MODEL_CHOICES)} (default all)")

    p_sweep = sub.add_parser("sweep", parents=[common, inputs, hyper],
                             help="variance-threshold sweep for one model")
    p_sweep.add_argument("--model", type=_models_arg, default=_UNSET,
                         help="single model to sweep (default svm)")

    return parser


class _Settings:
    """Flag > config file > built-in default, recording resolved values."""

    def __init__(self, args: argparse.Namespace):
        self.config = {}
        if getattr(args, "config", None):
            try:
                with open(args.config, encoding="utf-8") as fh:
                    self.config = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config {args.config}: {exc}") from exc
            if not isinstance(self.config, dict):
                raise UsageError(f"config {args.config} must hold a JSON object")
        self.args = args
        self.resolved: dict[str, object] = {}

    def get(self, key: str, default):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.config.get(key, default)
        self.resolved[key] = value
        return value

    def header(self, command: str) -> str:
        payload = dict(self.resolved)
        payload.pop("jobs", None)
        payload["command"] = command
        return "run-config: " + json.dumps(_plain(payload), sort_keys=True)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


class UsageError(Exception):
    pass


def _as_models(value) -> tuple[str, ...]:
    try:
        if isinstance(value, str):
            return _models_arg(value)
        return _models_arg(",".join(value))
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None


def _as_thresholds(value) -> tuple[float, float]:
    if isinstance(value, str):
        try:
            return _thresholds_arg(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    pair = tuple(float(v) for v in value)
    if len(pair) != 2:
        raise UsageError("thresholds must be a pair t_perf,t_subs")
    return pair


def _load_inputs(settings: _Settings):
    sub_path = settings.get("submissions", None)
    gb_path = settings.get("gradebook", None)
    if not sub_path or not gb_path:
        raise UsageError("--submissions and --gradebook are required")
    for path in (sub_path, gb_path):
        if not os.path.exists(path):
            raise UsageError(f"input file not found: {path}")
    try:
        dataset, warnings = load_dataset(sub_path, gb_path)
    except IngestError as exc:
        raise UsageError(str(exc)) from exc
    if warnings:
        print(f"warning: {warnings} submission rows re-numbered during ingest",
              file=sys.stderr)
    return dataset


def _model_spec(name: str, settings: _Settings, seed: int) -> ModelSpec:
    c = float(settings.get("c", 1.0))
    k = int(settings.get("k", 5))
    epsilon = float(settings.get("epsilon", 0.1))
    if name == "svm":
        return ModelSpec(kind="svm", C=c, seed=seed)
    if name == "linreg":
        return ModelSpec(kind="regression", regression_backend="least_squares", seed=seed)
    if name == "svr":
        return ModelSpec(kind="regression", regression_backend="epsilon_svr",
                         C=c, epsilon=epsilon, seed=seed)
    if name == "tree":
        return ModelSpec(kind="tree", seed=seed)
    if name == "nb":
        return ModelSpec(kind="nb", seed=seed)
    if name == "knn":
        return ModelSpec(kind="knn", k=k, seed=seed)
    if name == "random":
        return ModelSpec(kind="random", seed=seed)
    if name == "majority":
        return ModelSpec(kind="majority", seed=seed)
    raise UsageError(f"unknown model {name!r}")


def cmd_synth(settings: _Settings) -> int:
    out_dir = settings.get("out_dir", ".") or "."
    counts = settings.get("grade_counts", (26, 10, 22, 72, 119))
    if isinstance(counts, str):
        try:
            counts = _grade_counts_arg(counts)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
    try:
        config = CohortConfig(
            n_students=int(settings.get("students", 249)),
            n_questions=int(settings.get("questions", 409)),
            boolean_question_fraction=float(settings.get("boolean_fraction", 0.2)),
            ability_spread=float(settings.get("ability_spread", 1.5)),
            difficulty_spread=float(settings.get("difficulty_spread", 1.0)),
            grade_counts=tuple(int(c) for c in counts),
            seed=int(settings.get("seed", 0)),
        )
    except InfeasibleConfig as exc:
        raise UsageError(str(exc)) from exc
    header = settings.header("synth")
    sub_path, gb_path = write_cohort(config, out_dir, header_comment=header)
    print(f"wrote {sub_path} and {gb_path} "
          f"({config.n_students} students, {config.n_questions} questions)")
    return EXIT_OK


def cmd_extract(settings: _Settings) -> int:
    dataset = _load_inputs(settings)
    out_dir = settings.get("out_dir", ".") or "."
    settings.get("seed", 0)
    matrix = assemble_feature_matrix(dataset)
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, "features.csv")
    write_features_csv(matrix, out_path, header_comment=settings.header("extract"))
    rows, cols = matrix.values.shape
    print(f"wrote {out_path}: {rows} rows x {cols} feature columns")
    return EXIT_OK


def cmd_evaluate(settings: _Settings) -> int:
    dataset = _load_inputs(settings)
    names = _as_models(settings.get("model", ALL_MODELS))
    thresholds = _as_thresholds(settings.get("thresholds", (0.02, 0.05)))
    normalize = bool(settings.get("normalize", False))
    global_prep = bool(settings.get("global_prep", False))
    jobs = int(settings.get("jobs", 1))
    seed = int(settings.get("seed", 0))
    out_dir = settings.get("out_dir", ".") or "."
    specs = {name: _model_spec(name, settings, seed) for name in names}
    header = settings.header("evaluate")
    os.makedirs(out_dir, exist_ok=True)

    matrix = assemble_feature_matrix(dataset)
    y = np.array([int(rec.final_grade) for rec in dataset.students])
    preprocessors = evaluation.prepare_fold_preprocessors(
        matrix, thresholds, normalize, global_prep)

    reports: dict[str, evaluation.EvalReport] = {}
    failures: dict[str, str] = {}
    for name in names:
        sink: list[str] = []
        try:
            preds = evaluation.loocv_matrix(
                matrix, y, specs[name], thresholds=thresholds, normalize=normalize,
                global_prep=global_prep, jobs=jobs, preprocessors=preprocessors,
                warning_sink=sink)
            reports[name] = evaluation.summarize(preds)
        except Exception as exc:
            failures[name] = f"{type(exc).__name__}: {exc}"
            print(f"{name}: failed ({failures[name]})", file=sys.stderr)
            continue
        finally:
            for line in sink:
                print(f"warning: {name}: {line}", file=sys.stderr)
        suffix = "" if len(names) == 1 else f"_{name}"
        pred_path = os.path.join(out_dir, f"predictions{suffix}.csv")
        evaluation.write_predictions_csv(preds, pred_path, header_comment=header)
        r = reports[name]
        print(f"{name}: accuracy {100.0 * r.accuracy:.1f}%, mse {r.mse:.3f}")

    report_path = os.path.join(out_dir, "report.md")
    body = evaluation.render_report(reports) if reports else "(no model completed)\n"
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(f"<!-- {header} -->\n\n")
        fh.write(body)
        if failures:
            fh.write("\n## Failed models\n\n")
            for name in names:
                if name in failures:
                    fh.write(f"- {name}: {failures[name]}\n")
    print(f"wrote {report_path}")
    return EXIT_MODEL_FAILURE if failures else EXIT_OK


def cmd_sweep(settings: _Settings) -> int:
    dataset = _load_inputs(settings)
    names = _as_models(settings.get("model", ("svm",)))
    if len(names) != 1:
        raise UsageError("sweep takes exactly one model")
    normalize = bool(settings.get("normalize", False))
    jobs = int(settings.get("jobs", 1))
    seed = int(settings.get("seed", 0))
    out_dir = settings.get("out_dir", ".") or "."
    spec = _model_spec(names[0], settings, seed)
    header = settings.header("sweep")

    try:
        result = selection.threshold_sweep(dataset, spec, normalize=normalize, jobs=jobs)
    except selection.SweepFailure as exc:
        print(f"sweep failed at thresholds {exc.thresholds}: {exc.__cause__}",
              file=sys.stderr)
        return EXIT_MODEL_FAILURE

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "sweep.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        fh.write("t_perf,t_subs,accuracy,winner\n")
        for combo, acc in result.accuracies.items():
            flag = 1 if combo == result.winner else 0
            fh.write(f"{combo[0]:.2f},{combo[1]:.2f},{repr(float(acc))},{flag}\n")

    for combo, acc in result.accuracies.items():
        star = " *" if combo == result.winner else ""
        print(f"t_perf={combo[0]:.2f} t_subs={combo[1]:.2f} "
              f"accuracy={100.0 * acc:.1f}%{star}")

    matrix = assemble_feature_matrix(dataset)
    mask = selection.apply_variance_threshold(matrix, *result.winner)
    mask_path = os.path.join(out_dir, "mask.json")
    selection.write_mask_json(mask, matrix.names, mask_path)
    print(f"wrote {csv_path} and {mask_path}")
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _Settings(args)
        return _COMMANDS[args.command](settings)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
