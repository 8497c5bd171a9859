"""Command-line entry point binding corpus, features, classify, and eval
into reproducible batch workflows.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.
Every run echoes its resolved configuration (including the seed) to stderr
and writes artifacts atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .classify import (
    CLASSIFIER_ALIASES,
    FORMAT_VERSION,
    make_spec,
    predict_records,
    save_model,
    load_model,
    train_model,
)
from .corpus import LabeledCorpus, load_corpus, record_to_dict, sample_one_per_user
from .errors import ConfigError, TweetSpamError
from .evaluate import (
    bench_features,
    cross_validate,
    expand_grid,
    grid_result_to_dict,
    grid_search,
    report_to_dict,
)
from .features import (
    CHI2_FRACTION,
    DEFAULT_MIN_DF,
    ResourceBundle,
    default_resources,
    fit_pipeline,
    parse_feature_config,
    prepare_records,
)
from .serialize import atomic_write_text, canonical_json

DEFAULT_SEED = 42
DEFAULT_K = 10
DEFAULT_FEATURES = "user,ngram:bi+tri:tf"  # best combination on both corpora
DEFAULT_CLASSIFIER = "random_forest"
LEXICON_DIR_ENV = "TWEETSPAM_LEXICONS"


class UsageError(Exception):
    """Flag/argument problems; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # collect instead of argparse's exit(2)
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    corpus: str | None = None
    model: str | None = None
    input: str | None = None
    output: str | None = None
    report: str | None = None
    grid: str | None = None
    features: str = DEFAULT_FEATURES
    classifier: str = DEFAULT_CLASSIFIER
    params: dict = field(default_factory=dict)
    k: int = DEFAULT_K
    seed: int = DEFAULT_SEED
    tune_fraction: float = 0.2
    min_df: int = DEFAULT_MIN_DF
    chi2_fraction: float = CHI2_FRACTION
    repetitions: int = 5
    strict: bool = True
    sample_users: bool = False
    final_cv: bool = True
    include_tuning_in_final: bool = False
    timings: bool = False
    lexicon_dir: str | None = None
    threads: int = 1

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "corpus": self.corpus,
            "model": self.model,
            "input": self.input,
            "output": self.output,
            "report": self.report,
            "grid": self.grid,
            "features": self.features,
            "classifier": self.classifier,
            "params": self.params,
            "k": self.k,
            "seed": self.seed,
            "tune_fraction": self.tune_fraction,
            "min_df": self.min_df,
            "chi2_fraction": self.chi2_fraction,
            "repetitions": self.repetitions,
            "strict": self.strict,
            "sample_users": self.sample_users,
            "final_cv": self.final_cv,
            "include_tuning_in_final": self.include_tuning_in_final,
            "timings": self.timings,
            "lexicon_dir": self.lexicon_dir,
            "threads": self.threads,
        }


_REQUIRED_PATHS = {
    "ingest": ("input", "output"),
    "train": ("corpus", "model"),
    "predict": ("model", "input", "output"),
    "cv": ("corpus", "report"),
    "gridsearch": ("corpus", "grid", "report"),
    "bench": ("corpus", "report"),
}

_NEEDS_FEATURES = ("train", "cv", "gridsearch")
_NEEDS_CLASSIFIER = ("train", "cv", "gridsearch")


def validate_config(config: RunConfig) -> list[str]:
    """Collect every configuration problem instead of failing fast."""
    errors: list[str] = []
    for name in _REQUIRED_PATHS.get(config.command, ()):
        if not getattr(config, name):
            errors.append(f"--{name} is required for '{config.command}'")
    if config.command in _NEEDS_FEATURES:
        try:
            parse_feature_config(config.features)
        except ConfigError as exc:
            errors.append(str(exc))
    if config.command in _NEEDS_CLASSIFIER:
        if config.classifier not in CLASSIFIER_ALIASES:
            errors.append(f"unknown classifier {config.classifier!r}")
        else:
            try:
                make_spec(config.classifier, config.params, seed=config.seed)
            except ConfigError as exc:
                errors.append(str(exc))
    if config.command in ("cv", "gridsearch") and config.k < 2:
        errors.append("k must be >= 2")
    if config.command == "gridsearch" and not 0.0 < config.tune_fraction <= 1.0:
        errors.append("tune-fraction must be in (0, 1]")
    if config.command == "bench" and config.repetitions < 1:
        errors.append("repetitions must be >= 1")
    if config.min_df < 1:
        errors.append("min-df must be >= 1")
    if not 0.0 < config.chi2_fraction <= 1.0:
        errors.append("chi2-fraction must be in (0, 1]")
    if config.threads < 1:
        errors.append("threads must be >= 1")
    return errors


def _build_parser() -> _Parser:
    parser = _Parser(prog="tweetspam", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"tweetspam {__version__} (model format {FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=True):
        if corpus:
            p.add_argument("--corpus", help="labeled corpus JSONL")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--lenient", action="store_true", help="skip invalid corpus lines")
        p.add_argument("--lexicon-dir", default=None, help="override packaged lexicons")
        p.add_argument("--threads", type=int, default=1, help="worker cap (outputs unaffected)")

    def learner(p):
        p.add_argument("--features", default=DEFAULT_FEATURES)
        p.add_argument("--classifier", default=DEFAULT_CLASSIFIER)
        p.add_argument("--params", default="{}", help="hyperparameter overrides as JSON")
        p.add_argument("--min-df", type=int, default=DEFAULT_MIN_DF)
        p.add_argument("--chi2-fraction", type=float, default=CHI2_FRACTION)

    p = sub.add_parser("ingest", help="validate, dedup, and rewrite a corpus")
    p.add_argument("--input", help="raw corpus JSONL")
    p.add_argument("--output", help="validated corpus JSONL")
    p.add_argument("--sample-one-per-user", action="store_true")
    common(p, corpus=False)

    p = sub.add_parser("train", help="fit a model on a full corpus")
    p.add_argument("--model", help="output model file")
    learner(p)
    common(p)

    p = sub.add_parser("predict", help="classify raw tweets with a saved model")
    p.add_argument("--model", help="model file")
    p.add_argument("--input", help="tweets JSONL (labels optional)")
    p.add_argument("--output", help="predictions JSONL")
    common(p, corpus=False)

    p = sub.add_parser("cv", help="k-fold cross validation")
    p.add_argument("--report", help="output report JSON")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--timings", action="store_true", help="include wall-clock in report")
    learner(p)
    common(p)

    p = sub.add_parser("gridsearch", help="hyperparameter search on a tuning subset")
    p.add_argument("--report", help="output report JSON")
    p.add_argument("--grid", help="JSON map hyperparameter -> array of values")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--tune-fraction", type=float, default=0.2)
    p.add_argument("--no-final-cv", action="store_true", help="skip the final CV run")
    p.add_argument(
        "--include-tuning-in-final",
        action="store_true",
        help="final CV on the full corpus instead of the remainder",
    )
    learner(p)
    common(p)

    p = sub.add_parser("bench", help="feature extraction timing study")
    p.add_argument("--report", help="output report JSON")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--features", default=None, help="restrict to one feature set")
    common(p)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(command=args.command)
    if hasattr(args, "params"):
        try:
            params = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--params is not valid JSON: {exc}") from exc
        if not isinstance(params, dict):
            raise UsageError("--params must be a JSON object")
        config.params = params
    mapping = {
        "corpus": "corpus",
        "model": "model",
        "input": "input",
        "output": "output",
        "report": "report",
        "grid": "grid",
        "features": "features",
        "classifier": "classifier",
        "k": "k",
        "seed": "seed",
        "tune_fraction": "tune_fraction",
        "min_df": "min_df",
        "chi2_fraction": "chi2_fraction",
        "repetitions": "repetitions",
        "sample_one_per_user": "sample_users",
        "timings": "timings",
        "lexicon_dir": "lexicon_dir",
        "threads": "threads",
        "include_tuning_in_final": "include_tuning_in_final",
    }
    for arg_name, config_name in mapping.items():
        if hasattr(args, arg_name):
            value = getattr(args, arg_name)
            if value is not None or config_name in ("lexicon_dir", "features"):
                setattr(config, config_name, value)
    if config.command == "bench" and getattr(args, "features", None) is None:
        config.features = ""  # bench defaults to every family
    if getattr(args, "lenient", False):
        config.strict = False
    if getattr(args, "no_final_cv", False):
        config.final_cv = False
    if config.lexicon_dir is None:
        config.lexicon_dir = os.environ.get(LEXICON_DIR_ENV) or None
    return config


def _resources(config: RunConfig) -> ResourceBundle:
    if config.lexicon_dir:
        return ResourceBundle.load(config.lexicon_dir)
    return default_resources()


def _load_labeled(config: RunConfig) -> LabeledCorpus:
    corpus = load_corpus(config.corpus, strict=config.strict)
    corpus.require_labeled()
    if corpus.skipped_count:
        print(f"skipped {corpus.skipped_count} invalid line(s)", file=sys.stderr)
    return corpus


def _write_jsonl(path: str, objs) -> None:
    atomic_write_text(path, "".join(canonical_json(o) + "\n" for o in objs))


def _cmd_ingest(config: RunConfig) -> int:
    corpus = load_corpus(config.input, strict=config.strict)
    if config.sample_users:
        corpus = sample_one_per_user(corpus, config.seed)
    _write_jsonl(config.output, (record_to_dict(r) for r in corpus.records))
    print(
        f"ingested {len(corpus.records)} record(s), "
        f"skipped {corpus.skipped_count}, class counts {corpus.class_counts}",
        file=sys.stderr,
    )
    return 0


def _cmd_train(config: RunConfig) -> int:
    corpus = _load_labeled(config)
    resources = _resources(config)
    feature_config = parse_feature_config(config.features)
    spec = make_spec(config.classifier, config.params, seed=config.seed)
    labels = np.asarray([1 if r.label == "spam" else 0 for r in corpus.records])
    prepared = prepare_records(corpus.records, resources)
    pipeline = fit_pipeline(
        prepared,
        labels,
        feature_config,
        min_df=config.min_df,
        select_fraction=config.chi2_fraction if spec.kind == "linear_svm" else None,
    )
    X_raw, X_scaled = pipeline.matrices(prepared)
    model = train_model(spec, pipeline, X_raw, X_scaled, labels)
    save_model(model, config.model)
    print(f"trained {spec.kind} on {len(corpus.records)} records -> {config.model}",
          file=sys.stderr)
    return 0


def _cmd_predict(config: RunConfig) -> int:
    model = load_model(config.model)
    corpus = load_corpus(config.input, strict=config.strict, require_labels=False)
    resources = _resources(config)
    predictions = predict_records(model, corpus.records, resources)
    _write_jsonl(
        config.output,
        (
            {"tweet_id": r.tweet_id, "label": p.label, "score": p.score}
            for r, p in zip(corpus.records, predictions)
        ),
    )
    spam_count = sum(1 for p in predictions if p.label == "spam")
    print(f"predicted {len(predictions)} tweet(s), {spam_count} spam", file=sys.stderr)
    return 0


def _cmd_cv(config: RunConfig) -> int:
    corpus = _load_labeled(config)
    resources = _resources(config)
    spec = make_spec(config.classifier, config.params, seed=config.seed)
    report = cross_validate(
        corpus,
        config.features,
        spec,
        config.k,
        config.seed,
        resources=resources,
        min_df=config.min_df,
        select_fraction=config.chi2_fraction,
    )
    atomic_write_text(
        config.report,
        canonical_json(report_to_dict(report, include_timings=config.timings)) + "\n",
    )
    print(
        f"cv mean precision {report.mean.precision:.4f} "
        f"recall {report.mean.recall:.4f} f1 {report.mean.f1:.4f}",
        file=sys.stderr,
    )
    return 0


def _cmd_gridsearch(config: RunConfig) -> int:
    corpus = _load_labeled(config)
    resources = _resources(config)
    with open(config.grid, "r", encoding="utf-8") as handle:
        grid = json.load(handle)
    expand_grid(grid)  # validates shape before the expensive part
    result = grid_search(
        corpus,
        config.features,
        config.classifier,
        grid,
        config.tune_fraction,
        config.k,
        config.seed,
        resources=resources,
        min_df=config.min_df,
    )
    document = {"grid": grid_result_to_dict(result), "final": None}
    if config.final_cv:
        if config.include_tuning_in_final:
            final_corpus = corpus
        else:
            subset = set(result.subset_indices)
            final_corpus = LabeledCorpus(
                records=tuple(
                    r for i, r in enumerate(corpus.records) if i not in subset
                )
            )
        final_spec = make_spec(config.classifier, result.best_params, seed=config.seed)
        final_report = cross_validate(
            final_corpus,
            config.features,
            final_spec,
            config.k,
            config.seed,
            resources=resources,
            min_df=config.min_df,
            select_fraction=config.chi2_fraction,
        )
        document["final"] = report_to_dict(final_report, include_timings=config.timings)
    atomic_write_text(config.report, canonical_json(document) + "\n")
    print(
        f"grid best {result.best_params} mean f1 {result.best_f1:.4f}",
        file=sys.stderr,
    )
    return 0


def _cmd_bench(config: RunConfig) -> int:
    corpus = _load_labeled(config)
    resources = _resources(config)
    report = bench_features(
        corpus,
        feature_set=config.features or None,
        repetitions=config.repetitions,
        resources=resources,
        min_df=config.min_df,
    )
    atomic_write_text(config.report, canonical_json(report) + "\n")
    for family, seconds in report["seconds_per_1000"].items():
        print(f"bench {family}: {seconds:.4f} s / 1000 tweets", file=sys.stderr)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "cv": _cmd_cv,
    "gridsearch": _cmd_gridsearch,
    "bench": _cmd_bench,
}


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _config_from_args(args)
        errors = validate_config(config)
        if errors:
            for message in errors:
                print(f"error: {message}", file=sys.stderr)
            return 1
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"config: {canonical_json(config.to_dict())}", file=sys.stderr)
    try:
        return _COMMANDS[config.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TweetSpamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
