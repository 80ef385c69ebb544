"""Command-line pipeline: gen, validate, filter, stats, calibrate, predict, evaluate.

Stages talk to each other through files in ``--out-dir`` only.

Exit codes: 0 success, 2 unreadable/unparseable input, 3 dataset validation
failure, 4 baseline language absent, 5 no projects left after the
non-working-ratio filter.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import zlib
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .core import (
    BASELINE_LANGUAGE,
    CommitTimeline,
    DeveloperProfile,
    FeatureVector,
    LifespanRecord,
    ModelParams,
    ProjectRecord,
    validate_dataset,
)
from .features import (
    core_dev_count_distribution,
    extract_features,
    language_usage,
    read_features_csv,
    write_core_dev_distribution_csv,
    write_features_csv,
    write_language_usage_csv,
)
from .ingest import DEFAULT_CUTOFF, ParseError, StudyFilterConfig, filter_with_summary, parse_commits, parse_developers, parse_projects
from .lifespan import HistogramSpec, compute_lifespan, lifespan_histogram, write_histogram_csv, write_lifespans_csv
from .model import (
    DEFAULT_THRESHOLDS,
    CalibrationError,
    EmptyEvaluationError,
    calibrate_alpha,
    default_params,
    derive_label_offsets,
    derive_language_factors,
    dump_params,
    evaluate,
    load_params,
    predict_breakdown,
    write_predictions_csv,
)
from .stats import (
    binned_mean_series,
    correlation_or_undefined,
    label_lifespan_table,
    language_lifespan_table,
    read_label_table_csv,
    read_language_table_csv,
    rows_to_json,
    write_label_table_csv,
    write_language_table_csv,
    write_series_tsv,
)
from .syngen import FILE_NAMES, GenConfig, GenerationError, generate

log = logging.getLogger("seco_lifespan")

EXIT_INPUT = 2
EXIT_INVALID = 3
EXIT_BASELINE = 4
EXIT_EMPTY = 5

DESCRIPTION_BANDS = (("0-500", 0, 500), ("500-1000", 500, 1000), (">1000", 1000, math.inf))


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def worker_count() -> int:
    raw = os.environ.get("LIFESPAN_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise CliError(EXIT_INPUT, f"LIFESPAN_THREADS must be an integer, got {raw!r}") from None


@dataclass
class Dataset:
    projects: list[ProjectRecord]
    timelines: dict[str, CommitTimeline]
    developers: dict[str, DeveloperProfile]


def _paths(args) -> dict[str, Path]:
    base = Path(args.data) if getattr(args, "data", None) else None
    out = {}
    for key in ("projects", "commits", "developers"):
        given = getattr(args, key, None)
        if given:
            out[key] = Path(given)
        elif base is not None:
            out[key] = base / FILE_NAMES[key]
        else:
            raise CliError(EXIT_INPUT, f"no {key} file given (use --{key} or --data)")
    return out


def _parse_file(path: Path, parser):
    try:
        with open(path, "rb") as fh:
            return parser(fh, source=str(path))
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"input file not found: {path}") from None
    except IsADirectoryError:
        raise CliError(EXIT_INPUT, f"input path is a directory: {path}") from None
    except ParseError as exc:
        raise CliError(EXIT_INPUT, f"parse error: {exc}") from None
    except UnicodeDecodeError as exc:
        raise CliError(EXIT_INPUT, f"{path}: not UTF-8 ({exc.reason})") from None


def load_dataset(args, restrict: bool = True) -> Dataset:
    paths = _paths(args)
    projects = _parse_file(paths["projects"], parse_projects)
    timelines = _parse_file(paths["commits"], parse_commits)
    developers = _parse_file(paths["developers"], parse_developers)
    violations = validate_dataset(projects, timelines, developers)
    if violations:
        for v in violations[:20]:
            print(f"violation: {v}", file=sys.stderr)
        if len(violations) > 20:
            print(f"... {len(violations) - 20} more violations", file=sys.stderr)
        raise CliError(EXIT_INVALID, f"dataset failed validation with {len(violations)} violation(s)")
    if restrict and getattr(args, "ids", None):
        keep = _read_ids(Path(args.ids))
        projects = [p for p in projects if p.id in keep]
    return Dataset(projects, timelines, developers)


def _read_ids(path: Path) -> set[str]:
    try:
        return {line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()}
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"ids file not found: {path}") from None


def _in_holdout(project_id: str, percent: float) -> bool:
    return zlib.crc32(project_id.encode("utf-8")) % 10000 < percent * 100


def joined(ds: Dataset, args) -> list[tuple[FeatureVector, LifespanRecord]]:
    out = []
    for p in ds.projects:
        rec = compute_lifespan(p, ds.timelines.get(p.id), args.gap_threshold, args.gap_exclusive)
        out.append((extract_features(p, ds.developers, args.m_aggregate), rec))
    return out


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write(path: Path, writer, *payload) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer(*payload, fh)


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _load_params(path: Optional[str]) -> ModelParams:
    if not path:
        return default_params()
    try:
        with open(path, encoding="utf-8") as fh:
            return load_params(fh)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"params file not found: {path}") from None
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"malformed params file {path}: {exc}") from None


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg_data = {}
    if args.config:
        try:
            cfg_data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CliError(EXIT_INPUT, f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_INPUT, f"malformed config {args.config}: {exc}") from None
    for key, value in (
        ("seed", args.seed),
        ("project_count", args.count),
        ("noise_sd", args.noise_sd),
        ("days_per_file", args.days_per_file),
    ):
        if value is not None:
            cfg_data[key] = value
    if args.ratio_range:
        cfg_data["target_nonworking_ratio_range"] = _floats(args.ratio_range, "--ratio-range", 2)
    if args.params:
        cfg_data["params"] = _load_params(args.params).to_dict()
    try:
        cfg = GenConfig.from_dict(cfg_data)
        dataset = generate(cfg, workers=worker_count())
    except (ValueError, TypeError) as exc:
        code = EXIT_INVALID if isinstance(exc, GenerationError) else EXIT_INPUT
        raise CliError(code, str(exc)) from None
    paths = dataset.write(_out_dir(args))
    print(f"generated {cfg.project_count} projects (seed {cfg.seed}) in {args.out_dir}")
    for key in ("projects", "commits", "developers", "truth"):
        print(f"  {key}: {paths[key]}")
    return 0


def cmd_validate(args) -> int:
    ds = load_dataset(args, restrict=False)
    print(f"ok: {len(ds.projects)} projects, {len(ds.timelines)} timelines, {len(ds.developers)} developers")
    return 0


def cmd_filter(args) -> int:
    ds = load_dataset(args, restrict=False)
    cfg = StudyFilterConfig(
        cutoff=args.cutoff,
        quiescence_days=args.quiescence,
        exclude_forks=not args.keep_forks,
        exclude_deleted=not args.keep_deleted,
        min_lifespan_days=args.min_lifespan,
    )
    kept, summary = filter_with_summary(ds.projects, ds.timelines, cfg)
    out = _out_dir(args)
    (out / "filtered_ids.txt").write_text("".join(p.id + "\n" for p in kept), encoding="utf-8")
    _write_json(out / "filter_summary.json", summary.to_dict())
    print(summary.line())
    return 0


def cmd_stats(args) -> int:
    ds = load_dataset(args)
    rows = joined(ds, args)
    out = _out_dir(args)
    records = [rec for _, rec in rows]
    feats = [f for f, _ in rows]
    days = [float(rec.days) for rec in records]

    _write(out / "lifespans.csv", write_lifespans_csv, records)
    _write(out / "features.csv", write_features_csv, feats)
    _write(out / "histogram.csv", write_histogram_csv, lifespan_histogram(records, HistogramSpec(tuple(args.bins))))

    lang_rows = language_lifespan_table(
        ((f.language, rec.days) for f, rec in rows), min_count=args.min_count, method=args.quantile_method
    )
    _write(out / "language_table.csv", write_language_table_csv, lang_rows)
    _write(out / "language_table.json", rows_to_json, lang_rows)
    label_rows = label_lifespan_table((f.labels, rec.days) for f, rec in rows)
    _write(out / "label_table.csv", write_label_table_csv, label_rows)
    _write(out / "label_table.json", rows_to_json, label_rows)
    _write(out / "core_developers.csv", write_core_dev_distribution_csv, core_dev_count_distribution(ds.projects))
    _write(out / "language_usage.csv", write_language_usage_csv, language_usage(ds.projects))

    words = [float(f.description_word_count) for f in feats]
    files = [float(f.n) for f in feats]
    followers = [float(f.m) for f in feats]
    _write(out / "series_description_words.tsv", lambda s, fh: write_series_tsv(s, fh, "words", "mean_days"),
           binned_mean_series(words, days, args.words_bin))
    _write(out / "series_file_count.tsv", lambda s, fh: write_series_tsv(s, fh, "files", "mean_days"),
           binned_mean_series(files, days, args.files_bin))
    _write(out / "series_followers.tsv", lambda s, fh: write_series_tsv(s, fh, "followers", "mean_days"),
           binned_mean_series(followers, days, args.followers_bin))

    by_lang: dict[str, list[tuple[float, float]]] = {}
    for f, rec in rows:
        if f.language:
            by_lang.setdefault(f.language, []).append((float(f.m), float(rec.days)))
    bands = {}
    for name, lo, hi in DESCRIPTION_BANDS:
        sel = [(w, d) for w, d in zip(words, days) if lo <= w < hi]
        bands[name] = correlation_or_undefined([w for w, _ in sel], [d for _, d in sel])
    summary = {
        "projects": len(rows),
        "file_count": correlation_or_undefined(files, days),
        "core_developers": correlation_or_undefined([float(f.core_dev_count) for f in feats], days),
        "followers_by_language": {
            lang: correlation_or_undefined([m for m, _ in pts], [d for _, d in pts]) for lang, pts in sorted(by_lang.items())
        },
        "description_bands": bands,
    }
    _write_json(out / "correlations.json", summary)
    fr = summary["file_count"]["r"]
    print(f"stats for {len(rows)} projects written to {out}; file-number r = {fr if isinstance(fr, str) else f'{fr:.4f}'}")
    return 0


def cmd_calibrate(args) -> int:
    ds = load_dataset(args)
    rows = joined(ds, args)
    if args.holdout:
        rows = [(f, rec) for f, rec in rows if not _in_holdout(rec.project_id, args.holdout)]
    if not rows:
        raise CliError(EXIT_EMPTY, "no projects to calibrate on")

    usable = [(f, rec.days) for f, rec in rows if f.n >= 1]
    if len(usable) < len(rows):
        log.warning("skipping %d project(s) without files for alpha calibration", len(rows) - len(usable))
    try:
        alpha = calibrate_alpha(usable)
    except CalibrationError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None

    if args.language_table:
        with open(args.language_table, encoding="utf-8") as fh:
            lang_rows = read_language_table_csv(fh)
    else:
        lang_rows = language_lifespan_table((f.language, rec.days) for f, rec in rows)
    global_mean = math.fsum(rec.days for _, rec in rows) / len(rows)
    if args.label_table:
        with open(args.label_table, encoding="utf-8") as fh:
            label_rows = read_label_table_csv(fh)
    else:
        label_rows = label_lifespan_table((f.labels, rec.days) for f, rec in rows)

    try:
        factors = derive_language_factors(lang_rows, args.baseline)
        offsets = derive_label_offsets(label_rows, global_mean)
        params = ModelParams(
            alpha=alpha,
            beta=args.beta,
            language_factors=factors,
            label_offsets=offsets,
            global_mean_lifespan=global_mean,
            baseline=args.baseline,
        )
    except CalibrationError as exc:
        code = EXIT_BASELINE if "baseline" in str(exc) else EXIT_INVALID
        raise CliError(code, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from None

    target = Path(args.params_out) if args.params_out else _out_dir(args) / "params.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    _write(target, dump_params, params)
    print(f"alpha={alpha:.4f} beta={args.beta} languages={len(factors)} labels={len(offsets)} -> {target}")
    return 0


def cmd_predict(args) -> int:
    params = _load_params(args.params)
    if args.features:
        try:
            with open(args.features, encoding="utf-8") as fh:
                feats = read_features_csv(fh)
        except FileNotFoundError:
            raise CliError(EXIT_INPUT, f"features file not found: {args.features}") from None
        except (KeyError, ValueError) as exc:
            raise CliError(EXIT_INPUT, f"malformed features file {args.features}: {exc}") from None
    else:
        ds = load_dataset(args)
        feats = [extract_features(p, ds.developers, args.m_aggregate) for p in ds.projects]
    warned: set[str] = set()
    preds = [predict_breakdown(f, params, warned) for f in feats]
    out = _out_dir(args)
    _write(out / "predictions.csv", write_predictions_csv, preds)
    print(f"{len(preds)} predictions written to {out / 'predictions.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    params = _load_params(args.params)
    ds = load_dataset(args)
    rows = joined(ds, args)
    if args.holdout:
        rows = [(f, rec) for f, rec in rows if _in_holdout(rec.project_id, args.holdout)]
    zero = [rec.project_id for _, rec in rows if rec.days == 0]
    if zero:
        log.warning("skipping %d project(s) with a zero-day life-span", len(zero))
        rows = [(f, rec) for f, rec in rows if rec.days > 0]
    thresholds = _floats(args.thresholds, "--thresholds") if args.thresholds else list(DEFAULT_THRESHOLDS)
    try:
        report = evaluate(rows, params, max_ratio=args.max_ratio, thresholds=thresholds)
    except EmptyEvaluationError as exc:
        raise CliError(EXIT_EMPTY, str(exc)) from None
    out = _out_dir(args)
    _write(out / "evaluation.csv", report.write_csv)
    _write(out / "cdf.json", report.write_cdf_json)
    print(f"evaluated {len(report.rows)} projects ({report.excluded} excluded by non-working ratio)")
    print(f"fraction with relative error <= 0.1: {report.fraction_within(0.1):.2f}")
    print(f"fraction with relative error <= 0.3: {report.fraction_within(0.3):.2f}")
    return 0


# -- argument parsing ----------------------------------------------------------


def _floats(text: str, flag: str, count: Optional[int] = None) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_INPUT, f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values or (count is not None and len(values) != count):
        raise CliError(EXIT_INPUT, f"{flag} expects {count or 'at least one'} comma-separated number(s)")
    return values


def _iso_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    io = argparse.ArgumentParser(add_help=False)
    g = io.add_argument_group("dataset and output")
    g.add_argument("--projects", help="projects JSON-lines file")
    g.add_argument("--commits", help="commits JSON-lines file")
    g.add_argument("--developers", help="developers JSON-lines file")
    g.add_argument("--data", metavar="DIR", help="directory holding projects.jsonl, commits.jsonl, developers.jsonl")
    g.add_argument("--out-dir", default=".", help="directory for written artifacts (default: %(default)s)")

    analysis = argparse.ArgumentParser(add_help=False)
    a = analysis.add_argument_group("analysis")
    a.add_argument("--ids", help="restrict to project ids listed in this file (e.g. filtered_ids.txt)")
    a.add_argument("--gap-threshold", type=_nonneg_int, default=6,
                   help="commit gaps longer than this many days count as non-working (default: %(default)s)")
    a.add_argument("--gap-exclusive", action="store_true",
                   help="count a gap of dl days as dl - 1 non-working days instead of dl")
    a.add_argument("--m-aggregate", choices=("sum", "mean", "max"), default="sum",
                   help="how follower counts of core developers combine into m (default: %(default)s)")

    holdout = argparse.ArgumentParser(add_help=False)
    holdout.add_argument("--holdout", type=float, default=0.0, metavar="PCT",
                         help="percent of projects (chosen by id hash) held out: calibrate skips them, "
                              "evaluate scores only them (default: 0, in-sample)")

    parser = argparse.ArgumentParser(
        prog="seco-lifespan",
        description="Mine project life-spans, reproduce the characteristic analyses and run the life-span predictor.",
        epilog="Environment: LIFESPAN_THREADS caps the worker count (used by gen; default 1).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    epilog = "Environment: LIFESPAN_THREADS caps the worker count."

    p = sub.add_parser("gen", parents=[io], help="generate a seeded synthetic dataset", epilog=epilog)
    p.add_argument("--seed", type=int, help="generator seed (default: 0)")
    p.add_argument("--count", type=int, help="number of projects (default: 1000)")
    p.add_argument("--noise-sd", type=float, help="std-dev in days of noise added to the planted life-span (default: 0)")
    p.add_argument("--ratio-range", metavar="LO,HI", help="target non-working ratio interval (default: 0,0.25)")
    p.add_argument("--days-per-file", type=float, help="plant life-span = this * file count instead of the model")
    p.add_argument("--params", help="planted model parameters JSON (default: shipped parameters)")
    p.add_argument("--config", help="JSON file with generator settings; flags override it")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", parents=[io], help="check dataset invariants and references")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("filter", parents=[io], help="apply the study filter and write retained ids")
    p.add_argument("--cutoff", type=_iso_date, default=DEFAULT_CUTOFF, help="dataset snapshot date (default: %(default)s)")
    p.add_argument("--quiescence", type=_nonneg_int, default=180,
                   help="required days without commits before the cutoff (default: %(default)s)")
    p.add_argument("--keep-forks", action="store_true", help="do not drop forked projects")
    p.add_argument("--keep-deleted", action="store_true", help="do not drop deleted projects")
    p.add_argument("--min-lifespan", type=_nonneg_int, default=0,
                   help="minimum life-span in days; 10 selects naturally dead projects (default: %(default)s)")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("stats", parents=[io, analysis], help="write life-span tables, histogram, series and correlations")
    p.add_argument("--quantile-method", choices=("linear", "nearest"), default="linear",
                   help="quartile rule for the language table (default: %(default)s)")
    p.add_argument("--min-count", type=int, default=1, help="minimum projects per language row (default: %(default)s)")
    p.add_argument("--bins", type=lambda s: [int(x) for x in s.split(",")], default=list(HistogramSpec().bin_edges),
                   metavar="E1,E2,...", help="histogram bin edges in days (default: 1,10,30,90,180,365,1095)")
    p.add_argument("--words-bin", type=float, default=50.0, help="bin width for the description-words series")
    p.add_argument("--files-bin", type=float, default=50.0, help="bin width for the file-count series")
    p.add_argument("--followers-bin", type=float, default=50.0, help="bin width for the followers series")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("calibrate", parents=[io, analysis, holdout], help="fit alpha, language factors and label offsets")
    p.add_argument("--beta", type=float, default=0.8, help="label weight (default: %(default)s)")
    p.add_argument("--baseline", default=BASELINE_LANGUAGE, help="baseline language with factor 1.0 (default: %(default)s)")
    p.add_argument("--language-table", help="derive language factors from this language_table.csv instead of the dataset")
    p.add_argument("--label-table", help="derive label offsets from this label_table.csv instead of the dataset")
    p.add_argument("--params-out", help="output path (default: OUT_DIR/params.json)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("predict", parents=[io, analysis], help="predict life-spans with a per-factor breakdown")
    p.add_argument("--params", help="model parameters JSON (default: shipped parameters)")
    p.add_argument("--features", help="features.csv from `stats`; when absent features come from the dataset")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[io, analysis, holdout], help="relative-error evaluation and CDF")
    p.add_argument("--params", help="model parameters JSON (default: shipped parameters)")
    p.add_argument("--max-ratio", type=float, default=0.3,
                   help="keep projects with non-working ratio strictly below this (default: %(default)s)")
    p.add_argument("--thresholds", metavar="T1,T2,...",
                   help="relative-error thresholds for the CDF (default: 0.1,0.2,...,1.0)")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
