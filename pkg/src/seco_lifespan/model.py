"""Closed-form life-span predictor: calibration, prediction and evaluation.

The predicted life-span of a project is::

    LP = alpha * log2(n) * l(language) * log2(m) + beta * lab(labels)

with ``n`` the file count, ``m`` the core developers' follower total,
``l`` the language factor relative to the baseline language and ``lab``
the label offset from the global mean life-span. Both log arguments are
clamped to at least 2 and the result is floored at 0.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, TextIO

from . import reference
from .core import BASELINE_LANGUAGE, FeatureVector, LifespanRecord, ModelParams
from .stats import LabelStatsRow, LanguageStatsRow

log = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = tuple(round(0.1 * k, 1) for k in range(1, 11))


class CalibrationError(ValueError):
    pass


class EmptyEvaluationError(ValueError):
    pass


def derive_language_factors(
    table: Iterable[LanguageStatsRow], baseline: str = BASELINE_LANGUAGE
) -> dict[str, float]:
    """Ratio of each language's mean life-span to the baseline's mean."""
    rows = {r.language: r.average for r in table}
    if baseline not in rows:
        raise CalibrationError(f"baseline language {baseline!r} missing from table")
    base = rows[baseline]
    if not base > 0:
        raise CalibrationError(f"baseline language {baseline!r} has non-positive average {base}")
    factors = {lang: avg / base for lang, avg in rows.items()}
    factors[baseline] = 1.0
    return factors


def derive_label_offsets(table: Iterable[LabelStatsRow], global_mean: float) -> dict[str, float]:
    if not global_mean > 0:
        raise CalibrationError(f"global mean must be positive, got {global_mean}")
    return {r.label: r.average - global_mean for r in table}


def calibrate_alpha(records: Iterable[tuple[FeatureVector, float]]) -> float:
    """Mean number of life-span days per file."""
    per_file = []
    for f, actual in records:
        if f.n < 1:
            raise CalibrationError(f"project {f.project_id!r} has no files")
        if actual < 0:
            raise CalibrationError(f"project {f.project_id!r} has negative life-span")
        per_file.append(actual / f.n)
    if not per_file:
        raise CalibrationError("cannot calibrate alpha on an empty dataset")
    return math.fsum(per_file) / len(per_file)


def default_params() -> ModelParams:
    """Parameters calibrated on the published GitHub 2013 tables."""
    return ModelParams(
        alpha=reference.ALPHA,
        beta=reference.BETA,
        language_factors=derive_language_factors(reference.LANGUAGE_TABLE),
        label_offsets=derive_label_offsets(reference.LABEL_TABLE, reference.GLOBAL_MEAN_LIFESPAN),
        global_mean_lifespan=reference.GLOBAL_MEAN_LIFESPAN,
    )


def load_params(fh: TextIO) -> ModelParams:
    try:
        data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"params file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError("params file must hold a JSON object")
    return ModelParams.from_dict(data)


def dump_params(params: ModelParams, fh: TextIO) -> None:
    json.dump(params.to_dict(), fh, indent=2)
    fh.write("\n")


@dataclass(frozen=True)
class Prediction:
    """Predicted life-span with its factors; ``lp == max(0, base + label_term)``."""

    project_id: str
    log2_n: float
    log2_m: float
    language_factor: float
    base: float
    label_offset: float
    label_term: float
    lp: float


def _log2_clamped(value: float) -> float:
    return math.log2(max(value, 2))


def predict_breakdown(
    f: FeatureVector, p: ModelParams, warned: Optional[set[str]] = None
) -> Prediction:
    """Evaluate the predictor and keep every intermediate factor.

    Unknown languages fall back to factor 1.0 and unknown labels are skipped,
    each with a warning. Pass a shared ``warned`` set to report each unknown
    key once across many calls.
    """
    if f.language and f.language not in p.language_factors:
        _warn_once(warned, f"language:{f.language}", "unknown language %r, using factor 1.0", f.language)
    lf = p.language_factors.get(f.language, 1.0) if f.language else 1.0

    offsets = []
    for label in sorted(f.labels):
        if label in p.label_offsets:
            offsets.append(p.label_offsets[label])
        else:
            _warn_once(warned, f"label:{label}", "unknown label %r, using offset 0", label)
    lab = math.fsum(offsets) / len(offsets) if offsets else 0.0

    log_n = _log2_clamped(f.n)
    log_m = _log2_clamped(f.m)
    base = p.alpha * log_n * lf * log_m
    label_term = p.beta * lab
    return Prediction(f.project_id, log_n, log_m, lf, base, lab, label_term, max(0.0, base + label_term))


def _warn_once(warned: Optional[set[str]], key: str, msg: str, *args) -> None:
    if warned is not None:
        if key in warned:
            return
        warned.add(key)
    log.warning(msg, *args)


def predict_lifespan(f: FeatureVector, p: ModelParams) -> float:
    return predict_breakdown(f, p).lp


def write_predictions_csv(preds: Iterable[Prediction], fh: TextIO) -> None:
    # Full precision so the breakdown recombines to lp exactly.
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["project_id", "lp", "log2_n", "log2_m", "language_factor", "base", "label_offset", "label_term"])
    for q in preds:
        w.writerow([q.project_id] + [repr(v) for v in (q.lp, q.log2_n, q.log2_m, q.language_factor, q.base, q.label_offset, q.label_term)])


@dataclass(frozen=True)
class EvaluationRow:
    project_id: str
    predicted: float
    actual: int
    relative_error: float


@dataclass
class EvaluationReport:
    rows: list[EvaluationRow]
    cdf_points: list[tuple[float, float]]
    excluded: int = 0
    errors_sorted: list[float] = field(default_factory=list, repr=False)

    def fraction_within(self, threshold: float) -> float:
        return bisect_right(self.errors_sorted, threshold) / len(self.errors_sorted)

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["project_id", "predicted", "actual", "relative_error"])
        for r in self.rows:
            w.writerow([r.project_id, f"{r.predicted:.4f}", r.actual, f"{r.relative_error:.4f}"])

    def write_cdf_json(self, fh: TextIO) -> None:
        json.dump(
            {
                "projects": len(self.rows),
                "excluded_by_ratio": self.excluded,
                "cdf_points": [{"threshold": t, "fraction": frac} for t, frac in self.cdf_points],
            },
            fh,
            indent=2,
        )
        fh.write("\n")


def evaluate(
    dataset: Iterable[tuple[FeatureVector, LifespanRecord]],
    p: ModelParams,
    max_ratio: float = 0.3,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    warned: Optional[set[str]] = None,
) -> EvaluationReport:
    """Relative error of predictions on projects with a low non-working ratio.

    Only projects whose non-working ratio is strictly below ``max_ratio``
    are scored. ``cdf_points`` hold, per threshold, the fraction of scored
    projects whose relative error is at most that threshold.
    """
    rows = []
    excluded = 0
    if warned is None:
        warned = set()
    for f, rec in dataset:
        if not rec.non_working_ratio < max_ratio:
            excluded += 1
            continue
        if rec.days <= 0:
            raise ValueError(f"project {rec.project_id!r} has a zero-day life-span")
        lp = predict_breakdown(f, p, warned).lp
        rows.append(EvaluationRow(rec.project_id, lp, rec.days, abs(lp - rec.days) / rec.days))
    if not rows:
        raise EmptyEvaluationError("no projects satisfy ratio filter")
    errors = sorted(r.relative_error for r in rows)
    report = EvaluationReport(rows, [], excluded, errors)
    report.cdf_points = [(float(t), report.fraction_within(t)) for t in sorted(thresholds)]
    return report
