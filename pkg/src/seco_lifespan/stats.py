"""Correlation, quartiles and the grouped life-span tables."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Literal, Sequence, TextIO

QuantileMethod = Literal["linear", "nearest"]


class UndefinedCorrelation(ValueError):
    pass


def _check_finite(values: Sequence[float], name: str) -> None:
    for v in values:
        if isinstance(v, float) and math.isnan(v):
            raise ValueError(f"NaN in {name}")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient.

    Raises:
        UndefinedCorrelation: on length mismatch, fewer than two points or a
            constant input.
    """
    if len(x) != len(y):
        raise UndefinedCorrelation(f"length mismatch: {len(x)} != {len(y)}")
    if len(x) < 2:
        raise UndefinedCorrelation("need at least two points")
    _check_finite(x, "x")
    _check_finite(y, "y")
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("zero variance")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def quantile(sorted_values: Sequence[float], p: float, method: QuantileMethod = "linear") -> float:
    n = len(sorted_values)
    if method == "linear":
        h = (n - 1) * p
        lo = math.floor(h)
        hi = min(lo + 1, n - 1)
        return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo])
    if method == "nearest":
        rank = max(1, math.ceil(p * n))
        return sorted_values[rank - 1]
    raise ValueError(f"unknown quantile method {method!r}")


def quartiles(values: Iterable[float], method: QuantileMethod = "linear") -> tuple[float, float, float]:
    """Return ``(q1, median, q3)``.

    ``linear`` interpolates at index ``(n - 1) * p`` of the sorted values;
    ``nearest`` picks the ``ceil(p * n)``-th smallest value.
    """
    vals = sorted(values)
    if not vals:
        raise ValueError("quartiles of an empty sequence")
    _check_finite(vals, "values")
    return tuple(quantile(vals, p, method) for p in (0.25, 0.5, 0.75))  # type: ignore[return-value]


@dataclass(frozen=True)
class LanguageStatsRow:
    language: str
    average: float
    q1: float
    median: float
    q3: float
    count: int


@dataclass(frozen=True)
class LabelStatsRow:
    label: str
    average: float
    count: int


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def language_lifespan_table(
    pairs: Iterable[tuple[str, float]],
    min_count: int = 1,
    method: QuantileMethod = "linear",
) -> list[LanguageStatsRow]:
    """Per-language mean and quartiles of life-span, sorted by mean ascending.

    Pairs with an empty language are skipped.
    """
    groups: dict[str, list[float]] = defaultdict(list)
    for lang, days in pairs:
        if lang:
            groups[lang].append(days)
    rows = []
    for lang in sorted(groups):
        vals = groups[lang]
        if len(vals) < min_count:
            continue
        q1, med, q3 = quartiles(vals, method)
        rows.append(LanguageStatsRow(lang, _mean(vals), q1, med, q3, len(vals)))
    rows.sort(key=lambda r: (r.average, r.language))
    return rows


def label_lifespan_table(pairs: Iterable[tuple[Iterable[str], float]]) -> list[LabelStatsRow]:
    """Mean life-span per label, largest first. Multi-label projects count once per label."""
    groups: dict[str, list[float]] = defaultdict(list)
    for labels, days in pairs:
        for label in set(labels):
            groups[label].append(days)
    rows = [LabelStatsRow(label, _mean(groups[label]), len(groups[label])) for label in sorted(groups)]
    rows.sort(key=lambda r: (-r.average, r.label))
    return rows


def binned_mean_series(
    x: Sequence[float], y: Sequence[float], bin_width: float
) -> list[tuple[float, float, int]]:
    """Mean of ``y`` over half-open bins ``[k*w, (k+1)*w)`` of ``x``; empty bins omitted."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    _check_finite(x, "x")
    _check_finite(y, "y")
    groups: dict[int, list[float]] = defaultdict(list)
    for xv, yv in zip(x, y):
        groups[math.floor(xv / bin_width)].append(yv)
    return [((k + 0.5) * bin_width, _mean(groups[k]), len(groups[k])) for k in sorted(groups)]


def correlation_or_undefined(x: Sequence[float], y: Sequence[float]) -> dict:
    try:
        return {"r": pearson(x, y), "n": len(x)}
    except UndefinedCorrelation as exc:
        return {"r": "undefined", "n": len(x), "reason": str(exc)}


def write_language_table_csv(rows: Iterable[LanguageStatsRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["language", "average", "q1", "median", "q3", "count"])
    for r in rows:
        w.writerow([r.language, f"{r.average:.4f}", f"{r.q1:.4f}", f"{r.median:.4f}", f"{r.q3:.4f}", r.count])


def write_label_table_csv(rows: Iterable[LabelStatsRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["label", "average", "count"])
    for r in rows:
        w.writerow([r.label, f"{r.average:.4f}", r.count])


def read_language_table_csv(fh: TextIO) -> list[LanguageStatsRow]:
    return [
        LanguageStatsRow(
            row["language"], float(row["average"]), float(row["q1"]), float(row["median"]), float(row["q3"]), int(row["count"])
        )
        for row in csv.DictReader(fh)
    ]


def read_label_table_csv(fh: TextIO) -> list[LabelStatsRow]:
    return [LabelStatsRow(row["label"], float(row["average"]), int(row["count"])) for row in csv.DictReader(fh)]


def rows_to_json(rows: Iterable, fh: TextIO) -> None:
    json.dump([asdict(r) for r in rows], fh, indent=2)
    fh.write("\n")


def write_series_tsv(series: Iterable[tuple[float, float, int]], fh: TextIO, x_name: str = "x", y_name: str = "mean_y") -> None:
    fh.write(f"{x_name}\t{y_name}\n")
    for center, mean, _count in series:
        fh.write(f"{center:.4f}\t{mean:.4f}\n")
