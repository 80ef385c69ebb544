"""Life-span, life-span histograms and the non-working ratio."""

from __future__ import annotations

import csv
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

from .core import CommitTimeline, LifespanRecord, ProjectRecord

DEFAULT_GAP_THRESHOLD = 6
DEFAULT_BIN_EDGES = (1, 10, 30, 90, 180, 365, 1095)


class LifespanError(ValueError):
    pass


@dataclass(frozen=True)
class HistogramSpec:
    bin_edges: tuple[int, ...] = DEFAULT_BIN_EDGES

    def __post_init__(self) -> None:
        edges = tuple(self.bin_edges)
        if not edges:
            raise ValueError("histogram needs at least one edge")
        if edges[0] < 1 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError(f"bin edges must be strictly increasing and >= 1: {edges}")
        object.__setattr__(self, "bin_edges", edges)

    def labels(self) -> list[str]:
        edges = self.bin_edges
        out = [f"<={edges[0]}"]
        out += [f"{a}-{b}" for a, b in zip(edges, edges[1:])]
        out.append(f">{edges[-1]}")
        return out


def non_working_ratio(
    timeline: CommitTimeline | Sequence,
    lifespan_days: int,
    gap_threshold_days: int = DEFAULT_GAP_THRESHOLD,
    gap_exclusive: bool = False,
) -> tuple[int, float]:
    """Count days inside long commit gaps and their share of the life-span.

    Every gap between consecutive commit dates longer than
    ``gap_threshold_days`` contributes its full length (or length - 1 with
    ``gap_exclusive``, which excludes the closing commit day).

    Returns:
        ``(non_working_days, ratio)``; ``(0, 0.0)`` for fewer than two dates.

    Raises:
        LifespanError: if the life-span is shorter than the commit span,
            which would allow a ratio above one.
    """
    dates = timeline.commit_dates if isinstance(timeline, CommitTimeline) else tuple(timeline)
    if lifespan_days < 0:
        raise LifespanError(f"negative life-span: {lifespan_days}")
    if len(dates) < 2:
        return 0, 0.0
    span = (dates[-1] - dates[0]).days
    if lifespan_days < span:
        raise LifespanError(f"lifespan shorter than commit span ({lifespan_days} < {span})")

    no_work = 0
    for prev, cur in zip(dates, dates[1:]):
        gap = (cur - prev).days
        if gap > gap_threshold_days:
            no_work += gap - 1 if gap_exclusive else gap
    ratio = no_work / lifespan_days if lifespan_days > 0 else 0.0
    return no_work, ratio


def compute_lifespan(
    project: ProjectRecord,
    timeline: Optional[CommitTimeline] = None,
    gap_threshold_days: int = DEFAULT_GAP_THRESHOLD,
    gap_exclusive: bool = False,
) -> LifespanRecord:
    """Days from creation to the last commit, plus non-working statistics.

    Commits dated before the creation day (imported history) do not move
    ``born`` and are ignored for gap counting.
    """
    if timeline is not None and timeline.project_id != project.id:
        raise LifespanError(f"timeline {timeline.project_id!r} does not belong to project {project.id!r}")
    born = project.born
    dates = tuple(d for d in timeline.commit_dates if d >= born) if timeline is not None else ()
    died = max(born, dates[-1]) if dates else born
    days = (died - born).days
    nw_days, ratio = non_working_ratio(dates, days, gap_threshold_days, gap_exclusive)
    return LifespanRecord(project.id, born, died, days, nw_days, ratio)


def lifespan_histogram(
    records: Iterable[LifespanRecord | int], spec: HistogramSpec = HistogramSpec()
) -> list[tuple[str, int]]:
    edges = spec.bin_edges
    counts = [0] * (len(edges) + 1)
    for rec in records:
        days = rec if isinstance(rec, int) else rec.days
        counts[bisect_left(edges, days)] += 1
    return list(zip(spec.labels(), counts))


def write_histogram_csv(rows: Iterable[tuple[str, int]], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["bin", "count"])
    w.writerows(rows)


def write_lifespans_csv(records: Iterable[LifespanRecord], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["project_id", "born", "died", "days", "nonworking_days", "ratio"])
    for r in records:
        w.writerow(
            [r.project_id, r.born.isoformat(), r.died.isoformat(), r.days, r.non_working_days, f"{r.non_working_ratio:.4f}"]
        )
