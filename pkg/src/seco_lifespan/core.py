"""Shared domain types for project life-span mining.

Everything here is immutable and free of I/O. Invariants are not enforced in
constructors (so that malformed data can still be represented and reported);
:func:`validate_dataset` is the single place that checks them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Iterable, Mapping, Optional

BASELINE_LANGUAGE = "Java"

# Canonical spellings for the languages that have published life-span tables.
_CANONICAL_LANGUAGES = (
    "Java",
    "C#",
    "JavaScript",
    "Objective-C",
    "C++",
    "PHP",
    "C",
    "Python",
    "Ruby",
    "Shell",
    "Perl",
)
_LANGUAGE_CASING = {name.lower(): name for name in _CANONICAL_LANGUAGES}


def normalize_language(raw: Optional[str]) -> str:
    """Trim whitespace and fix the casing of well-known language names.

    Unknown languages are returned trimmed but otherwise untouched, so
    comparisons stay case-sensitive for everything outside the table.
    """
    if raw is None:
        return ""
    name = raw.strip()
    return _LANGUAGE_CASING.get(name.lower(), name)


def _unique_tuple(items: Iterable[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for item in items:
        seen.setdefault(item, None)
    return tuple(seen)


@dataclass(frozen=True)
class ProjectRecord:
    id: str
    created_at: datetime
    deleted: bool = False
    forked_from: Optional[str] = None
    language: str = ""
    file_count: int = 0
    labels: frozenset[str] = frozenset()
    # Ordered and de-duplicated; the first entry is conventionally the owner.
    core_developer_ids: tuple[str, ...] = ()
    description_word_count: int = 0

    def __post_init__(self) -> None:
        if self.created_at.tzinfo is None:
            object.__setattr__(self, "created_at", self.created_at.replace(tzinfo=timezone.utc))
        else:
            object.__setattr__(self, "created_at", self.created_at.astimezone(timezone.utc))
        object.__setattr__(self, "labels", frozenset(self.labels))
        object.__setattr__(self, "core_developer_ids", _unique_tuple(self.core_developer_ids))

    @property
    def born(self) -> date:
        return self.created_at.date()


@dataclass(frozen=True)
class CommitTimeline:
    project_id: str
    commit_dates: tuple[date, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "commit_dates", tuple(self.commit_dates))

    @classmethod
    def from_timestamps(cls, project_id: str, stamps: Iterable[datetime]) -> "CommitTimeline":
        """Collapse timestamps to sorted, distinct UTC calendar dates."""
        days = set()
        for ts in stamps:
            if ts.tzinfo is not None:
                ts = ts.astimezone(timezone.utc)
            days.add(ts.date())
        return cls(project_id, tuple(sorted(days)))

    @property
    def last(self) -> Optional[date]:
        return self.commit_dates[-1] if self.commit_dates else None

    def __len__(self) -> int:
        return len(self.commit_dates)


@dataclass(frozen=True)
class DeveloperProfile:
    id: str
    follower_count: int = 0


@dataclass(frozen=True)
class LifespanRecord:
    project_id: str
    born: date
    died: date
    days: int
    non_working_days: int = 0
    non_working_ratio: float = 0.0


@dataclass(frozen=True)
class FeatureVector:
    """Inputs to the life-span predictor for one project.

    ``n`` is the file count and ``m`` the aggregated follower count of the
    core developers.
    """

    n: int
    language: str
    m: float
    labels: frozenset[str] = frozenset()
    core_dev_count: int = 1
    description_word_count: int = 0
    project_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", frozenset(self.labels))


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    language_factors: Mapping[str, float] = field(default_factory=lambda: {BASELINE_LANGUAGE: 1.0})
    label_offsets: Mapping[str, float] = field(default_factory=dict)
    global_mean_lifespan: float = 1.0
    baseline: str = BASELINE_LANGUAGE

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.global_mean_lifespan > 0:
            raise ValueError(f"global mean life-span must be positive, got {self.global_mean_lifespan}")
        factors = dict(self.language_factors)
        if factors.get(self.baseline) != 1.0:
            raise ValueError(f"language factors must map baseline {self.baseline!r} to exactly 1.0")
        bad = sorted(lang for lang, value in factors.items() if not value > 0)
        if bad:
            raise ValueError(f"language factors must be positive: {bad}")
        object.__setattr__(self, "language_factors", factors)
        object.__setattr__(self, "label_offsets", dict(self.label_offsets))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "baseline": self.baseline,
            "language_factors": dict(sorted(self.language_factors.items())),
            "label_offsets": dict(sorted(self.label_offsets.items())),
            "global_mean_lifespan": self.global_mean_lifespan,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelParams":
        try:
            return cls(
                alpha=float(data["alpha"]),
                beta=float(data["beta"]),
                baseline=str(data.get("baseline", BASELINE_LANGUAGE)),
                language_factors={str(k): float(v) for k, v in data["language_factors"].items()},
                label_offsets={str(k): float(v) for k, v in data.get("label_offsets", {}).items()},
                global_mean_lifespan=float(data["global_mean_lifespan"]),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"malformed model parameters: {exc!r}") from exc


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} [{self.subject}]: {self.message}"


def validate_dataset(
    projects: Iterable[ProjectRecord],
    timelines: Mapping[str, CommitTimeline],
    developers: Mapping[str, DeveloperProfile],
) -> list[Violation]:
    """Check every dataset invariant and referential link.

    Returns a list of violations, empty when the dataset is consistent.
    Inputs are never modified.
    """
    out: list[Violation] = []
    seen: set[str] = set()
    project_list = list(projects)

    for p in project_list:
        pid = p.id
        if not pid:
            out.append(Violation("empty id", repr(pid), "project id must be non-empty"))
        if pid in seen:
            out.append(Violation("duplicate id", pid, "project id appears more than once"))
        seen.add(pid)
        if p.forked_from is not None and p.forked_from == pid:
            out.append(Violation("self fork", pid, "forked_from must differ from id"))
        if p.file_count < 0:
            out.append(Violation("negative file count", pid, f"file_count={p.file_count}"))
        if p.description_word_count < 0:
            out.append(
                Violation("negative word count", pid, f"description_word_count={p.description_word_count}")
            )
        if not p.core_developer_ids:
            out.append(Violation("empty core developer set", pid, "at least one core developer required"))
        for dev_id in p.core_developer_ids:
            if dev_id not in developers:
                out.append(Violation("dangling developer reference", pid, f"unknown developer {dev_id!r}"))

    for key in sorted(timelines):
        tl = timelines[key]
        if tl.project_id != key:
            out.append(Violation("timeline key mismatch", key, f"timeline carries project_id {tl.project_id!r}"))
        if tl.project_id not in seen:
            out.append(Violation("dangling project reference", tl.project_id, "timeline for unknown project"))
        dates = tl.commit_dates
        if any(b <= a for a, b in zip(dates, dates[1:])):
            out.append(Violation("unsorted timeline", tl.project_id, "commit dates must be strictly increasing"))

    for key in sorted(developers):
        dev = developers[key]
        if dev.id != key:
            out.append(Violation("developer key mismatch", key, f"profile carries id {dev.id!r}"))
        if dev.follower_count < 0:
            out.append(Violation("negative follower count", key, f"follower_count={dev.follower_count}"))

    return out
