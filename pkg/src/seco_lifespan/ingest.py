"""Readers for the canonical line-delimited JSON dataset and the study filter.

The dataset is three files, one JSON object per line::

    projects:   {"id", "created_at", "deleted", "forked_from", "language",
                 "file_count", "labels", "core_developers",
                 "description_word_count"}          (optional "readme")
    commits:    {"project_id", "committed_at"}
    developers: {"id", "followers"}

Timestamps are RFC 3339 strings and are converted to UTC. Unknown keys are
ignored; blank lines are skipped.
"""

from __future__ import annotations

import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import IO, Iterable, Iterator, Mapping, Optional, Union

from .core import CommitTimeline, DeveloperProfile, ProjectRecord, normalize_language
from .features import description_word_count
from .lifespan import compute_lifespan

log = logging.getLogger(__name__)

DEFAULT_CUTOFF = date(2013, 10, 30)

Lines = Union[IO[bytes], IO[str], Iterable[Union[bytes, str]]]


class ParseError(ValueError):
    def __init__(self, lineno: int, reason: str, source: str = ""):
        self.lineno = lineno
        self.reason = reason
        self.source = source
        where = f"{source}:{lineno}" if source else f"line {lineno}"
        super().__init__(f"{where}: {reason}")


class DuplicateIdError(ParseError):
    def __init__(self, lineno: int, ident: str, source: str = ""):
        self.ident = ident
        super().__init__(lineno, f"duplicate id {ident!r}", source)


_FRACTION = re.compile(r"\.(\d+)")


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime.

    A missing offset is read as UTC.
    """
    if not isinstance(text, str):
        raise ValueError(f"timestamp must be a string, got {type(text).__name__}")
    s = text.strip()
    if s[-1:] in ("Z", "z"):
        s = s[:-1] + "+00:00"
    # fromisoformat on 3.10 only accepts 3 or 6 fractional digits
    s = _FRACTION.sub(lambda m: "." + (m.group(1) + "000000")[:6], s, count=1)
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _utc_date(text: str) -> date:
    # fast path for the canonical "YYYY-MM-DDTHH:MM:SSZ" form
    if isinstance(text, str) and len(text) == 20 and text[19] == "Z":
        return datetime.fromisoformat(text[:19]).date()
    return parse_timestamp(text).date()


def _records(stream: Lines, source: str) -> Iterator[tuple[int, dict]]:
    for lineno, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc.msg}", source) from None
        if not isinstance(obj, dict):
            raise ParseError(lineno, "record is not a JSON object", source)
        yield lineno, obj


def _require(obj: dict, key: str, lineno: int, source: str):
    if key not in obj or obj[key] is None:
        raise ParseError(lineno, f"missing required field {key!r}", source)
    return obj[key]


def _nonneg_int(value, key: str, lineno: int, source: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(lineno, f"{key} must be an integer, got {value!r}", source)
    if value < 0:
        raise ParseError(lineno, f"{key} must be non-negative, got {value}", source)
    return value


def _str_list(value, key: str, lineno: int, source: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(lineno, f"{key} must be a list of strings", source)
    return value


def parse_projects(stream: Lines, source: str = "") -> list[ProjectRecord]:
    """Read project records in input order.

    When a record carries ``readme`` text its word count replaces any
    precomputed ``description_word_count``.
    """
    out: list[ProjectRecord] = []
    seen: set[str] = set()
    for lineno, obj in _records(stream, source):
        pid = _require(obj, "id", lineno, source)
        if not isinstance(pid, str) or not pid:
            raise ParseError(lineno, "id must be a non-empty string", source)
        if pid in seen:
            raise DuplicateIdError(lineno, pid, source)
        seen.add(pid)
        try:
            created = parse_timestamp(_require(obj, "created_at", lineno, source))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(lineno, f"bad created_at: {exc}", source) from None

        deleted = obj.get("deleted", False)
        if not isinstance(deleted, bool):
            raise ParseError(lineno, "deleted must be a boolean", source)
        forked_from = obj.get("forked_from")
        if forked_from is not None and not isinstance(forked_from, str):
            raise ParseError(lineno, "forked_from must be a string or null", source)
        language = obj.get("language") or ""
        if not isinstance(language, str):
            raise ParseError(lineno, "language must be a string", source)

        readme = obj.get("readme")
        if readme is not None:
            if not isinstance(readme, str):
                raise ParseError(lineno, "readme must be a string", source)
            words = description_word_count(readme)
        else:
            words = _nonneg_int(obj.get("description_word_count", 0), "description_word_count", lineno, source)

        out.append(
            ProjectRecord(
                id=pid,
                created_at=created,
                deleted=deleted,
                forked_from=forked_from or None,
                language=normalize_language(language),
                file_count=_nonneg_int(obj.get("file_count", 0), "file_count", lineno, source),
                labels=frozenset(_str_list(obj.get("labels", []), "labels", lineno, source)),
                core_developer_ids=tuple(
                    _str_list(_require(obj, "core_developers", lineno, source), "core_developers", lineno, source)
                ),
                description_word_count=words,
            )
        )
    return out


def parse_commits(stream: Lines, source: str = "") -> dict[str, CommitTimeline]:
    """Group commit timestamps into per-project day timelines, keyed in sorted id order."""
    days: dict[str, set[date]] = defaultdict(set)
    for lineno, obj in _records(stream, source):
        pid = _require(obj, "project_id", lineno, source)
        if not isinstance(pid, str) or not pid:
            raise ParseError(lineno, "project_id must be a non-empty string", source)
        try:
            day = _utc_date(_require(obj, "committed_at", lineno, source))
        except ParseError:
            raise
        except (ValueError, IndexError) as exc:
            raise ParseError(lineno, f"unparseable timestamp: {exc}", source) from None
        days[pid].add(day)
    return {pid: CommitTimeline(pid, tuple(sorted(days[pid]))) for pid in sorted(days)}


def parse_developers(stream: Lines, source: str = "") -> dict[str, DeveloperProfile]:
    out: dict[str, DeveloperProfile] = {}
    for lineno, obj in _records(stream, source):
        did = _require(obj, "id", lineno, source)
        if not isinstance(did, str) or not did:
            raise ParseError(lineno, "id must be a non-empty string", source)
        if did in out:
            raise DuplicateIdError(lineno, did, source)
        followers = _nonneg_int(obj.get("followers", 0), "followers", lineno, source)
        out[did] = DeveloperProfile(did, followers)
    return out


@dataclass(frozen=True)
class StudyFilterConfig:
    cutoff: date = DEFAULT_CUTOFF
    quiescence_days: int = 180
    exclude_forks: bool = True
    exclude_deleted: bool = True
    min_lifespan_days: int = 0
    gap_threshold_days: int = 6

    def __post_init__(self) -> None:
        # 0 is allowed so that the filter can be configured as the identity
        if self.quiescence_days < 0:
            raise ValueError(f"quiescence_days must be >= 0, got {self.quiescence_days}")
        if self.min_lifespan_days < 0:
            raise ValueError(f"min_lifespan_days must be >= 0, got {self.min_lifespan_days}")

    @property
    def last_allowed_commit(self) -> date:
        return self.cutoff - timedelta(days=self.quiescence_days)


RULES = ("quiescent", "original", "not_deleted", "min_lifespan")


def rule_results(
    project: ProjectRecord, timeline: Optional[CommitTimeline], cfg: StudyFilterConfig
) -> dict[str, bool]:
    """Evaluate every study rule independently; True means the rule keeps the project."""
    last = timeline.last if timeline is not None else None
    return {
        "quiescent": last is None or last <= cfg.last_allowed_commit,
        "original": not (cfg.exclude_forks and project.forked_from is not None),
        "not_deleted": not (cfg.exclude_deleted and project.deleted),
        "min_lifespan": cfg.min_lifespan_days == 0
        or compute_lifespan(project, timeline, cfg.gap_threshold_days).days >= cfg.min_lifespan_days,
    }


@dataclass
class FilterSummary:
    total: int = 0
    kept: int = 0
    per_rule: dict[str, dict[str, int]] = field(
        default_factory=lambda: {rule: {"kept": 0, "dropped": 0} for rule in RULES}
    )

    @property
    def dropped(self) -> int:
        return self.total - self.kept

    def line(self) -> str:
        parts = [f"total={self.total}", f"kept={self.kept}", f"dropped={self.dropped}"]
        parts += [f"{rule}:kept={c['kept']},dropped={c['dropped']}" for rule, c in self.per_rule.items()]
        return " ".join(parts)

    def to_dict(self) -> dict:
        return {"total": self.total, "kept": self.kept, "dropped": self.dropped, "rules": self.per_rule}


def filter_with_summary(
    projects: Iterable[ProjectRecord],
    timelines: Mapping[str, CommitTimeline],
    cfg: StudyFilterConfig,
) -> tuple[list[ProjectRecord], FilterSummary]:
    kept: list[ProjectRecord] = []
    summary = FilterSummary()
    for p in projects:
        results = rule_results(p, timelines.get(p.id), cfg)
        summary.total += 1
        for rule, ok in results.items():
            summary.per_rule[rule]["kept" if ok else "dropped"] += 1
        if all(results.values()):
            kept.append(p)
    summary.kept = len(kept)

    firsts = [tl.commit_dates[0] for tl in timelines.values() if tl.commit_dates]
    if firsts and cfg.cutoff < min(firsts):
        log.warning("cutoff %s is earlier than every commit in the dataset", cfg.cutoff.isoformat())
    return kept, summary


def apply_study_filter(
    projects: Iterable[ProjectRecord],
    timelines: Mapping[str, CommitTimeline],
    cfg: StudyFilterConfig = StudyFilterConfig(),
) -> list[ProjectRecord]:
    """Keep quiescent, original, undeleted projects that lived long enough.

    Order is preserved. Projects without commits pass the quiescence rule
    and are only removed by a positive ``min_lifespan_days``.
    """
    return filter_with_summary(projects, timelines, cfg)[0]
