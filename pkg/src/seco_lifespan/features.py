"""Per-project characteristics: size, membership, description, language, labels."""

from __future__ import annotations

import csv
from collections import Counter
from typing import Iterable, Literal, Mapping, TextIO

from .core import DeveloperProfile, FeatureVector, ProjectRecord

Aggregate = Literal["sum", "mean", "max"]


class UnresolvedDeveloperError(KeyError):
    pass


def extract_features(
    project: ProjectRecord,
    developers: Mapping[str, DeveloperProfile],
    aggregate: Aggregate = "sum",
) -> FeatureVector:
    """Build the predictor inputs for ``project``.

    ``m`` aggregates follower counts over the core developers; the default
    is their total.
    """
    followers = []
    for dev_id in project.core_developer_ids:
        try:
            followers.append(developers[dev_id].follower_count)
        except KeyError:
            raise UnresolvedDeveloperError(
                f"project {project.id!r} references unknown developer {dev_id!r}"
            ) from None
    if aggregate == "sum":
        m = sum(followers)
    elif aggregate == "mean":
        m = sum(followers) / len(followers) if followers else 0
    elif aggregate == "max":
        m = max(followers, default=0)
    else:
        raise ValueError(f"unknown follower aggregate {aggregate!r}")
    return FeatureVector(
        n=project.file_count,
        language=project.language,
        m=m,
        labels=project.labels,
        core_dev_count=len(project.core_developer_ids),
        description_word_count=project.description_word_count,
        project_id=project.id,
    )


def description_word_count(readme_text: str) -> int:
    return len(readme_text.split())


def language_usage(projects: Iterable[ProjectRecord]) -> list[tuple[str, float]]:
    """Share of projects per language, largest first; language-less projects are skipped."""
    counts = Counter(p.language for p in projects if p.language)
    total = sum(counts.values())
    if not total:
        return []
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(lang, c / total) for lang, c in ordered]


def core_dev_count_distribution(projects: Iterable[ProjectRecord]) -> list[tuple[int, int]]:
    counts = Counter(len(p.core_developer_ids) for p in projects)
    return sorted(counts.items())


def _fmt(value) -> str:
    return str(value) if isinstance(value, int) else f"{value:.4f}"


def write_features_csv(features: Iterable[FeatureVector], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["project_id", "n", "language", "m", "core_dev_count", "labels", "description_words"])
    for f in features:
        w.writerow(
            [f.project_id, f.n, f.language, _fmt(f.m), f.core_dev_count, "|".join(sorted(f.labels)), f.description_word_count]
        )


def read_features_csv(fh: TextIO) -> list[FeatureVector]:
    out = []
    for row in csv.DictReader(fh):
        m = float(row["m"])
        out.append(
            FeatureVector(
                n=int(row["n"]),
                language=row["language"],
                m=int(m) if m.is_integer() else m,
                labels=frozenset(x for x in row["labels"].split("|") if x),
                core_dev_count=int(row["core_dev_count"]),
                description_word_count=int(row["description_words"]),
                project_id=row["project_id"],
            )
        )
    return out


def write_language_usage_csv(rows: Iterable[tuple[str, float]], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["language", "share"])
    for lang, share in rows:
        w.writerow([lang, f"{share:.4f}"])


def write_core_dev_distribution_csv(rows: Iterable[tuple[int, int]], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["core_developers", "projects"])
    w.writerows(rows)
