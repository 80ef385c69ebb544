"""Seeded synthetic datasets with a planted life-span model.

Each project draws from its own random stream keyed by ``(seed, index)``,
so output does not depend on generation order or worker count. Projects
are created on 2012-01-01 plus a uniform offset; their commit timelines
realize a planted life-span and non-working ratio exactly.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import FeatureVector, ModelParams
from .model import default_params, predict_lifespan

EPOCH = date(2012, 1, 1)
FILE_NAMES = {
    "projects": "projects.jsonl",
    "commits": "commits.jsonl",
    "developers": "developers.jsonl",
    "truth": "truth.jsonl",
}


class GenerationError(ValueError):
    pass


def _default_languages() -> dict[str, float]:
    return {
        "JavaScript": 0.25,
        "Ruby": 0.15,
        "Java": 0.14,
        "Python": 0.1,
        "PHP": 0.1,
        "C": 0.06,
        "C++": 0.06,
        "Objective-C": 0.04,
        "C#": 0.04,
        "Shell": 0.04,
        "Perl": 0.02,
    }


def _default_labels() -> dict[str, float]:
    return {"Database": 0.05, "web": 0.08, "API": 0.05, "Maps": 0.03, "editor": 0.02, "server": 0.04}


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    project_count: int = 1000
    language_weights: Mapping[str, float] = field(default_factory=_default_languages)
    file_count_range: tuple[int, int] = (1, 3000)
    follower_range: tuple[int, int] = (0, 600)
    core_dev_weights: Mapping[int, float] = field(default_factory=lambda: {1: 0.7, 2: 0.15, 3: 0.1, 4: 0.05})
    label_pool: Mapping[str, float] = field(default_factory=_default_labels)
    target_nonworking_ratio_range: tuple[float, float] = (0.0, 0.25)
    noise_sd: float = 0.0
    params: ModelParams = field(default_factory=default_params)
    # When set, the planted life-span is days_per_file * n instead of the model.
    days_per_file: Optional[float] = None
    gap_threshold: int = 6
    max_commit_step: int = 3
    second_commit_prob: float = 0.25
    creation_window_days: int = 365
    description_words_range: tuple[int, int] = (0, 1500)

    def __post_init__(self) -> None:
        problems = []
        if self.project_count < 1:
            problems.append("project_count must be positive")
        if not self.language_weights or any(w < 0 for w in self.language_weights.values()):
            problems.append("language weights must be non-empty and non-negative")
        elif sum(self.language_weights.values()) <= 0:
            problems.append("language weights must not all be zero")
        for name in ("file_count_range", "follower_range", "description_words_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or lo > hi:
                problems.append(f"{name} must be a non-empty non-negative interval")
        if not self.core_dev_weights or any(k < 1 or w < 0 for k, w in self.core_dev_weights.items()):
            problems.append("core developer weights need keys >= 1 and non-negative weights")
        if any(not 0 <= p <= 1 for p in self.label_pool.values()):
            problems.append("label probabilities must lie in [0, 1]")
        lo, hi = self.target_nonworking_ratio_range
        if not 0 <= lo <= hi <= 0.95:
            problems.append("target ratio range must lie within [0, 0.95]")
        if self.noise_sd < 0:
            problems.append("noise_sd must be non-negative")
        if self.gap_threshold < 1:
            problems.append("gap_threshold must be >= 1")
        if not 1 <= self.max_commit_step <= self.gap_threshold:
            problems.append("max_commit_step must lie in [1, gap_threshold]")
        if not 0 <= self.second_commit_prob <= 1:
            problems.append("second_commit_prob must lie in [0, 1]")
        if self.days_per_file is not None and self.days_per_file <= 0:
            problems.append("days_per_file must be positive")
        if self.creation_window_days < 1:
            problems.append("creation_window_days must be positive")
        if problems:
            raise ValueError("invalid generator config: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, data: Mapping) -> "GenConfig":
        kw = dict(data)
        if "params" in kw:
            kw["params"] = ModelParams.from_dict(kw["params"])
        if "core_dev_weights" in kw:
            kw["core_dev_weights"] = {int(k): v for k, v in kw["core_dev_weights"].items()}
        for name in ("file_count_range", "follower_range", "target_nonworking_ratio_range", "description_words_range"):
            if name in kw:
                kw[name] = tuple(kw[name])
        return cls(**kw)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def realize_timeline(
    lifespan_days: int,
    target_ratio: float,
    gap_threshold: int = 6,
    seed=None,
    start: date = EPOCH,
    max_step: int = 1,
) -> tuple[date, ...]:
    """Build commit dates spanning ``lifespan_days`` with a given non-working ratio.

    The non-working total is split into one or more gaps longer than
    ``gap_threshold``; the remaining days are covered by commits at most
    ``max_step`` days apart. The first date is ``start`` and the last is
    ``start + lifespan_days``.

    Raises:
        GenerationError: if no arrangement gets within 2 days of the target.
    """
    if lifespan_days < 1:
        raise GenerationError(f"life-span must be at least 1 day, got {lifespan_days}")
    if gap_threshold < 1:
        raise GenerationError("gap threshold must be >= 1")
    if not 1 <= max_step <= gap_threshold:
        raise GenerationError("max_step must lie in [1, gap_threshold]")
    if not 0 <= target_ratio <= 1:
        raise GenerationError(f"target ratio {target_ratio} outside [0, 1]")
    rng = _rng(seed)
    L, t = lifespan_days, gap_threshold

    wanted = target_ratio * L
    d = round(wanted)
    if 0 < d <= t:
        d = 0 if wanted < (t + 1) / 2 or t + 1 > L else t + 1
    if abs(d - wanted) > 2:
        raise GenerationError(f"ratio {target_ratio} is infeasible for a {L}-day life-span with gaps > {t} days")

    working = L - d
    k = 0
    if d:
        k_max = min(d // (t + 1), working + 1)
        k = int(rng.integers(1, k_max + 1))
    gaps = [t + 1] * k
    if k:
        extra = rng.multinomial(d - k * (t + 1), [1 / k] * k)
        gaps = [g + int(e) for g, e in zip(gaps, extra)]
    # interior segments need at least one day so adjacent gaps stay distinct
    segments = [0] + [1] * (k - 1) + [0] if k else [0]
    free = working - (k - 1 if k else 0)
    segments = [s + int(e) for s, e in zip(segments, rng.multinomial(free, [1 / len(segments)] * len(segments)))]

    offsets = [0]
    pos = 0
    for i, length in enumerate(segments):
        if length:
            steps = rng.integers(1, max_step + 1, size=length) if max_step > 1 else np.ones(length, dtype=np.int64)
            walk = np.cumsum(steps)
            walk = walk[walk < length].tolist()
            offsets.extend(pos + int(w) for w in walk)
            pos += length
            offsets.append(pos)
        if i < k:
            pos += gaps[i]
            offsets.append(pos)
    assert pos == L
    return tuple(start + timedelta(days=o) for o in offsets)


def _choose_nonworking_days(L: int, lo: float, hi: float, t: int, rng: np.random.Generator, index: int) -> int:
    d_min, d_max = math.ceil(lo * L - 1e-9), math.floor(hi * L + 1e-9)
    if d_min > d_max:
        raise GenerationError(f"project {index}: no timeline with ratio in [{lo}, {hi}] for a {L}-day life-span")
    d = min(max(round(rng.uniform(lo, hi) * L), d_min), d_max)
    if 0 < d <= t:
        options = [c for c in (0, t + 1) if d_min <= c <= min(d_max, L)]
        if not options:
            raise GenerationError(
                f"project {index}: no timeline with ratio in [{lo}, {hi}] for a {L}-day life-span"
            )
        d = min(options, key=lambda c: (abs(c - d), c))
    return d


def _weighted_choice(rng: np.random.Generator, weights: Mapping) -> object:
    keys = sorted(weights, key=str)
    w = np.array([weights[k] for k in keys], dtype=float)
    return keys[int(rng.choice(len(keys), p=w / w.sum()))]


def _stamp(day: date, seconds: int) -> str:
    ts = datetime(day.year, day.month, day.day, tzinfo=timezone.utc) + timedelta(seconds=seconds)
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def generate_project(cfg: GenConfig, index: int) -> tuple[str, list[str], list[str], str]:
    """Generate one project; returns its projects, commits, developers and truth lines."""
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, index])
    pid = f"p{index}"

    for _attempt in range(1000):
        language = _weighted_choice(rng, cfg.language_weights)
        n = int(rng.integers(cfg.file_count_range[0], cfg.file_count_range[1] + 1))
        dev_count = int(_weighted_choice(rng, cfg.core_dev_weights))
        followers = rng.integers(cfg.follower_range[0], cfg.follower_range[1] + 1, size=dev_count).tolist()
        labels = sorted(lab for lab in sorted(cfg.label_pool) if rng.random() < cfg.label_pool[lab])
        if cfg.days_per_file is not None:
            lp = cfg.days_per_file * n
        else:
            feats = FeatureVector(n=n, language=language, m=sum(followers), labels=frozenset(labels), core_dev_count=dev_count)
            lp = predict_lifespan(feats, cfg.params)
        if lp >= 1:
            break
    else:
        raise GenerationError(f"project {index}: could not draw features with a planted life-span of at least 1 day")

    planted = lp + (float(rng.normal(0.0, cfg.noise_sd)) if cfg.noise_sd > 0 else 0.0)
    L = max(1, round(planted))
    lo, hi = cfg.target_nonworking_ratio_range
    d = _choose_nonworking_days(L, lo, hi, cfg.gap_threshold, rng, index)

    born = EPOCH + timedelta(days=int(rng.integers(0, cfg.creation_window_days)))
    created_seconds = int(rng.integers(0, 86400))
    dates = realize_timeline(L, d / L, cfg.gap_threshold, rng, start=born, max_step=cfg.max_commit_step)

    doubles = (rng.random(len(dates)) < cfg.second_commit_prob).tolist()
    seconds = rng.integers(0, 86400, size=(len(dates), 2))
    seconds.sort(axis=1)
    prefix = '{"project_id":' + json.dumps(pid) + ',"committed_at":"'
    commit_lines = []
    for day, double, secs in zip(dates, doubles, seconds.tolist()):
        day_text = day.isoformat()
        for sec in secs if double else secs[:1]:
            commit_lines.append(f'{prefix}{day_text}T{sec // 3600:02d}:{sec // 60 % 60:02d}:{sec % 60:02d}Z"}}')

    dev_ids = [f"d{index}_{k}" for k in range(dev_count)]
    dev_lines = [_dumps({"id": did, "followers": fc}) for did, fc in zip(dev_ids, followers)]
    project_line = _dumps(
        {
            "id": pid,
            "created_at": _stamp(born, created_seconds),
            "deleted": False,
            "forked_from": None,
            "language": language,
            "file_count": n,
            "labels": labels,
            "core_developers": dev_ids,
            "description_word_count": int(rng.integers(cfg.description_words_range[0], cfg.description_words_range[1] + 1)),
        }
    )
    truth_line = _dumps({"id": pid, "planted_lp": planted, "planted_ratio": d / L})
    return project_line, commit_lines, dev_lines, truth_line


@dataclass(frozen=True)
class GeneratedDataset:
    projects: str
    commits: str
    developers: str
    truth: str

    def files(self) -> dict[str, str]:
        return {"projects": self.projects, "commits": self.commits, "developers": self.developers, "truth": self.truth}

    def write(self, out_dir: str | os.PathLike) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {}
        for key, text in self.files().items():
            path = out / FILE_NAMES[key]
            path.write_text(text, encoding="utf-8")
            paths[key] = path
        return paths


def _generate_chunk(cfg: GenConfig, indices: Sequence[int]):
    return [generate_project(cfg, i) for i in indices]


def generate(cfg: GenConfig, workers: int = 1) -> GeneratedDataset:
    """Generate a full dataset; identical configs give byte-identical files."""
    indices = range(cfg.project_count)
    if workers > 1 and cfg.project_count > 1:
        chunk = max(1, math.ceil(cfg.project_count / (workers * 4)))
        parts = [indices[i : i + chunk] for i in range(0, cfg.project_count, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for batch in pool.map(_generate_chunk, [cfg] * len(parts), parts) for r in batch]
    else:
        results = _generate_chunk(cfg, indices)

    projects, commits, developers, truth = [], [], [], []
    for project_line, commit_lines, dev_lines, truth_line in results:
        projects.append(project_line)
        commits.extend(commit_lines)
        developers.extend(dev_lines)
        truth.append(truth_line)

    def text(lines: list[str]) -> str:
        return "".join(line + "\n" for line in lines)

    return GeneratedDataset(text(projects), text(commits), text(developers), text(truth))
