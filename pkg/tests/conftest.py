from __future__ import annotations

import json
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import pytest

from seco_lifespan.core import CommitTimeline, DeveloperProfile, ProjectRecord


def make_project(pid="p1", created="2015-05-05", devs=("d1",), **kw) -> ProjectRecord:
    created_at = datetime.fromisoformat(created).replace(tzinfo=timezone.utc)
    return ProjectRecord(id=pid, created_at=created_at, core_developer_ids=tuple(devs), **kw)


def day_timeline(pid: str, start: date, offsets) -> CommitTimeline:
    return CommitTimeline(pid, tuple(start + timedelta(days=o) for o in offsets))


def write_jsonl(path: Path, records) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


@pytest.fixture
def tiny_dataset():
    projects = [make_project("p1", devs=("d1",))]
    timelines = {"p1": day_timeline("p1", date(2015, 5, 5), [0, 3, 24])}
    developers = {"d1": DeveloperProfile("d1", 5)}
    return projects, timelines, developers


def pytest_collection_modifyitems(items):
    for item in items:
        if item.module.__name__.endswith("test_acceptance"):
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            item.user_properties.append(("criterion", doc))


_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome != "passed":
        if _acceptance.get(props["criterion"]) in (None, "PASS"):
            _acceptance[props["criterion"]] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, outcome in _acceptance.items():
        terminalreporter.write_line(f"[{outcome}] {criterion}")
