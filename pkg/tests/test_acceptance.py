"""Exit criteria for the toolkit, one test per criterion.

Corpus-scale figures need the full 2013 GitHub dump, so every check here is
oracle- or property-based at desk scale. A PASS/FAIL line per criterion is
printed in the terminal summary.
"""

import io
import json
import random
import time
from datetime import date, timedelta

import pytest

from seco_lifespan import reference
from seco_lifespan.cli import main
from seco_lifespan.core import CommitTimeline, FeatureVector, ModelParams
from seco_lifespan.features import extract_features
from seco_lifespan.ingest import (
    StudyFilterConfig,
    apply_study_filter,
    filter_with_summary,
    parse_commits,
    parse_developers,
    parse_projects,
)
from seco_lifespan.lifespan import compute_lifespan, non_working_ratio
from seco_lifespan.model import (
    derive_label_offsets,
    derive_language_factors,
    evaluate,
    predict_lifespan,
)
from seco_lifespan.stats import LabelStatsRow, pearson, quartiles
from seco_lifespan.syngen import GenConfig, generate

from conftest import day_timeline, make_project
from test_stats import pearson_oracle

PIPELINE_ARTIFACTS = [
    "projects.jsonl", "commits.jsonl", "developers.jsonl", "truth.jsonl",
    "filtered_ids.txt", "filter_summary.json",
    "lifespans.csv", "features.csv", "histogram.csv", "language_table.csv", "language_table.json",
    "label_table.csv", "label_table.json", "core_developers.csv", "language_usage.csv",
    "series_description_words.tsv", "series_file_count.tsv", "series_followers.tsv", "correlations.json",
    "params.json", "predictions.csv", "evaluation.csv", "cdf.json",
]


def load_dir(path):
    with open(path / "projects.jsonl", "rb") as fh:
        projects = parse_projects(fh)
    with open(path / "commits.jsonl", "rb") as fh:
        timelines = parse_commits(fh)
    with open(path / "developers.jsonl", "rb") as fh:
        developers = parse_developers(fh)
    return projects, timelines, developers


@pytest.fixture(scope="module")
def planted_1000(tmp_path_factory):
    out = tmp_path_factory.mktemp("planted")
    start = time.perf_counter()
    assert main(["gen", "--count", "1000", "--noise-sd", "0", "--seed", "42", "--out-dir", str(out)]) == 0
    return out, time.perf_counter() - start


def test_ac01_predictor_oracle():
    """AC1 predictor: Java n=1024 m=256 -> 96.32, with label offset 23.1 -> 114.80 (tol 1e-9)"""
    params = ModelParams(alpha=1.204, beta=0.8, label_offsets={"Maps": 23.1}, global_mean_lifespan=149.4)
    start = time.perf_counter()
    plain = predict_lifespan(FeatureVector(n=1024, language="Java", m=256), params)
    labelled = predict_lifespan(FeatureVector(n=1024, language="Java", m=256, labels={"Maps"}), params)
    elapsed = time.perf_counter() - start
    assert abs(plain - 96.32) <= 1e-9
    assert abs(labelled - 114.80) <= 1e-9
    assert elapsed < 0.05


def test_ac02_calibration_cross_check():
    """AC2 calibration: factor(C#) = 1.059 +- 5e-4, factor(Java) = 1.0 exactly, lab(Maps) = 23.1 +- 1e-9"""
    factors = derive_language_factors(reference.LANGUAGE_TABLE, "Java")
    assert abs(factors["C#"] - 1.059) <= 5e-4
    assert factors["Java"] == 1.0
    offsets = derive_label_offsets([LabelStatsRow("Maps", 172.5, 1)], 149.4)
    assert abs(offsets["Maps"] - 23.1) <= 1e-9


def test_ac03_lifespan_worked_example():
    """AC3 life-span: created 2015-05-05, last commit 2015-05-29 -> exactly 24 days"""
    p = make_project(created="2015-05-05T09:30:00")
    tl = CommitTimeline("p1", (date(2015, 5, 5), date(2015, 5, 17), date(2015, 5, 29)))
    assert compute_lifespan(p, tl).days == 24


def test_ac04_non_working_ratio_suite():
    """AC4 non-working ratio: four examples exact; 0 <= r <= 1 and translation invariance on 10,000 timelines"""
    d0 = date(2013, 1, 1)
    assert non_working_ratio(day_timeline("p", d0, range(10)), 9) == (0, 0.0)
    assert non_working_ratio(day_timeline("p", d0, [0, 20]), 20) == (20, 1.0)
    assert non_working_ratio(day_timeline("p", d0, [0, 5, 10]), 10) == (0, 0.0)
    assert non_working_ratio(day_timeline("p", d0, [0, 8, 9]), 9) == (8, 8 / 9)

    rng = random.Random(4)
    for _ in range(10_000):
        offsets = sorted(rng.sample(range(0, 1500), rng.randint(0, 30)))
        span = offsets[-1] - offsets[0] if offsets else 0
        lifespan = span + rng.randint(0, 200)
        d, r = non_working_ratio(day_timeline("p", d0, offsets), lifespan)
        assert 0.0 <= r <= 1.0 and 0 <= d <= lifespan
        shifted = day_timeline("p", d0 + timedelta(days=rng.randint(-5000, 5000)), offsets)
        assert non_working_ratio(shifted, lifespan) == (d, r)


def test_ac05_pearson_and_quartile_oracles():
    """AC5 statistics: Pearson within 1e-9 of brute force on 1,000 vectors; quartile invariants on 1,000 lists; < 5 s"""
    rng = random.Random(5)
    start = time.perf_counter()
    for _ in range(1000):
        n = rng.randint(2, 100)
        x = [rng.uniform(-1e3, 1e3) for _ in range(n)]
        y = [rng.uniform(-1e3, 1e3) for _ in range(n)]
        assert abs(pearson(x, y) - pearson_oracle(x, y)) <= 1e-9
    for _ in range(1000):
        values = [rng.uniform(-1e4, 1e4) for _ in range(rng.randint(1, 60))]
        q1, med, q3 = quartiles(values)
        assert min(values) <= q1 <= med <= q3 <= max(values)
        shuffled = values[:]
        rng.shuffle(shuffled)
        assert quartiles(shuffled) == (q1, med, q3)
    assert time.perf_counter() - start < 5.0


def test_ac06_planted_round_trip(planted_1000, tmp_path, capsys):
    """AC6 planted round trip: gen 1,000 noise-free (seed 42) -> evaluate prints 1.00 below 0.1; every error <= 0.5/actual; < 10 s"""
    data, gen_seconds = planted_1000
    start = time.perf_counter()
    assert main(["evaluate", "--data", str(data), "--out-dir", str(tmp_path)]) == 0
    elapsed = gen_seconds + time.perf_counter() - start
    out = capsys.readouterr().out
    assert "fraction with relative error <= 0.1: 1.00" in out

    projects, timelines, developers = load_dir(data)
    rows = [(extract_features(p, developers), compute_lifespan(p, timelines[p.id])) for p in projects]
    report = evaluate(rows, GenConfig().params)
    assert len(report.rows) == 1000
    assert all(r.relative_error <= 0.5 / r.actual for r in report.rows)
    assert elapsed < 10.0


def test_ac07_planted_linear_correlation(tmp_path):
    """AC7 planted correlation: days = 2 * n exactly gives file-number r = 1.0 +- 1e-9"""
    data = tmp_path / "data"
    assert main(["gen", "--count", "500", "--seed", "7", "--days-per-file", "2", "--out-dir", str(data)]) == 0
    projects, timelines, _ = load_dir(data)
    assert all(compute_lifespan(p, timelines[p.id]).days == 2 * p.file_count for p in projects)
    assert main(["stats", "--data", str(data), "--out-dir", str(tmp_path / "stats")]) == 0
    corr = json.loads((tmp_path / "stats" / "correlations.json").read_text())
    assert abs(corr["file_count"]["r"] - 1.0) <= 1e-9


def test_ac08_filter_partition(planted_1000):
    """AC8 filter: kept + dropped = total per rule, idempotent, identity configuration keeps everything"""
    data, _ = planted_1000
    projects, timelines, _ = load_dir(data)
    configs = [
        StudyFilterConfig(),
        StudyFilterConfig(cutoff=date(2013, 6, 1), quiescence_days=90, min_lifespan_days=10),
        StudyFilterConfig(cutoff=date(2014, 1, 1), quiescence_days=30, min_lifespan_days=200),
    ]
    for cfg in configs:
        kept, summary = filter_with_summary(projects, timelines, cfg)
        assert summary.total == len(projects)
        assert summary.kept + summary.dropped == summary.total
        for counts in summary.per_rule.values():
            assert counts["kept"] + counts["dropped"] == len(projects)
        assert apply_study_filter(kept, timelines, cfg) == kept
    identity = StudyFilterConfig(cutoff=date(2100, 1, 1), quiescence_days=0, exclude_forks=False,
                                 exclude_deleted=False, min_lifespan_days=0)
    assert apply_study_filter(projects, timelines, identity) == projects


def run_pipeline(root):
    data, out = root / "data", root / "out"
    common = ["--data", str(data), "--out-dir", str(out)]
    ids = ["--ids", str(out / "filtered_ids.txt")]
    steps = [
        ["gen", "--count", "10000", "--seed", "2024", "--out-dir", str(data)],
        ["filter", *common, "--cutoff", "2015-01-01"],
        ["stats", *common, *ids],
        ["calibrate", *common, *ids],
        ["predict", *common, *ids, "--params", str(out / "params.json")],
        ["evaluate", *common, *ids, "--params", str(out / "params.json")],
    ]
    for argv in steps:
        assert main(argv) == 0, argv
    files = {}
    for name in PIPELINE_ARTIFACTS:
        path = data / name if name.endswith(".jsonl") else out / name
        files[name] = path.read_bytes()
    return files


def test_ac09_end_to_end_determinism(tmp_path, capsys):
    """AC9 end to end: gen -> filter -> stats -> calibrate -> predict -> evaluate on 10,000 projects, < 60 s, byte-identical reruns"""
    timings, outputs = [], []
    for run in ("a", "b"):
        start = time.perf_counter()
        outputs.append(run_pipeline(tmp_path / run))
        timings.append(time.perf_counter() - start)
    capsys.readouterr()
    assert len(outputs[0]["projects.jsonl"].splitlines()) == 10_000
    assert outputs[0].keys() == outputs[1].keys()
    for name in outputs[0]:
        assert outputs[0][name] == outputs[1][name], name
    assert max(timings) < 60.0, timings


def test_ac10_cdf_sanity_under_perturbation(planted_1000):
    """AC10 CDF sanity: non-decreasing and bounded by 1 for 100 random perturbations of the planted model"""
    data, _ = planted_1000
    projects, timelines, developers = load_dir(data)
    rows = [(extract_features(p, developers), compute_lifespan(p, timelines[p.id])) for p in projects]
    base = GenConfig().params
    rng = random.Random(10)
    for _ in range(100):
        factors = {k: (1.0 if k == base.baseline else v * rng.uniform(0.5, 2.0)) for k, v in base.language_factors.items()}
        params = ModelParams(
            alpha=base.alpha * rng.uniform(0.25, 4.0),
            beta=base.beta * rng.uniform(0.0, 2.0),
            language_factors=factors,
            label_offsets={k: v + rng.uniform(-100, 100) for k, v in base.label_offsets.items()},
            global_mean_lifespan=base.global_mean_lifespan,
        )
        report = evaluate(rows, params, thresholds=[rng.uniform(0, 2) for _ in range(12)])
        fractions = [f for _, f in report.cdf_points]
        assert all(0.0 <= f <= 1.0 for f in fractions)
        assert all(a <= b for a, b in zip(fractions, fractions[1:]))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
