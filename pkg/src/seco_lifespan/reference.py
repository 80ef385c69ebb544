"""Published corpus-level figures for the GitHub 2013 snapshot (843,763 projects).

These cannot be recomputed without the original dump. They serve as golden
fixtures for report formats and as the source of the shipped default model
parameters.
"""

from __future__ import annotations

from .stats import LabelStatsRow, LanguageStatsRow

# language, average, Q1, median, Q3 (counts were not published)
LANGUAGE_TABLE = [
    LanguageStatsRow("Java", 145.6598, 25, 63, 182, 1),
    LanguageStatsRow("C#", 154.2792, 26, 72, 195, 1),
    LanguageStatsRow("JavaScript", 160.0089, 23, 79, 128, 1),
    LanguageStatsRow("Objective-C", 167.9306, 24, 67, 213, 1),
    LanguageStatsRow("C++", 169.6528, 28, 76, 215, 1),
    LanguageStatsRow("PHP", 182.7401, 32, 93, 250, 1),
    LanguageStatsRow("C", 206.0435, 31, 90, 273, 1),
    LanguageStatsRow("Python", 210.2633, 34, 105, 289, 1),
    LanguageStatsRow("Ruby", 213.5365, 27, 81, 272, 1),
    LanguageStatsRow("Shell", 237.9406, 45, 137, 300, 1),
    LanguageStatsRow("Perl", 343.0235, 58, 211, 526, 1),
]

LABEL_TABLE = [
    LabelStatsRow(label, average, 1)
    for label, average in [
        ("editor", 577.0),
        ("Linux", 551.1),
        ("Compatibility", 521.7),
        ("optimization", 503.5),
        ("template", 493.4),
        ("Windows", 474.9),
        ("Website", 463.9),
        ("security", 413.9),
        ("enhancements", 395.0),
        ("Mobile", 389.0),
        ("API", 370.6),
        ("Database", 355.8),
        ("plugin", 318.5),
        ("server", 299.5),
        ("model", 297.0),
        ("IOS", 260.5),
        ("build", 259.1),
        ("architecture", 252.3),
        ("web", 241.4),
        ("bug", 212.5),
        ("Maps", 172.5),
        ("data IO", 126.0),
        ("back end", 124.5),
        ("J2ME", 70.0),
        ("HTML 5", 70.0),
        ("bootstrap", 60.0),
    ]
]

CORE_DEVELOPER_COUNTS = [
    (1, 260840),
    (2, 17939),
    (3, 6359),
    (4, 3157),
    (5, 1801),
    (6, 966),
    (7, 668),
    (8, 466),
    (9, 481),
    (10, 294),
]

# Only these shares were stated numerically.
LANGUAGE_USAGE = [("Ruby", 0.1464), ("Java", 0.1424), ("Perl", 0.0231)]

GLOBAL_MEAN_LIFESPAN = 149.4
ALPHA = 1.204
BETA = 0.8

# correlation with life-span
FILE_COUNT_R = 0.85
FOLLOWER_R = {"Java": 0.3852, "JavaScript": 0.6338, "PHP": 0.2924}
DESCRIPTION_R = {"0-500": 0.289, "500-1000": 0.084}

# share of low non-working-ratio projects under a relative-error threshold
RELATIVE_ERROR_CDF = {0.1: 0.36, 0.3: 0.53}
