"""Worker-count determinism: threaded matrix assembly must not change a single byte of the report."""

import os

from report import dump_report, run
from validation import validate_run_config

SERIES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures", "synthetic_trend_n60.csv")


def report_text(workers: int) -> str:
    config = validate_run_config({
        "input": SERIES,
        "lag": 4,
        "q": "1,2,inf",
        "families": "M,Minvt,Sinv",
        "tol_rel": 1e-10,
        "format": "json",
        "workers": workers,
    })
    return dump_report(run(config), "json")


class TestWorkerDeterminism:
    def test_sequential_and_threaded_reports_match(self):
        assert report_text(1) == report_text(4)

    def test_every_worker_count(self):
        expected = report_text(1)
        for workers in (2, 3, 8):
            assert report_text(workers) == expected
