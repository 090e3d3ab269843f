"""End-to-end regression against the committed golden report of the synthetic fixture."""

import os

import pytest

from report import dump_report, parse_report, run
from validation import validate_run_config

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
SERIES = os.path.join(FIXTURES, "synthetic_trend_n60.csv")
GOLDEN = os.path.join(FIXTURES, "golden_report_n60.json")


def annual_lag4_report() -> str:
    config = validate_run_config({
        "input": SERIES,
        "lag": 4,
        "q": "1,2,inf",
        "families": "M,Mt,Minv,Minvt,S,Sinv",
        "tol_rel": 1e-10,
        "format": "json",
        "preset": "annual_lag4",
    })
    return dump_report(run(config), "json")


@pytest.fixture(scope="module")
def golden_text():
    assert os.path.exists(GOLDEN), "fixtures/golden_report_n60.json is missing"
    with open(GOLDEN, "r", encoding="utf-8", newline="") as f:
        return f.read()


def test_golden_report(golden_text):
    assert annual_lag4_report() == golden_text


def test_golden_report_shape(golden_text):
    golden = parse_report(golden_text, "json")
    assert golden["provenance"]["n"] == 60
    assert golden["provenance"]["config"]["preset"] == "annual_lag4"
    assert [entry["q"] for entry in golden["results"]] == ["1", "2", "inf"]
    for entry in golden["results"]:
        assert entry["cost"] == min(entry["family_costs"].values())


def test_run_leaves_fixtures_untouched(golden_text):
    before = sorted(os.listdir(FIXTURES))
    annual_lag4_report()
    assert sorted(os.listdir(FIXTURES)) == before
