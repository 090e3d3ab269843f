"""Command-line exit codes, error payloads and outputs."""

import json

import pytest

from cli import main
from report import parse_report


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    for var in ("SPLINE_WEIGHTS_LAG", "SPLINE_WEIGHTS_Q", "SPLINE_WEIGHTS_FAMILIES", "SPLINE_WEIGHTS_TOL",
                "SPLINE_WEIGHTS_FORMAT", "SPLINE_WEIGHTS_WORKERS", "SPLINE_WEIGHTS_VERBOSE"):
        monkeypatch.delenv(var, raising=False)
    # no stray .env is read from the working directory
    monkeypatch.chdir(tmp_path)


def error_payload(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


class TestPredict:
    def test_json_report_to_file(self, fixture_csv, tmp_path):
        out = tmp_path / "report.json"
        code = main(["predict", "--input", fixture_csv, "--q", "2", "--families", "Minv,Sinv",
                     "--output", str(out)])
        assert code == 0
        report = parse_report(out.read_text(encoding="utf-8"), "json")
        assert [entry["q"] for entry in report["results"]] == ["2"]
        assert report["provenance"]["config"]["families"] == ["Minv", "Sinv"]

    def test_csv_report_to_stdout(self, fixture_csv, capsys):
        code = main(["predict", "--input", fixture_csv, "--q", "1,inf", "--families", "S", "--format", "csv"])
        assert code == 0
        report = parse_report(capsys.readouterr().out, "csv")
        assert [row["q"] for row in report["results"]] == ["1", "inf"]

    def test_verbose_lines_go_to_stderr(self, fixture_csv, capsys):
        code = main(["predict", "--input", fixture_csv, "--q", "2", "--families", "S", "--lag", "50", "-v"])
        assert code == 0
        captured = capsys.readouterr()
        assert "STAGE:S7" in captured.err
        assert json.loads(captured.out)["success"] is True

    def test_missing_input_is_ingestion_error(self, tmp_path, capsys):
        assert main(["predict", "--input", str(tmp_path / "none.csv")]) == 3
        assert error_payload(capsys)["category"] == "ingestion"

    def test_bad_q_is_config_error(self, fixture_csv, capsys):
        assert main(["predict", "--input", fixture_csv, "--q", "3"]) == 2
        payload = error_payload(capsys)
        assert payload == {"success": False, "category": "config", "error": payload["error"]}

    def test_lag_zero(self, fixture_csv, capsys):
        assert main(["predict", "--input", fixture_csv, "--lag", "0"]) == 2

    def test_too_short_for_lag(self, fixture_csv, capsys):
        assert main(["predict", "--input", fixture_csv, "--lag", "60"]) == 3
        assert error_payload(capsys)["category"] == "ingestion"

    def test_unknown_preset(self, fixture_csv, capsys):
        assert main(["predict", "--input", fixture_csv, "--preset", "nope"]) == 2

    def test_unwritable_output(self, fixture_csv, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("x")
        code = main(["predict", "--input", fixture_csv, "--q", "2", "--families", "S",
                     "--output", str(blocker / "report.json")])
        assert code == 1
        assert error_payload(capsys)["category"] == "io"

    def test_weight_dump(self, fixture_csv, tmp_path, capsys):
        code = main(["predict", "--input", fixture_csv, "--q", "inf", "--families", "Sinv",
                     "--emit-weights", str(tmp_path / "w")])
        assert code == 0
        lines = (tmp_path / "w" / "weights_qinf.csv").read_text().splitlines()
        assert lines[0] == "index,year,weight"
        assert len(lines) == 62


class TestMatrices:
    def test_energy_pair(self, capsys):
        assert main(["matrices", "--level", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# M level=2"
        assert lines[1] == "c0,c1,c2"
        assert lines[5] == "# S level=2"
        assert len(lines) == 10

    def test_family(self, capsys):
        assert main(["matrices", "--level", "1", "--family", "Sinv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# Theta_Sinv level=1"
        row = [float(x) for x in lines[2].split(",")]
        assert row == pytest.approx([4.0, -2.0])

    def test_bad_level(self, capsys):
        assert main(["matrices", "--level", "0"]) == 2
