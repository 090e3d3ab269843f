"""Series ingestion, the end-to-end run and report/plot-data emission."""

import io
import json
import math
import os
import warnings
from typing import Any, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from energy_matrices import family_level  # noqa: E402
from errors import ConfigError, IngestionError, InsufficientDataError  # noqa: E402
from models import PACKAGE_VERSION, FamilyId, RunConfig, SeriesData, TournamentResult, q_label  # noqa: E402
from run_config import config_echo  # noqa: E402
from spline_core import interpolate_natural, sample  # noqa: E402
from tournament import prepare_families, run_tournament  # noqa: E402
from utilities import file_digest, format_number, format_vector, log_event  # noqa: E402
from validation import validate_run_config  # noqa: E402

REPORT_FORMATS = ("json", "csv")
PROVENANCE_PREFIX = "# provenance: "
WARNINGS_PREFIX = "# warnings: "

CSV_COLUMNS = [
    "q",
    "family",
    "criterion",
    "kind",
    "u",
    "v",
    "q1",
    "cost",
    "criterion_cost",
    "backtest_year",
    "backtest_prediction",
    "true_value",
    "forecast_year",
    "forecast",
]
_CSV_INT_COLUMNS = ("u", "v", "backtest_year", "forecast_year")
_CSV_FLOAT_COLUMNS = ("cost", "criterion_cost", "backtest_prediction", "true_value", "forecast")


# --- Ingestion --- #

def ingest_csv(path: str, lag: Optional[int] = None) -> SeriesData:
    """
    Read a `year,value` CSV of consecutive years.

    Args:
        path: UTF-8 CSV file with a header row
        lag: When given, at least lag + 2 rows are required

    Returns:
        SeriesData with s(0) at the first year

    Raises:
        IngestionError: bad header, missing/duplicate/non-consecutive year or unparsable value,
            naming the file line
        InsufficientDataError: too few rows
    """
    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8-sig",
        )
    except FileNotFoundError as e:
        raise IngestionError(f"input file not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise IngestionError("input file is empty", line=1) from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise IngestionError(f"cannot parse CSV: {e}") from e

    header = [str(c).strip().lower() for c in frame.columns]
    if header != ["year", "value"]:
        raise IngestionError(f"header must be 'year,value' (got {','.join(map(str, frame.columns))})", line=1)

    # Trailing blank lines are not data.
    while len(frame) and not "".join(frame.iloc[-1]).strip():
        frame = frame.iloc[:-1]

    years: List[int] = []
    values: List[float] = []
    for index, (year_text, value_text) in enumerate(zip(frame["year"], frame["value"])):
        line = index + 2
        year_text, value_text = year_text.strip(), value_text.strip()
        if not year_text:
            raise IngestionError("missing year", line=line)
        try:
            year = int(year_text)
        except ValueError as e:
            raise IngestionError(f"year {year_text!r} is not an integer", line=line) from e
        if years and year == years[-1]:
            raise IngestionError(f"duplicate year {year}", line=line)
        if years and year != years[-1] + 1:
            raise IngestionError(f"non-consecutive year {year} after {years[-1]}", line=line)
        try:
            value = float(value_text)
        except ValueError as e:
            raise IngestionError(f"value {value_text!r} is not a number", line=line) from e
        if not math.isfinite(value):
            raise IngestionError(f"value {value_text!r} is not finite", line=line)
        years.append(year)
        values.append(value)

    needed = 2 if lag is None else lag + 2
    if len(values) < needed:
        raise InsufficientDataError(f"{len(values)} rows found, at least {needed} required")
    return SeriesData(values=np.array(values), start_year=years[0])


# --- Run --- #

def _result_entry(result: TournamentResult, series: SeriesData, full_precision: bool) -> Dict[str, Any]:
    fmt = lambda x: format_number(x, full_precision)  # noqa: E731
    n = series.n
    trace = result.winner.trace
    return {
        "q": q_label(result.q),
        "family": result.family.value,
        "criterion": result.criterion.to_dict(),
        "cost": fmt(result.cost.value),
        "criterion_cost": fmt(result.criterion_cost),
        "backtest_year": series.year(n),
        "backtest_prediction": fmt(result.backtest_prediction),
        "true_value": fmt(result.true_value),
        "forecast_year": series.year(n + 1),
        "forecast": fmt(result.forecast),
        "family_costs": {family: fmt(value) for family, value in result.family_costs.items()},
        "stages": [
            {
                "stage": record["stage"],
                "challenger": record["challenger"],
                "challenger_cost": fmt(record["challenger_cost"]),
                "winner": record["winner"],
                "winner_cost": fmt(record["winner_cost"]),
            }
            for record in result.stages
        ],
        "predictions": {
            "levels": [int(l) for l in trace.levels],
            "values": format_vector(trace.predictions, full_precision),
        },
        "final_weights": format_vector(result.final_weights.weights, full_precision),
    }


def _collect_warnings(caught: Sequence[warnings.WarningMessage]) -> List[str]:
    # Sorted: worker threads may raise in any order.
    return sorted({f"{w.category.__name__}: {w.message}" for w in caught})


def run(config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Ingest the series, run the tournament for every q and assemble the report.

    Args:
        config: Raw or validated RunConfig settings

    Returns:
        RunReport dict with `provenance`, `results` (one entry per q) and `warnings`
    """
    checked = validate_run_config(config)
    verbose = checked.get("verbose", False)
    series = ingest_csv(checked["input"], checked["lag"])
    checked = validate_run_config(checked, series.n)
    log_event("INGEST", verbose, input=checked["input"], n=series.n, start_year=series.start_year)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        prepared = prepare_families(
            [FamilyId.from_tag(tag) for tag in checked["families"]],
            series,
            checked["lag"],
            tol_rel=checked["tol_rel"],
            workers=checked.get("workers", 1),
            verbose=verbose,
        )
        results = run_tournament(prepared, series, checked["q"], verbose=verbose)

    full_precision = checked.get("full_precision", False)
    report = {
        "success": True,
        "provenance": {
            "input": os.path.basename(checked["input"]),
            "sha256": file_digest(checked["input"]),
            "start_year": series.start_year,
            "n": series.n,
            "config": config_echo(checked),
            "full_precision": full_precision,
            "version": PACKAGE_VERSION,
        },
        "results": [_result_entry(result, series, full_precision) for result in results],
        "warnings": _collect_warnings(caught),
    }
    log_event("REPORT", verbose, rows=len(results), warnings=len(report["warnings"]))
    return report


# --- Serialization --- #

def _flatten(entry: Dict[str, Any]) -> Dict[str, Any]:
    """One CSV row per q; rows parsed back from CSV are already flat."""
    row = {key: entry.get(key) for key in CSV_COLUMNS}
    criterion = entry.get("criterion")
    if isinstance(criterion, dict):
        row["criterion"] = criterion["label"]
        row["kind"] = criterion["kind"]
        row["u"] = criterion["u"]
        row["v"] = criterion["v"]
        row["q1"] = criterion["q1"]
    return row


def dump_report(report: Dict[str, Any], fmt: str = "json") -> str:
    """Serialize a RunReport. CSV flattens one row per q; provenance rides on a comment line."""
    if fmt == "json":
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown report format {fmt!r} (expected one of {', '.join(REPORT_FORMATS)})")

    rows = [_flatten(entry) for entry in report["results"]]
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS, dtype=object)
    buffer = io.StringIO()
    buffer.write(PROVENANCE_PREFIX + json.dumps(report["provenance"], ensure_ascii=False) + "\n")
    buffer.write(WARNINGS_PREFIX + json.dumps(report.get("warnings", []), ensure_ascii=False) + "\n")
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def _parse_cell(column: str, text: str) -> Any:
    if text == "":
        return None
    if column in _CSV_INT_COLUMNS:
        return int(text)
    if column in _CSV_FLOAT_COLUMNS:
        return float(text)
    return text


def parse_report(text: str, fmt: str = "json") -> Dict[str, Any]:
    """Inverse of dump_report. CSV reports come back flattened: `results` holds one row dict per q."""
    if fmt == "json":
        return json.loads(text)
    if fmt != "csv":
        raise ConfigError(f"unknown report format {fmt!r} (expected one of {', '.join(REPORT_FORMATS)})")

    lines = text.splitlines(keepends=True)
    if len(lines) < 3 or not lines[0].startswith(PROVENANCE_PREFIX) or not lines[1].startswith(WARNINGS_PREFIX):
        raise ValueError("CSV report must start with provenance and warnings comment lines")
    provenance = json.loads(lines[0][len(PROVENANCE_PREFIX):])
    report_warnings = json.loads(lines[1][len(WARNINGS_PREFIX):])
    frame = pd.read_csv(io.StringIO("".join(lines[2:])), dtype=str, keep_default_na=False)
    results = [
        {column: _parse_cell(column, record[column]) for column in CSV_COLUMNS}
        for record in frame.to_dict(orient="records")
    ]
    return {"success": True, "provenance": provenance, "results": results, "warnings": report_warnings}


def write_report(report: Dict[str, Any], fmt: str, output: Optional[str]) -> str:
    """Write to `output` (or return the text only when output is None)."""
    text = dump_report(report, fmt)
    if output:
        directory = os.path.dirname(output)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return text


# --- Plot data --- #

def _line_chart(path: str, x: np.ndarray, series: Dict[str, np.ndarray], title: str, xlabel: str) -> None:
    fig, ax = plt.subplots(figsize=(10, 6))
    try:
        for label, y in series.items():
            ax.plot(x, y, label=label, linewidth=1.2)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.grid(True, alpha=0.3)
        if len(series) > 1:
            ax.legend()
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)


def emit_weights(report: Dict[str, Any], directory: str, svg: bool = False) -> List[str]:
    """One `weights_q<label>.csv` per q with columns index, year, weight."""
    os.makedirs(directory, exist_ok=True)
    start_year = report["provenance"]["start_year"]
    written = []
    for entry in report["results"]:
        weights = np.array(entry["final_weights"], dtype=float)
        index = np.arange(weights.size)
        frame = pd.DataFrame({"index": index, "year": start_year + index, "weight": weights})
        path = os.path.join(directory, f"weights_q{entry['q']}.csv")
        frame.to_csv(path, index=False, lineterminator="\n")
        written.append(path)
        if svg:
            chart = os.path.join(directory, f"weights_q{entry['q']}.svg")
            _line_chart(
                chart,
                start_year + index,
                {"weight": weights},
                f"Final conservative row, q={entry['q']}, {entry['family']} {entry['criterion']['label']}",
                "year",
            )
            written.append(chart)
    return written


def emit_basis(level: int, families: Sequence[str], start_year: int, directory: str, svg: bool = False) -> List[str]:
    """Basis columns b_0..b_l of B^(l) for each family, one row per index i."""
    os.makedirs(directory, exist_ok=True)
    written = []
    index = np.arange(level + 1)
    for tag in families:
        family = FamilyId.from_tag(tag)
        _, basis = family_level(family, level)
        frame = pd.DataFrame(basis, columns=[f"b_{j}" for j in range(level + 1)])
        frame.insert(0, "year", start_year + index)
        frame.insert(0, "index", index)
        path = os.path.join(directory, f"basis_l{level}_{family.value}.csv")
        frame.to_csv(path, index=False, lineterminator="\n")
        written.append(path)
        if svg:
            chart = os.path.join(directory, f"basis_l{level}_{family.value}.svg")
            columns = {f"b_{j}": basis[:, j] for j in range(level + 1)}
            _line_chart(chart, index, columns, f"Basis columns of {family.value} at level {level}", "index")
            written.append(chart)
    return written


def spline_samples(series: SeriesData, report: Dict[str, Any], resolution: int) -> pd.DataFrame:
    """Samples of the data spline and of each q's backtest-prediction spline on [0, n].

    The prediction spline of q interpolates its predictions at knots L+1..n; it is
    blank outside that range.
    """
    data_spline = interpolate_natural(series.values)
    grid = sample(data_spline, resolution)
    t = grid[:, 0]
    frame = pd.DataFrame({"t": t, "year": series.start_year + t, "data": grid[:, 1]})
    for entry in report["results"]:
        levels = np.array(entry["predictions"]["levels"], dtype=int)
        values = np.array(entry["predictions"]["values"], dtype=float)
        first = (int(levels[0]) + 1) * resolution
        column = np.full(t.shape, np.nan)
        if values.size >= 2:
            pred = sample(interpolate_natural(values), resolution)[:, 1]
            column[first:first + pred.size] = pred
        else:
            column[first] = values[0]
        frame[f"prediction_q{entry['q']}"] = column
    return frame


def emit_plot_data(report: Dict[str, Any], config: RunConfig) -> List[str]:
    """
    Write the dumps requested by `config`: weight rows, basis columns and spline samples.

    Returns:
        Paths written, in emission order
    """
    svg = bool(config.get("svg", False))
    output_dir = config.get("output_dir") or "."
    start_year = report["provenance"]["start_year"]
    written: List[str] = []

    if config.get("emit_weights"):
        written += emit_weights(report, config["emit_weights"], svg)

    if config.get("emit_basis"):
        written += emit_basis(int(config["emit_basis"]), config["families"], start_year, output_dir, svg)

    if config.get("emit_spline"):
        path = config["emit_spline"]
        series = ingest_csv(config["input"])
        frame = spline_samples(series, report, int(config.get("spline_resolution", 10)))
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", na_rep="")
        written.append(path)
        if svg:
            chart = os.path.splitext(path)[0] + ".svg"
            columns = {c: frame[c].to_numpy() for c in frame.columns if c not in ("t", "year")}
            _line_chart(chart, frame["year"].to_numpy(), columns, "Splines of the series and its predictors", "year")
            written.append(chart)

    return written
