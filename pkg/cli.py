"""Command-line driver.

    python cli.py predict --input series.csv [--lag 4] [--q 1,2,inf] [--families M,Minv] ...
    python cli.py matrices --level 7 [--family Sinv]
"""

import argparse
import io
import json
import sys
from typing import Any, Dict, List, Optional

import pandas as pd

from energy_matrices import assemble_energy, family_level
from errors import ConfigError, SplineWeightsError
from models import FamilyId
from report import emit_plot_data, run, write_report
from run_config import load_run_config, parse_family_list, parse_q_list
from validation import validate_run_config

EXIT_OK = 0
EXIT_IO = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spline-weights",
        description="Select spline-energy parametrizations and criteria by one-step-ahead backtest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    predict = sub.add_parser("predict", help="Run the tournament on a year,value CSV series.")
    predict.add_argument("--input", required=True, help="CSV with header 'year,value'.")
    predict.add_argument("--preset", help="Named preset from presets.json.")
    predict.add_argument("--lag", type=int, help="First backtest level L (default 4).")
    predict.add_argument("--q", help="Cost exponents, e.g. 1,2,inf.")
    predict.add_argument("--families", help="Family tags, e.g. M,Mt,Minv,Minvt,S,Sinv.")
    predict.add_argument("--tol", dest="tol_rel", type=float, help="Relative I(l) threshold (default 1e-10).")
    predict.add_argument("--format", choices=["json", "csv"], help="Report format (default json).")
    predict.add_argument("--output", help="Report path (default stdout).")
    predict.add_argument("--output-dir", help="Directory for basis dumps (default .).")
    predict.add_argument("--emit-weights", metavar="DIR", help="Write final weight rows per q.")
    predict.add_argument("--emit-basis", type=int, metavar="L", help="Write basis columns of level L.")
    predict.add_argument("--emit-spline", metavar="PATH", help="Write spline samples.")
    predict.add_argument("--spline-resolution", type=int, help="Samples per unit interval (default 10).")
    predict.add_argument("--svg", action="store_true", default=None, help="Also write SVG charts.")
    predict.add_argument("--full-precision", action="store_true", default=None, help="Do not round to 7 digits.")
    predict.add_argument("--workers", type=int, help="Threads for matrix assembly (default 1).")
    predict.add_argument("--verbose", "-v", action="store_true", default=None, help="Progress lines on stderr.")

    matrices = sub.add_parser("matrices", help="Dump M, S or a family's Θ at one level as CSV.")
    matrices.add_argument("--level", type=int, required=True)
    matrices.add_argument("--family", help="Family tag; omitted dumps M and S.")
    matrices.add_argument("--output", help="CSV path (default stdout).")
    return parser


def _predict_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {
        key: getattr(args, key)
        for key in (
            "input", "preset", "lag", "tol_rel", "format", "output", "output_dir", "emit_weights",
            "emit_basis", "emit_spline", "spline_resolution", "svg", "full_precision", "workers", "verbose",
        )
    }
    if args.q is not None:
        overrides["q"] = parse_q_list(args.q)
    if args.families is not None:
        overrides["families"] = [f.value for f in parse_family_list(args.families)]
    return overrides


def _matrix_sections(level: int, family: Optional[str]) -> str:
    if level < 1:
        raise ConfigError(f"level must be >= 1 (got {level})")
    if family:
        theta, _ = family_level(FamilyId.from_tag(family), level)
        sections = [(f"Theta_{FamilyId.from_tag(family).value}", theta)]
    else:
        pair = assemble_energy(level)
        sections = [("M", pair.M), ("S", pair.S)]

    buffer = io.StringIO()
    for name, matrix in sections:
        buffer.write(f"# {name} level={level}\n")
        frame = pd.DataFrame(matrix, columns=[f"c{j}" for j in range(matrix.shape[1])])
        frame.to_csv(buffer, index=False, lineterminator="\n", float_format="%.17g")
    return buffer.getvalue()


def _write(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _fail(payload: Dict[str, Any], code: int) -> int:
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "matrices":
            _write(_matrix_sections(args.level, args.family), args.output)
            return EXIT_OK

        config = validate_run_config(load_run_config(_predict_overrides(args)))
        report = run(config)
        text = write_report(report, config["format"], config.get("output"))
        if not config.get("output"):
            sys.stdout.write(text)
        emit_plot_data(report, config)
        return EXIT_OK
    except SplineWeightsError as e:
        return _fail(e.to_payload(), e.exit_code)
    except OSError as e:
        return _fail({"success": False, "category": "io", "error": str(e)}, EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
