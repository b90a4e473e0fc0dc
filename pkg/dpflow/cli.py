"""Command-line interface for dpflow."""

import argparse
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .cases import CaseResult, RunConfig, get_case, list_cases, resolve_config
from .cases.runconfig import merge, validate
from .config import settings
from .errors import (
    ConfigError,
    DPFlowError,
    InsufficientDataError,
    InvalidArgumentError,
    OracleFailure,
    SingularMatrixError,
    SolverFailure,
)
from .io import write_csv, write_text, write_vtk
from .mesh import write_mesh
from .verify import ERROR_COLUMNS, convergence_slopes, is_monotone_decreasing

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
SOLVER_ERRORS = (SolverFailure, SingularMatrixError, OracleFailure, ArithmeticError, np.linalg.LinAlgError)
MONITORED_COLUMNS = ("dissipation_prime", "dissipation_star", "reciprocal_error", "dissipation")


def load_config(path: str, overrides: Sequence[str] = ()) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return resolve_config(text, overrides)


def output_directory(config: RunConfig, override: Optional[str] = None) -> str:
    return override or config.output.directory or os.path.join(settings.output_dir, config.case.name)


def write_artifacts(result: CaseResult, config: RunConfig, directory: str) -> List[str]:
    """Write VTK snapshots, the report pair, extra tables and the resolved config."""
    written = []
    if config.output.vtk:
        for suffix, solution, concentration in result.fields:
            path = os.path.join(directory, f"fields_{suffix}.vtk")
            written.append(write_vtk(path, solution, concentration, title=f"dpflow {result.case} {suffix}"))
    written.append(write_csv(os.path.join(directory, "report.csv"), result.to_frame()))
    header = [f"case: {result.case}", f"seed: {config.case.seed}"]
    written.append(write_text(os.path.join(directory, "report.txt"), header + result.lines))
    for name, frame in result.tables.items():
        written.append(write_csv(os.path.join(directory, name), frame))
    written.append(write_text(os.path.join(directory, "config.resolved.ini"), [config.to_ini()]))
    return written


def run_case(config: RunConfig, output: Optional[str] = None) -> int:
    """Run one case and write its artefacts; returns the exit code."""
    case = get_case(config.case.name)
    directory = output_directory(config, output)
    try:
        result = case.run(config)
    except SOLVER_ERRORS as e:
        print(f"Error: solver failure in case {case.name}: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, InvalidArgumentError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    paths = write_artifacts(result, config, directory)
    for line in result.lines:
        print(line)
    print(f"Wrote {len(paths)} file(s) to {directory}")
    return EXIT_OK


def rung_config(config: RunConfig, refine: str, value: int) -> RunConfig:
    """`config` with the mesh scaled so its first axis has `value` cells, or with order `value`."""
    if refine == "p":
        update: Dict[str, Dict[str, object]] = {"discretization": {"order": value}}
    else:
        cells = config.mesh.cells
        update = {"mesh": {"cells": [max(1, round(value * c / cells[0])) for c in cells]}}
    return validate(merge(config.model_dump(), update))


def slope_row(frame: pd.DataFrame, refine: str) -> Dict[str, object]:
    row: Dict[str, object] = {"label": "slope"}
    ok = frame["label"] == "rung"
    for column in ERROR_COLUMNS:
        if column not in frame:
            continue
        try:
            fit = convergence_slopes(frame.loc[ok, refine], frame.loc[ok, column], kind=refine)  # type: ignore[arg-type]
        except InsufficientDataError:
            row[column] = float("nan")
            continue
        row[column] = fit.slope
    return row


def run_convergence(
    config: RunConfig, refine: str, ladder: Sequence[int], output: Optional[str] = None
) -> int:
    """Run every rung of an h- or p-ladder and tabulate the fitted rates."""
    if refine not in ("h", "p"):
        raise ConfigError(f"refine must be 'h' or 'p', got {refine!r}")
    if len(ladder) < 3:
        raise ConfigError(f"a convergence ladder needs at least 3 rungs, got {len(ladder)}")
    case = get_case(config.case.name)
    directory = output_directory(config, output)
    rows: List[Dict[str, object]] = []
    failed = 0
    for value in ladder:
        rung = rung_config(config, refine, int(value))
        try:
            result = case.run(rung)
        except SOLVER_ERRORS as e:
            logger.warning(f"rung {refine}={value} failed: {e}")
            rows.append({"label": "failed", refine: float("nan") if refine == "h" else value, "error": str(e)})
            failed += 1
            continue
        metrics = dict(result.metrics)
        row: Dict[str, object] = {"label": "rung", "h": metrics.pop("h", np.nan)}
        if refine == "p":
            row = {"label": "rung", "p": rung.discretization.order, "h": row["h"]}
        row["dofs"] = metrics.pop("dofs", np.nan)
        for column in ERROR_COLUMNS:
            if column in metrics:
                row[column] = metrics.pop(column)
        row.update({k: v for k, v in metrics.items() if isinstance(v, (int, float)) and not isinstance(v, bool)})
        rows.append(row)
        logger.info(f"rung {refine}={value}: {row['dofs']} dofs")

    frame = pd.DataFrame(rows)
    frame = pd.concat([frame, pd.DataFrame([slope_row(frame, refine)])], ignore_index=True)
    write_csv(os.path.join(directory, "convergence.csv"), frame)

    lines = [f"convergence study: case {case.name}, {refine}-ladder {list(ladder)}"]
    slopes = frame.iloc[-1]
    for column in ERROR_COLUMNS:
        if column in frame:
            lines.append(f"  slope {column}: {slopes[column]:.4f}")
    rungs = frame[frame["label"] == "rung"]
    for column in MONITORED_COLUMNS:
        if column in rungs and len(rungs) >= 3:
            decreasing = is_monotone_decreasing(rungs[column].tolist(), slack=1.0)
            lines.append(f"  {column} decreasing over the ladder: {'yes' if decreasing else 'no'}")
    if failed:
        lines.append(f"  {failed} rung(s) failed")
    write_text(os.path.join(directory, "convergence.txt"), lines)
    for line in lines:
        print(line)
    return EXIT_SOLVER if failed else EXIT_OK


def print_cases() -> None:
    print("Available cases:")
    for name in list_cases():
        print(f"  {name:<14} {get_case(name).description}")


def emit_mesh(config: RunConfig, output: Optional[str] = None) -> str:
    mesh = get_case(config.case.name).build(config).mesh
    path = output or os.path.join(output_directory(config), "mesh.dpp")
    write_text(path, [write_mesh(mesh)])
    print(mesh.describe())
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpflow",
        description="Stabilized mixed finite element solver for double porosity/permeability flow",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one case from a config file")
    run.add_argument("config", help="INI run configuration")
    run.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                     help="Override a config value (repeatable)")
    run.add_argument("--output", help="Output directory")

    converge = commands.add_parser("converge", help="Run an h- or p-refinement study")
    converge.add_argument("config", help="INI run configuration")
    converge.add_argument("--refine", choices=("h", "p"), default="h", help="Refinement kind (default: h)")
    converge.add_argument("--ladder", nargs="+", type=int, required=True,
                          help="Cells along the first axis (h) or polynomial orders (p)")
    converge.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                          help="Override a config value (repeatable)")
    converge.add_argument("--output", help="Output directory")

    commands.add_parser("cases", help="List the built-in cases")

    mesh = commands.add_parser("mesh", help="Write the mesh of a config without solving")
    mesh.add_argument("config", help="INI run configuration")
    mesh.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                      help="Override a config value (repeatable)")
    mesh.add_argument("--output", help="Mesh file to write")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.command == "cases":
        print_cases()
        return EXIT_OK

    try:
        config = load_config(args.config, args.set)
        if args.command == "run":
            return run_case(config, args.output)
        if args.command == "converge":
            return run_convergence(config, args.refine, args.ladder, args.output)
        emit_mesh(config, args.output)
        return EXIT_OK
    except KeyError as e:
        print(f"Error: {e.args[0] if e.args else e}", file=sys.stderr)
        print(f"Available cases: {', '.join(list_cases())}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, InvalidArgumentError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DPFlowError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
