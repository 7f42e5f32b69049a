"""
Command-line interface for ridgeprox

Usage:
    ridgeprox analyze --input set.json
    ridgeprox fit --input set.json --method lp
    ridgeprox check --input cube.json --criterion thm21
    ridgeprox repro --case square --k-max 10 --csv square.csv
"""
import functools
import json
import logging
import sys
import time
from collections import Counter
from typing import Any, Dict, List

import click
import numpy as np

from . import __version__, config
from .approx import ApproxResult, alternating_algorithm, minimax_fit
from .criteria import check_theorem_2_1, check_uniform_path_bound, find_cross_section, necessary_condition_probe
from .documents import InputDocument, Report, canonical_digest, write_csv
from .exceptions import DimensionMismatchError, EnumerationGuardError, InputDocumentError, RidgeProxError
from .geometry import PointSet, to_number
from .logging_config import setup_logging
from .paths import enumerate_closed_paths, irreducible_bound, orbits, relation_graph
from .repro import SeriesSpec, verify_examples, verify_g2_divergence, verify_square_ratio

logger = logging.getLogger(__name__)


def handle_errors(func):
    """Map library errors to exit status 2 and anything unexpected to 1"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except RidgeProxError as e:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(2)
        except Exception as e:
            logger.error(f"Unexpected error: {str(e)}", exc_info=True)
            sys.exit(1)

    return wrapper


def input_options(func):
    func = click.option("--rel-tol", type=float, default=None, help="Relative tolerance of the equality predicate")(func)
    func = click.option("--abs-tol", type=float, default=None, help="Absolute tolerance of the equality predicate")(func)
    func = click.option("--exact", is_flag=True, help="Rational arithmetic, exact equality")(func)
    func = click.option("--dir2", default=None, help="Second direction for CSV input, e.g. '1,1'")(func)
    func = click.option("--dir1", default=None, help="First direction for CSV input, e.g. '1,-1'")(func)
    func = click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False), help="JSON document or CSV of points")(func)
    return func


def output_options(func):
    func = click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized sweeps")(func)
    func = click.option(
        "--max-closed-points",
        type=int,
        default=config.CLOSED_PATH_LENGTH_LIMIT,
        show_default=True,
        help="Length cap for closed-path enumeration",
    )(func)
    func = click.option(
        "--force-enumeration",
        is_flag=True,
        help="Lift the point and length limits of exhaustive closed-path enumeration",
    )(func)
    func = click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Write the CSV series here")(func)
    func = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here (default: stdout)")(func)
    return func


def _load(params: Dict[str, Any]):
    doc = InputDocument.load(params["input_path"], params.get("dir1"), params.get("dir2"))
    exact = True if params.get("exact") else None
    ps = doc.point_set(exact=exact, abs_tol=params.get("abs_tol"), rel_tol=params.get("rel_tol"))
    return doc, ps


def _merge_warnings(ps: PointSet) -> List[str]:
    warnings = []
    if ps.exact:
        return warnings
    for partition in ps.partitions:
        for k in partition.merged_classes():
            warnings.append(
                f"a^{partition.direction_index}-fiber {k}: tolerance merged projections spanning "
                f"{float(partition.spread[k]):.3e}"
            )
    for line in warnings:
        logger.warning(line)
    return warnings


def _emit(name: str, params: Dict[str, Any], digest: str, results: Dict[str, Any], warnings: List[str], started: float):
    report = Report(
        command={"name": name, "params": params},
        input_digest=digest,
        results=results,
        warnings=warnings,
        timing={"elapsed_seconds": round(time.perf_counter() - started, 6)},
    )
    if params.get("out"):
        report.write(params["out"])
    else:
        click.echo(report.to_json(), nl=False)
    return report


def _fiber_table(ps: PointSet, which: int, values) -> List[Dict[str, Any]]:
    partition = ps.partition(which)
    key = "u" if which == 1 else "v"
    return [
        {"class": k, "value": partition.class_value[k], key: values[k], "points": list(partition.classes[k])}
        for k in range(len(partition))
    ]


def _fit_results(ps: PointSet, result: ApproxResult) -> Dict[str, Any]:
    cert = result.certificate
    return {
        "method": result.method,
        "error": result.error,
        "iterations": result.iterations,
        "u": _fiber_table(ps, 1, result.ridge_sum.u),
        "v": _fiber_table(ps, 2, result.ridge_sum.v),
        "certificate": None
        if cert is None
        else {
            "points": list(cert.path.point_indices),
            "steps": [str(s) for s in cert.path.steps],
            "alternating_sum": cert.alternating_sum,
            "functional_value": cert.functional_value,
        },
        "history": list(result.history),
    }


def _parse_floats(text: str) -> List[float]:
    try:
        return [float(to_number(p)) for p in text.split(",") if p.strip()]
    except (ValueError, ZeroDivisionError) as e:
        raise click.BadParameter(f"Expected comma-separated numbers, got {text!r}") from e


@click.group()
@click.version_option(version=__version__, prog_name="ridgeprox")
@click.option("--log-level", default=config.LOG_LEVEL, show_default=True, help="Logging level (logs go to stderr)")
def cli(log_level: str):
    """
    Ridge-sum proximinality toolkit for finite point sets.

    Examples:

        ridgeprox analyze --input grid.json

        ridgeprox fit --input grid.json --method alternating

        ridgeprox repro --case section1 --n 21 --csv g2.csv
    """
    setup_logging(level=log_level, use_utc=config.USE_UTC)


@cli.command()
@input_options
@output_options
@handle_errors
def analyze(**params):
    """Orbits, irreducible bound, edge counts and closed paths of a point set."""
    started = time.perf_counter()
    doc, ps = _load(params)
    warnings = _merge_warnings(ps)

    graph = relation_graph(ps)
    edges = Counter(str(data["kind"]) for _, _, data in graph.edges(data=True))
    orb = orbits(ps)
    results = {
        "n_points": ps.n_points,
        "dim": ps.dim,
        "exact": ps.exact,
        "orbits": {"count": len(orb), "sizes": orb.sizes()},
        "irreducible_bound": irreducible_bound(ps),
        "edges": {"PerpToA1": edges.get("PerpToA1", 0), "PerpToA2": edges.get("PerpToA2", 0)},
        "fibers": {"a1": len(ps.partition(1)), "a2": len(ps.partition(2))},
        "closed_paths": None,
    }
    cap = params["max_closed_points"]
    force = params["force_enumeration"]
    if (force or ps.n_points <= config.CLOSED_PATH_POINT_LIMIT) and cap >= 4:
        try:
            closed = enumerate_closed_paths(ps, max_points=cap - cap % 2, force=force)
        except EnumerationGuardError as e:
            raise EnumerationGuardError(f"{e} (--force-enumeration on the command line)") from e
        results["closed_paths"] = [list(c.path.point_indices) for c in closed]
    else:
        warnings.append(f"Closed-path enumeration skipped for {ps.n_points} points")
    logger.info(f"Analyzed {ps.n_points} points: {len(orb)} orbits, bound {results['irreducible_bound']}")
    _emit("analyze", params, doc.digest, results, warnings, started)


@cli.command()
@input_options
@output_options
@click.option("--method", type=click.Choice(["lp", "alternating"]), default="lp", show_default=True)
@click.option("--max-rounds", type=int, default=config.ALT_MAX_ROUNDS, show_default=True)
@click.option("--stop-tol", type=float, default=config.ALT_STOP_TOL, show_default=True)
@handle_errors
def fit(**params):
    """Minimax ridge-sum fit of the document's field."""
    started = time.perf_counter()
    doc, ps = _load(params)
    if doc.field is None:
        raise InputDocumentError("The fit command needs a field", where="field")
    warnings = _merge_warnings(ps)

    if params["method"] == "lp":
        cap = params["max_closed_points"]
        force = params["force_enumeration"]
        result = minimax_fit(ps, doc.field, certify=cap >= 4, max_closed_points=cap, force_enumeration=force)
        if result.certificate is None and (force or ps.n_points <= config.CLOSED_PATH_POINT_LIMIT):
            warnings.append("No closed-path certificate matches the LP error")
    else:
        result = alternating_algorithm(ps, doc.field, max_rounds=params["max_rounds"], stop_tol=params["stop_tol"])
    logger.info(f"Fit ({result.method}): error {float(result.error):.12g}")
    _emit("fit", params, doc.digest, _fit_results(ps, result), warnings, started)


@cli.command()
@input_options
@output_options
@click.option(
    "--criterion",
    type=click.Choice(["path-bound", "cross-section", "thm21", "thm22"]),
    required=True,
)
@click.option("--threshold", type=float, default=None, help="Path-length bound, or candidate constant c for thm22")
@click.option("--deltas", default=None, help="Comma-separated delta values for thm21")
@click.option("--shrink", type=float, default=config.DELTA0_SHRINK, show_default=True)
@click.option("--max-steps", type=int, default=config.DELTA0_MAX_STEPS, show_default=True)
@click.option("--probe", "probes", type=int, multiple=True, help="Probe point index for thm21 (repeatable)")
@click.option("--fields", "fields_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON list of fields for thm22")
@click.option("--samples", type=int, default=20, show_default=True, help="Random fields for thm22 when no family is given")
@handle_errors
def check(**params):
    """Evaluate one proximinality criterion on the point set."""
    started = time.perf_counter()
    doc, ps = _load(params)
    warnings = _merge_warnings(ps)
    criterion = params["criterion"]
    csv_rows, csv_columns = None, None

    if criterion == "path-bound":
        if params["threshold"] is None:
            raise click.UsageError("path-bound needs --threshold")
        result = check_uniform_path_bound(ps, int(params["threshold"]))
        results = {"criterion": criterion, "bound": result.bound, "threshold": result.threshold, "passes": result.passes}

    elif criterion == "cross-section":
        witnesses = {f"direction_{i}": find_cross_section(ps, i) for i in (1, 2)}
        results = {"criterion": criterion, **witnesses, "passes": any(w is not None for w in witnesses.values())}

    elif criterion == "thm21":
        if ps.dim < 3:
            raise DimensionMismatchError(f"thm21 needs points in R^3 or higher, got dimension {ps.dim}")
        deltas = _parse_floats(params["deltas"]) if params["deltas"] else config.DEFAULT_DELTAS
        report = check_theorem_2_1(
            ps,
            basis=doc.basis,
            deltas=deltas,
            shrink=params["shrink"],
            max_steps=params["max_steps"],
            probes=list(params["probes"]) or None,
        )
        results = {
            "criterion": criterion,
            "label": report.label,
            "passes": report.passes,
            "basis": [list(b.coords) for b in report.basis],
            "per_probe": [
                {
                    "probe": o.probe,
                    "x0": list(o.x0),
                    "delta": o.delta,
                    "delta0_found": o.delta0_found,
                    "sigma_witness": o.sigma_witness,
                    "failures": list(o.failures),
                    "attempts": [{"delta0": a.delta0, "passed": a.passed} for a in o.attempts],
                }
                for o in report.per_probe
            ],
        }
        csv_columns = ["probe", "delta", "delta0", "pass"]
        csv_rows = [
            {"probe": o.probe, "delta": o.delta, "delta0": a.delta0, "pass": a.passed}
            for o in report.per_probe
            for a in o.attempts
        ]

    else:
        fields = _field_family(ps, doc, params)
        probe = necessary_condition_probe(ps, fields)
        results = {
            "criterion": criterion,
            "label": "sampled evidence",
            "fields": len(fields),
            "max_ratio": probe.max_ratio,
            "ratios": [r.ratio for r in probe.reports],
        }
        if params["threshold"] is not None:
            results["threshold"] = params["threshold"]
            results["passes"] = not probe.violated_for_threshold(params["threshold"])

    if params["csv_path"] and csv_rows is not None:
        write_csv(csv_rows, csv_columns, params["csv_path"])
    _emit("check", params, doc.digest, results, warnings, started)


def _field_family(ps: PointSet, doc: InputDocument, params: Dict[str, Any]):
    """Fields for thm22: --fields file, else the document's field, else random fields constant on a^1-fibers"""
    if params["fields_path"]:
        with open(params["fields_path"], encoding="utf-8") as fh:
            family = json.load(fh)
        if not isinstance(family, list) or not all(isinstance(f, list) for f in family):
            raise InputDocumentError("Expected a list of fields", where=params["fields_path"])
        return family
    if doc.field is not None:
        return [doc.field]
    rng = np.random.default_rng(params["seed"])
    p1 = ps.partition(1)
    family = []
    for _ in range(params["samples"]):
        levels = rng.uniform(-1.0, 1.0, size=len(p1))
        family.append([to_number(float(levels[p1.class_of[i]]), ps.exact) for i in range(ps.n_points)])
    return family


@cli.command()
@output_options
@click.option("--case", type=click.Choice(["section1", "square", "examples"]), required=True)
@click.option("--n", "n_points", type=int, default=21, show_default=True, help="Points of the telescoping path (odd)")
@click.option("--series", default="harmonic", show_default=True, help="harmonic or constant[:value]")
@click.option("--k-min", type=int, default=1, show_default=True)
@click.option("--k-max", type=int, default=10, show_default=True)
@click.option("--extra-grid", type=int, default=0, show_default=True, help="Grid nodes per axis added to the square")
@click.option("--which", type=click.Choice(["a", "b", "b-bad", "c"]), default="c", show_default=True)
@click.option("--density", type=int, default=9, show_default=True)
@click.option("--delta", "deltas", type=float, multiple=True, help="Delta for the examples case (repeatable)")
@handle_errors
def repro(**params):
    """Rebuild a reference construction and verify its numeric facts."""
    started = time.perf_counter()
    case = params["case"]
    warnings: List[str] = []

    if case == "section1":
        try:
            series = SeriesSpec.parse(params["series"])
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--series") from e
        rows = verify_g2_divergence(params["n_points"], series)
        errors = [r.minimax_error for r in rows]
        results = {
            "case": case,
            "n": params["n_points"],
            "rows": [r._asdict() for r in rows],
            "max_minimax_error": max(errors),
        }
        columns = ["k", "partial_sum", "g2_span"]
        csv_rows = rows

    elif case == "square":
        checks = [
            verify_square_ratio(k, extra_grid=params["extra_grid"])
            for k in range(params["k_min"], params["k_max"] + 1)
        ]
        csv_rows = [{"k": c.k, "lhs": c.report.lhs, "rhs": c.report.rhs, "ratio": c.report.ratio} for c in checks]
        for c in checks:
            warnings.extend(f"k={c.k}: {d}" for d in c.diagnostics)
        results = {"case": case, "rows": csv_rows, "passes": all(c.passed for c in checks)}
        columns = ["k", "lhs", "rhs", "ratio"]

    else:
        report, rows = verify_examples(params["which"], params["density"], deltas=list(params["deltas"]) or None)
        csv_rows = [{"probe": r.probe, "delta": r.delta, "delta0": r.delta0, "pass": r.passed} for r in rows]
        results = {
            "case": case,
            "which": params["which"],
            "label": report.label,
            "passes": report.passes,
            "probes": len(report.per_probe),
            "delta0_found": [o.delta0_found for o in report.per_probe],
            "rows": csv_rows,
        }
        columns = ["probe", "delta", "delta0", "pass"]

    if params["csv_path"]:
        write_csv(csv_rows, columns, params["csv_path"])
    _emit("repro", params, canonical_digest({**params, "out": None, "csv_path": None}), results, warnings, started)


def main():
    """Console entry point"""
    try:
        cli(prog_name="ridgeprox")
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(1)


if __name__ == "__main__":
    main()
