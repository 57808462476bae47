#!/usr/bin/env python3


import functools
import json
import logging
from pathlib import Path
from typing import Final

import click
import numpy as np
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
    TimeRemainingColumn,
)

from .classifier import (
    DEFAULT_BOUND,
    GoldenDiff,
    corroborate,
    enumerate_table,
    golden_diff,
    load_golden,
    load_k3_pairs,
)
from .errors import ExpressionSyntaxError, LatticeError, NotEvenError, ScopeError, UnknownLatticeError
from .existence import SIGN_CONVENTIONS, Genus, even_lattice_exists
from .expressions import lattice_from_text
from .forms import format_form, is_isometric
from .glue import enumerate_glue_cases, q_L_of, q_S_of, s_signature, t_signature
from .isometry import DEFAULT_ORDER_CAP, NAMED_ISOMETRIES, LatticeIsometry, isometry_summary
from .lattice import GramLattice, discriminant_form
from .report import Report, classification_report, emit, lattice_record
from .types import ClassifyOptions, OutputOptions

format_option = click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "json", "csv"], case_sensitive=False),
    default="text",
    help="Output format (default: text)",
)

# Errors caused by what the user typed; every other LatticeError is a rejected input
USAGE_ERRORS: Final = (ScopeError, ExpressionSyntaxError, UnknownLatticeError, NotEvenError)


def _usage_errors(func):
    """Map library errors onto click exceptions: usage errors exit 2, the rest exit 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except USAGE_ERRORS as e:
            raise click.UsageError(str(e)) from e
        except LatticeError as e:
            raise click.ClickException(str(e)) from e

    return wrapper


def _finish(ctx: click.Context, report: Report, output_format: str) -> None:
    emit(report, OutputOptions(format=output_format.lower()))  # type: ignore[arg-type]
    ctx.exit(report.status)


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False),
    default="WARNING",
    help="Set the logging level (default: WARNING)",
)
def main(log_level: str) -> None:
    """Exact lattice computations for order-p isometries of K3^[n]-type lattices."""
    level = getattr(logging, log_level.upper())
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")

    # When not in debug mode, only show our own debug messages
    if level != logging.DEBUG:
        for logger_name in logging.root.manager.loggerDict:
            if not logger_name.startswith("k3n_lattices"):
                logging.getLogger(logger_name).setLevel(logging.WARNING)


@main.command()
@click.option("--n", "n", type=click.IntRange(min=2), required=True, help="The K3^[n] parameter")
@click.option("--p", "p", type=int, default=None, help="Restrict to one odd prime (default: all in scope)")
@click.option("--golden", is_flag=True, help="Diff against the bundled reference tables")
@click.option(
    "--k3-data",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="K3 invariant/co-invariant pairs for natural and induced corroboration",
)
@click.option(
    "--bound",
    type=click.IntRange(min=1),
    default=DEFAULT_BOUND,
    help=f"Coordinate box for vector searches (default: {DEFAULT_BOUND})",
)
@click.option(
    "-j",
    "--jobs",
    type=click.IntRange(1, 20),
    default=4,
    help="Number of concurrent jobs (1-20, default: 4)",
)
@click.option(
    "--sign-convention",
    type=click.Choice(list(SIGN_CONVENTIONS), case_sensitive=False),
    default="t_minus",
    help="Sign factor in the odd boundary test (default: t_minus)",
)
@format_option
@click.pass_context
@_usage_errors
def classify(
    ctx: click.Context,
    n: int,
    p: int | None,
    golden: bool,
    k3_data: Path | None,
    bound: int,
    jobs: int,
    sign_convention: str,
    output_format: str,
) -> None:
    """Enumerate the admissible triples (p, m, a) for n."""
    options = ClassifyOptions(
        n=n,
        p=p,
        golden=golden,
        k3_data=k3_data,
        bound=bound,
        jobs=jobs,
        sign_convention=sign_convention.lower(),  # type: ignore[arg-type]
    )
    if output_format.lower() == "text":
        progress = Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            TimeRemainingColumn(),
            transient=True,
        )
        task = progress.add_task("Classifying triples...", total=None)
        with progress:
            table = enumerate_table(
                options.n,
                options.p,
                jobs=options.jobs,
                sign_convention=options.sign_convention,
                on_start=lambda total: progress.update(task, total=total),
                on_result=lambda _: progress.advance(task),
            )
    else:
        table = enumerate_table(options.n, options.p, jobs=options.jobs, sign_convention=options.sign_convention)

    diffs: dict[int, GoldenDiff] = {}
    if options.golden:
        for q in sorted({row.p for row in table.rows} | ({options.p} if options.p else set())):
            bundled = load_golden(options.n, q)
            if bundled is None:
                logging.warning(f"No bundled table for n = {options.n}, p = {q}; rows stay uncorroborated")
                continue
            diffs[q] = golden_diff(table, bundled)
    if options.k3_data is not None:
        corroborate(table, load_k3_pairs(options.k3_data), options.bound)
    _finish(ctx, classification_report(table, diffs), output_format)


@main.command()
@click.argument("expression")
@format_option
@click.pass_context
@_usage_errors
def genus(ctx: click.Context, expression: str, output_format: str) -> None:
    """Print the genus invariants of a lattice expression such as "U(3) + Omega"."""
    lattice = lattice_from_text(expression)
    record = {"expression": expression, **lattice_record(lattice)}
    report = Report(command="genus", columns=list(record), rows=[record])
    _finish(ctx, report, output_format)


@main.command()
@click.option("--n", "n", type=click.IntRange(min=2), required=True, help="The K3^[n] parameter")
@click.option("--p", "p", type=int, required=True, help="Odd prime")
@click.option("--m", "m", type=int, required=True, help="Co-invariant rank divided by p - 1")
@click.option("--a", "a", type=int, required=True, help="Glue length")
@format_option
@click.pass_context
@_usage_errors
def glue(ctx: click.Context, n: int, p: int, m: int, a: int, output_format: str) -> None:
    """Show every glue case for the S determined by (p, m, a), with both computations of q_T."""
    q_l = q_L_of(n, p)
    q_s = q_S_of(p, m, a, q_l.alpha)
    rows = []
    for case in enumerate_glue_cases(q_s, q_l.form, p, q_l.alpha, s_signature=s_signature(p, m)):
        t_verdict = even_lattice_exists(Genus(t_signature(p, m), case.q_t_target))
        rows.append(
            {
                "label": case.label,
                "kind": case.tag,
                "x": list(case.x) if case.x is not None else [],
                "glue_index": case.glue_index,
                "glue_length": case.glue_length,
                "q_S": format_form(q_s),
                "q_T_target": format_form(case.q_t_target),
                "q_T_computed": format_form(case.q_t_computed),
                "agree": is_isometric(case.q_t_target, case.q_t_computed),
                "T_exists": t_verdict.exists,
                "reasons": list(t_verdict.reasons),
            }
        )
    report = Report(
        command=f"glue n={n} p={p} m={m} a={a}",
        columns=["label", "kind", "glue_index", "glue_length", "q_T_target", "q_T_computed", "agree", "T_exists"],
        rows=rows,
        details={"q_L": format_form(q_l.form), "alpha": q_l.alpha, "beta": q_l.beta},
    )
    _finish(ctx, report, output_format)


def _read_matrix(source: str) -> list[list[int]]:
    """Inline JSON, or a file holding JSON or whitespace-separated rows."""
    try:
        data = json.loads(source)
    except json.JSONDecodeError:
        path = Path(source)
        if not path.is_file():
            raise click.UsageError(f"{source!r} is neither a JSON matrix nor a file") from None
        text = path.read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            try:
                data = np.loadtxt(path, dtype=np.int64, ndmin=2).tolist()
            except ValueError as e:
                raise click.UsageError(f"{source!r} does not hold integer rows: {e}") from e
    if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
        raise click.UsageError(f"{source!r} does not hold a matrix")
    if not all(isinstance(x, int) and not isinstance(x, bool) for row in data for x in row):
        raise click.UsageError(f"{source!r} has non-integer entries")
    return [[int(x) for x in row] for row in data]


def _read_lattice(source: str) -> GramLattice:
    if Path(source).is_file():
        return GramLattice.from_rows(_read_matrix(source))
    return lattice_from_text(source)


@main.command("verify-isometry")
@click.argument("lattice_source", metavar="LATTICE", required=False)
@click.argument("matrix_source", metavar="MATRIX", required=False)
@click.option(
    "--named",
    type=click.Choice(sorted(NAMED_ISOMETRIES)),
    default=None,
    help="Check a built-in isometry instead of LATTICE and MATRIX",
)
@click.option(
    "--cap",
    type=click.IntRange(min=1),
    default=DEFAULT_ORDER_CAP,
    help=f"Largest order tried (default: {DEFAULT_ORDER_CAP})",
)
@format_option
@click.pass_context
@_usage_errors
def verify_isometry(
    ctx: click.Context,
    lattice_source: str | None,
    matrix_source: str | None,
    named: str | None,
    cap: int,
    output_format: str,
) -> None:
    """Check that MATRIX is an isometry of LATTICE and print its invariants.

    LATTICE is an expression or a Gram-matrix file; MATRIX is inline JSON or a
    file. Matrices act on coordinate columns. With --named, the built-in
    isometry rho0 (A2) or u-u3 (U + U(3)) is checked instead.
    """
    if named is not None:
        if lattice_source is not None or matrix_source is not None:
            raise click.UsageError("--named takes no LATTICE or MATRIX")
        f = NAMED_ISOMETRIES[named]()
    elif lattice_source is None or matrix_source is None:
        raise click.UsageError("LATTICE and MATRIX are required without --named")
    else:
        f = LatticeIsometry.from_rows(_read_lattice(lattice_source), _read_matrix(matrix_source))
    summary = isometry_summary(f, cap)
    row = {
        "order": str(summary.order) if summary.order is not None else f"> {cap}",
        "invariant_rank": summary.invariant.rank,
        "invariant_form": format_form(discriminant_form(summary.invariant)),
        "coinvariant_rank": summary.coinvariant.rank,
        "coinvariant_form": format_form(discriminant_form(summary.coinvariant)),
        "discriminant_action": summary.discriminant_action,
        "spinor_norm": summary.spinor_norm,
    }
    report = Report(command=f"verify-isometry {named}" if named else "verify-isometry", columns=list(row), rows=[row])
    _finish(ctx, report, output_format)


if __name__ == "__main__":
    main()
