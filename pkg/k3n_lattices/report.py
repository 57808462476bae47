"""Rendering of command results as rich tables, JSON or CSV."""

import csv
import io
import json
from dataclasses import dataclass, field

import click
from rich.console import Console
from rich.table import Table

from .classifier import AdmissibleTriple, ClassificationTable, GoldenDiff
from .existence import Genus
from .forms import describe, format_form
from .lattice import GramLattice, determinant, discriminant_form, discriminant_group, signature
from .types import OutputOptions

Scalar = str | int | bool | None
Value = Scalar | list[str] | list[int]


@dataclass
class Report:
    """One command's result: the rows to print and the exit status."""

    command: str
    columns: list[str]
    rows: list[dict[str, Value]] = field(default_factory=list)
    details: dict[str, object] = field(default_factory=dict)
    status: int = 0

    def as_json(self) -> dict[str, object]:
        return {
            "command": self.command,
            "status": self.status,
            "columns": self.columns,
            "rows": self.rows,
            "details": self.details,
        }


def genus_text(g: Genus) -> tuple[str, str]:
    return str(g.signature), format_form(g.form)


def lattice_record(lattice: GramLattice) -> dict[str, Value]:
    """Rank, signature, determinant, elementary divisors and the discriminant form summary."""
    return {
        "rank": lattice.rank,
        "signature": str(signature(lattice)),
        "determinant": determinant(lattice),
        "elementary_divisors": discriminant_group(lattice),
        **describe(discriminant_form(lattice)),
    }


def triple_record(row: AdmissibleTriple) -> dict[str, Value]:
    s_signature, s_form = genus_text(row.s_genus) if row.s_genus else ("", "")
    return {
        "p": row.p,
        "m": row.m,
        "a": row.a,
        "alpha": row.alpha,
        "glue": row.glue_case or "",
        "S": row.s_expression or "",
        "T": row.t_expression or "",
        "marker": row.marker or "",
        "provenance": row.provenance,
        "corroboration": row.corroboration or "",
        "note": row.note or "",
        "s_signature": s_signature,
        "s_form": s_form,
        "t_signature": str(row.t_genus_options[0].signature) if row.t_genus_options else "",
        "t_forms": [format_form(g.form) for g in row.t_genus_options],
        "checks": list(row.verdict.checks),
        "reasons": list(row.verdict.reasons),
    }


CLASSIFY_COLUMNS = ["p", "m", "a", "glue", "S", "T", "marker", "provenance", "t_forms"]


def classification_report(table: ClassificationTable, diffs: dict[int, GoldenDiff] | None = None) -> Report:
    report = Report(
        command=f"classify n={table.n}",
        columns=CLASSIFY_COLUMNS
        + (["corroboration"] if any(row.corroboration for row in table.rows) else [])
        + (["note"] if any(row.note for row in table.rows) else []),
        rows=[triple_record(row) for row in table.rows],
        details={"n": table.n, "rows": len(table.rows), "skipped_primes": table.skipped_primes},
    )
    if diffs:
        report.details["golden"] = {
            str(p): {
                "missing": [list(key) for key in diff.missing],
                "extra": [list(key) for key in diff.extra],
                "representative_failures": [[*key, which] for key, which in diff.representative_failures],
                "undecided": [[*key, which] for key, which in diff.undecided],
            }
            for p, diff in sorted(diffs.items())
        }
        report.status = 0 if all(diff.ok for diff in diffs.values()) else 1
    return report


def _cell(value: object) -> str:
    if isinstance(value, list):
        return "; ".join(str(item) for item in value)
    return "" if value is None else str(value)


def render_text(report: Report) -> None:
    table = Table(title=report.command)
    for column in report.columns:
        table.add_column(column)
    for row in report.rows:
        table.add_row(*(_cell(row.get(column)) for column in report.columns))
    console = Console()
    console.print(table)
    for key, value in report.details.items():
        console.print(f"{key}: {json.dumps(value, sort_keys=True)}", highlight=False, markup=False)


def render_csv(report: Report) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=report.columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow({column: _cell(row.get(column)) for column in report.columns})
    return buffer.getvalue()


def emit(report: Report, options: OutputOptions) -> None:
    """Print the report in the requested format."""
    if options.format == "json":
        click.echo(json.dumps(report.as_json(), indent=2, sort_keys=True))
    elif options.format == "csv":
        click.echo(render_csv(report), nl=False)
    else:
        render_text(report)
