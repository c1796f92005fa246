"""Command-line front end.

Every run prints delimited sections so that several artifacts can share
stdout::

    ----- BEGIN json -----
    {...}
    ----- END json -----

Exit codes: 0 ok, 2 input error, 3 no stabilisation, 4 invariant violation.
"""
from __future__ import annotations

import difflib
import json
import sys
from pathlib import Path

import click

from .bassserre import gog_to_dot
from .errors import InputError, RegnbhdError, SchemaError
from .gallery import (GALLERY_NAMES, SUMMARIES, dumps, gallery_scenario, golden_text,
                      load_scenario, read_scenario, result_json, run_scenario)
from .neighbourhood import intersection_number

EXIT_OK, EXIT_INPUT, EXIT_UNSTABLE, EXIT_INVARIANT = 0, 2, 3, 4
INUMBER_RADII = (2, 3)


class StageError(Exception):
    """An engine error tagged with the pipeline stage it escaped from."""

    def __init__(self, stage, error):
        super().__init__(f"{stage}: {type(error).__name__}: {error}")
        self.stage = stage
        self.error = error


def _stage(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except RegnbhdError as exc:
        raise StageError(stage, exc) from exc


def _section(name, text):
    click.echo(f"----- BEGIN {name} -----")
    click.echo(text, nl=not text.endswith("\n"))
    click.echo(f"----- END {name} -----")


def _parse_schedule(text):
    if text is None:
        return None
    try:
        radii = [int(p) for p in text.replace(" ", "").split(",") if p]
    except ValueError as exc:
        raise SchemaError(f"bad radius schedule {text!r}") from exc
    if not radii:
        raise SchemaError("the radius schedule is empty")
    return tuple(radii)


def _read_json(path, what):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {what} {path}: {exc}") from exc


def _load(path, direct_table):
    if direct_table is None:
        if path is None:
            raise SchemaError("give a scenario file or --direct-table")
        return read_scenario(path)
    doc = {"schemaVersion": 1, "name": Path(direct_table).stem,
           "directTable": _read_json(direct_table, "direct table")}
    if path is not None:
        # a presentation in the scenario file conflicts with the table
        extra = _read_json(path, "scenario")
        if not isinstance(extra, dict):
            raise SchemaError("a scenario must be a JSON object")
        doc.update({k: v for k, v in extra.items() if k != "directTable"})
    return load_scenario(doc)


def _artifacts(scenario, result, report):
    doc = result_json(scenario, result, report)
    return {
        "json": dumps(doc),
        "dot": gog_to_dot(result.gog, name=f"regnbhd_{scenario.name}"),
        "certificate": dumps(doc["certificate"]),
        "axioms": dumps(doc["axioms"]),
    }


def _golden_diff(actual, expected, label):
    return "".join(difflib.unified_diff(expected.splitlines(keepends=True),
                                        actual.splitlines(keepends=True),
                                        fromfile=f"golden/{label}", tofile=f"computed/{label}"))


def _emit_and_check(scenario, result, report, emit, out, golden, figure):
    arts = _artifacts(scenario, result, report)
    if emit in ("json", "both"):
        _section("json", arts["json"])
    if emit in ("dot", "both"):
        _section("dot", arts["dot"])
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{scenario.name}.json").write_text(arts["json"])
        (out / f"{scenario.name}.dot").write_text(arts["dot"])
        (out / f"{scenario.name}.certificate.json").write_text(arts["certificate"])
        (out / f"{scenario.name}.axioms.json").write_text(arts["axioms"])
    if figure is not None:
        from .report import render_figure
        render_figure(result, figure, title=scenario.name)
        click.echo(f"figure: {figure}", err=True)
    code = EXIT_OK
    if report is not None and not report.passed:
        failed = sorted(k for k, (ok, _) in report.results.items() if not ok)
        click.echo(f"axioms: conditions {failed} fail", err=True)
        code = EXIT_INVARIANT
    if golden is not None:
        diff = _golden_diff(arts["json"], golden, scenario.name)
        _section("golden-diff", diff or "(identical)\n")
        if diff:
            code = EXIT_INVARIANT
    return code


def _guard(fn):
    """Map escaping engine errors to exit codes."""
    try:
        code = fn()
    except StageError as exc:
        click.echo(f"error [{exc.stage}] {type(exc.error).__name__}: {exc.error}", err=True)
        code = exc.error.exit_code
    except InputError as exc:
        click.echo(f"error [input] {type(exc).__name__}: {exc}", err=True)
        code = exc.exit_code
    sys.exit(code)


emit_option = click.option("--emit", type=click.Choice(["dot", "json", "both"]), default="json",
                           show_default=True, help="Which artifacts to print.")
workers_option = click.option("--workers", type=click.IntRange(min=1), default=1,
                              show_default=True, help="Processes used for the radius schedule.")
schedule_option = click.option("--radius-schedule", "schedule", default=None,
                               help="Comma-separated ball radii, e.g. 3,4.")
figure_option = click.option("--figure", type=click.Path(dir_okay=False), default=None,
                             help="Also render a matplotlib figure to this file.")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Algebraic regular neighbourhoods of almost invariant sets."""


@main.command("run")
@click.argument("scenario_path", required=False, type=click.Path(dir_okay=False))
@schedule_option
@workers_option
@emit_option
@click.option("--golden", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Compare the JSON output with this file; mismatch exits 4.")
@click.option("--direct-table", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Use a user-supplied corner table instead of a presentation.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for the JSON, DOT, certificate and axiom files.")
@figure_option
def run_cmd(scenario_path, schedule, workers, emit, golden, direct_table, out, figure):
    """Build the regular neighbourhood of a scenario file."""

    def go():
        scenario = _stage("load", _load, scenario_path, direct_table)
        radii = _stage("load", _parse_schedule, schedule)
        result, report = _stage("build", run_scenario, scenario, radii, workers=workers)
        expected = Path(golden).read_text() if golden else None
        return _emit_and_check(scenario, result, report, emit, out, expected, figure)

    _guard(go)


@main.command("gallery")
@click.argument("name", required=False)
@schedule_option
@workers_option
@emit_option
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for the JSON, DOT, certificate and axiom files.")
@figure_option
@click.option("--list", "list_only", is_flag=True, help="List the built-in scenarios.")
def gallery_cmd(name, schedule, workers, emit, out, figure, list_only):
    """Run a built-in scenario and diff it against its stored output."""

    def go():
        if list_only or name is None:
            for n in GALLERY_NAMES:
                click.echo(f"{n:4}  {SUMMARIES[n]}")
            return EXIT_OK
        scenario = _stage("load", gallery_scenario, name)
        radii = _stage("load", _parse_schedule, schedule)
        result, report = _stage("build", run_scenario, scenario, radii, workers=workers)
        return _emit_and_check(scenario, result, report, emit, out, golden_text(name), figure)

    _guard(go)


def _scenario_or_gallery(text):
    if text in GALLERY_NAMES and not Path(text).exists():
        return gallery_scenario(text)
    return read_scenario(text)


@main.command("inumber")
@click.argument("scenario")
@click.argument("i", type=int)
@click.argument("j", type=int)
@schedule_option
def inumber_cmd(scenario, i, j, schedule):
    """Print the intersection number of sets I and J of SCENARIO (a file
    or a gallery name)."""

    def go():
        sc = _stage("load", _scenario_or_gallery, scenario)
        if sc.direct:
            raise StageError("load", SchemaError("intersection numbers need a presentation"))
        n = len(sc.family)
        for k in (i, j):
            if not 0 <= k < n:
                raise StageError("load", SchemaError(f"set index {k} outside 0..{n - 1}"))
        radii = _stage("load", _parse_schedule, schedule) or INUMBER_RADII
        value, radius = _stage("inumber", intersection_number, sc.family[i], sc.family[j],
                               radii=radii)
        click.echo(f"i({sc.family[i].name}, {sc.family[j].name}) = {value}  "
                   f"(certified at radius {radius})")
        return EXIT_OK

    _guard(go)


if __name__ == "__main__":
    main()
