"""
Command-line front end

Every subcommand reads --in (or --gen for instance-level commands), writes
to --out or standard output, and takes --seed and --format json|csv.
Exit codes: 0 pass, 1 failed checks, 2 bad input or usage.
"""
import logging
from contextlib import contextmanager
from enum import Enum
from fractions import Fraction
from typing import List, Optional

import coloredlogs
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from config import DEFAULT_BUDGET, DEFAULT_FORMAT, DEFAULT_JOBS, DEFAULT_OUTPUT_DIR, DEFAULT_SEED, LOG_LEVEL
from geometry.electric import Electrifier
from geometry.errors import DomainError, GeometryError
from geometry.metric_graph import GraphGeometry, PathWitness
from geometry.params import GeometryParams
from harness.ct_harness import CTHarness
from harness.generators import InstanceGenerator
from harness.suites import SUITES
from reports.experiment import ExperimentConfig, ExperimentRunner, parse_radii
from trees.ladder import LadderBuilder
from trees.tree_spaces import TreeBuilder, TreeGeometry, TreeOfSpaces
from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)
console = Console(stderr=True)

app = typer.Typer(add_completion=False, no_args_is_help=True,
                  help="Coarse geometry of trees of spaces and Cannon-Thurston profiles")


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"


class DeltaMode(str, Enum):
    exhaustive = "exhaustive"
    sampled = "sampled"
    auto = "auto"


InOption = typer.Option(None, "--in", help="Input JSON file")
GenOption = typer.Option(None, "--gen", help="Generator spec, e.g. tree-plain,2,3")
OutOption = typer.Option(None, "--out", help="Output file (standard output when omitted)")
SeedOption = typer.Option(DEFAULT_SEED, "--seed")
FormatOption = typer.Option(OutputFormat(DEFAULT_FORMAT), "--format")


@app.callback()
def main(log_level: str = typer.Option(LOG_LEVEL, "--log-level", help="Logging level")):
    coloredlogs.install(level=log_level.upper(), fmt="%(asctime)s %(name)s %(levelname)s %(message)s")


@contextmanager
def handled():
    """Turn input and domain errors into exit code 2"""
    try:
        yield
    except ValidationError as e:
        error = e.errors()[0]
        console.print(f"[red]error:[/red] {'.'.join(str(x) for x in error['loc'])}: {error['msg']}")
        raise typer.Exit(2)
    except GeometryError as e:
        console.print(f"[red]error:[/red] {e}")
        raise typer.Exit(2)


def emit(data: bytes, out: Optional[str]):
    """Write to a file or to standard output"""
    if out:
        FileHandler.write_bytes(out, data)
    else:
        typer.echo(data, nl=False)


def render(payload, fmt: OutputFormat, rows: Optional[List[dict]] = None, columns: Optional[List[str]] = None) -> bytes:
    """JSON of the payload, or CSV of its tabular rows"""
    if fmt == OutputFormat.csv:
        return FileHandler.csv_bytes(rows if rows is not None else [payload], columns)
    return FileHandler.dumps(payload)


def edge_rows(graph) -> List[dict]:
    return [{"u": u, "v": v, "length": length} for u, v, length in graph.edges()]


def load_instance(input_path: Optional[str], gen: Optional[str], seed: int) -> TreeOfSpaces:
    """Instance from exactly one of --in and --gen"""
    if (input_path is None) == (gen is None):
        console.print("[red]error:[/red] give exactly one of --in and --gen")
        raise typer.Exit(2)
    if gen is not None:
        return InstanceGenerator.generate(gen, seed)
    return FileHandler.parse_tree(FileHandler.read_json(input_path), input_path)


def require_input(input_path: Optional[str]) -> str:
    if input_path is None:
        console.print("[red]error:[/red] --in is required")
        raise typer.Exit(2)
    return input_path


def load_graph_and_family(input_path: Optional[str], family_path: Optional[str]):
    input_path = require_input(input_path)
    graph = FileHandler.parse_graph(FileHandler.read_json(input_path), input_path)
    data = FileHandler.read_json(family_path) if family_path else None
    return graph, FileHandler.parse_family(data, graph, family_path or "family")


def configured_params(D: Optional[str], C: Optional[str]) -> GeometryParams:
    params = GeometryParams()
    for name, text in (("D", D), ("C", C)):
        if text is None:
            continue
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"--{name} takes a non-negative rational, got {text!r}") from None
        params.configure(name, value)
    return params


@app.command()
def build(input_path: Optional[str] = InOption, gen: Optional[str] = GenOption, out: Optional[str] = OutOption,
          seed: int = SeedOption, fmt: OutputFormat = FormatOption):
    """Generate or load a tree of spaces; JSON gives the instance, CSV the edges of its total space"""
    with handled():
        tos = load_instance(input_path, gen, seed)
        if fmt == OutputFormat.csv:
            data = render(None, fmt, edge_rows(TreeBuilder.assemble_total(tos).graph), ["u", "v", "length"])
        else:
            data = render(FileHandler.tree_to_dict(tos), fmt)
        emit(data, out)


@app.command()
def delta(input_path: Optional[str] = InOption, out: Optional[str] = OutOption, seed: int = SeedOption,
          fmt: OutputFormat = FormatOption, mode: DeltaMode = typer.Option(DeltaMode.auto, "--mode"),
          count: Optional[int] = typer.Option(None, "--count", help="Sampled 4-tuples")):
    """Four-point hyperbolicity constant of a graph"""
    with handled():
        input_path = require_input(input_path)
        graph = FileHandler.parse_graph(FileHandler.read_json(input_path), input_path)
        estimate = GraphGeometry.four_point_delta(graph, mode.value, count, seed)
        payload = {"space_id": estimate.space_id, "delta": estimate.value, "mode": estimate.mode,
                   "exact": estimate.exact, "description": estimate.description, "definition": estimate.definition}
        emit(render(payload, fmt), out)


@app.command()
def cone(input_path: Optional[str] = InOption, family: Optional[str] = typer.Option(None, "--family"),
         out: Optional[str] = OutOption, seed: int = SeedOption, fmt: OutputFormat = FormatOption):
    """Cone off every member of a family"""
    with handled():
        graph, fam = load_graph_and_family(input_path, family)
        coned = Electrifier.cone_off(graph, fam)
        emit(render(FileHandler.graph_to_dict(coned.graph), fmt, edge_rows(coned.graph), ["u", "v", "length"]), out)


@app.command()
def horoball(input_path: Optional[str] = InOption, family: Optional[str] = typer.Option(None, "--family"),
             depth: Optional[int] = typer.Option(None, "--depth", min=1), out: Optional[str] = OutOption,
             seed: int = SeedOption, fmt: OutputFormat = FormatOption):
    """Glue a combinatorial horoball onto every member of a family"""
    with handled():
        graph, fam = load_graph_and_family(input_path, family)
        glued = Electrifier.glue_cones(graph, fam, depth)
        payload = FileHandler.graph_to_dict(glued.graph)
        payload["depth"] = glued.depth
        emit(render(payload, fmt, edge_rows(glued.graph), ["u", "v", "length"]), out)


@app.command()
def tree(input_path: Optional[str] = InOption, gen: Optional[str] = GenOption, out: Optional[str] = OutOption,
         seed: int = SeedOption, fmt: OutputFormat = FormatOption,
         count: Optional[int] = typer.Option(None, "--count", help="Sample this many vertices per map")):
    """Validate a tree of spaces; exits 1 when a check fails"""
    with handled():
        tos = load_instance(input_path, gen, seed)
        report = TreeBuilder.validate(tos, count, seed)
        rows = [{"edge": m.edge, "end": m.end, "coned": m.coned, "injective": m.injective, "K": m.K_at_zero,
                 "eps": m.eps_at_declared, "declared_K": m.declared_K, "declared_eps": m.declared_eps}
                for m in report.maps + report.coned_maps]
        emit(render(report, fmt, rows, list(rows[0]) if rows else None), out)
    if not report.ok:
        for failure in report.failures:
            console.print(f"[yellow]failed:[/yellow] {failure}")
        raise typer.Exit(1)


@app.command()
def ladder(input_path: Optional[str] = InOption, gen: Optional[str] = GenOption, out: Optional[str] = OutOption,
           seed: int = SeedOption, fmt: OutputFormat = FormatOption,
           endpoints: Optional[str] = typer.Option(None, "--lambda", help="Endpoints a,b in the root space"),
           p: Optional[int] = typer.Option(None, "--p", help="Reference point for the default geodesic"),
           D: Optional[str] = typer.Option(None, "--D"), C: Optional[str] = typer.Option(None, "--C"),
           depth: Optional[int] = typer.Option(None, "--depth", min=1)):
    """Build the ladder of an electric geodesic of the root space"""
    with handled():
        geo = TreeGeometry(load_instance(input_path, gen, seed), depth)
        p = CTHarness.default_reference_point(geo) if p is None else p
        params = CTHarness.resolve_params(geo, configured_params(D, C), p, seed)
        if endpoints:
            try:
                a, b = (int(x) for x in endpoints.split(","))
            except ValueError:
                console.print(f"[red]error:[/red] --lambda takes two vertex ids, got {endpoints!r}")
                raise typer.Exit(2)
            lam: Optional[PathWitness] = Electrifier.electric_geodesic_nb(geo.coned(geo.root), a, b)
        else:
            lam = CTHarness.reference_geodesic(geo, p)
        if lam is None:
            console.print("[red]error:[/red] the root space has a single off-member vertex")
            raise typer.Exit(2)
        built = LadderBuilder.build_ladder(geo, lam, params["D"], params["C"])
        rows = [{"vertex": v, "generation": piece.generation, "lambda_hat": len(piece.lam_hat),
                 "lambda_b": len(piece.lam_b), "subpieces": len(piece.subpieces)}
                for v, piece in built.pieces.items()]
        emit(render({"ladder": built, "params": params.snapshot()}, fmt, rows,
                    ["vertex", "generation", "lambda_hat", "lambda_b", "subpieces"]), out)


@app.command("ct-profile")
def ct_profile(input_path: Optional[str] = InOption, gen: Optional[str] = GenOption, out: Optional[str] = OutOption,
               seed: int = SeedOption, fmt: OutputFormat = FormatOption,
               radii: str = typer.Option("1..4", "--N", help="Radii: a..b or a comma list"),
               budget: int = typer.Option(DEFAULT_BUDGET, "--budget", min=1),
               p: Optional[int] = typer.Option(None, "--p"),
               D: Optional[str] = typer.Option(None, "--D"), C: Optional[str] = typer.Option(None, "--C"),
               depth: Optional[int] = typer.Option(None, "--depth", min=1)):
    """M(N) profile; CSV columns N,M,lambda_endpoints,witness_vertex"""
    with handled():
        geo = TreeGeometry(load_instance(input_path, gen, seed), depth)
        p = CTHarness.default_reference_point(geo) if p is None else p
        params = CTHarness.resolve_params(geo, configured_params(D, C), p, seed)
        profile = CTHarness.ct_profile(geo, p, parse_radii(radii), budget, params, seed)
        emit(FileHandler.profile_csv(profile) if fmt == OutputFormat.csv else FileHandler.dumps(profile), out)


@app.command()
def run(input_path: Optional[str] = InOption, gen: Optional[str] = GenOption,
        out: str = typer.Option(DEFAULT_OUTPUT_DIR, "--out", help="Output directory"),
        seed: int = SeedOption, fmt: OutputFormat = FormatOption,
        radii: str = typer.Option("1..4", "--N"), budget: int = typer.Option(DEFAULT_BUDGET, "--budget"),
        p: Optional[int] = typer.Option(None, "--p"),
        D: Optional[str] = typer.Option(None, "--D"), C: Optional[str] = typer.Option(None, "--C"),
        depth: Optional[int] = typer.Option(None, "--depth"),
        jobs: int = typer.Option(DEFAULT_JOBS, "--jobs"),
        suite: Optional[List[str]] = typer.Option(None, "--suite", help=f"Suites to run: {', '.join(SUITES)}"),
        family: Optional[List[str]] = typer.Option(None, "--family", help="Generator specs for a family sweep")):
    """Full experiment: writes profile.csv, report.json and timings.json"""
    with handled():
        config = ExperimentConfig(generator=gen, input=input_path, p=p, N=radii, budget=budget, seed=seed,
                                  output_dir=out, D=D, C=C, depth=depth, jobs=jobs,
                                  suites=suite or list(SUITES), family=family or [])
        document = ExperimentRunner(config).run()

    table = Table(title=f"Constants of {document.instance_id}")
    for column in ("name", "value", "source", "operation"):
        table.add_column(column)
    for row in document.constants():
        table.add_row(row["name"], str(row["value"]), row["source"], row["operation"] or "")
    console.print(table)
    verdicts = Table(title="Invariant suites")
    verdicts.add_column("suite")
    verdicts.add_column("verdict")
    for result in document.suites:
        verdicts.add_row(result.name, "[green]pass[/green]" if result.passed else "[red]FAIL[/red]")
    console.print(verdicts)
    if fmt == OutputFormat.csv:
        emit(FileHandler.profile_csv(document.profile), None)
    raise typer.Exit(document.exit_code)


if __name__ == "__main__":
    app()
