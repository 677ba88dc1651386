"""Command-line surface: scoring, counting, exploring, and reporting.

Every subcommand writes data to stdout and error messages to stderr, and
exits 0 exactly when it succeeded. Outputs are byte-derivable from the
library calls they wrap, so scripts can parse them.
"""

from __future__ import annotations

import functools
import json
import shlex
from pathlib import Path

import click

from . import __version__
from .errors import ArchDseError, ParseError
from .evaluators import EvaluatorConfig
from .model import Theta, build_graph, count_macs, count_params, graph_to_json
from .scoring import NetScoreWeights, netscore_values
from .search import (
    FailureRecord,
    RunLedger,
    SearchSpace,
    default_search_space,
    explore,
    generate_grid,
    select_best,
)
from .surfaces import SURFACE_METRICS, build_surface, surface_to_csv


def weight_options(fn):
    fn = click.option("--gamma", type=float, default=0.2, show_default=True, help="Runtime exponent.")(fn)
    fn = click.option("--beta", type=float, default=0.45, show_default=True, help="Size exponent.")(fn)
    fn = click.option("--kappa", type=float, default=1.0, show_default=True, help="Accuracy exponent.")(fn)
    return fn


def report_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ArchDseError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="archdse")
def main():
    """Explore compact detector design points and score their trade-offs."""


@main.command()
@click.option("--accuracy", type=float, required=True, help="Mean average precision, percent.")
@click.option("--params", "params_m", type=float, required=True, help="Trainable parameters, millions.")
@click.option("--runtime", "runtime_s", type=float, required=True, help="CPU inference time, seconds.")
@weight_options
@report_errors
def score(accuracy, params_m, runtime_s, kappa, beta, gamma):
    """Score one measured design point (prints dB at 4 decimals)."""
    value = netscore_values(accuracy, params_m, runtime_s, NetScoreWeights(kappa, beta, gamma))
    click.echo(f"{value:.4f}")


@main.command()
@click.option("--alpha", type=float, required=True, help="Width multiplier.")
@click.option("--resolution", type=int, required=True, help="Input resolution, pixels.")
@click.option("--classes", "num_classes", type=int, default=21, show_default=True,
              help="Foreground classes (one background class is added).")
@click.option("--head-style", type=click.Choice(["ssd", "ssdlite"]), default="ssdlite", show_default=True)
@click.option("--macs", "with_macs", is_flag=True, help="Also count multiply-accumulates.")
@click.option("--dump-graph", "dump_path", type=click.Path(dir_okay=False, writable=True),
              default=None, help="Write the layer graph as JSON to this path.")
@report_errors
def count(alpha, resolution, num_classes, head_style, with_macs, dump_path):
    """Count trainable parameters for one design point."""
    graph = build_graph(Theta(alpha, resolution), num_classes=num_classes, head_style=head_style)
    total = count_params(graph)
    click.echo(f"params {total}")
    click.echo(f"params_m {total / 1e6:.6f}")
    if with_macs:
        click.echo(f"macs {count_macs(graph)}")
    if dump_path:
        Path(dump_path).write_text(json.dumps(graph_to_json(graph), indent=2) + "\n", encoding="utf-8")


def _load_space(path: str | None) -> SearchSpace:
    if path is None:
        return default_search_space()
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return SearchSpace(
            tuple(float(a) for a in payload["alphas"]),
            tuple(int(r) for r in payload["resolutions"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"space file must be JSON with alphas/resolutions lists: {exc}") from None


@main.command("explore")
@click.option("--ledger", "ledger_path", type=click.Path(dir_okay=False), required=True,
              help="JSON-lines ledger path; created if missing, resumed if present.")
@click.option("--mode", type=click.Choice(["surrogate", "file", "process"]), default="surrogate",
              show_default=True, help="Where evaluations come from.")
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON file with alphas/resolutions lists (default: built-in grid).")
@click.option("--results", "results_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Measured results CSV (file mode).")
@click.option("--command", "command_str", default=None,
              help="Evaluator command line (process mode), parsed shell-style.")
@click.option("--timeout", "timeout_s", type=float, default=30.0, show_default=True,
              help="Per-request evaluator timeout, seconds (process mode).")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Concurrent evaluator processes (process mode).")
@click.option("--classes", "num_classes", type=int, default=21, show_default=True)
@click.option("--head-style", type=click.Choice(["ssd", "ssdlite"]), default="ssdlite", show_default=True)
@weight_options
@report_errors
def explore_cmd(ledger_path, mode, space_path, results_path, command_str, timeout_s, workers,
                num_classes, head_style, kappa, beta, gamma):
    """Evaluate and score every design point in the grid."""
    space = _load_space(space_path)
    weights = NetScoreWeights(kappa, beta, gamma)
    config = EvaluatorConfig(
        mode=mode,
        file_path=results_path,
        command=tuple(shlex.split(command_str)) if command_str else None,
        timeout_s=timeout_s,
        num_classes=num_classes,
        head_style=head_style,
    )
    ledger = RunLedger.open(ledger_path, weights, space)
    before = len(ledger.entries)
    explore(space, config, weights, ledger, workers=workers)

    new_entries = ledger.entries[before:]
    new_failures = sum(isinstance(entry, FailureRecord) for entry in new_entries)
    complete = len(ledger.successes())
    total = len(generate_grid(space))
    click.echo(f"{len(new_entries)} new evaluations, {new_failures} failures, "
               f"{complete}/{total} grid points complete")
    if complete:
        best = select_best(ledger)
        theta = best.record.theta
        click.echo(f"best: alpha={theta.alpha:g} resolution={theta.resolution} score={best.score:.4f}")


@main.command()
@click.option("--ledger", "ledger_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--metric", type=click.Choice(list(SURFACE_METRICS)), default="netscore",
              show_default=True, help="Which metric to arrange over the grid.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Output CSV path (default: stdout).")
@report_errors
def report(ledger_path, metric, out_path):
    """Export a metric surface over the grid as CSV."""
    ledger = RunLedger.load(ledger_path)
    text = surface_to_csv(build_surface(ledger, metric))
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--ledger", "ledger_path", type=click.Path(exists=True, dir_okay=False), required=True)
@report_errors
def best(ledger_path):
    """Print the top-scoring design point from a ledger."""
    ledger = RunLedger.load(ledger_path)
    chosen = select_best(ledger)
    record = chosen.record
    click.echo(f"alpha {record.theta.alpha:g}")
    click.echo(f"resolution {record.theta.resolution}")
    click.echo(f"score {chosen.score:.4f}")
    click.echo(f"map {record.accuracy}")
    click.echo(f"params_m {record.params_m}")
    click.echo(f"cpu_time_s {record.runtime_s}")
    click.echo(f"source {record.source}")


if __name__ == "__main__":
    main()
