"""Single-run command."""

from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from cli.utils import handle_errors
from fedflip.config import parse_config
from fedflip.eval.report import format_percent
from fedflip.eval.runner import run_experiment

console = Console()


@click.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
              help="Experiment file (key=value lines)")
@click.option("--output", type=click.Path(file_okay=False), default=None,
              help="Override output_dir from the config")
@click.pass_obj
@handle_errors
def run(settings, config_path, output):
    """Train and evaluate the runs one config describes."""
    config = parse_config(config_path)
    if output is not None:
        config = config.model_copy(update={"output_dir": Path(output)})

    outcome = run_experiment(config, settings)

    table = Table(title="Runs")
    table.add_column("Run", style="cyan")
    table.add_column("Accuracy %", justify="right")
    table.add_column("Final loss", justify="right")
    for name, result in outcome.runs.items():
        table.add_row(name, format_percent(result.accuracy), f"{result.final_loss:.4f}")
    console.print(table)
    console.print(f"[green]Artifacts written to {config.output_dir}[/green]")
