"""Flip-percentage sweep command."""

import math
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from cli.utils import handle_errors
from fedflip.config import parse_config
from fedflip.eval.report import format_percent
from fedflip.eval.runner import run_experiment, summarize_sweep

console = Console()

_COLUMNS = [
    ("clean_fl_accuracy", "Clean FL %"),
    ("poisoned_fl_accuracy", "Poisoned FL %"),
    ("clean_central_accuracy", "Clean central %"),
    ("poisoned_central_accuracy", "Poisoned central %"),
]


def _cell(mean: float, std: float, seeds: int) -> str:
    if mean is None or math.isnan(mean):
        return ""
    text = format_percent(mean)
    if seeds > 1 and not math.isnan(std):
        text += f" ± {std * 100:.3f}"
    return text


@click.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
              help="Experiment file (key=value lines)")
@click.option("--output", type=click.Path(file_okay=False), default=None,
              help="Override output_dir from the config")
@click.pass_obj
@handle_errors
def sweep(settings, config_path, output):
    """Run clean and poisoned training over a range of flip percentages."""
    config = parse_config(config_path)
    if output is not None:
        config = config.model_copy(update={"output_dir": Path(output)})

    outcome = run_experiment(config, settings, sweep=True)
    summary = summarize_sweep(outcome.sweep)

    table = Table(title="Label-flip sweep")
    table.add_column("Flip %", justify="right", style="cyan")
    for _, header in _COLUMNS:
        table.add_column(header, justify="right")
    table.add_column("Seeds", justify="right")
    for _, row in summary.iterrows():
        seeds = int(row["seeds"])
        cells = [_cell(row[col], row[f"{col}_std"], seeds) for col, _ in _COLUMNS]
        table.add_row(f"{row['flip_percent']:g}", *cells, str(seeds))
    console.print(table)
    console.print(f"[green]Sweep written to {Path(config.output_dir) / 'sweep.csv'}[/green]")
