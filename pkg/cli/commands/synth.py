"""Synthetic dataset command."""

import click
from rich.console import Console

from cli.utils import handle_errors
from fedflip.config import parse_synth_spec
from fedflip.ingest.csv import save_csv
from fedflip.ingest.synth import synth_dataset

console = Console()


@click.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False),
              help="Synthetic data spec (key=value lines)")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="CSV file to write")
@handle_errors
def synth(spec_path, out_path):
    """Generate a labelled CSV with the HAM10000 class layout."""
    spec, seed = parse_synth_spec(spec_path)
    data = synth_dataset(spec, seed)
    save_csv(data, out_path)
    counts = ", ".join(str(c) for c in data.class_counts())
    console.print(f"[green]Wrote {len(data)} rows to {out_path}[/green] (class counts: {counts})")
