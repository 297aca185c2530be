#!/usr/bin/env python3
"""CLI entry point."""

import click

from cli.commands.run import run
from cli.commands.sweep import sweep
from cli.commands.synth import synth
from fedflip.config import Settings
from fedflip.utils.logging import setup_logging


@click.group()
@click.pass_context
def cli(ctx):
    """Federated learning under label-flipping attacks."""
    settings = Settings()
    setup_logging(settings.log_level, settings.log_file)
    ctx.obj = settings


cli.add_command(run)
cli.add_command(sweep)
cli.add_command(synth)


if __name__ == "__main__":
    cli()
