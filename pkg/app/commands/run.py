# app/commands/run.py
import click

from app.schemas.run_config import RunConfig, dump_config

from .common import execute, fail_on_config_error, load_run_config, output_option


@click.command("run")
@click.argument("config_path", type=click.Path(dir_okay=False))
@output_option
@fail_on_config_error
def run_command(config_path, output_dir):
    """Run whatever [run] mode the config names."""
    execute(load_run_config(config_path), output_dir)


@click.command("print-defaults")
def print_defaults_command():
    """Print the fully defaulted run config as TOML."""
    click.echo(dump_config(RunConfig()), nl=False)
