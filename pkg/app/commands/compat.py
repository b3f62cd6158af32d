# app/commands/compat.py
import click

from .common import config_argument, execute, fail_on_config_error, load_run_config, output_option, seed_option


@click.command("check-compat")
@config_argument
@click.option("--data", "kind", type=click.Choice(["compatible", "trivial", "random"]), default=None,
              help="Initial data set; defaults to [data] kind.")
@output_option
@seed_option
@fail_on_config_error
def check_compat_command(config_path, kind, output_dir, seed):
    """Residuals of the initial compatibility conditions; exit 6 if any fails."""
    execute(load_run_config(config_path, mode="compat", data__kind=kind, run__seed=seed), output_dir)
