# app/commands/mms.py
import click

from .common import config_argument, execute, fail_on_config_error, load_run_config, output_option


@click.command("mms")
@config_argument
@click.option("--theta", type=float, default=None, help="1 for backward Euler, 0.5 for Crank-Nicolson.")
@output_option
@fail_on_config_error
def mms_command(config_path, theta, output_dir):
    """Manufactured-solution refinement study of the Lame solver."""
    execute(load_run_config(config_path, mode="mms", mms__theta=theta), output_dir)
