# app/commands/contraction.py
import click

from .common import config_argument, execute, fail_on_config_error, load_run_config, output_option, seed_option


@click.command("contraction-study")
@config_argument
@click.option("--map", "map_name", type=click.Choice(["lambda", "pi"]), default=None)
@output_option
@seed_option
@fail_on_config_error
def contraction_study_command(config_path, map_name, output_dir, seed):
    """One-step difference ratios over shrinking windows."""
    execute(load_run_config(config_path, mode="contraction", iteration__map=map_name, run__seed=seed), output_dir)
