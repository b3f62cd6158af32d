# app/commands/simulate.py
import click

from .common import config_argument, execute, fail_on_config_error, load_run_config, output_option, seed_option


@click.command("simulate")
@config_argument
@click.option("--map", "map_name", type=click.Choice(["lambda", "pi"]), default=None,
              help="Fixed-point map; defaults to [iteration] map.")
@click.option("--override-compat", is_flag=True, default=None, help="Run even if the initial data are incompatible.")
@output_option
@seed_option
@fail_on_config_error
def simulate_command(config_path, map_name, override_compat, output_dir, seed):
    """Iterate the coupled fixed-point map until convergence."""
    config = load_run_config(config_path, iteration__override_compat=override_compat or None, iteration__map=map_name,
                             run__seed=seed)
    config = config.model_copy(update={"run": config.run.model_copy(update={"mode": config.iteration.map})})
    execute(config, output_dir)
