# app/commands/lemmas.py
import click

from .common import config_argument, execute, fail_on_config_error, load_run_config, output_option, seed_option


@click.command("verify-lemmas")
@config_argument
@output_option
@seed_option
@fail_on_config_error
def verify_lemmas_command(config_path, output_dir, seed):
    """Trace, symbol and hidden-regularity inequality suites."""
    execute(load_run_config(config_path, mode="lemmas", run__seed=seed), output_dir)
