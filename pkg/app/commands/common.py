# app/commands/common.py
import asyncio
import functools
import json
from typing import Optional

import click

from app.background_tasks.jobs import run_job
from app.core.errors import FsiError
from app.schemas.run_config import RunConfig, load_config, parse_config
from app.utils.logging_config import logger

config_argument = click.argument("config_path", required=False, type=click.Path(dir_okay=False))
output_option = click.option("--output-dir", "-o", default=None, help="Directory for CSV, JSON and checkpoint artifacts.")
seed_option = click.option("--seed", type=int, default=None, help="Override [run] seed.")


def load_run_config(config_path: Optional[str], mode: Optional[str] = None, **overrides) -> RunConfig:
    """Parse a TOML config (or take the defaults) and apply command-line overrides."""
    config = parse_config(config_path) if config_path else RunConfig()
    data = config.model_dump()
    if mode is not None:
        data["run"]["mode"] = mode
    for key, value in overrides.items():
        if value is None:
            continue
        section, _, name = key.partition("__")
        data[section][name] = value
    return load_config(data)


def execute(config: RunConfig, output_dir: Optional[str] = None):
    """Run a config and exit with the error's exit code on failure."""
    ctx = click.get_current_context()
    try:
        summary, output = asyncio.run(run_job(config, output_dir))
    except FsiError as exc:
        click.echo(json.dumps(exc.to_dict(), default=str), err=True)
        ctx.exit(exc.exit_code)
    logger.info(f"Artifacts written to {output}")
    click.echo(str(output / "summary.json"))
    return summary


def fail_on_config_error(fn):
    """Map configuration errors raised while loading a config to their exit code."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FsiError as exc:
            click.echo(json.dumps(exc.to_dict(), default=str), err=True)
            click.get_current_context().exit(exc.exit_code)

    return wrapper
