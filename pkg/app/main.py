# app/main.py
import click

from app.commands import (
    check_compat_command,
    contraction_study_command,
    mms_command,
    print_defaults_command,
    run_command,
    simulate_command,
    verify_lemmas_command,
)
from app.core.config import settings


@click.group(help=f"{settings.APP_NAME}: {settings.APP_DESCRIPTION}")
def cli():
    pass


cli.add_command(simulate_command)
cli.add_command(verify_lemmas_command)
cli.add_command(check_compat_command)
cli.add_command(contraction_study_command)
cli.add_command(mms_command)
cli.add_command(print_defaults_command)
cli.add_command(run_command)


if __name__ == "__main__":
    cli()
