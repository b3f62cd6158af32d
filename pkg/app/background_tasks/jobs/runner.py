# app/background_tasks/jobs/runner.py
import time
from pathlib import Path
from typing import Optional

from app.core.config import settings
from app.core.errors import FsiError
from app.schemas.reports import RunSummary
from app.schemas.run_config import RunConfig
from app.solvers.channel_fields import WINDOW_METADATA
from app.utils.helpers.artifacts import input_hash, output_directory, write_json
from app.utils.logging_config import logger

from .compat import compat_job
from .contraction import contraction_job
from .lemmas import lemmas_job
from .mms import mms_job
from .simulate import simulate_job

JOBS = {
    "lambda": simulate_job,
    "pi": simulate_job,
    "lemmas": lemmas_job,
    "compat": compat_job,
    "contraction": contraction_job,
    "mms": mms_job,
}


async def run_job(config: RunConfig, output_dir: Optional[str] = None) -> tuple[RunSummary, Path]:
    """Dispatch one run and write summary.json next to its tables, also when the run fails."""
    mode = config.run.mode
    output = output_directory(output_dir or config.run.output_dir, mode)
    echo = config.model_dump(mode="json")
    summary = RunSummary(app=settings.APP_NAME, mode=mode, seed=config.run.seed,
                         input_hash=input_hash(echo, config.run.seed), wall_time=0.0, config=echo,
                         window=dict(WINDOW_METADATA))
    started = time.perf_counter()
    try:
        result = await JOBS[mode](config, output)
        summary.report = {**result.report, "tables": result.tables}
        summary.warnings = result.warnings
        summary.note = result.report.get("note")
    except FsiError as exc:
        logger.error(f"Run '{mode}' failed with {exc.code}: {exc.message}")
        summary.status = "failed"
        summary.exit_code = exc.exit_code
        summary.report = exc.to_dict()
        raise
    finally:
        summary.wall_time = time.perf_counter() - started
        write_json(summary, output / "summary.json")
    return summary, output
