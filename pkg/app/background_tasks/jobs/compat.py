# app/background_tasks/jobs/compat.py
import asyncio
from pathlib import Path

import numpy as np

from app.core.errors import CompatibilityError
from app.schemas.reports import JobResult
from app.schemas.run_config import RunConfig
from app.solvers.fsi_fixed_point import check_compatibility
from app.utils.helpers.artifacts import write_table
from app.utils.helpers.manufactured import build_coupling_data
from app.utils.logging_config import logger


async def compat_job(config: RunConfig, output: Path) -> JobResult:
    try:
        logger.info(f"Checking compatibility of the '{config.data.kind}' data set...")
        geometry = config.geometry.build()
        rng = np.random.default_rng(config.run.seed)
        data = build_coupling_data(config.data.kind, geometry, config.physics.viscosities, rng,
                                   config.data.gamma, config.data.amplitude, config.data.k_max)
        report = await asyncio.to_thread(check_compatibility, data.v0, data.w1, data.R0, data.visc, data.w0)
        table = write_table(report.conditions, output / "compat.csv")

        for condition in report.conditions:
            logger.info(f"{condition.name}: residual {condition.residual:.3e} "
                        f"({'pass' if condition.passed else 'FAIL'})")
        if not report.passed:
            failed = [c.name for c in report.conditions if not c.passed]
            raise CompatibilityError(f"compatibility conditions failed: {', '.join(failed)}", failed=failed)
        return JobResult(report={"passed": True, "conditions": [c.model_dump() for c in report.conditions]},
                         tables={"compat": str(table)})

    except Exception as e:
        logger.error(f"Compatibility check failed: {str(e)}")
        raise
