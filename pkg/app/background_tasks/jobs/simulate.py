# app/background_tasks/jobs/simulate.py
import asyncio
from pathlib import Path

import numpy as np

from app.core.checkpoint import save_checkpoint
from app.schemas.reports import JobResult
from app.schemas.run_config import RunConfig
from app.solvers.fsi_fixed_point import MAPS, norm_rows, run_fixed_point
from app.utils.helpers.artifacts import write_table
from app.utils.helpers.manufactured import build_coupling_data
from app.utils.logging_config import logger


async def simulate_job(config: RunConfig, output: Path) -> JobResult:
    mode = config.run.mode if config.run.mode in MAPS else config.iteration.map
    try:
        logger.info(f"Starting {mode} fixed-point run (seed {config.run.seed})...")
        geometry = config.geometry.build()
        rng = np.random.default_rng(config.run.seed)
        data = build_coupling_data(config.data.kind, geometry, config.physics.viscosities, rng,
                                   config.data.gamma, config.data.amplitude, config.data.k_max)
        state, report = await asyncio.to_thread(run_fixed_point, mode, config.iteration, data)

        iterations = write_table(report.records, output / "iterations.csv")
        norms = write_table(norm_rows(state, config.iteration.s), output / "norms.csv")
        checkpoint = save_checkpoint(state, output / "state.npz", seed=config.run.seed, window=report.window)
        logger.info(f"{mode} run finished after {report.iterations} iterations")

        warnings = []
        if report.ball_exceeded:
            warnings.append(f"iterate left the ball of radius {config.iteration.M_report:g}")
        if config.iteration.override_compat:
            warnings.append("compatibility check overridden")
        return JobResult(report=report.model_dump(mode="json"),
                         tables={"iterations": str(iterations), "norms": str(norms), "checkpoint": str(checkpoint)},
                         warnings=warnings)

    except Exception as e:
        logger.error(f"Fixed-point run failed: {str(e)}")
        raise
