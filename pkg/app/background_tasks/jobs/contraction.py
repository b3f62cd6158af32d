# app/background_tasks/jobs/contraction.py
import asyncio
from pathlib import Path

import numpy as np

from app.schemas.reports import JobResult
from app.schemas.run_config import RunConfig
from app.solvers.fsi_fixed_point import contraction_study
from app.utils.helpers.artifacts import write_table
from app.utils.helpers.manufactured import build_coupling_data
from app.utils.logging_config import logger


async def contraction_job(config: RunConfig, output: Path) -> JobResult:
    mode = config.iteration.map
    try:
        logger.info(f"Starting {mode} contraction study over T = {config.contraction.T_values}...")
        geometry = config.geometry.build()
        rng = np.random.default_rng(config.run.seed)
        data = build_coupling_data(config.data.kind, geometry, config.physics.viscosities, rng,
                                   config.data.gamma, config.data.amplitude, config.data.k_max)
        study = await asyncio.to_thread(contraction_study, mode, config.iteration, data,
                                        config.contraction.T_values, config.contraction.perturbation,
                                        config.run.seed)
        table = write_table(study.rows, output / "contraction.csv")

        warnings = []
        if study.T0 is None:
            warnings.append("no window length gave a contraction factor below 1/2")
        factors = [row.factor for row in study.rows if row.factor is not None]
        if any(f >= 1.0 for f in factors):
            warnings.append("some window lengths did not contract")
        logger.info(f"Contraction study finished; T0 = {study.T0}")
        return JobResult(report=study.model_dump(mode="json"), tables={"contraction": str(table)}, warnings=warnings)

    except Exception as e:
        logger.error(f"Contraction study failed: {str(e)}")
        raise
