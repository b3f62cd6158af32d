# app/background_tasks/jobs/mms.py
import asyncio
from pathlib import Path
from typing import Callable, List

import numpy as np

from app.models.fields import TimeTrack
from app.models.geometry import FLUID_TAGS, ChannelGeometry, DomainTag
from app.models.states import LameProblem, Viscosities
from app.schemas.reports import JobResult, MmsRow
from app.schemas.run_config import RunConfig
from app.solvers.lame_parabolic import manufactured_forcing, manufactured_track, solve_lame
from app.utils.helpers.artifacts import write_table
from app.utils.helpers.convergence import observed_order, pairwise_orders
from app.utils.helpers.manufactured import spatial_solution, temporal_solution
from app.utils.logging_config import logger


async def mms_job(config: RunConfig, output: Path) -> JobResult:
    mms = config.mms
    visc = config.physics.viscosities
    try:
        logger.info("Starting Lame manufactured-solution study...")
        spatial, temporal = await asyncio.gather(
            asyncio.to_thread(spatial_study, config, visc),
            asyncio.to_thread(temporal_study, config, visc),
        )
        rows = spatial + temporal
        table = write_table(rows, output / "mms.csv")
        report = {
            "spatial_order": observed_order([r.step for r in spatial], [r.max_error for r in spatial]),
            "temporal_order": observed_order([r.step for r in temporal], [r.max_error for r in temporal]),
            "theta": mms.theta,
        }
        logger.info(f"MMS orders: space {report['spatial_order']:.3f}, time {report['temporal_order']:.3f}")
        return JobResult(report=report, tables={"mms": str(table)})

    except Exception as e:
        logger.error(f"MMS study failed: {str(e)}")
        raise


def manufactured_error(solution: Callable, geometry: ChannelGeometry, visc: Viscosities, dt: float,
                       n_samples: int, theta: float) -> float:
    """Max nodal error over both fluid slabs, with R = 1."""
    error = 0.0
    for tag in FLUID_TAGS:
        u_star = solution(geometry, tag)
        exact = manufactured_track(u_star, geometry, tag, dt, n_samples)
        f, h = manufactured_forcing(u_star, 1, visc, geometry, tag, dt, n_samples)
        R = TimeTrack(geometry=geometry, tag=tag, rank=0, dt=dt, values=np.ones((n_samples,) + geometry.grid_shape(tag)))
        problem = LameProblem(tag=tag, R=R, f=f, h=h, u0=exact.sample(0), visc=visc)
        u = solve_lame(problem, theta)
        error = max(error, float(np.max(np.abs(u.values - exact.values))))
    return error


def _rows(study: str, levels: List[int], steps: List[float], errors: List[float]) -> List[MmsRow]:
    orders = pairwise_orders(steps, errors)
    return [MmsRow(study=study, level=level, step=step, max_error=error, order=order)
            for level, step, error, order in zip(levels, steps, errors, orders)]


def spatial_study(config: RunConfig, visc: Viscosities) -> List[MmsRow]:
    mms = config.mms
    steps = max(1, int(round(mms.T / mms.spatial_dt)))
    dt = mms.T / steps
    h_values, errors = [], []
    for level in mms.spatial_levels:
        geometry = config.geometry.model_copy(update={"M_lo": level, "M_up": level}).build()
        errors.append(manufactured_error(spatial_solution, geometry, visc, dt, steps + 1, mms.theta))
        h_values.append(geometry.h3(DomainTag.FLUID_LOWER))
        logger.info(f"MMS space level M={level}: error {errors[-1]:.3e}")
    return _rows("spatial", mms.spatial_levels, h_values, errors)


def temporal_study(config: RunConfig, visc: Viscosities) -> List[MmsRow]:
    mms = config.mms
    geometry = config.geometry.model_copy(update={"M_lo": mms.temporal_M, "M_up": mms.temporal_M}).build()
    dts, errors = [], []
    for steps in mms.temporal_steps:
        dt = mms.T / steps
        errors.append(manufactured_error(temporal_solution, geometry, visc, dt, steps + 1, mms.theta))
        dts.append(dt)
        logger.info(f"MMS time level n={steps}: error {errors[-1]:.3e}")
    return _rows("temporal", mms.temporal_steps, dts, errors)
