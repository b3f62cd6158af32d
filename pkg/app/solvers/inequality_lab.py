# app/solvers/inequality_lab.py
"""Numerical checks of the space-time functional inequalities.

Ratios are LHS / RHS with implicit constant 1. They are measurements of
the discrete norms, so a ratio above earlier runs points to implementation
drift rather than a counterexample.
"""
import math
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from app.core.errors import ConfigError
from app.models.fields import Pair, TimeTrack
from app.models.states import WaveRun
from app.schemas.reports import HiddenRegularityRow, SymbolCheckRow, TraceInequalityRow
from app.schemas.run_config import InequalityParams
from app.solvers.channel_fields import l2_time_sobolev_norm, sobolev_norm, spacetime_norm, time_sobolev_norm, trace_track
from app.utils.logging_config import logger

FREQUENCY_MIN_EXP = -3.0
FREQUENCY_MAX_EXP = 6.0
SAFETY_FACTOR = 1.05
HIDDEN_FORMS = ("energy", "trace")
TRACE_BETA_MAX = 2.5


class FrequencyPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau: float
    xi: tuple[float, float, float]

    @field_validator("tau")
    @classmethod
    def _finite_tau(cls, tau: float) -> float:
        if not math.isfinite(tau):
            raise ValueError("temporal frequency must be finite")
        return tau

    @field_validator("xi")
    @classmethod
    def _finite_xi(cls, xi):
        if not all(math.isfinite(x) for x in xi):
            raise ValueError("spatial frequencies must be finite")
        return xi

    @property
    def xi_magnitude(self) -> float:
        return math.sqrt(sum(x * x for x in self.xi))


def _params(**kwargs) -> InequalityParams:
    try:
        return InequalityParams(**kwargs)
    except ValidationError as exc:
        raise ConfigError(f"inequality parameters out of range: {exc.errors()[0]['msg']}") from exc


# ---- trace inequality -------------------------------------------------------

def trace_inequality_sides(u: TimeTrack, r: float, theta: float) -> tuple[float, float]:
    """(LHS, RHS) of the interpolated trace inequality on the slab's interface plane."""
    if r <= 0.5:
        raise ConfigError(f"trace inequality needs r > 1/2, got {r}")
    if theta < 0.0:
        raise ConfigError(f"trace inequality needs theta >= 0, got {theta}")
    if not u.tag.is_fluid:
        raise ConfigError(f"trace inequality tracks live on a fluid slab, got {u.tag.value}")
    plane = u.geometry.interface_of(u.tag)
    lhs = time_sobolev_norm(trace_track(u, plane), theta)
    space = l2_time_sobolev_norm(u, r)
    time = time_sobolev_norm(u, 2.0 * theta * r / (2.0 * r - 1.0))
    rhs = space ** (1.0 / (2.0 * r)) * time ** ((2.0 * r - 1.0) / (2.0 * r)) + space
    return lhs, rhs


def verify_trace_inequality(u: TimeTrack, r: float, theta: float, test_id: str = "u") -> TraceInequalityRow:
    lhs, rhs = trace_inequality_sides(u, r, theta)
    if rhs == 0.0:
        return TraceInequalityRow(test_id=test_id, r=r, theta=theta, lhs=lhs, rhs=rhs, skipped=True)
    return TraceInequalityRow(test_id=test_id, r=r, theta=theta, lhs=lhs, rhs=rhs, ratio=lhs / rhs)


def trace_suite(tracks: Sequence[TimeTrack], r: float, theta: float) -> List[TraceInequalityRow]:
    return [verify_trace_inequality(u, r, theta, test_id=f"trace-{i:03d}") for i, u in enumerate(tracks)]


def max_ratio(rows: Iterable) -> Optional[float]:
    ratios = [row.ratio for row in rows if not row.skipped]
    return max(ratios) if ratios else None


# ---- interpolation symbol inequality ---------------------------------------

def fit_grid(size: int) -> np.ndarray:
    """Zero followed by ``size`` log-spaced magnitudes in [1e-3, 1e6]."""
    return np.concatenate([[0.0], np.logspace(FREQUENCY_MIN_EXP, FREQUENCY_MAX_EXP, size)])


def check_grid(size: int, exclude: Optional[np.ndarray] = None) -> np.ndarray:
    """Log-space midpoints of ``size`` cells, minus any point of ``exclude``."""
    edges = np.linspace(FREQUENCY_MIN_EXP, FREQUENCY_MAX_EXP, size + 1)
    points = 10.0 ** (0.5 * (edges[:-1] + edges[1:]))
    if exclude is not None:
        points = points[~np.isin(points, exclude)]
    return points


def symbol_sides(tau: np.ndarray, xi: np.ndarray, params: InequalityParams, C_eps: float) -> tuple[np.ndarray, np.ndarray]:
    lhs = (1.0 + tau ** (2.0 * params.theta_i)) * (1.0 + xi ** (2.0 * params.lambda_i))
    rhs = params.eps ** 2 * (1.0 + tau ** (2.0 * params.alpha)) + C_eps * (1.0 + xi ** (2.0 * params.beta))
    return lhs, rhs


def interpolation_constant(alpha: float, beta: float, theta: float, lam: float, eps: float,
                           grid_size: int = 512) -> float:
    """Smallest C on the fitting grid with eps^2 (1+tau^{2 alpha}) + C (1+xi^{2 beta}) above the product symbol, times 1.05."""
    params = _params(alpha=alpha, beta=beta, theta_i=theta, lambda_i=lam, eps=eps)
    grid = fit_grid(grid_size)
    tau, xi = grid[:, None], grid[None, :]
    lhs, _ = symbol_sides(tau, xi, params, 0.0)
    quotient = (lhs - params.eps ** 2 * (1.0 + tau ** (2.0 * params.alpha))) / (1.0 + xi ** (2.0 * params.beta))
    return SAFETY_FACTOR * max(float(quotient.max()), 0.0)


def verify_symbol_inequality(params: InequalityParams, C_eps: float, grid_size: int = 100,
                             fit_size: int = 512) -> int:
    """Violations of the symbol inequality on a held-out grid of grid_size^2 points."""
    points = check_grid(grid_size, exclude=fit_grid(fit_size))
    lhs, rhs = symbol_sides(points[:, None], points[None, :], params, C_eps)
    return int(np.count_nonzero(lhs > rhs))


def symbol_suite(matrix: Sequence[InequalityParams], fit_size: int = 512, grid_size: int = 100) -> List[SymbolCheckRow]:
    rows = []
    for params in matrix:
        C_eps = interpolation_constant(params.alpha, params.beta, params.theta_i, params.lambda_i, params.eps,
                                       grid_size=fit_size)
        violations = verify_symbol_inequality(params, C_eps, grid_size, fit_size)
        halved = verify_symbol_inequality(params, 0.5 * C_eps, grid_size, fit_size)
        if violations:
            logger.warning(f"Symbol inequality violated at {violations} points for {params.model_dump()}")
        rows.append(SymbolCheckRow(alpha=params.alpha, beta=params.beta, theta=params.theta_i, lam=params.lambda_i,
                                   eps=params.eps, C_eps=C_eps, violations=violations, halved_violations=halved))
    return rows


# ---- hidden regularity ------------------------------------------------------

def _pair_norm(pair: Pair, norm) -> float:
    return math.sqrt(sum(norm(track) ** 2 for track in pair.both()))


def hidden_regularity_sides(run: WaveRun, beta: float, form: str = "energy") -> tuple[float, float]:
    if form == "energy":
        if beta < 1.0:
            raise ConfigError(f"the energy form needs beta >= 1, got {beta}")
        lhs = _pair_norm(run.normal_derivative, lambda t: spacetime_norm(t, (beta - 1.0, beta - 1.0)))
        rhs = (sobolev_norm(run.w0, beta) + sobolev_norm(run.w1, beta - 1.0)
               + _pair_norm(run.psi, lambda t: spacetime_norm(t, (beta, beta))))
        return lhs, rhs
    if form == "trace":
        if not 0.0 < beta < TRACE_BETA_MAX:
            raise ConfigError(f"the trace form needs 0 < beta < {TRACE_BETA_MAX}, got {beta}")
        lhs = _pair_norm(run.normal_derivative, lambda t: l2_time_sobolev_norm(t, beta + 1.0))
        mixed = beta / 2.0 + 1.0
        rhs = (sobolev_norm(run.w0, beta + 2.0) + sobolev_norm(run.w1, beta + 1.0)
               + _pair_norm(run.psi, lambda t: l2_time_sobolev_norm(t, beta + 2.0))
               + _pair_norm(run.psi, lambda t: spacetime_norm(t, (mixed, mixed))))
        return lhs, rhs
    raise ConfigError(f"unknown hidden-regularity form '{form}', expected one of {HIDDEN_FORMS}")


def hidden_regularity_ratio(run: WaveRun, beta: float, form: str = "energy", test_id: str = "wave") -> HiddenRegularityRow:
    lhs, rhs = hidden_regularity_sides(run, beta, form)
    if rhs == 0.0:
        return HiddenRegularityRow(test_id=test_id, form=form, beta=beta, lhs=lhs, rhs=rhs, skipped=True)
    return HiddenRegularityRow(test_id=test_id, form=form, beta=beta, lhs=lhs, rhs=rhs, ratio=lhs / rhs)


def hidden_regularity_suite(runs: Sequence[WaveRun], beta: float, form: str) -> List[HiddenRegularityRow]:
    return [hidden_regularity_ratio(run, beta, form, test_id=f"{form}-{i:03d}") for i, run in enumerate(runs)]
