# app/solvers/lagrangian_kinematics.py
"""Flow map, inverse deformation gradient, Jacobian and reciprocal density of a velocity track.

All ODEs are pointwise in space. Velocity gradients between samples are
linearly interpolated in time; cumulative time integrals use the trapezoid
rule.
"""
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from app.core.errors import DomainMismatchError, FloorBreachError, InvalidDensityError
from app.models.fields import ScalarField, TimeTrack
from app.models.states import DensityTrack, KinematicTrack
from app.schemas.reports import BDifferenceReport, KinematicResidualReport
from app.solvers.channel_fields import gradient_array, gradient_track
from app.utils.logging_config import logger

GRADIENT_INTERPOLATION = "linear"
J_FLOOR = 0.1
R_FLOOR = 1e-3


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pointwise 3x3 product of tensor arrays with component axes leading."""
    return np.einsum("ik...,kj...->ij...", A, B)


def trace_product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pointwise tr(A B) = A_kj B_jk."""
    return np.einsum("kj...,jk...->...", A, B)


def _identity(grid_shape: tuple[int, ...]) -> np.ndarray:
    return np.broadcast_to(np.eye(3).reshape((3, 3) + (1,) * len(grid_shape)), (3, 3) + grid_shape).copy()


def _require_fluid(v: TimeTrack):
    if not v.tag.is_fluid or v.rank != 1:
        raise DomainMismatchError(f"kinematics need a velocity track on a fluid slab, got rank {v.rank} on {v.tag.value}")


def _riccati(a: np.ndarray, G: np.ndarray) -> np.ndarray:
    return -matmul(matmul(a, G), a)


def _rk4_inverse_step(a: np.ndarray, G0: np.ndarray, G1: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step of a' = -a G a with G linear between G0 and G1."""
    Gm = 0.5 * (G0 + G1)
    k1 = _riccati(a, G0)
    k2 = _riccati(a + 0.5 * dt * k1, Gm)
    k3 = _riccati(a + 0.5 * dt * k2, Gm)
    k4 = _riccati(a + dt * k3, G1)
    return a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def flow_map(v: TimeTrack) -> TimeTrack:
    """eta(t) = x + int_0^t v."""
    _require_fluid(v)
    x = v.geometry.coordinates(v.tag)
    displacement = cumulative_trapezoid(v.values, dx=v.dt, axis=0, initial=0.0)
    return v.with_values(x[None] + displacement)


def integrate_inverse_gradient(v: TimeTrack) -> TimeTrack:
    """RK4 for a_t = -a (grad v) a with a(0) = I."""
    _require_fluid(v)
    G = gradient_track(v).values
    a = np.empty_like(G)
    a[0] = _identity(v.geometry.grid_shape(v.tag))
    for n in range(v.n_samples - 1):
        a[n + 1] = _rk4_inverse_step(a[n], G[n], G[n + 1], v.dt)
    return TimeTrack(geometry=v.geometry, tag=v.tag, rank=2, dt=v.dt, values=a)


def integrate_jacobian(v: TimeTrack, a: TimeTrack) -> TimeTrack:
    """RK4 for J_t = J a_kj d_k v_j with J(0) = 1.

    The midpoint value of ``a`` comes from an RK4 half step of its own ODE so
    that all stages see consistent coefficients.
    """
    _require_fluid(v)
    if a.tag != v.tag or a.n_samples != v.n_samples:
        raise DomainMismatchError("a must come from the same velocity track")
    G = gradient_track(v).values
    dt = v.dt
    J = np.empty((v.n_samples,) + v.geometry.grid_shape(v.tag))
    J[0] = 1.0
    for n in range(v.n_samples - 1):
        Gm = 0.5 * (G[n] + G[n + 1])
        a_half = _rk4_inverse_step(a.values[n], G[n], Gm, 0.5 * dt)
        c0 = trace_product(a.values[n], G[n])
        cm = trace_product(a_half, Gm)
        c1 = trace_product(a.values[n + 1], G[n + 1])
        k1 = c0 * J[n]
        k2 = cm * (J[n] + 0.5 * dt * k1)
        k3 = cm * (J[n] + 0.5 * dt * k2)
        k4 = c1 * (J[n] + dt * k3)
        J[n + 1] = J[n] + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return TimeTrack(geometry=v.geometry, tag=v.tag, rank=0, dt=dt, values=J)


def density_closed_form(R0: ScalarField, v: TimeTrack, a: Optional[TimeTrack] = None) -> DensityTrack:
    """R = R0 exp(int_0^t e) with e = div v (no ``a``) or e = a_kj d_k v_j."""
    _require_fluid(v)
    if R0.tag != v.tag:
        raise DomainMismatchError(f"R0 lives on {R0.tag.value}, velocity on {v.tag.value}")
    if np.any(R0.values <= 0.0):
        raise InvalidDensityError("R0 must be positive everywhere", min_R0=float(R0.values.min()))
    G = gradient_track(v).values
    if a is None:
        exponent_rate = np.trace(G, axis1=1, axis2=2)
    else:
        exponent_rate = np.einsum("nkj...,njk...->n...", a.values, G)
    exponent = cumulative_trapezoid(exponent_rate, dx=v.dt, axis=0, initial=0.0)
    R = TimeTrack(geometry=v.geometry, tag=v.tag, rank=0, dt=v.dt, values=R0.values[None] * np.exp(exponent))
    return DensityTrack(R=R, R0=R0)


def deformation_gradient(eta: TimeTrack) -> np.ndarray:
    """grad eta = I + grad(eta - x); the displacement part is periodic in-plane."""
    x = eta.geometry.coordinates(eta.tag)
    grid = eta.geometry.grid_shape(eta.tag)
    return _identity(grid)[None] + gradient_array(eta.values - x[None], eta.geometry, eta.tag)


def kinematic_consistency(eta: TimeTrack, a: TimeTrack, J: TimeTrack) -> KinematicResidualReport:
    """max_t |a grad(eta) - I| and max_t |J - det grad(eta)|."""
    F = deformation_gradient(eta)
    grid = eta.geometry.grid_shape(eta.tag)
    product = np.einsum("nik...,nkj...->nij...", a.values, F)
    a_residual = float(np.max(np.abs(product - _identity(grid)[None])))
    det = np.linalg.det(np.moveaxis(F, (1, 2), (-2, -1)))
    J_residual = float(np.max(np.abs(J.values - det)))
    return KinematicResidualReport(a_residual=a_residual, J_residual=J_residual)


def check_floors(J: Optional[TimeTrack], density: DensityTrack, J_floor: float = J_FLOOR, R_floor: float = R_FLOOR):
    """Abort when the discrete solution leaves the near-identity regime."""
    if J is not None:
        min_J = float(J.values.min())
        if min_J < J_floor:
            logger.warning(f"Jacobian floor breached on {J.tag.value}: min J = {min_J:.3e}")
            raise FloorBreachError(f"min J = {min_J:.3e} fell below {J_floor}", quantity="J", value=min_J)
    min_R = float(density.R.values.min())
    threshold = R_floor * float(density.R0.values.min())
    if min_R < threshold:
        logger.warning(f"Density floor breached on {density.R.tag.value}: min R = {min_R:.3e}")
        raise FloorBreachError(f"min R = {min_R:.3e} fell below {threshold:.3e}", quantity="R", value=min_R)


def compute_kinematics(v: TimeTrack) -> KinematicTrack:
    a = integrate_inverse_gradient(v)
    J = integrate_jacobian(v, a)
    kin = KinematicTrack(eta=flow_map(v), a=a, J=J)
    logger.debug(f"Kinematics on {v.tag.value}: max|b| = {np.abs(kin.b.values).max():.3e}, "
                 f"max|J-1| = {np.abs(J.values - 1.0).max():.3e}")
    return kin


def b_difference_report(v1: TimeTrack, v2: TimeTrack, R0: ScalarField) -> BDifferenceReport:
    """Sup-norm differences of b, J and R produced by two velocity tracks, relative to their own difference."""
    kin1, kin2 = compute_kinematics(v1), compute_kinematics(v2)
    R1 = density_closed_form(R0, v1, kin1.a).R
    R2 = density_closed_form(R0, v2, kin2.a).R
    dv = float(np.max(np.abs(gradient_track(v1 - v2).values)))
    db = float(np.max(np.abs(kin1.a.values - kin2.a.values)))
    dJ = float(np.max(np.abs(kin1.J.values - kin2.J.values)))
    dR = float(np.max(np.abs(R1.values - R2.values)))

    def ratio(x: float) -> Optional[float]:
        return x / dv if dv > 0.0 else None

    return BDifferenceReport(grad_v_difference=dv, b_difference=db, J_difference=dJ, R_difference=dR,
                             b_ratio=ratio(db), J_ratio=ratio(dJ), R_ratio=ratio(dR), T=v1.T)
