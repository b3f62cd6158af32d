# app/solvers/wave_elastic.py
"""Wave equation w_tt = Laplace(w) on the elastic slab with Dirichlet data on both interfaces.

Each in-plane Fourier mode decouples into a 1D wave problem along y3, which
is advanced with the average-acceleration Newmark scheme. Interior rows are
solved with a batched tridiagonal sweep; boundary rows are overwritten with
the Dirichlet data.
"""
import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_trapezoid

from app.core.config import settings
from app.core.errors import DomainMismatchError, SolverError
from app.models.fields import Pair, TimeTrack, VectorField
from app.models.geometry import FLUID_TAGS, INTERFACE_TAGS, ChannelGeometry, DomainTag
from app.models.states import ElasticState, WaveRun
from app.solvers.channel_fields import boundary_trace, trace_track
from app.utils.logging_config import logger

COMPATIBILITY_TOLERANCE = 1e-8


def _fft2(values: np.ndarray) -> np.ndarray:
    return sfft.fft2(values, axes=(1, 2), workers=settings.FSI_THREADS)


def _ifft2(values: np.ndarray) -> np.ndarray:
    return sfft.ifft2(values, axes=(1, 2), workers=settings.FSI_THREADS).real


def _mode_symbol(geometry: ChannelGeometry) -> np.ndarray:
    """k1^2 + k2^2 per in-plane mode, shaped to broadcast against (N1, N2, Nz)."""
    k1, k2 = geometry.wavenumbers
    return (k1 ** 2 + k2 ** 2)[..., None]


def _interior_operator(w_hat: np.ndarray, k2: np.ndarray, h: float) -> np.ndarray:
    """(D2 - k^2) w on interior nodes, boundary values taken from ``w_hat``."""
    second = (w_hat[..., 2:] - 2.0 * w_hat[..., 1:-1] + w_hat[..., :-2]) / h ** 2
    return second - k2 * w_hat[..., 1:-1]


def solve_tridiagonal(sub: float, diag: np.ndarray, sup: float, rhs: np.ndarray) -> np.ndarray:
    """Thomas sweep along the last axis, batched over all leading axes.

    ``sub`` and ``sup`` are constant off-diagonals; ``diag`` broadcasts
    against ``rhs``.
    """
    diag = np.broadcast_to(diag, rhs.shape)
    n = rhs.shape[-1]
    c = np.empty(rhs.shape)
    d = np.empty_like(rhs)
    pivot = diag[..., 0]
    if np.any(pivot == 0.0):
        raise SolverError("zero pivot in tridiagonal solve")
    c[..., 0] = sup / pivot
    d[..., 0] = rhs[..., 0] / pivot
    for i in range(1, n):
        pivot = diag[..., i] - sub * c[..., i - 1]
        if np.any(pivot == 0.0):
            raise SolverError("zero pivot in tridiagonal solve", row=i)
        c[..., i] = sup / pivot
        d[..., i] = (rhs[..., i] - sub * d[..., i - 1]) / pivot
    x = np.empty_like(rhs)
    x[..., -1] = d[..., -1]
    for i in range(n - 2, -1, -1):
        x[..., i] = d[..., i] - c[..., i] * x[..., i + 1]
    return x


def _interface_data(w0: VectorField, v: TimeTrack, plane: DomainTag, fluid: DomainTag) -> TimeTrack:
    if w0.tag != plane or v.tag != fluid:
        raise DomainMismatchError(f"expected w0 on {plane.value} and v on {fluid.value}, "
                                  f"got {w0.tag.value} and {v.tag.value}")
    trace = trace_track(v, plane)
    integral = cumulative_trapezoid(trace.values, dx=v.dt, axis=0, initial=0.0)
    return trace.with_values(w0.values[None] + integral)


def dirichlet_from_velocity(w0_trace: Pair, v: Pair) -> Pair:
    """psi = w0 + int_0^t v on each interface plane."""
    lower_plane, upper_plane = INTERFACE_TAGS
    lower_fluid, upper_fluid = FLUID_TAGS
    return Pair(lower=_interface_data(w0_trace.lower, v.lower, lower_plane, lower_fluid),
                upper=_interface_data(w0_trace.upper, v.upper, upper_plane, upper_fluid))


def step_wave(state: ElasticState, psi_next: Pair, dt: float) -> ElasticState:
    """One Newmark (beta=1/4, gamma=1/2) step with psi_next imposed on both interfaces."""
    if dt <= 0.0:
        raise SolverError(f"time step must be positive, got {dt}")
    geometry = state.geometry
    h = geometry.h3(DomainTag.ELASTIC)
    k2 = _mode_symbol(geometry)
    w_hat = _fft2(state.w.values)
    v_hat = _fft2(state.w_t.values)
    psi_lo = _fft2(psi_next.lower.values)
    psi_up = _fft2(psi_next.upper.values)

    c = 0.25 * dt ** 2
    acc = _interior_operator(w_hat, k2, h)
    rhs = w_hat[..., 1:-1] + dt * v_hat[..., 1:-1] + c * acc
    rhs[..., 0] += c * psi_lo / h ** 2
    rhs[..., -1] += c * psi_up / h ** 2
    diag = 1.0 + c * (2.0 / h ** 2 + k2)

    new_w = np.empty_like(w_hat)
    new_w[..., 0] = psi_lo
    new_w[..., -1] = psi_up
    new_w[..., 1:-1] = solve_tridiagonal(-c / h ** 2, diag, -c / h ** 2, rhs)

    new_v = np.empty_like(v_hat)
    new_v[..., 1:-1] = v_hat[..., 1:-1] + 0.5 * dt * (acc + _interior_operator(new_w, k2, h))
    new_v[..., 0] = (psi_lo - w_hat[..., 0]) / dt
    new_v[..., -1] = (psi_up - w_hat[..., -1]) / dt

    w = _ifft2(new_w)
    # exact Dirichlet rows, not up to FFT rounding
    w[..., 0] = psi_next.lower.values
    w[..., -1] = psi_next.upper.values
    return ElasticState(w=state.w.with_values(w), w_t=state.w_t.with_values(_ifft2(new_v)), time=state.time + dt)


def normal_derivative(state: ElasticState) -> Pair:
    """dw/dnu on both interfaces; nu = -e3 at y3 = L1 and +e3 at y3 = L2."""
    geometry = state.geometry
    dz = np.gradient(state.w.values, geometry.h3(DomainTag.ELASTIC), axis=-1, edge_order=2)
    fields = []
    for plane in INTERFACE_TAGS:
        index = geometry.plane_index(DomainTag.ELASTIC, plane)
        fields.append(VectorField(geometry=geometry, tag=plane, values=geometry.normal_sign(plane) * dz[..., index]))
    return Pair(lower=fields[0], upper=fields[1])


def wave_energy(state: ElasticState) -> float:
    """Discrete energy conserved by the stepper under homogeneous Dirichlet data."""
    geometry = state.geometry
    h = geometry.h3(DomainTag.ELASTIC)
    weights = geometry.quadrature_weights(DomainTag.ELASTIC)
    kinetic = np.sum(weights * state.w_t.values ** 2)
    w_hat = _fft2(state.w.values)
    vertical_weights = weights[0, 0] / (geometry.h1 * geometry.h2)
    in_plane = (geometry.h1 * geometry.h2 / (geometry.N1 * geometry.N2)
                * np.sum(vertical_weights * _mode_symbol(geometry) * np.abs(w_hat) ** 2))
    vertical = geometry.h1 * geometry.h2 * np.sum(np.diff(state.w.values, axis=-1) ** 2) / h
    return float(0.5 * (kinetic + in_plane + vertical))


def wave_compatibility(w0: VectorField, w1: VectorField, psi: Pair) -> dict[str, float]:
    """Sup-norm mismatch of w0 = psi(0) and w1 = d_t psi(0) on both interfaces."""
    residuals = {"w0_trace": 0.0, "w1_trace": 0.0}
    for track in psi.both():
        dt = track.dt
        if track.n_samples >= 3:
            dpsi = (-3.0 * track.values[0] + 4.0 * track.values[1] - track.values[2]) / (2.0 * dt)
        else:
            dpsi = (track.values[1] - track.values[0]) / dt
        residuals["w0_trace"] = max(residuals["w0_trace"],
                                    float(np.max(np.abs(boundary_trace(w0, track.tag).values - track.values[0]))))
        residuals["w1_trace"] = max(residuals["w1_trace"],
                                    float(np.max(np.abs(boundary_trace(w1, track.tag).values - dpsi))))
    return residuals


def solve_wave(w0: VectorField, w1: VectorField, psi: Pair) -> WaveRun:
    """March the wave equation over the window carried by ``psi``."""
    if w0.tag != DomainTag.ELASTIC or w1.tag != DomainTag.ELASTIC:
        raise DomainMismatchError("wave initial data live on the elastic slab")
    if psi.lower.tag != DomainTag.GAMMA_C_LOWER or psi.upper.tag != DomainTag.GAMMA_C_UPPER:
        raise DomainMismatchError("wave boundary data live on the two interface planes")
    if psi.lower.n_samples != psi.upper.n_samples:
        raise DomainMismatchError("interface data on both planes must share one time resolution")

    residuals = wave_compatibility(w0, w1, psi)
    for name, value in residuals.items():
        if value > COMPATIBILITY_TOLERANCE:
            logger.warning(f"Wave data compatibility {name} violated by {value:.3e}")

    dt = psi.lower.dt
    state = ElasticState(w=w0, w_t=w1, time=0.0)
    states = [state]
    for n in range(1, psi.lower.n_samples):
        psi_next = Pair(lower=psi.lower.sample(n), upper=psi.upper.sample(n))
        state = step_wave(state, psi_next, dt)
        states.append(state)

    traces = [normal_derivative(s) for s in states]
    normal = Pair(lower=TimeTrack.from_samples([t.lower for t in traces], dt),
                  upper=TimeTrack.from_samples([t.upper for t in traces], dt))
    energy = np.array([wave_energy(s) for s in states])
    logger.debug(f"Wave solve finished: {len(states) - 1} steps, final energy {energy[-1]:.6e}")
    return WaveRun(w0=w0, w1=w1, psi=psi,
                   w=TimeTrack.from_samples([s.w for s in states], dt),
                   w_t=TimeTrack.from_samples([s.w_t for s in states], dt),
                   normal_derivative=normal, energy=energy)
