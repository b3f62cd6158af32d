# app/solvers/lame_parabolic.py
"""Parabolic Lame system u_t - R div sigma(u) = f on one fluid slab.

sigma(u) = lam (grad u + grad u^T) + mu div u I. The outer plane carries
u = 0, the interface plane the traction condition sigma(u) nu = h.

Space is discretised vertex-centred: gradients live on the cells between
two vertical nodes (in-plane spectral derivative of the vertical average,
vertical difference), and the stiffness is the adjoint of that cell
gradient applied to the cell stress. Multiplying the equation by R^{-1}
makes the system symmetric, so

    (W/R + theta dt K) u_{n+1} = W/R (u_n + dt f_theta) - (1-theta) dt K u_n - dt h_theta

with W the trapezoid node weights and h applied on the interface node.
"""
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
import sympy as sp
from scipy.integrate import trapezoid
from scipy.sparse.linalg import LinearOperator, cg

from app.core.config import settings
from app.core.errors import ConfigError, FloorBreachError, SolverError
from app.models.fields import TimeTrack, VectorField
from app.models.geometry import ChannelGeometry, DomainTag
from app.models.states import LameProblem, Viscosities
from app.schemas.reports import LameEnergyReport, LameResidualReport
from app.solvers.channel_fields import K_norm, partial_array
from app.utils.logging_config import logger

BACKWARD_EULER = 1.0
CRANK_NICOLSON = 0.5
CG_RTOL = 1e-12
CG_MAXITER = 1000
UNIFORM_RTOL = 1e-13

T_SYM, Y1, Y2, Y3 = sp.symbols("t y1 y2 y3", real=True)


# ---- operator pieces -------------------------------------------------------

def node_weights(geometry: ChannelGeometry, tag: DomainTag) -> np.ndarray:
    """Trapezoid weights along y3, shape (M+1,)."""
    w = np.full(geometry.vertical_count(tag) + 1, geometry.h3(tag))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _stress(g: np.ndarray, visc: Viscosities) -> np.ndarray:
    """sigma = lam (g + g^T) + mu tr(g) I for tensors with component axes at -5, -4."""
    sym = g + np.swapaxes(g, -5, -4)
    trace = np.trace(g, axis1=-5, axis2=-4)
    sigma = visc.lam * sym
    for j in range(3):
        sigma[..., j, j, :, :, :] += visc.mu * trace
    return sigma


def cell_gradient(u: np.ndarray, geometry: ChannelGeometry, tag: DomainTag) -> np.ndarray:
    """g[j, m] = d_m u_j on the vertical cells, shape (..., 3, 3, N1, N2, M)."""
    avg = 0.5 * (u[..., 1:] + u[..., :-1])
    diff = (u[..., 1:] - u[..., :-1]) / geometry.h3(tag)
    return np.stack([partial_array(avg, 0, geometry, tag), partial_array(avg, 1, geometry, tag), diff], axis=-4)


def apply_stiffness(u: np.ndarray, geometry: ChannelGeometry, tag: DomainTag, visc: Viscosities) -> np.ndarray:
    """K u per unit in-plane area: the adjoint cell gradient applied to h * sigma(cell gradient u)."""
    h = geometry.h3(tag)
    sigma = _stress(cell_gradient(u, geometry, tag), visc)
    in_plane = -(partial_array(sigma[..., 0, :, :, :], 0, geometry, tag)
                 + partial_array(sigma[..., 1, :, :, :], 1, geometry, tag))
    vertical = sigma[..., 2, :, :, :] / h
    out = np.zeros_like(u)
    out[..., :-1] += 0.5 * in_plane - vertical
    out[..., 1:] += 0.5 * in_plane + vertical
    return h * out


def _stress_matrix(visc: Viscosities) -> np.ndarray:
    S = np.zeros((9, 9))
    for j in range(3):
        for m in range(3):
            S[3 * j + m, 3 * j + m] += visc.lam
            S[3 * j + m, 3 * m + j] += visc.lam
        for l in range(3):
            S[3 * j + j, 3 * l + l] += visc.mu
    return S


@lru_cache(maxsize=8)
def mode_stiffness(geometry: ChannelGeometry, tag: DomainTag, visc: Viscosities) -> np.ndarray:
    """Per in-plane mode stiffness, shape (N1, N2, 3(M+1), 3(M+1)), node-major unknown ordering."""
    h = geometry.h3(tag)
    m_cells = geometry.vertical_count(tag)
    k1, k2 = geometry.wavenumbers
    G = np.zeros((geometry.N1, geometry.N2, 9, 6), dtype=complex)
    for j in range(3):
        for a in range(2):
            G[..., 3 * j + 0, 3 * a + j] = 0.5j * k1
            G[..., 3 * j + 1, 3 * a + j] = 0.5j * k2
        G[..., 3 * j + 2, j] = -1.0 / h
        G[..., 3 * j + 2, 3 + j] = 1.0 / h
    local = h * np.einsum("...ra,rs,...sb->...ab", G.conj(), _stress_matrix(visc), G)
    size = 3 * (m_cells + 1)
    K = np.zeros((geometry.N1, geometry.N2, size, size), dtype=complex)
    for c in range(m_cells):
        K[..., 3 * c:3 * c + 6, 3 * c:3 * c + 6] += local
    K.setflags(write=False)
    return K


def _to_modes(values: np.ndarray) -> np.ndarray:
    """(3, N1, N2, M+1) physical -> (N1, N2, 3(M+1)) Fourier, node-major."""
    hat = sfft.fft2(values, axes=(1, 2), workers=settings.FSI_THREADS)
    return np.moveaxis(hat, 0, -1).reshape(hat.shape[1], hat.shape[2], -1)


def _from_modes(hat: np.ndarray) -> np.ndarray:
    n1, n2 = hat.shape[:2]
    values = np.moveaxis(hat.reshape(n1, n2, -1, 3), -1, 0)
    return sfft.ifft2(values, axes=(1, 2), workers=settings.FSI_THREADS).real


def _mode_system(geometry: ChannelGeometry, tag: DomainTag, visc: Viscosities,
                 mass: np.ndarray, scale: float, outer: int) -> np.ndarray:
    """diag(mass) + scale * K per mode, with identity rows and columns on the outer-plane node."""
    A = scale * mode_stiffness(geometry, tag, visc)
    A = A + np.diag(np.repeat(mass, 3)).astype(complex)
    rows = slice(3 * outer, 3 * outer + 3)
    A[..., rows, :] = 0.0
    A[..., :, rows] = 0.0
    A[..., rows, rows] = np.eye(3)
    return A


def _is_inplane_uniform(R: np.ndarray) -> bool:
    spread = np.ptp(R, axis=(0, 1))
    return bool(np.all(spread <= UNIFORM_RTOL * np.max(np.abs(R))))


# ---- time stepping ---------------------------------------------------------

def _sample_index(prob: LameProblem, t: float, dt: float) -> int:
    if dt <= 0.0 or not np.isclose(dt, prob.dt, rtol=1e-10, atol=0.0):
        raise ConfigError(f"step size {dt} does not match the problem resolution {prob.dt}")
    n = int(round(t / prob.dt))
    if not np.isclose(n * prob.dt, t, rtol=0.0, atol=1e-9 * max(prob.dt, 1.0)) or not 0 <= n < prob.n_samples - 1:
        raise ConfigError(f"time {t} is not a step start of the problem window")
    return n


def step_lame(u: VectorField, prob: LameProblem, t: float, dt: float, theta: float = BACKWARD_EULER) -> VectorField:
    """Advance u from t to t + dt with R frozen at t + dt."""
    n = _sample_index(prob, t, dt)
    geometry, tag = prob.geometry, prob.tag
    R = prob.R.values[n + 1]
    if float(R.min()) < prob.R_floor:
        raise FloorBreachError(f"R fell to {float(R.min()):.3e} on {tag.value}", quantity="R", value=float(R.min()))
    wz = node_weights(geometry, tag)
    outer = geometry.plane_index(tag, geometry.outer_of(tag))
    inner = geometry.plane_index(tag, geometry.interface_of(tag))

    mass = wz / R
    f_theta = theta * prob.f.values[n + 1] + (1.0 - theta) * prob.f.values[n]
    h_theta = theta * prob.h.values[n + 1] + (1.0 - theta) * prob.h.values[n]
    rhs = mass * (u.values + dt * f_theta)
    if theta < 1.0:
        rhs -= (1.0 - theta) * dt * apply_stiffness(u.values, geometry, tag, prob.visc)
    rhs[..., inner] -= dt * h_theta
    rhs[..., outer] = 0.0

    scale = theta * dt
    if _is_inplane_uniform(R):
        A = _mode_system(geometry, tag, prob.visc, mass[0, 0], scale, outer)
        values = _from_modes(np.linalg.solve(A, _to_modes(rhs)[..., None])[..., 0])
    else:
        values = _krylov_solve(rhs, u.values, mass, scale, outer, geometry, tag, prob.visc)
    values[..., outer] = 0.0
    return u.with_values(values)


def _krylov_solve(rhs: np.ndarray, guess: np.ndarray, mass: np.ndarray, scale: float, outer: int,
                  geometry: ChannelGeometry, tag: DomainTag, visc: Viscosities) -> np.ndarray:
    """CG on the full slab, preconditioned by the mode-wise operator with in-plane averaged 1/R."""
    shape = rhs.shape

    def apply(x: np.ndarray) -> np.ndarray:
        u = x.reshape(shape)
        masked = u.copy()
        masked[..., outer] = 0.0
        out = mass * masked + scale * apply_stiffness(masked, geometry, tag, visc)
        out[..., outer] = u[..., outer]
        return out.ravel()

    P_inv = np.linalg.inv(_mode_system(geometry, tag, visc, mass.mean(axis=(0, 1)), scale, outer))

    def precondition(x: np.ndarray) -> np.ndarray:
        hat = np.einsum("...ab,...b->...a", P_inv, _to_modes(x.reshape(shape)))
        return _from_modes(hat).ravel()

    size = rhs.size
    A = LinearOperator((size, size), matvec=apply, dtype=float)
    M = LinearOperator((size, size), matvec=precondition, dtype=float)
    x, info = cg(A, rhs.ravel(), x0=np.array(guess, dtype=float).ravel(), rtol=CG_RTOL, atol=0.0, maxiter=CG_MAXITER, M=M)
    if info != 0:
        raise SolverError(f"conjugate gradients stopped with info={info} on {tag.value}", info=info)
    return x.reshape(shape)


def solve_lame(prob: LameProblem, theta: float = BACKWARD_EULER) -> TimeTrack:
    """March the problem over its whole window; the first sample is u0."""
    u = prob.u0
    samples = [u]
    for n in range(prob.n_samples - 1):
        u = step_lame(u, prob, n * prob.dt, prob.dt, theta)
        samples.append(u)
    logger.debug(f"Lame solve on {prob.tag.value}: {prob.n_samples - 1} steps, theta={theta}")
    return TimeTrack.from_samples(samples, prob.dt)


# ---- manufactured solutions ------------------------------------------------

def _lambdify(expr, geometry: ChannelGeometry, tag: DomainTag) -> Callable[[float], np.ndarray]:
    fn = sp.lambdify((T_SYM, Y1, Y2, Y3), expr, modules="numpy")
    y = geometry.coordinates(tag)
    shape = y.shape[1:]
    return lambda t: np.broadcast_to(np.asarray(fn(t, y[0], y[1], y[2]), dtype=float), shape)


def manufactured_track(expressions: Sequence, geometry: ChannelGeometry, tag: DomainTag,
                       dt: float, n_samples: int) -> TimeTrack:
    """Sample sympy expressions of (t, y1, y2, y3) on a tagged grid; one expression per component."""
    fns = [_lambdify(sp.sympify(e), geometry, tag) for e in expressions]
    times = dt * np.arange(n_samples)
    values = np.stack([np.stack([fn(t) for fn in fns]) for t in times])
    if len(expressions) == 1:
        values = values[:, 0]
    return TimeTrack(geometry=geometry, tag=tag, rank=0 if len(expressions) == 1 else 1, dt=dt, values=values)


def manufactured_forcing(u_star: Sequence, R, visc: Viscosities, geometry: ChannelGeometry, tag: DomainTag,
                         dt: float, n_samples: int) -> tuple[TimeTrack, TimeTrack]:
    """Forcing f and interface traction h that make ``u_star`` an exact solution of the continuous problem."""
    u = sp.Matrix([sp.sympify(e) for e in u_star])
    R = sp.sympify(R)
    y = (Y1, Y2, Y3)
    grad = sp.Matrix(3, 3, lambda j, k: sp.diff(u[j], y[k]))
    div = grad.trace()
    f = [sp.diff(u[j], T_SYM)
         - visc.lam * R * sum(sp.diff(grad[j, k] + grad[k, j], y[k]) for k in range(3))
         - visc.mu * R * sp.diff(div, y[j])
         for j in range(3)]
    plane = geometry.interface_of(tag)
    nu3 = geometry.normal_sign(plane)
    h = [visc.lam * (grad[j, 2] + grad[2, j]) * nu3 + (visc.mu * div * nu3 if j == 2 else 0) for j in range(3)]
    f_track = manufactured_track([sp.simplify(e) for e in f], geometry, tag, dt, n_samples)
    h_slab = manufactured_track(h, geometry, tag, dt, n_samples)
    index = geometry.plane_index(tag, plane)
    h_track = TimeTrack(geometry=geometry, tag=plane, rank=1, dt=dt, values=h_slab.values[..., index])
    return f_track, h_track


# ---- diagnostics -----------------------------------------------------------

def lame_residual(u: TimeTrack, prob: LameProblem, theta: float = BACKWARD_EULER) -> LameResidualReport:
    """Time-L2 norms of the interior, interface-flux and outer-trace residuals of a solution track."""
    geometry, tag, dt = prob.geometry, prob.tag, prob.dt
    wz = node_weights(geometry, tag)
    outer = geometry.plane_index(tag, geometry.outer_of(tag))
    inner = geometry.plane_index(tag, geometry.interface_of(tag))
    area = geometry.h1 * geometry.h2
    Ku = apply_stiffness(u.values, geometry, tag, prob.visc)

    interior_sq, flux_sq = 0.0, 0.0
    interior = np.ones(wz.size, dtype=bool)
    interior[[outer, inner]] = False
    for n in range(1, u.n_samples):
        R = prob.R.values[n]
        f_theta = theta * prob.f.values[n] + (1.0 - theta) * prob.f.values[n - 1]
        h_theta = theta * prob.h.values[n] + (1.0 - theta) * prob.h.values[n - 1]
        K_theta = theta * Ku[n] + (1.0 - theta) * Ku[n - 1]
        rate = (u.values[n] - u.values[n - 1]) / dt - f_theta
        strong = rate + R * K_theta / wz
        interior_sq += dt * area * np.sum(wz[interior] * strong[..., interior] ** 2)
        balance = wz[inner] * rate[..., inner] / R[..., inner] + K_theta[..., inner] + h_theta
        flux_sq += dt * area * np.sum(balance ** 2)

    trace = u.values[..., outer]
    per_sample = area * np.sum(trace ** 2, axis=tuple(range(1, trace.ndim)))
    dirichlet_sq = float(trapezoid(per_sample, dx=dt)) if u.n_samples > 1 else 0.0
    return LameResidualReport(interior=float(np.sqrt(interior_sq)), interface_flux=float(np.sqrt(flux_sq)),
                              outer_dirichlet=float(np.sqrt(dirichlet_sq)))


def symmetric_gradient_energy(u: TimeTrack, R: TimeTrack) -> float:
    """int_0^T sum_x R |d_k u_j + d_j u_k|^2 on the cell gradient."""
    geometry, tag = u.geometry, u.tag
    g = cell_gradient(u.values, geometry, tag)
    sym = g + np.swapaxes(g, -5, -4)
    R_cell = 0.5 * (R.values[..., 1:] + R.values[..., :-1])
    density = R_cell * np.sum(sym ** 2, axis=(1, 2))
    per_sample = geometry.h1 * geometry.h2 * geometry.h3(tag) * density.reshape(u.n_samples, -1).sum(axis=1)
    return float(trapezoid(per_sample, dx=u.dt))


def lame_energy_report(runs: Sequence[tuple[TimeTrack, LameProblem]]) -> LameEnergyReport:
    """Korn-type and maximal-regularity ratios over a suite of solved problems."""
    korn, regularity = [], []
    for u, prob in runs:
        u0_sq = float(np.sum(prob.geometry.quadrature_weights(prob.tag) * prob.u0.values ** 2))
        if u0_sq > 0.0:
            korn.append(symmetric_gradient_energy(u, prob.R) / u0_sq)
        f_norm = K_norm(prob.f, 0.0)
        if f_norm > 0.0:
            regularity.append(K_norm(u, 2.0) / f_norm)
    return LameEnergyReport(runs=len(runs),
                            korn_constant=max(korn) if korn else None,
                            max_regularity_ratio=max(regularity) if regularity else None)
