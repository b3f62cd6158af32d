# app/utils/helpers/manufactured.py
"""Initial data sets, random band-limited test functions and manufactured Lame solutions."""
from typing import List

import numpy as np
import sympy as sp

from app.core.errors import ConfigError
from app.models.fields import Pair, ScalarField, TimeTrack, VectorField
from app.models.geometry import FLUID_TAGS, INTERFACE_TAGS, ChannelGeometry, DomainTag
from app.models.states import CouplingData, Viscosities
from app.solvers.channel_fields import boundary_trace
from app.solvers.lame_parabolic import T_SYM, Y1, Y2, Y3

# nodes next to each slab end left untouched by random perturbations
SUPPORT_MARGIN_NODES = 3
MODE_COLUMNS = ("k1", "k2", "m", "omega", "space_phase", "time_phase", "amplitude", "component")


# ---- coupled initial data --------------------------------------------------

def _vertical(values_fn):
    return lambda y1, y2, y3: np.stack([np.zeros_like(y3), np.zeros_like(y3), values_fn(y3)])


def compatible_data(geometry: ChannelGeometry, visc: Viscosities, gamma: float = 0.1) -> CouplingData:
    """Linear vertical shear in both slabs with R0 tuned so the interface stress balances.

    v0 = (0, 0, gamma y3) below and (0, 0, gamma (y3 - L3)) above, R0 = 1 / ((2 lam + mu) gamma),
    w0 = 0 and w1 interpolating the two interface velocities across the elastic slab.
    """
    if gamma <= 0.0:
        raise ConfigError(f"the compatible data set needs gamma > 0, got {gamma}")
    v_lo = VectorField.from_function(geometry, DomainTag.FLUID_LOWER, _vertical(lambda y3: gamma * y3))
    v_up = VectorField.from_function(geometry, DomainTag.FLUID_UPPER, _vertical(lambda y3: gamma * (y3 - geometry.L3)))
    R0 = 1.0 / ((2.0 * visc.lam + visc.mu) * gamma)
    R_lo = ScalarField.from_function(geometry, DomainTag.FLUID_LOWER, lambda y1, y2, y3: np.full_like(y3, R0))
    R_up = ScalarField.from_function(geometry, DomainTag.FLUID_UPPER, lambda y1, y2, y3: np.full_like(y3, R0))

    bottom = boundary_trace(v_lo, DomainTag.GAMMA_C_LOWER).values[2]
    top = boundary_trace(v_up, DomainTag.GAMMA_C_UPPER).values[2]
    zeta = (geometry.z(DomainTag.ELASTIC) - geometry.L1) / geometry.thickness(DomainTag.ELASTIC)
    w1 = np.zeros((3,) + geometry.grid_shape(DomainTag.ELASTIC))
    w1[2] = bottom[..., None] * (1.0 - zeta) + top[..., None] * zeta
    w1[2, ..., 0] = bottom
    w1[2, ..., -1] = top

    return CouplingData(v0=Pair(lower=v_lo, upper=v_up), R0=Pair(lower=R_lo, upper=R_up),
                        w0=VectorField.zeros(geometry, DomainTag.ELASTIC),
                        w1=VectorField(geometry=geometry, tag=DomainTag.ELASTIC, values=w1), visc=visc)


def trivial_data(geometry: ChannelGeometry, visc: Viscosities) -> CouplingData:
    """Fluid at rest with R0 = 1; h_ext = -nu cancels the pressure traction so v = 0 is a fixed point."""
    planes = []
    for plane in INTERFACE_TAGS:
        values = np.zeros((3,) + geometry.grid_shape(plane))
        values[2] = -geometry.normal_sign(plane)
        planes.append(VectorField(geometry=geometry, tag=plane, values=values))
    ones = [ScalarField(geometry=geometry, tag=tag, values=np.ones(geometry.grid_shape(tag))) for tag in FLUID_TAGS]
    return CouplingData(v0=Pair(lower=VectorField.zeros(geometry, DomainTag.FLUID_LOWER),
                                upper=VectorField.zeros(geometry, DomainTag.FLUID_UPPER)),
                        R0=Pair(lower=ones[0], upper=ones[1]),
                        w0=VectorField.zeros(geometry, DomainTag.ELASTIC),
                        w1=VectorField.zeros(geometry, DomainTag.ELASTIC),
                        visc=visc, h_ext=Pair(lower=planes[0], upper=planes[1]))


def interior_bump(geometry: ChannelGeometry, tag: DomainTag) -> np.ndarray:
    """sin^4 bump in y3 vanishing on the first and last SUPPORT_MARGIN_NODES + 1 nodes of the slab."""
    m = geometry.vertical_count(tag)
    if m < 2 * SUPPORT_MARGIN_NODES + 2:
        raise ConfigError(f"random data need at least {2 * SUPPORT_MARGIN_NODES + 2} vertical intervals on {tag.value}")
    z0, _ = geometry.slab_bounds(tag)
    zeta = (geometry.z(tag) - z0) / geometry.thickness(tag)
    a = SUPPORT_MARGIN_NODES / m
    inside = (zeta > a) & (zeta < 1.0 - a)
    return np.where(inside, np.sin(np.pi * (zeta - a) / (1.0 - 2.0 * a)) ** 4, 0.0)


def random_data(geometry: ChannelGeometry, visc: Viscosities, rng: np.random.Generator, gamma: float = 0.1,
                amplitude: float = 1e-2, k_max: int = 1) -> CouplingData:
    """Compatible data plus a random band-limited v0 perturbation supported away from all slab ends."""
    base = compatible_data(geometry, visc, gamma)
    perturbed = []
    for v in base.v0.both():
        modes = band_limited_modes(rng, k_max, vertical_max=0, omega_max=0.0)
        bump = interior_bump(geometry, v.tag)
        delta = amplitude * band_limited_values(geometry, v.tag, 0.0, modes) * bump
        perturbed.append(v.with_values(v.values + delta))
    return base.model_copy(update={"v0": Pair(lower=perturbed[0], upper=perturbed[1])})


# ---- band-limited test functions -------------------------------------------

def band_limited_modes(rng: np.random.Generator, k_max: int = 2, n_modes: int = 6, vertical_max: int = 2,
                       omega_max: float = 3.0) -> np.ndarray:
    """Random mode table, one row per term, columns as in MODE_COLUMNS."""
    return np.column_stack([
        rng.integers(-k_max, k_max + 1, n_modes),
        rng.integers(-k_max, k_max + 1, n_modes),
        rng.integers(0, vertical_max + 1, n_modes),
        rng.uniform(0.0, omega_max, n_modes),
        rng.uniform(0.0, 2.0 * np.pi, n_modes),
        rng.uniform(0.0, 2.0 * np.pi, n_modes),
        rng.standard_normal(n_modes),
        rng.integers(0, 3, n_modes),
    ]).astype(float)


def band_limited_values(geometry: ChannelGeometry, tag: DomainTag, t: float, modes: np.ndarray) -> np.ndarray:
    """Evaluate a mode table at time t on a slab grid, shape (3, *grid)."""
    y = geometry.coordinates(tag)
    z0, _ = geometry.slab_bounds(tag)
    zeta = (y[2] - z0) / geometry.thickness(tag)
    values = np.zeros((3,) + y.shape[1:])
    for k1, k2, m, omega, space_phase, time_phase, amplitude, component in modes:
        values[int(component)] += (amplitude * np.cos(k1 * y[0] + k2 * y[1] + space_phase)
                                   * np.cos(m * np.pi * zeta) * np.cos(omega * t + time_phase))
    return values


def band_limited_track(geometry: ChannelGeometry, tag: DomainTag, dt: float, n_samples: int,
                       modes: np.ndarray) -> TimeTrack:
    values = np.stack([band_limited_values(geometry, tag, n * dt, modes) for n in range(n_samples)])
    return TimeTrack(geometry=geometry, tag=tag, rank=1, dt=dt, values=values)


def band_limited_field(geometry: ChannelGeometry, tag: DomainTag, modes: np.ndarray) -> VectorField:
    return VectorField(geometry=geometry, tag=tag, values=band_limited_values(geometry, tag, 0.0, modes))


def wave_data(w0: VectorField, w1: VectorField, dt: float, n_samples: int) -> Pair:
    """Interface data psi(t) = w0 + t w1 on both planes, compatible with (w0, w1) to first order."""
    times = dt * np.arange(n_samples)[:, None, None, None]
    tracks = []
    for plane in INTERFACE_TAGS:
        values = boundary_trace(w0, plane).values[None] + times * boundary_trace(w1, plane).values[None]
        tracks.append(TimeTrack(geometry=w0.geometry, tag=plane, rank=1, dt=dt, values=values))
    return Pair(lower=tracks[0], upper=tracks[1])


# ---- manufactured Lame solutions -------------------------------------------

def _outer_distance(geometry: ChannelGeometry, tag: DomainTag):
    """Distance to the outer plane, scaled to 1 at the interface, as a sympy expression."""
    if tag == DomainTag.FLUID_LOWER:
        return Y3 / geometry.L1
    if tag == DomainTag.FLUID_UPPER:
        return (geometry.L3 - Y3) / (geometry.L3 - geometry.L2)
    raise ConfigError(f"manufactured Lame solutions live on a fluid slab, got {tag.value}")


def spatial_solution(geometry: ChannelGeometry, tag: DomainTag) -> List:
    """Linear in time so backward Euler is exact in t; error is purely spatial."""
    phi = sp.sin(sp.pi * _outer_distance(geometry, tag) / 2)
    growth = 1 + T_SYM
    return [growth * sp.cos(Y1) * phi, growth * sp.sin(Y2) * phi, growth * sp.cos(Y1 + Y2) * phi]


def temporal_solution(geometry: ChannelGeometry, tag: DomainTag) -> List:
    """Quadratic in y3 and constant in-plane, which the vertex-centred operator reproduces exactly."""
    zeta = _outer_distance(geometry, tag)
    q = zeta * (2 - zeta)
    g = sp.exp(2 * T_SYM)
    return [g * q, -g * q / 2, g * q]


def build_coupling_data(kind: str, geometry: ChannelGeometry, visc: Viscosities, rng: np.random.Generator,
                        gamma: float = 0.1, amplitude: float = 1e-2, k_max: int = 1) -> CouplingData:
    """Initial data set named by a run config's ``[data] kind``."""
    if kind == "compatible":
        return compatible_data(geometry, visc, gamma)
    if kind == "trivial":
        return trivial_data(geometry, visc)
    if kind == "random":
        return random_data(geometry, visc, rng, gamma, amplitude, k_max)
    raise ConfigError(f"unknown data kind '{kind}'")
