# app/solvers/channel_fields.py
"""Derivatives, traces and discrete Sobolev norms on the channel grids.

In-plane derivatives are exact spectral derivatives of the in-plane DFT; the
vertical derivative is the second-order centred difference with one-sided
second-order stencils at slab ends. Fractional norms reflect a slab evenly
across its end planes and weight the full 3D spectrum by (1+|xi|^2)^s.
"""
import numpy as np
import scipy.fft as sfft
from scipy.integrate import trapezoid
from scipy.signal.windows import hann

from app.core.config import settings
from app.core.errors import ConfigError, DomainMismatchError
from app.models.fields import Field, ScalarField, SobolevOrder, SpaceTimeOrder, TimeTrack, VectorField, field_class
from app.models.geometry import ChannelGeometry, DomainTag

TIME_WINDOW = "hann"
TIME_PAD_FACTOR = 4
WINDOW_METADATA = {"time_window": TIME_WINDOW, "time_pad_factor": TIME_PAD_FACTOR}


def _along(k: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = k.size
    return k.reshape(shape)


# ---- derivatives -----------------------------------------------------------

def partial_array(values: np.ndarray, direction: int, geometry: ChannelGeometry, tag: DomainTag) -> np.ndarray:
    """d/dy_{direction+1} of an array whose trailing axes are the grid of ``tag``."""
    if tag.is_plane:
        raise DomainMismatchError(f"derivatives need a 3D subdomain, got {tag.value}")
    if direction == 2:
        return np.gradient(values, geometry.h3(tag), axis=-1, edge_order=2)
    axis = values.ndim - 3 + direction
    k = geometry.wavenumbers[direction].ravel()
    hat = sfft.fft(values, axis=axis, workers=settings.FSI_THREADS)
    hat *= 1j * _along(k, axis, values.ndim)
    return sfft.ifft(hat, axis=axis, workers=settings.FSI_THREADS).real


def gradient_array(values: np.ndarray, geometry: ChannelGeometry, tag: DomainTag) -> np.ndarray:
    """Stack the three partials on a new axis just before the grid axes."""
    return np.stack([partial_array(values, d, geometry, tag) for d in range(3)], axis=-4)


def divergence_array(values: np.ndarray, geometry: ChannelGeometry, tag: DomainTag) -> np.ndarray:
    """Sum of d_i v_i for an array with the vector component axis just before the grid axes."""
    return sum(partial_array(values[..., i, :, :, :], i, geometry, tag) for i in range(3))


def partial(f: Field, direction: int) -> Field:
    return f.with_values(partial_array(f.values, direction, f.geometry, f.tag))


def gradient(f: Field) -> Field:
    if f.rank > 1:
        raise DomainMismatchError("gradient is defined for scalar and vector fields")
    values = gradient_array(f.values, f.geometry, f.tag)
    return field_class(f.rank + 1)(geometry=f.geometry, tag=f.tag, values=values)


def divergence(v: VectorField) -> ScalarField:
    if v.rank != 1:
        raise DomainMismatchError("divergence is defined for vector fields")
    return ScalarField(geometry=v.geometry, tag=v.tag, values=divergence_array(v.values, v.geometry, v.tag))


def laplacian(f: ScalarField) -> ScalarField:
    return divergence(gradient(f))


def gradient_track(track: TimeTrack) -> TimeTrack:
    if track.rank > 1:
        raise DomainMismatchError("gradient is defined for scalar and vector tracks")
    return TimeTrack(geometry=track.geometry, tag=track.tag, rank=track.rank + 1, dt=track.dt,
                     values=gradient_array(track.values, track.geometry, track.tag))


def divergence_track(track: TimeTrack) -> TimeTrack:
    if track.rank != 1:
        raise DomainMismatchError("divergence is defined for vector tracks")
    return TimeTrack(geometry=track.geometry, tag=track.tag, rank=0, dt=track.dt,
                     values=divergence_array(track.values, track.geometry, track.tag))


# ---- traces ----------------------------------------------------------------

def boundary_trace(f: Field, where: DomainTag) -> Field:
    """Restriction of a slab field to one of its end planes (grid-aligned, no interpolation)."""
    if f.tag.is_plane:
        raise DomainMismatchError(f"{f.tag.value} is already a plane field")
    index = f.geometry.plane_index(f.tag, where)
    return field_class(f.rank)(geometry=f.geometry, tag=where, values=f.values[..., index])


def trace_track(track: TimeTrack, where: DomainTag) -> TimeTrack:
    index = track.geometry.plane_index(track.tag, where)
    return TimeTrack(geometry=track.geometry, tag=where, rank=track.rank, dt=track.dt,
                     values=track.values[..., index])


# ---- norms -----------------------------------------------------------------

def _order(s) -> float:
    value = s.s if isinstance(s, SobolevOrder) else float(s)
    if value < 0:
        raise ConfigError(f"Sobolev order must be nonnegative, got {value}")
    return value


def _reflect(values: np.ndarray) -> np.ndarray:
    """Even reflection of the vertical axis onto a torus of twice the slab thickness."""
    return np.concatenate([values, values[..., -2:0:-1]], axis=-1)


def sobolev_sq_samples(values: np.ndarray, geometry: ChannelGeometry, tag: DomainTag, s: float) -> np.ndarray:
    """Squared H^s norm of every leading-axis sample of ``values``.

    ``values`` has shape (n, *components, *grid); the result has shape (n,).
    """
    n = values.shape[0]
    k1 = np.fft.fftfreq(geometry.N1, d=1.0 / geometry.N1)
    k2 = np.fft.fftfreq(geometry.N2, d=1.0 / geometry.N2)
    if tag.is_plane:
        axes = (-2, -1)
        hat = sfft.fftn(values, axes=axes, workers=settings.FSI_THREADS)
        symbol = 1.0 + k1[:, None] ** 2 + k2[None, :] ** 2
        scale = geometry.h1 * geometry.h2 / (geometry.N1 * geometry.N2)
    else:
        axes = (-3, -2, -1)
        m = geometry.vertical_count(tag)
        hat = sfft.fftn(_reflect(values), axes=axes, workers=settings.FSI_THREADS)
        xi3 = np.pi * np.fft.fftfreq(2 * m, d=1.0 / (2 * m)) / geometry.thickness(tag)
        symbol = 1.0 + k1[:, None, None] ** 2 + k2[None, :, None] ** 2 + xi3[None, None, :] ** 2
        scale = 0.5 * geometry.h1 * geometry.h2 * geometry.h3(tag) / (geometry.N1 * geometry.N2 * 2 * m)
    weighted = (symbol ** s) * np.abs(hat) ** 2
    return scale * weighted.reshape(n, -1).sum(axis=1)


def sobolev_norm(f: Field, s) -> float:
    s = _order(s)
    return float(np.sqrt(sobolev_sq_samples(f.values[None], f.geometry, f.tag, s)[0]))


def l2_norm(f: Field) -> float:
    """Quadrature L^2 norm: rectangle rule in-plane, trapezoid rule vertically."""
    w = f.geometry.quadrature_weights(f.tag)
    return float(np.sqrt(np.sum(w * f.values ** 2)))


def _time_spectrum(track: TimeTrack) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequencies and the spatially integrated |U(tau)|^2 of the windowed, padded track."""
    n = track.n_samples
    n_pad = TIME_PAD_FACTOR * n
    window = _along(hann(n, sym=True), 0, track.values.ndim)
    w = track.geometry.quadrature_weights(track.tag)
    hat = sfft.fft(track.values * window, n=n_pad, axis=0, workers=settings.FSI_THREADS)
    power = (np.abs(hat) ** 2 * w).reshape(n_pad, -1).sum(axis=1)
    tau = 2.0 * np.pi * np.fft.fftfreq(n_pad, d=track.dt)
    return tau, power * track.dt / n_pad


def _check_track(track: TimeTrack):
    if track.n_samples < 4:
        raise ConfigError(f"space-time norms need at least 4 samples, got {track.n_samples}")


def time_sobolev_norm(track: TimeTrack, r: float) -> float:
    """Windowed H^r_t L^2_x norm with symbol (1+tau^2)^r."""
    _check_track(track)
    r = _order(r)
    tau, power = _time_spectrum(track)
    return float(np.sqrt(np.sum((1.0 + tau ** 2) ** r * power)))


def l2_time_sobolev_norm(track: TimeTrack, s: float) -> float:
    """L^2_t H^s_x with trapezoidal time quadrature."""
    s = _order(s)
    per_sample = sobolev_sq_samples(track.values, track.geometry, track.tag, s)
    return float(np.sqrt(trapezoid(per_sample, dx=track.dt)))


def spacetime_norm(track: TimeTrack, order: SpaceTimeOrder) -> float:
    """Discrete H^{r,s} norm: L^2_t H^s_x plus the excess of the windowed H^r_t L^2_x term.

    The L^2 part of H^r_t L^2_x is already counted by L^2_t H^s_x, so only
    ((1+tau^2)^r - 1) weighted power is added. At r = 0 this is L^2_t H^s_x
    exactly.
    """
    _check_track(track)
    if not isinstance(order, SpaceTimeOrder):
        order = SpaceTimeOrder(r=order[0], s=order[1])
    space = l2_time_sobolev_norm(track, order.s) ** 2
    if order.r == 0.0:
        return float(np.sqrt(space))
    tau, power = _time_spectrum(track)
    excess = np.sum(((1.0 + tau ** 2) ** order.r - 1.0) * power)
    return float(np.sqrt(space + excess))


def K_norm(track: TimeTrack, s: float) -> float:
    return spacetime_norm(track, SpaceTimeOrder.K(s))


def pair_K_norm(tracks, s: float) -> float:
    """K^s norm over both fluid slabs."""
    return float(np.sqrt(sum(K_norm(t, s) ** 2 for t in tracks.both())))
