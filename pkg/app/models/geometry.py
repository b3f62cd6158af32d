# app/models/geometry.py
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, ValidationError, model_validator

from app.core.errors import ConfigError, DomainMismatchError

TWO_PI = 2.0 * np.pi


class DomainTag(str, Enum):
    FLUID_LOWER = "fluid-lower"
    FLUID_UPPER = "fluid-upper"
    ELASTIC = "elastic"
    GAMMA_C_LOWER = "gamma-c-lower"
    GAMMA_C_UPPER = "gamma-c-upper"
    GAMMA_F_BOTTOM = "gamma-f-bottom"
    GAMMA_F_TOP = "gamma-f-top"

    @property
    def is_plane(self) -> bool:
        return self.value.startswith("gamma")

    @property
    def is_fluid(self) -> bool:
        return self in (DomainTag.FLUID_LOWER, DomainTag.FLUID_UPPER)


FLUID_TAGS = (DomainTag.FLUID_LOWER, DomainTag.FLUID_UPPER)
INTERFACE_TAGS = (DomainTag.GAMMA_C_LOWER, DomainTag.GAMMA_C_UPPER)
OUTER_TAGS = (DomainTag.GAMMA_F_BOTTOM, DomainTag.GAMMA_F_TOP)


class ChannelGeometry(BaseModel):
    """Three-layer periodic channel: fluid (0,L1), elastic (L1,L2), fluid (L2,L3).

    The in-plane directions form a torus of side 2*pi. ``M_*`` count vertical
    intervals, so every slab carries ``M + 1`` nodes including both end planes.
    """

    model_config = ConfigDict(frozen=True)

    L1: PositiveFloat
    L2: PositiveFloat
    L3: PositiveFloat
    N1: int
    N2: int
    M_lo: int
    M_up: int
    M_el: int

    @model_validator(mode="after")
    def _check_layout(self):
        if not (0.0 < self.L1 < self.L2 < self.L3):
            raise ValueError(f"slab ordering requires 0 < L1 < L2 < L3, got ({self.L1}, {self.L2}, {self.L3})")
        for name in ("N1", "N2", "M_lo", "M_up", "M_el"):
            count = getattr(self, name)
            if count < 4 or count % 2:
                raise ValueError(f"grid count {name}={count} must be even and >= 4")
        return self

    # ---- slabs -----------------------------------------------------------

    def slab_bounds(self, tag: DomainTag) -> tuple[float, float]:
        bounds = {
            DomainTag.FLUID_LOWER: (0.0, self.L1),
            DomainTag.ELASTIC: (self.L1, self.L2),
            DomainTag.FLUID_UPPER: (self.L2, self.L3),
        }
        if tag not in bounds:
            raise DomainMismatchError(f"{tag.value} is not a 3D subdomain")
        return bounds[tag]

    def vertical_count(self, tag: DomainTag) -> int:
        counts = {
            DomainTag.FLUID_LOWER: self.M_lo,
            DomainTag.ELASTIC: self.M_el,
            DomainTag.FLUID_UPPER: self.M_up,
        }
        if tag not in counts:
            raise DomainMismatchError(f"{tag.value} is not a 3D subdomain")
        return counts[tag]

    def thickness(self, tag: DomainTag) -> float:
        z0, z1 = self.slab_bounds(tag)
        return z1 - z0

    def h3(self, tag: DomainTag) -> float:
        return self.thickness(tag) / self.vertical_count(tag)

    def z(self, tag: DomainTag) -> np.ndarray:
        z0, z1 = self.slab_bounds(tag)
        return np.linspace(z0, z1, self.vertical_count(tag) + 1)

    # ---- in-plane grid ---------------------------------------------------

    @property
    def h1(self) -> float:
        return TWO_PI / self.N1

    @property
    def h2(self) -> float:
        return TWO_PI / self.N2

    @property
    def y1(self) -> np.ndarray:
        return np.arange(self.N1) * self.h1

    @property
    def y2(self) -> np.ndarray:
        return np.arange(self.N2) * self.h2

    @property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer in-plane wavenumbers shaped (N1, 1) and (1, N2), Nyquist bin zeroed."""
        k1 = np.fft.fftfreq(self.N1, d=1.0 / self.N1)
        k2 = np.fft.fftfreq(self.N2, d=1.0 / self.N2)
        k1[self.N1 // 2] = 0.0
        k2[self.N2 // 2] = 0.0
        return k1[:, None], k2[None, :]

    # ---- tagged grids ----------------------------------------------------

    def grid_shape(self, tag: DomainTag) -> tuple[int, ...]:
        if tag.is_plane:
            return (self.N1, self.N2)
        return (self.N1, self.N2, self.vertical_count(tag) + 1)

    def coordinates(self, tag: DomainTag) -> np.ndarray:
        """Node positions, shape (3, *grid_shape(tag))."""
        if tag.is_plane:
            y1, y2 = np.meshgrid(self.y1, self.y2, indexing="ij")
            return np.stack([y1, y2, np.full_like(y1, self.plane_height(tag))])
        y1, y2, y3 = np.meshgrid(self.y1, self.y2, self.z(tag), indexing="ij")
        return np.stack([y1, y2, y3])

    def quadrature_weights(self, tag: DomainTag) -> np.ndarray:
        """Rectangle rule in-plane, trapezoid rule vertically."""
        if tag.is_plane:
            return np.full(self.grid_shape(tag), self.h1 * self.h2)
        wz = np.full(self.vertical_count(tag) + 1, self.h3(tag))
        wz[0] *= 0.5
        wz[-1] *= 0.5
        return np.broadcast_to(self.h1 * self.h2 * wz, self.grid_shape(tag)).copy()

    def volume(self, tag: DomainTag) -> float:
        if tag.is_plane:
            return TWO_PI * TWO_PI
        return TWO_PI * TWO_PI * self.thickness(tag)

    # ---- planes ----------------------------------------------------------

    def plane_height(self, plane: DomainTag) -> float:
        heights = {
            DomainTag.GAMMA_F_BOTTOM: 0.0,
            DomainTag.GAMMA_C_LOWER: self.L1,
            DomainTag.GAMMA_C_UPPER: self.L2,
            DomainTag.GAMMA_F_TOP: self.L3,
        }
        if plane not in heights:
            raise DomainMismatchError(f"{plane.value} is not a boundary plane")
        return heights[plane]

    def plane_index(self, tag: DomainTag, plane: DomainTag) -> int:
        """Vertical node index of ``plane`` inside slab ``tag``."""
        last = self.vertical_count(tag)
        table = {
            DomainTag.FLUID_LOWER: {DomainTag.GAMMA_F_BOTTOM: 0, DomainTag.GAMMA_C_LOWER: last},
            DomainTag.ELASTIC: {DomainTag.GAMMA_C_LOWER: 0, DomainTag.GAMMA_C_UPPER: last},
            DomainTag.FLUID_UPPER: {DomainTag.GAMMA_C_UPPER: 0, DomainTag.GAMMA_F_TOP: last},
        }
        if plane not in table[tag]:
            raise DomainMismatchError(f"{plane.value} is not on the boundary of {tag.value}")
        return table[tag][plane]

    @property
    def interface_index(self) -> dict[DomainTag, dict[DomainTag, int]]:
        """Gamma_c node indices per adjacent slab."""
        return {
            plane: {tag: self.plane_index(tag, plane) for tag in (fluid, DomainTag.ELASTIC)}
            for plane, fluid in zip(INTERFACE_TAGS, FLUID_TAGS)
        }

    @property
    def outer_index(self) -> dict[DomainTag, tuple[DomainTag, int]]:
        """Gamma_f node index and owning slab."""
        return {
            plane: (fluid, self.plane_index(fluid, plane))
            for plane, fluid in zip(OUTER_TAGS, FLUID_TAGS)
        }

    def normal_sign(self, plane: DomainTag) -> float:
        """Vertical component of nu on Gamma_c, pointing from the elastic slab into the fluid."""
        signs = {DomainTag.GAMMA_C_LOWER: -1.0, DomainTag.GAMMA_C_UPPER: 1.0}
        if plane not in signs:
            raise DomainMismatchError(f"{plane.value} is not a fluid-structure interface")
        return signs[plane]

    def interface_of(self, fluid: DomainTag) -> DomainTag:
        return {DomainTag.FLUID_LOWER: DomainTag.GAMMA_C_LOWER, DomainTag.FLUID_UPPER: DomainTag.GAMMA_C_UPPER}[fluid]

    def outer_of(self, fluid: DomainTag) -> DomainTag:
        return {DomainTag.FLUID_LOWER: DomainTag.GAMMA_F_BOTTOM, DomainTag.FLUID_UPPER: DomainTag.GAMMA_F_TOP}[fluid]


def build_geometry(L1, L2, L3, N1, N2, M_lo, M_up, M_el) -> ChannelGeometry:
    try:
        return ChannelGeometry(L1=L1, L2=L2, L3=L3, N1=N1, N2=N2, M_lo=M_lo, M_up=M_up, M_el=M_el)
    except ValidationError as exc:
        raise ConfigError(f"invalid channel geometry: {exc.errors()[0]['msg']}") from exc
