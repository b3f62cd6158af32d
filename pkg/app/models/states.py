# app/models/states.py
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydanticField, PositiveFloat, field_validator, model_validator

from app.core.errors import DomainMismatchError
from app.models.fields import Pair, ScalarField, TimeTrack, VectorField
from app.models.geometry import ChannelGeometry, DomainTag


def _identity_like(track: TimeTrack) -> np.ndarray:
    grid = track.values.shape[3:]
    eye = np.eye(3).reshape((1, 3, 3) + (1,) * len(grid))
    return np.broadcast_to(eye, track.values.shape)


class KinematicTrack(BaseModel):
    """Flow map, inverse deformation gradient and Jacobian of one fluid slab."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eta: TimeTrack
    a: TimeTrack
    J: TimeTrack

    @model_validator(mode="after")
    def _check_tracks(self):
        if (self.eta.rank, self.a.rank, self.J.rank) != (1, 2, 0):
            raise ValueError("kinematics need a vector eta, a tensor a and a scalar J")
        tags = {self.eta.tag, self.a.tag, self.J.tag}
        if len(tags) != 1:
            raise DomainMismatchError("kinematic tracks must live on one slab")
        if len({self.eta.n_samples, self.a.n_samples, self.J.n_samples}) != 1:
            raise ValueError("kinematic tracks must share one time resolution")
        return self

    @property
    def geometry(self) -> ChannelGeometry:
        return self.eta.geometry

    @property
    def tag(self) -> DomainTag:
        return self.eta.tag

    @property
    def dt(self) -> float:
        return self.eta.dt

    @property
    def b(self) -> TimeTrack:
        """b = a - I."""
        return self.a.with_values(self.a.values - _identity_like(self.a))

    @classmethod
    def identity(cls, geometry: ChannelGeometry, tag: DomainTag, dt: float, n_samples: int) -> "KinematicTrack":
        """Kinematics of the motionless state: eta = x, a = I, J = 1."""
        x = geometry.coordinates(tag)
        eta = TimeTrack(geometry=geometry, tag=tag, rank=1, dt=dt,
                        values=np.broadcast_to(x, (n_samples,) + x.shape))
        a = TimeTrack.zeros(geometry, tag, 2, dt, n_samples)
        a = a.with_values(_identity_like(a))
        J = TimeTrack(geometry=geometry, tag=tag, rank=0, dt=dt,
                      values=np.ones((n_samples,) + geometry.grid_shape(tag)))
        return cls(eta=eta, a=a, J=J)


class DensityTrack(BaseModel):
    """Reciprocal Lagrangian density R over the window together with its initial value."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    R: TimeTrack
    R0: ScalarField

    @model_validator(mode="after")
    def _check(self):
        if self.R.rank != 0 or self.R.tag != self.R0.tag:
            raise DomainMismatchError("density track and R0 must be scalars on the same slab")
        return self

    @property
    def R_inv(self) -> TimeTrack:
        return self.R.with_values(1.0 / self.R.values)


class ElasticState(BaseModel):
    """Displacement and velocity of the elastic slab at one time level."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: VectorField
    w_t: VectorField
    time: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        if self.w.tag != DomainTag.ELASTIC or self.w_t.tag != DomainTag.ELASTIC:
            raise DomainMismatchError("elastic state lives on the elastic slab")
        return self

    @property
    def geometry(self) -> ChannelGeometry:
        return self.w.geometry


class WaveRun(BaseModel):
    """Record of one wave solve over the window: data, solution tracks and interface tractions."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w0: VectorField
    w1: VectorField
    psi: Pair
    w: TimeTrack
    w_t: TimeTrack
    normal_derivative: Pair
    energy: np.ndarray

    @property
    def dt(self) -> float:
        return self.w.dt

    @property
    def final_state(self) -> ElasticState:
        n = self.w.n_samples - 1
        return ElasticState(w=self.w.sample(n), w_t=self.w_t.sample(n), time=self.w.T)


class Viscosities(BaseModel):
    model_config = ConfigDict(frozen=True)

    lam: PositiveFloat
    mu: PositiveFloat


class LameProblem(BaseModel):
    """Parabolic Lame data on one fluid slab.

    ``R`` and ``f`` live on the slab, ``h`` on the slab's interface plane. The
    outer plane always carries homogeneous Dirichlet data.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    tag: DomainTag
    R: TimeTrack
    f: TimeTrack
    h: TimeTrack
    u0: VectorField
    visc: Viscosities
    R_floor: float = PydanticField(default=1e-3, gt=0.0)

    @field_validator("tag")
    @classmethod
    def _fluid_only(cls, tag: DomainTag) -> DomainTag:
        if not tag.is_fluid:
            raise ValueError(f"Lame problems are posed on a fluid slab, got {tag.value}")
        return tag

    @model_validator(mode="after")
    def _check(self):
        geometry = self.u0.geometry
        interface = geometry.interface_of(self.tag)
        if self.R.tag != self.tag or self.f.tag != self.tag or self.u0.tag != self.tag:
            raise DomainMismatchError(f"R, f and u0 must live on {self.tag.value}")
        if self.h.tag != interface:
            raise DomainMismatchError(f"h must live on {interface.value}, got {self.h.tag.value}")
        if (self.R.rank, self.f.rank, self.h.rank) != (0, 1, 1):
            raise ValueError("R must be scalar while f and h are vector tracks")
        if len({self.R.n_samples, self.f.n_samples, self.h.n_samples}) != 1:
            raise ValueError("R, f and h must share one time resolution")
        if not np.isclose(self.R.dt, self.f.dt) or not np.isclose(self.R.dt, self.h.dt):
            raise ValueError("R, f and h must share one time step")
        return self

    @property
    def geometry(self) -> ChannelGeometry:
        return self.u0.geometry

    @property
    def dt(self) -> float:
        return self.f.dt

    @property
    def n_samples(self) -> int:
        return self.f.n_samples


class FsiState(BaseModel):
    """One full iterate of the coupled system on the window."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mode: str
    v: Pair
    density: Pair
    wave: WaveRun
    kinematics: Optional[Pair] = None

    @property
    def geometry(self) -> ChannelGeometry:
        return self.v.lower.geometry

    @property
    def dt(self) -> float:
        return self.v.lower.dt


class CouplingData(BaseModel):
    """Initial and external data of the coupled problem.

    External forcing and interface data are time-independent fields; they
    are extended constantly over whatever window a step runs on.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    v0: Pair
    R0: Pair
    w0: VectorField
    w1: VectorField
    visc: Viscosities
    f_ext: Optional[Pair] = None
    h_ext: Optional[Pair] = None

    @model_validator(mode="after")
    def _check_tags(self):
        for name, pair in (("v0", self.v0), ("R0", self.R0), ("f_ext", self.f_ext)):
            if pair is not None and (pair.lower.tag, pair.upper.tag) != (DomainTag.FLUID_LOWER, DomainTag.FLUID_UPPER):
                raise DomainMismatchError(f"{name} must be given on the lower and upper fluid slabs")
        if self.h_ext is not None and (self.h_ext.lower.tag, self.h_ext.upper.tag) != (
                DomainTag.GAMMA_C_LOWER, DomainTag.GAMMA_C_UPPER):
            raise DomainMismatchError("h_ext must be given on the two interface planes")
        if self.w0.tag != DomainTag.ELASTIC or self.w1.tag != DomainTag.ELASTIC:
            raise DomainMismatchError("w0 and w1 live on the elastic slab")
        return self

    @property
    def geometry(self) -> ChannelGeometry:
        return self.w0.geometry
