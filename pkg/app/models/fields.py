# app/models/fields.py
from typing import Callable, ClassVar, Generic, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydanticField, field_validator, model_validator

from app.core.errors import DomainMismatchError
from app.models.geometry import ChannelGeometry, DomainTag


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


class Field(BaseModel):
    """Grid samples of a scalar, vector or tensor quantity on one tagged grid.

    Component axes lead: vectors are (3, *grid), tensors (3, 3, *grid) with
    the convention ``(grad v)[i, j] = d_j v_i``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rank: ClassVar[int] = 0

    geometry: ChannelGeometry
    tag: DomainTag
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _freeze(cls, values):
        return _frozen_array(values)

    @model_validator(mode="after")
    def _check_shape(self):
        expected = (3,) * self.rank + self.geometry.grid_shape(self.tag)
        if self.values.shape != expected:
            raise ValueError(f"{type(self).__name__} on {self.tag.value} needs shape {expected}, got {self.values.shape}")
        return self

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return self.geometry.grid_shape(self.tag)

    def with_values(self, values) -> "Field":
        return type(self)(geometry=self.geometry, tag=self.tag, values=values)

    def _check_compatible(self, other: "Field"):
        if not isinstance(other, Field) or other.rank != self.rank or other.tag != self.tag:
            raise DomainMismatchError(f"cannot combine {self.tag.value} rank-{self.rank} field with {other!r:.60}")

    def __add__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scale: float) -> "Field":
        return self.with_values(scale * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.with_values(-self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @classmethod
    def zeros(cls, geometry: ChannelGeometry, tag: DomainTag) -> "Field":
        return cls(geometry=geometry, tag=tag, values=np.zeros((3,) * cls.rank + geometry.grid_shape(tag)))

    @classmethod
    def from_function(cls, geometry: ChannelGeometry, tag: DomainTag, fn: Callable) -> "Field":
        """Sample ``fn(y1, y2, y3)`` on the tagged grid."""
        y = geometry.coordinates(tag)
        values = np.asarray(fn(y[0], y[1], y[2]), dtype=float)
        values = np.broadcast_to(values, (3,) * cls.rank + geometry.grid_shape(tag))
        return cls(geometry=geometry, tag=tag, values=values)


class ScalarField(Field):
    rank: ClassVar[int] = 0


class VectorField(Field):
    rank: ClassVar[int] = 1


class TensorField(Field):
    rank: ClassVar[int] = 2


def field_class(rank: int) -> type[Field]:
    return {0: ScalarField, 1: VectorField, 2: TensorField}[rank]


class TimeTrack(BaseModel):
    """Uniformly sampled time series ``t = 0, dt, ..., T`` of one field type.

    Samples are stored stacked along a leading time axis.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    geometry: ChannelGeometry
    tag: DomainTag
    rank: int = PydanticField(ge=0, le=2)
    dt: float = PydanticField(gt=0.0)
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _freeze(cls, values):
        return _frozen_array(values)

    @model_validator(mode="after")
    def _check_shape(self):
        expected = (3,) * self.rank + self.geometry.grid_shape(self.tag)
        if self.values.ndim != len(expected) + 1 or self.values.shape[1:] != expected:
            raise ValueError(f"track on {self.tag.value} needs sample shape {expected}, got {self.values.shape[1:]}")
        if self.values.shape[0] < 2:
            raise ValueError("a time track needs at least 2 samples")
        return self

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> float:
        return self.dt * (self.n_samples - 1)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_samples)

    def sample(self, n: int) -> Field:
        return field_class(self.rank)(geometry=self.geometry, tag=self.tag, values=self.values[n])

    @property
    def samples(self) -> list[Field]:
        return [self.sample(n) for n in range(self.n_samples)]

    def with_values(self, values) -> "TimeTrack":
        return TimeTrack(geometry=self.geometry, tag=self.tag, rank=self.rank, dt=self.dt, values=values)

    def __add__(self, other: "TimeTrack") -> "TimeTrack":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "TimeTrack") -> "TimeTrack":
        return self.with_values(self.values - other.values)

    def __mul__(self, scale: float) -> "TimeTrack":
        return self.with_values(scale * self.values)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @classmethod
    def from_samples(cls, samples: list[Field], dt: float) -> "TimeTrack":
        first = samples[0]
        if any(s.tag != first.tag or s.rank != first.rank for s in samples):
            raise DomainMismatchError("all samples of a track must share one domain tag and rank")
        return cls(geometry=first.geometry, tag=first.tag, rank=first.rank, dt=dt,
                   values=np.stack([s.values for s in samples]))

    @classmethod
    def constant(cls, field: Field, dt: float, n_samples: int) -> "TimeTrack":
        values = np.broadcast_to(field.values, (n_samples,) + field.values.shape)
        return cls(geometry=field.geometry, tag=field.tag, rank=field.rank, dt=dt, values=values)

    @classmethod
    def zeros(cls, geometry: ChannelGeometry, tag: DomainTag, rank: int, dt: float, n_samples: int) -> "TimeTrack":
        shape = (n_samples,) + (3,) * rank + geometry.grid_shape(tag)
        return cls(geometry=geometry, tag=tag, rank=rank, dt=dt, values=np.zeros(shape))


class SobolevOrder(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: float = PydanticField(ge=0.0)


class SpaceTimeOrder(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = PydanticField(ge=0.0)
    s: float = PydanticField(ge=0.0)

    @classmethod
    def K(cls, s: float) -> "SpaceTimeOrder":
        """Parabolic scaling K^s = H^{s/2, s}."""
        return cls(r=s / 2.0, s=s)


PairT = TypeVar("PairT")


class Pair(BaseModel, Generic[PairT]):
    """The two fluid slabs (or their two interface planes), kept as separate blocks."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lower: PairT
    upper: PairT

    def both(self) -> tuple[PairT, PairT]:
        return self.lower, self.upper

    def map(self, fn: Callable) -> "Pair":
        return Pair(lower=fn(self.lower), upper=fn(self.upper))
