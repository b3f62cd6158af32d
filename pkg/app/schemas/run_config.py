# app/schemas/run_config.py
"""Run configuration: TOML sections validated into pydantic models.

Every block forbids unknown keys. Range checks mirror the solver invariants
so that a bad config fails at parse time rather than mid-run.
"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.errors import ConfigError
from app.models.geometry import ChannelGeometry, build_geometry
from app.models.states import Viscosities

EPS0_MAX = 0.5


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GeometryConfig(_Block):
    L1: float = 1.0
    L2: float = 2.0
    L3: float = 3.0
    N1: int = 8
    N2: int = 8
    M_lo: int = 8
    M_up: int = 8
    M_el: int = 8

    def build(self) -> ChannelGeometry:
        return build_geometry(**self.model_dump())


class PhysicsConfig(_Block):
    lam: float = Field(1.0, gt=0.0)
    mu: float = Field(1.0, gt=0.0)
    pressure_law: str = "identity"

    @field_validator("pressure_law")
    @classmethod
    def _identity_only(cls, law: str) -> str:
        if law != "identity":
            raise ValueError(f"pressure law '{law}' is not supported; only the identity law q(R) = R is implemented")
        return law

    @property
    def viscosities(self) -> Viscosities:
        return Viscosities(lam=self.lam, mu=self.mu)


class IterationConfig(_Block):
    map: Literal["lambda", "pi"] = "lambda"
    s: float = 2.25
    T: float = Field(0.05, gt=0.0)
    dt: float = Field(0.0125, gt=0.0)
    tol: float = Field(1e-8, gt=0.0)
    max_iter: int = Field(30, ge=1)
    M_report: float = Field(1e3, gt=0.0)
    R_floor: float = Field(1e-3, gt=0.0)
    J_floor: float = Field(0.1, gt=0.0)
    inner_max_sweeps: int = Field(25, ge=1)
    theta: float = Field(1.0, ge=0.5, le=1.0)
    override_compat: bool = False

    @field_validator("s")
    @classmethod
    def _regularity_window(cls, s: float) -> float:
        if not 2.0 < s < 2.0 + EPS0_MAX:
            raise ValueError(f"s must lie in the open interval (2, {2.0 + EPS0_MAX}), got {s}")
        return s

    @model_validator(mode="after")
    def _window(self):
        if self.dt > self.T:
            raise ValueError(f"dt={self.dt} exceeds the window T={self.T}")
        return self

    def window(self, T: Optional[float] = None) -> tuple[float, int]:
        """Effective (dt, n_samples) for a window of length T; at least 3 steps."""
        T = self.T if T is None else T
        steps = max(3, int(round(T / self.dt)))
        return T / steps, steps + 1


class DataConfig(_Block):
    kind: Literal["compatible", "trivial", "random"] = "compatible"
    gamma: float = 0.1
    amplitude: float = Field(1e-2, ge=0.0)
    k_max: int = Field(1, ge=1)


class InequalityParams(_Block):
    r: float = 1.0
    theta: float = 0.5
    alpha: float = 1.0
    beta: float = 1.0
    theta_i: float = 0.5
    lambda_i: float = 0.5
    eps: float = 0.5

    @model_validator(mode="after")
    def _ranges(self):
        if self.r <= 0.5:
            raise ValueError(f"trace inequality needs r > 1/2, got {self.r}")
        if self.theta < 0.0:
            raise ValueError(f"trace inequality needs theta >= 0, got {self.theta}")
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("interpolation exponents alpha and beta must be positive")
        if not 0.0 < self.theta_i < self.alpha or not 0.0 < self.lambda_i < self.beta:
            raise ValueError("interpolation needs 0 < theta' < alpha and 0 < lambda' < beta")
        if self.theta_i / self.alpha + self.lambda_i / self.beta > 1.0 + 1e-12:
            raise ValueError("interpolation needs theta'/alpha + lambda'/beta <= 1")
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        return self


def _default_symbol_matrix() -> List[InequalityParams]:
    return [
        InequalityParams(alpha=1.0, beta=1.0, theta_i=0.5, lambda_i=0.5, eps=0.5),
        InequalityParams(alpha=2.0, beta=1.0, theta_i=1.0, lambda_i=0.25, eps=0.25),
        InequalityParams(alpha=0.5, beta=2.0, theta_i=0.25, lambda_i=1.0, eps=0.75),
        InequalityParams(alpha=1.5, beta=1.5, theta_i=0.3, lambda_i=0.6, eps=0.1),
    ]


class LemmasConfig(_Block):
    trace: InequalityParams = Field(default_factory=InequalityParams)
    symbol_matrix: List[InequalityParams] = Field(default_factory=_default_symbol_matrix)
    fit_grid: int = Field(512, ge=16)
    check_grid: int = Field(100, ge=4)
    trace_suite: int = Field(100, ge=1)
    wave_suite: int = Field(20, ge=1)
    energy_beta: float = Field(1.0, ge=1.0)
    trace_beta: float = Field(1.0, gt=0.0, lt=2.5)
    n_samples: int = Field(17, ge=4)
    dt: float = Field(0.02, gt=0.0)


class ContractionConfig(_Block):
    T_values: List[float] = Field(default_factory=lambda: [0.05, 0.025, 0.0125])
    perturbation: float = Field(1e-3, gt=0.0)

    @field_validator("T_values")
    @classmethod
    def _at_least_two(cls, values: List[float]) -> List[float]:
        if len(values) < 2 or any(T <= 0.0 for T in values):
            raise ValueError("contraction studies need at least two positive window lengths")
        return values


class MmsConfig(_Block):
    spatial_levels: List[int] = Field(default_factory=lambda: [4, 8, 16])
    temporal_steps: List[int] = Field(default_factory=lambda: [4, 8, 16])
    T: float = Field(0.1, gt=0.0)
    spatial_dt: float = Field(0.01, gt=0.0)
    temporal_M: int = Field(8, ge=4)
    theta: float = Field(1.0, ge=0.5, le=1.0)


class RunSection(_Block):
    mode: Literal["lambda", "pi", "lemmas", "compat", "contraction", "mms"] = "lambda"
    seed: int = 0
    output_dir: Optional[str] = None


class RunConfig(_Block):
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    physics: PhysicsConfig = Field(default_factory=PhysicsConfig)
    iteration: IterationConfig = Field(default_factory=IterationConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    lemmas: LemmasConfig = Field(default_factory=LemmasConfig)
    contraction: ContractionConfig = Field(default_factory=ContractionConfig)
    mms: MmsConfig = Field(default_factory=MmsConfig)
    run: RunSection = Field(default_factory=RunSection)

    @model_validator(mode="after")
    def _geometry_is_valid(self):
        self.geometry.build()
        return self


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        key = ".".join(str(p) for p in error["loc"]) or "<root>"
        parts.append(f"{key}: {error['msg']}")
    return "; ".join(parts)


def load_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid run config: {_describe(exc)}") from exc


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path} is not valid UTF-8") from exc
    return load_config(data)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return str(value)


def dump_config(config: RunConfig) -> str:
    """Render a config as TOML; tables of tables become nested and array-of-table sections."""
    lines: List[str] = []
    for section, block in config.model_dump(exclude_none=True).items():
        lines.append(f"[{section}]")
        nested = []
        for key, value in block.items():
            if isinstance(value, dict):
                nested.append((f"[{section}.{key}]", [value]))
            elif isinstance(value, list) and value and isinstance(value[0], dict):
                nested.append((f"[[{section}.{key}]]", value))
            else:
                lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
        for header, tables in nested:
            for table in tables:
                lines.append(header)
                lines.extend(f"{k} = {_toml_value(v)}" for k, v in table.items())
                lines.append("")
    return "\n".join(lines)
