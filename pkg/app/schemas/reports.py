# app/schemas/reports.py

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


# Solver diagnostics
class KinematicResidualReport(BaseModel):
    a_residual: float
    J_residual: float


class BDifferenceReport(BaseModel):
    T: float
    grad_v_difference: float
    b_difference: float
    J_difference: float
    R_difference: float
    b_ratio: Optional[float] = None
    J_ratio: Optional[float] = None
    R_ratio: Optional[float] = None


class LameResidualReport(BaseModel):
    interior: float
    interface_flux: float
    outer_dirichlet: float


class LameEnergyReport(BaseModel):
    runs: int
    korn_constant: Optional[float] = None
    max_regularity_ratio: Optional[float] = None


class CompatibilityCondition(BaseModel):
    name: str
    residual: float
    threshold: float
    passed: bool


class CompatibilityReport(BaseModel):
    conditions: List[CompatibilityCondition]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def residual(self, name: str) -> float:
        return next(c.residual for c in self.conditions if c.name == name)


# Fixed-point iteration
class IterationRecord(BaseModel):
    iteration: int
    diff: float
    factor: Optional[float] = None
    ball_radius: float
    ball_exceeded: bool = False
    inner_sweeps: int = 0


class ConvergenceReport(BaseModel):
    mode: str
    converged: bool
    iterations: int
    s: float
    T: float
    dt: float
    tol: float
    records: List[IterationRecord] = Field(default_factory=list)
    ball_exceeded: bool = False
    floors_breached: bool = False
    final_residual: Optional[LameResidualReport] = None
    interface_mismatch: Optional[float] = None
    self_consistency: Optional[float] = None
    window: Dict[str, Any] = Field(default_factory=dict)

    @property
    def diffs(self) -> List[float]:
        return [r.diff for r in self.records]

    @property
    def factors(self) -> List[Optional[float]]:
        return [r.factor for r in self.records]


class ContractionRow(BaseModel):
    T: float
    dt: float
    n_samples: int
    input_diff: float
    output_diff: float
    factor: Optional[float] = None
    degenerate: bool = False


class ContractionStudy(BaseModel):
    mode: str
    rows: List[ContractionRow]
    T0: Optional[float] = None
    window: Dict[str, Any] = Field(default_factory=dict)


# Inequality lab
class TraceInequalityRow(BaseModel):
    test_id: str
    r: float
    theta: float
    lhs: float
    rhs: float
    ratio: Optional[float] = None
    skipped: bool = False


class SymbolCheckRow(BaseModel):
    alpha: float
    beta: float
    theta: float
    lam: float
    eps: float
    C_eps: float
    violations: int
    halved_violations: Optional[int] = None


class HiddenRegularityRow(BaseModel):
    test_id: str
    form: str
    beta: float
    lhs: float
    rhs: float
    ratio: Optional[float] = None
    skipped: bool = False


class MmsRow(BaseModel):
    study: str
    level: int
    step: float
    max_error: float
    order: Optional[float] = None


class NormRow(BaseModel):
    time: float
    v_lower: float
    v_upper: float
    R_lower: float
    R_upper: float
    w: float
    w_t: float
    energy: float


# Run level
class RunSummary(BaseModel):
    app: str
    mode: str
    status: str = "ok"
    exit_code: int = 0
    seed: int
    input_hash: str
    wall_time: float
    config: Dict[str, Any]
    report: Dict[str, Any] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    window: Dict[str, Any] = Field(default_factory=dict)
    note: Optional[str] = None


class JobResult(BaseModel):
    report: Dict[str, Any] = Field(default_factory=dict)
    tables: Dict[str, str] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
