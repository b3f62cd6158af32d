# app/core/errors.py
"""Exception hierarchy shared by the solvers, jobs and the CLI.

Every error carries a machine-readable ``code`` and the process exit code the
CLI returns for it.
"""


class FsiError(Exception):
    code = "internal"
    exit_code = 1

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        return {"code": self.code, "exit_code": self.exit_code, "message": self.message, **self.context}


class SolverError(FsiError):
    code = "solver-failure"
    exit_code = 1


class ConfigError(FsiError):
    code = "config-error"
    exit_code = 2


class DomainMismatchError(ConfigError):
    code = "domain-mismatch"


class InvalidDensityError(ConfigError):
    code = "invalid-density"


class NonConvergenceError(FsiError):
    code = "non-convergence"
    exit_code = 3


class FloorBreachError(FsiError):
    code = "floor-breach"
    exit_code = 4


class InnerDivergenceError(FsiError):
    code = "inner-divergence"
    exit_code = 5


class CompatibilityError(FsiError):
    code = "incompatible-data"
    exit_code = 6


class LemmaCheckError(FsiError):
    code = "lemma-violation"
    exit_code = 7
