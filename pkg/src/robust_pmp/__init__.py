"""Discrete min-max maximum principle on SO(2) with a linear-quadratic game oracle."""
from .errors import (ChartViolation, ConfigError, DomainViolation, GameIllPosed, NumericalBreakdown,
                     ParseError, PMPError, SingularJacobian, UnknownKey, UnknownPreset)
from .lie_so2 import Rotation2, exp_so2, log_so2
from .lq_game import lq_trajectory, riccati_recursion
from .nlsolve import SolverConfig, newton_solve
from .spacecraft import ConvergenceFailure, ProblemParams, TrajectorySolution, simulate

__all__ = [
    "ChartViolation", "ConfigError", "ConvergenceFailure", "DomainViolation", "GameIllPosed",
    "NumericalBreakdown", "ParseError", "PMPError", "ProblemParams", "Rotation2", "SingularJacobian",
    "SolverConfig", "TrajectorySolution", "UnknownKey", "UnknownPreset", "exp_so2", "log_so2",
    "lq_trajectory", "newton_solve", "riccati_recursion", "simulate",
]
