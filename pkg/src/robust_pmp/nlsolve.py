"""Damped Newton root finding with a finite-difference Jacobian."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import DomainViolation, NumericalBreakdown, SingularJacobian

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 200
    residual_tol: float = 1e-9
    fd_step: float = 1e-6
    armijo_c: float = 1e-4
    min_step: float = 1e-12

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not self.fd_step > 0 or not self.min_step > 0:
            raise ValueError("fd_step and min_step must be positive")


@dataclass
class SolveReport:
    x: np.ndarray
    residual_inf_norm: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    termination: str = ""
    regularized_iterations: list = field(default_factory=list)
    # iterations whose Jacobian stencil crossed a kink of the residual
    kink_iterations: list = field(default_factory=list)
    jacobian_condition: float = math.nan


def _check_finite(values, what):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericalBreakdown(f"non-finite values in {what}")
    return values


def _steps(x, step, rel_step):
    if step is not None:
        return np.full(x.shape, float(step))
    return rel_step * (1.0 + np.abs(x))


def numerical_jacobian(F: Callable, x, step: Optional[float] = None, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian.

    With ``step`` given every column uses that absolute step; otherwise column
    j uses ``rel_step * (1 + |x_j|)``.
    """
    x = np.asarray(x, dtype=float)
    h = _steps(x, step, rel_step)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        fp = _check_finite(F(x + e), "Jacobian stencil")
        fm = _check_finite(F(x - e), "Jacobian stencil")
        cols.append((fp - fm) / (2.0 * h[j]))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def _lu(A):
    # pivots are checked explicitly below, so scipy's singularity warning is noise
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        return scipy.linalg.lu_factor(A, check_finite=False)


def _newton_direction(J, Fx):
    """Solve J delta = -F; returns (delta, regularized)."""
    lu, piv = _lu(J)
    if np.min(np.abs(np.diag(lu))) >= PIVOT_TOL:
        return scipy.linalg.lu_solve((lu, piv), -Fx, check_finite=False), False
    # Levenberg-style retry, attempted once
    JtJ = J.T @ J
    scale = float(np.max(np.abs(np.diag(JtJ))))
    if scale < PIVOT_TOL:
        raise SingularJacobian("Jacobian is numerically zero")
    lam = 1e-10 * scale
    A = JtJ + lam * np.eye(J.shape[1])
    lu, piv = _lu(A)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularJacobian("Jacobian singular and regularised system still singular")
    delta = scipy.linalg.lu_solve((lu, piv), -(J.T @ Fx), check_finite=False)
    if not np.all(np.isfinite(delta)):
        raise SingularJacobian("regularised Newton step is not finite")
    return delta, True


def _straddles_kink(active_set, x, h):
    base = active_set(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        if active_set(x + e) != base or active_set(x - e) != base:
            return True
    return False


def newton_solve(F: Callable, x0, cfg: SolverConfig = SolverConfig(),
                 active_set: Optional[Callable] = None) -> SolveReport:
    """Damped Newton with Armijo backtracking on 0.5 ||F||^2.

    Trial points where ``F`` raises :class:`DomainViolation` are treated as
    having infinite merit, so the step is shrunk. ``active_set`` (optional)
    maps x to a hashable signature of the piecewise branch F is on; iterations
    whose Jacobian stencil changes the signature are recorded.
    """
    x = np.array(x0, dtype=float)
    Fx = _check_finite(F(x), "initial residual")
    norm = float(np.max(np.abs(Fx))) if Fx.size else 0.0
    report = SolveReport(x=x, residual_inf_norm=norm, iterations=0, converged=False, history=[norm])

    for it in range(cfg.max_iters):
        if norm <= cfg.residual_tol:
            break
        J = numerical_jacobian(F, x, rel_step=cfg.fd_step)
        if active_set is not None and _straddles_kink(active_set, x, _steps(x, None, cfg.fd_step)):
            report.kink_iterations.append(it)
        delta, regularized = _newton_direction(J, Fx)
        if regularized:
            report.regularized_iterations.append(it)

        merit = 0.5 * float(Fx @ Fx)
        slope = float((J.T @ Fx) @ delta)
        t = 1.0
        accepted = False
        while t >= cfg.min_step:
            trial = x + t * delta
            try:
                Ft = np.asarray(F(trial), dtype=float)
            except DomainViolation:
                t *= 0.5
                continue
            if np.all(np.isfinite(Ft)) and 0.5 * float(Ft @ Ft) <= merit + cfg.armijo_c * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            report.termination = "step_collapse"
            break
        x, Fx = trial, Ft
        norm = float(np.max(np.abs(Fx)))
        report.iterations = it + 1
        report.history.append(norm)
        report.jacobian_condition = float(np.linalg.cond(J))

    report.x = x
    report.residual_inf_norm = norm
    report.converged = norm <= cfg.residual_tol
    if report.converged:
        report.termination = "converged"
    elif not report.termination:
        report.termination = "max_iters"
    return report
