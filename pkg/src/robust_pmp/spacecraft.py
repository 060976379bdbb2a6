"""Single-axis spacecraft rotation on SO(2) under a bounded disturbance.

    g_{k+1} = g_k f(v_k),  f(v) = [[sqrt(1 - s^2 v^2), -s v], [s v, sqrt(1 - s^2 v^2)]]
    v_{k+1} = v_k + s (u_k + d_k)

    J = 1/2 [ Lambda^2 v_N^2 + psi^2 (2 - tr g_N)
              + sum_k lambda^2 u_k^2 + Lambda^2 v_k^2 - mu^2 d_k^2 + psi^2 (2 - tr g_k) ]

Writing g_k = exp(theta_k), the kinematics reduce to
theta_{k+1} = theta_k + asin(s v_k). The necessary conditions are reduced to
N nonlinear equations in the unknown velocities v_1..v_N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from . import pmp
from .errors import DomainViolation, PMPError
from .lie_so2 import Rotation2, exp_so2, group_deviation_cost, skew_gradient
from .nlsolve import SolveReport, SolverConfig, newton_solve
from .saddle import HessianReport, sufficient_saddle_check


class ConvergenceFailure(PMPError):
    def __init__(self, message, report: SolveReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class ProblemParams:
    N: int = 50
    s: float = 0.1
    Lambda: float = 0.1
    lam: float = 1.0
    mu: float = 2.0
    psi: float = 0.0
    u_c: float = math.inf
    d_c: float = math.inf
    theta0: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not self.s > 0:
            raise ValueError("step s must be positive")
        if min(self.Lambda, self.lam, self.mu, self.psi) < 0:
            raise ValueError("weights must be non-negative")
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError("lambda and mu must be positive (input formulas divide by them)")
        if not (self.u_c > 0 and self.d_c > 0):
            raise ValueError("input bounds must be positive or inf")

    @property
    def constrained(self) -> bool:
        return math.isfinite(self.u_c) or math.isfinite(self.d_c)

    @property
    def u_interval(self):
        return (-self.u_c, self.u_c)

    @property
    def d_interval(self):
        if math.isinf(self.mu):
            return (0.0, 0.0)
        return (-self.d_c, self.d_c)


PARAM_NAMES = tuple(f.name for f in fields(ProblemParams))


@dataclass
class TrajectorySolution:
    theta: np.ndarray
    v: np.ndarray
    u: np.ndarray
    d: np.ndarray
    zeta: np.ndarray
    xi: np.ndarray
    residual_inf: float
    saddle: Optional[HessianReport] = None
    iterations: int = 0
    converged: bool = True
    nonsmooth: bool = False
    variational: list = field(default_factory=list)
    consistency: Optional[pmp.ConsistencyReport] = None
    solve_report: Optional[SolveReport] = None

    @property
    def N(self) -> int:
        return len(self.u)

    def rotations(self):
        return tuple(exp_so2(float(t)) for t in self.theta)

    def to_trajectory(self) -> pmp.Trajectory:
        return pmp.Trajectory(self.rotations(), self.v, self.u, self.d, self.zeta, self.xi)

    def dynamics_defect(self, s: float) -> float:
        """Largest per-stage violation of the state equations."""
        dv = self.v[1:] - (self.v[:-1] + s * (self.u + self.d))
        dth = self.theta[1:] - (self.theta[:-1] + np.arcsin(s * self.v[:-1]))
        return float(max(np.max(np.abs(dv)), np.max(np.abs(dth))))

    @property
    def variational_ok(self) -> bool:
        return bool(self.variational) and all(r.passed for r in self.variational)

    @property
    def certified(self) -> bool:
        return (self.converged and self.variational_ok
                and self.consistency is not None and self.consistency.passed
                and self.saddle is not None and self.saddle.is_saddle_certified)


# --------------------------------------------------------------------------
# model


def _check_velocity(v: float, s: float, stage=None):
    if (s * v) ** 2 >= 1.0:
        raise DomainViolation(f"|s v| = {abs(s * v)} >= 1", stage=stage)


def kinematics_factor(v: float, s: float) -> Rotation2:
    _check_velocity(v, s)
    c = math.sqrt(1.0 - (s * v) ** 2)
    return Rotation2(np.array([[c, -s * v], [s * v, c]]))


def spacecraft_model(p: ProblemParams) -> pmp.SystemModel:
    s, L2, l2, m2, p2 = p.s, p.Lambda ** 2, p.lam ** 2, p.mu ** 2, p.psi ** 2

    def stage_cost(k, g, v, u, d):
        return 0.5 * (l2 * u * u + L2 * v * v - m2 * d * d + p2 * group_deviation_cost(g))

    def terminal_cost(g, v):
        return 0.5 * (L2 * v * v + p2 * group_deviation_cost(g))

    def partials(k, g, v, u, d):
        _check_velocity(v, s)
        return pmp.StagePartials(
            # d/dt of psi^2 (2 - tr(g exp(t)))/2 is psi^2 sin(theta) = -psi^2 vex((g^T - g)/2)
            cost_g=-p2 * skew_gradient(g), cost_v=L2 * v, cost_u=l2 * u, cost_d=-m2 * d,
            log_g=0.0, log_v=s / math.sqrt(1.0 - (s * v) ** 2),
            dyn_g=0.0, dyn_v=1.0, dyn_u=s, dyn_d=s,
        )

    return pmp.SystemModel(
        kinematics=lambda g, v: kinematics_factor(v, s),
        dynamics=lambda g, v, u, d: v + s * (u + d),
        stage_cost=stage_cost,
        terminal_cost=terminal_cost,
        horizon=p.N,
        stage_partials=partials,
        terminal_partials=lambda g, v: (-p2 * skew_gradient(g), L2 * v),
    )


# --------------------------------------------------------------------------
# reduced necessary conditions


def roll_theta(p: ProblemParams, v: np.ndarray) -> np.ndarray:
    """theta_0..theta_N from the full velocity sequence v_0..v_N."""
    sv = p.s * v[:-1]
    bad = np.nonzero(sv * sv >= 1.0)[0]
    if bad.size:
        raise DomainViolation(f"|s v_k| >= 1 at stage {bad[0]}", stage=int(bad[0]))
    return p.theta0 + np.concatenate(([0.0], np.cumsum(np.arcsin(sv))))


def closed_form_adjoints(p: ProblemParams, theta, v):
    """zeta^k = -psi^2 sum_{i>k} sin(theta_i); xi by its backward recursion."""
    theta, v = np.asarray(theta, dtype=float), np.asarray(v, dtype=float)
    N, s = p.N, p.s
    if np.any((s * v) ** 2 >= 1.0):
        k = int(np.nonzero((s * v) ** 2 >= 1.0)[0][0])
        raise DomainViolation(f"|s v_k| >= 1 at stage {k}", stage=k)
    p2, L2 = p.psi ** 2, p.Lambda ** 2
    zeta = -p2 * np.cumsum(np.sin(theta[1:])[::-1])[::-1]
    xi = np.empty(N)
    xi[N - 1] = -L2 * v[N]
    for k in range(N - 1, 0, -1):
        xi[k - 1] = s * zeta[k] / math.sqrt(1.0 - (s * v[k]) ** 2) + xi[k] - L2 * v[k]
    return zeta, xi


def explicit_xi(p: ProblemParams, theta, v) -> np.ndarray:
    """Double-sum form of xi, with the square-root factor evaluated at v_i."""
    theta, v = np.asarray(theta, dtype=float), np.asarray(v, dtype=float)
    N, s, p2, L2 = p.N, p.s, p.psi ** 2, p.Lambda ** 2
    sin_th = np.sin(theta)
    xi = np.empty(N)
    for k in range(N):
        inner = 0.0
        for i in range(k + 1, N):
            inner += sum(-p2 * sin_th[j] for j in range(i + 1, N + 1)) / math.sqrt(1.0 - (s * v[i]) ** 2)
        xi[k] = s * inner - sum(L2 * v[i] for i in range(k + 1, N + 1))
    return xi


def optimal_inputs(xi_k, p: ProblemParams):
    """Clamped maximiser in u and minimiser in d of the Hamiltonian."""
    u = np.clip(p.s * np.asarray(xi_k, dtype=float) / p.lam ** 2, -p.u_c, p.u_c)
    d = np.clip(-p.s * np.asarray(xi_k, dtype=float) / p.mu ** 2, -p.d_c, p.d_c)
    if np.ndim(u) == 0:
        return float(u), float(d)
    return u, d


def _assemble(p: ProblemParams, v_interior):
    v = np.concatenate(([p.v0], np.asarray(v_interior, dtype=float)))
    theta = roll_theta(p, v)
    zeta, xi = closed_form_adjoints(p, theta, v)
    u, d = optimal_inputs(xi, p)
    return theta, v, u, d, zeta, xi


def residual(p: ProblemParams, v_interior) -> np.ndarray:
    v_interior = np.asarray(v_interior, dtype=float)
    if v_interior.shape != (p.N,):
        raise ValueError(f"expected {p.N} unknown velocities, got shape {v_interior.shape}")
    theta, v, u, d, _, _ = _assemble(p, v_interior)
    return v[1:] - (v[:-1] + p.s * (u + d))


def _active_set(p: ProblemParams):
    def signature(v_interior):
        try:
            *_, xi = _assemble(p, v_interior)
        except DomainViolation:
            return None
        raw_u = p.s * xi / p.lam ** 2
        raw_d = -p.s * xi / p.mu ** 2
        return (tuple(np.sign(raw_u) * (np.abs(raw_u) >= p.u_c)),
                tuple(np.sign(raw_d) * (np.abs(raw_d) >= p.d_c)))
    return signature


def cost_functional(p: ProblemParams, u_seq, d_seq) -> float:
    """J as a function of the full input sequences (states rolled forward)."""
    u, d = np.asarray(u_seq, dtype=float), np.asarray(d_seq, dtype=float)
    v = p.v0 + np.concatenate(([0.0], np.cumsum(p.s * (u + d))))
    theta = roll_theta(p, v)
    dev = 2.0 - 2.0 * np.cos(theta)
    L2, l2, m2, p2 = p.Lambda ** 2, p.lam ** 2, p.mu ** 2, p.psi ** 2
    if math.isinf(p.mu):
        # mu = inf forbids any disturbance
        if np.any(d != 0.0):
            return -math.inf
        m2 = 0.0
    stage = l2 * u @ u + L2 * v[:-1] @ v[:-1] - m2 * d @ d + p2 * np.sum(dev[:-1])
    return 0.5 * float(stage + L2 * v[-1] ** 2 + p2 * dev[-1])


# --------------------------------------------------------------------------
# initial guesses


def guess_zero(p: ProblemParams) -> np.ndarray:
    return np.zeros(p.N)


def guess_drift(p: ProblemParams) -> np.ndarray:
    """Velocity decaying linearly from v0 to 0 over the horizon."""
    return np.linspace(p.v0, 0.0, p.N + 1)[1:]


GUESSES = {"zero": guess_zero, "drift": guess_drift}


def make_guess(p: ProblemParams, guess) -> np.ndarray:
    if isinstance(guess, str):
        try:
            return GUESSES[guess](p)
        except KeyError:
            raise ValueError(f"unknown guess generator {guess!r}; choose from {sorted(GUESSES)}") from None
    guess = np.asarray(guess, dtype=float)
    if guess.shape != (p.N,):
        raise ValueError(f"explicit guess must have length {p.N}")
    return guess


# --------------------------------------------------------------------------
# end-to-end


POLISH_TOL = 1e-15
POLISH_ITERS = 3


def _polish(F, report: SolveReport, cfg: SolverConfig) -> SolveReport:
    """A few extra Newton iterations past ``residual_tol``, kept only if they help.

    Quadratic convergence makes these nearly free, and they bring the states,
    inputs and covectors into agreement well below the acceptance tolerances.
    """
    extra = newton_solve(F, report.x, replace(cfg, residual_tol=POLISH_TOL, max_iters=POLISH_ITERS))
    if extra.residual_inf_norm < report.residual_inf_norm:
        report.x = extra.x
        report.residual_inf_norm = extra.residual_inf_norm
        report.history.extend(extra.history[1:])
        report.iterations += extra.iterations
    return report


def simulate(p: ProblemParams, initial_guess="zero", solver_cfg: SolverConfig = SolverConfig(),
             certify: bool = True) -> TrajectorySolution:
    """Solve the reduced necessary conditions and certify the result.

    Raises :class:`ConvergenceFailure` (carrying the solver report) when the
    root finder does not reach ``solver_cfg.residual_tol``.
    """
    x0 = make_guess(p, initial_guess)
    F = lambda x: residual(p, x)  # noqa: E731
    report = newton_solve(F, x0, solver_cfg, active_set=_active_set(p) if p.constrained else None)
    if not report.converged:
        raise ConvergenceFailure(
            f"solver stopped ({report.termination}) with residual {report.residual_inf_norm:.3e}", report)
    report = _polish(F, report, solver_cfg)
    theta, v, u, d, zeta, xi = _assemble(p, report.x)
    # states re-rolled from the inputs so the state equations hold to rounding
    v = p.v0 + np.concatenate(([0.0], np.cumsum(p.s * (u + d))))
    theta = roll_theta(p, v)
    sol = TrajectorySolution(theta, v, u, d, zeta, xi, report.residual_inf_norm,
                             iterations=report.iterations, converged=True,
                             nonsmooth=p.constrained, solve_report=report)
    if certify:
        certify_solution(p, sol)
    return sol


def certify_solution(p: ProblemParams, sol: TrajectorySolution) -> TrajectorySolution:
    """Attach variational, sub-problem and second-order saddle certificates."""
    model = spacecraft_model(p)
    traj = sol.to_trajectory()
    # covectors recomputed through the general backward recursion
    zeta, xi = pmp.adjoint_sweep(model, traj)
    sol.variational = [
        pmp.variational_check(model, traj.stage(k, zeta, xi), p.u_interval, p.d_interval)
        for k in range(p.N)
    ]
    sol.consistency = pmp.subproblem_consistency(model, traj, p.u_interval, p.d_interval)
    if math.isinf(p.mu):
        # d is pinned at zero, so only the u-block carries a certificate
        rep = sufficient_saddle_check(lambda u, d: cost_functional(p, u, np.zeros_like(d)), (sol.u, sol.d))
        ok = rep.grad_u_norm <= rep.grad_tol and rep.min_eig_Huu > 0.0
        sol.saddle = replace(rep, grad_d_norm=0.0, max_eig_Hdd=-math.inf, is_saddle_certified=ok)
    else:
        sol.saddle = sufficient_saddle_check(lambda u, d: cost_functional(p, u, d), (sol.u, sol.d))
    return sol
