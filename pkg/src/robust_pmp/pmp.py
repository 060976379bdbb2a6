"""Min-max maximum principle for systems on SO(2) x R.

The system is

    g_{k+1} = g_k f(g_k, v_k),    v_{k+1} = F(g_k, v_k, u_k, d_k)

with stage cost c_k(g, v, u, d) and terminal cost c_N(g, v). Everything in
this module is written against a :class:`SystemModel`, so the spacecraft
example is only one instance.

The Hamiltonian carries a ``cost_weight`` multiplying the stage cost:

* ``-1``            amalgamated min-max Hamiltonian (abnormal multiplier -1),
* ``nu``            minimisation sub-problem (disturbance frozen),
* ``-nu``           maximisation sub-problem (control frozen).

Covector index convention: ``zeta[k]`` and ``xi[k]`` for k = 0..N-1 are the
multipliers of the transition k -> k+1, so the Hamiltonian at stage k uses
``(zeta[k], xi[k])`` and the backward step at stage k produces index k-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ChartViolation, DomainViolation
from .lie_so2 import Rotation2, coadjoint_action, exp_so2, log_so2, pairing

AMALGAMATED = -1.0
CHART_TOL = 1e-12
VARIATIONAL_TOL = 1e-8
SCALING_TOL = 1e-10
NEGATION_TOL = 1e-12


@dataclass(frozen=True)
class StagePartials:
    """First partials of the three stage primitives.

    ``*_g`` entries are directional derivatives along t -> g exp(hat(t)),
    i.e. the trivialised group gradient, stored as a scalar in so(2)*.
    ``log_*`` refers to the chart coordinate exp^{-1}(f(g, v)).
    """

    cost_g: float
    cost_v: float
    cost_u: float
    cost_d: float
    log_g: float
    log_v: float
    dyn_g: float
    dyn_v: float
    dyn_u: float
    dyn_d: float


@dataclass(frozen=True)
class SystemModel:
    kinematics: Callable[[Rotation2, float], Rotation2]
    dynamics: Callable[[Rotation2, float, float, float], float]
    stage_cost: Callable[[int, Rotation2, float, float, float], float]
    terminal_cost: Callable[[Rotation2, float], float]
    horizon: int
    # analytic overrides; finite differences are used when absent
    stage_partials: Optional[Callable[[int, Rotation2, float, float, float], StagePartials]] = None
    terminal_partials: Optional[Callable[[Rotation2, float], tuple]] = None
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be a positive integer")


@dataclass(frozen=True)
class CovectorPair:
    zeta: float
    xi: float

    def __post_init__(self):
        if not (math.isfinite(self.zeta) and math.isfinite(self.xi)):
            raise ValueError(f"covectors must be finite, got ({self.zeta}, {self.xi})")

    def scaled(self, r: float) -> "CovectorPair":
        return CovectorPair(r * self.zeta, r * self.xi)


@dataclass(frozen=True)
class StageTuple:
    k: int
    covectors: CovectorPair
    g: Rotation2
    v: float
    u: float
    d: float


@dataclass(frozen=True)
class HamiltonianGradient:
    g: float
    v: float
    u: float
    d: float
    zeta: float  # = exp^{-1}(f(g, v))
    xi: float  # = F(g, v, u, d)


@dataclass(frozen=True)
class Trajectory:
    """State/input sequences, optionally with covectors attached."""

    g: tuple
    v: np.ndarray
    u: np.ndarray
    d: np.ndarray
    zeta: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return len(self.u)

    def stage(self, k: int, zeta=None, xi=None) -> StageTuple:
        z = self.zeta[k] if zeta is None else zeta[k]
        x = self.xi[k] if xi is None else xi[k]
        return StageTuple(k, CovectorPair(float(z), float(x)), self.g[k],
                          float(self.v[k]), float(self.u[k]), float(self.d[k]))


# --------------------------------------------------------------------------
# finite-difference partials


def _rel_step(h: float, x: float) -> float:
    return h * (1.0 + abs(x))


def _d_group(fun: Callable[[Rotation2], float], g: Rotation2, h: float) -> float:
    plus = fun(g @ exp_so2(h))
    minus = fun(g @ exp_so2(-h))
    return (plus - minus) / (2.0 * h)


def _d_scalar(fun: Callable[[float], float], x: float, h: float) -> float:
    hx = _rel_step(h, x)
    return (fun(x + hx) - fun(x - hx)) / (2.0 * hx)


def chart_log(model: SystemModel, g: Rotation2, v: float) -> float:
    """exp^{-1}(f(g, v)), refusing points on the cut of the principal chart."""
    f = model.kinematics(g, v)
    if np.trace(f.m) <= -2.0 + CHART_TOL:
        raise ChartViolation(f"kinematics factor at v={v!r} is a half-turn; log undefined")
    return log_so2(f)


def stage_partials(model: SystemModel, k: int, g: Rotation2, v: float, u: float, d: float) -> StagePartials:
    if model.stage_partials is not None:
        return model.stage_partials(k, g, v, u, d)
    h = model.fd_step
    c, F = model.stage_cost, model.dynamics
    return StagePartials(
        cost_g=_d_group(lambda gg: c(k, gg, v, u, d), g, h),
        cost_v=_d_scalar(lambda x: c(k, g, x, u, d), v, h),
        cost_u=_d_scalar(lambda x: c(k, g, v, x, d), u, h),
        cost_d=_d_scalar(lambda x: c(k, g, v, u, x), d, h),
        log_g=_d_group(lambda gg: chart_log(model, gg, v), g, h),
        log_v=_d_scalar(lambda x: chart_log(model, g, x), v, h),
        dyn_g=_d_group(lambda gg: F(gg, v, u, d), g, h),
        dyn_v=_d_scalar(lambda x: F(g, x, u, d), v, h),
        dyn_u=_d_scalar(lambda x: F(g, v, x, d), u, h),
        dyn_d=_d_scalar(lambda x: F(g, v, u, x), d, h),
    )


def terminal_partials(model: SystemModel, g: Rotation2, v: float) -> tuple:
    """(group gradient, v-derivative) of the terminal cost."""
    if model.terminal_partials is not None:
        return model.terminal_partials(g, v)
    h = model.fd_step
    cN = model.terminal_cost
    return (_d_group(lambda gg: cN(gg, v), g, h), _d_scalar(lambda x: cN(g, x), v, h))


# --------------------------------------------------------------------------
# Hamiltonian


def hamiltonian(model: SystemModel, t: StageTuple, cost_weight: float = AMALGAMATED) -> float:
    cost = model.stage_cost(t.k, t.g, t.v, t.u, t.d)
    log_f = chart_log(model, t.g, t.v)
    return (cost_weight * cost
            + pairing(t.covectors.zeta, log_f)
            + t.covectors.xi * model.dynamics(t.g, t.v, t.u, t.d))


def hamiltonian_gradient(model: SystemModel, t: StageTuple,
                         cost_weight: float = AMALGAMATED) -> HamiltonianGradient:
    p = stage_partials(model, t.k, t.g, t.v, t.u, t.d)
    zeta, xi = t.covectors.zeta, t.covectors.xi
    return HamiltonianGradient(
        g=cost_weight * p.cost_g + zeta * p.log_g + xi * p.dyn_g,
        v=cost_weight * p.cost_v + zeta * p.log_v + xi * p.dyn_v,
        u=cost_weight * p.cost_u + xi * p.dyn_u,
        d=cost_weight * p.cost_d + xi * p.dyn_d,
        zeta=chart_log(model, t.g, t.v),
        xi=model.dynamics(t.g, t.v, t.u, t.d),
    )


def adjoint_step(model: SystemModel, t: StageTuple, cost_weight: float = AMALGAMATED) -> CovectorPair:
    """Map stage-k covectors to stage k-1."""
    grad = hamiltonian_gradient(model, t, cost_weight)
    transport = exp_so2(-grad.zeta)
    zeta_prev = coadjoint_action(transport, t.covectors.zeta) + grad.g
    return CovectorPair(zeta_prev, grad.v)


def transversality(model: SystemModel, g_N: Rotation2, v_N: float,
                   cost_weight: float = AMALGAMATED) -> CovectorPair:
    dg, dv = terminal_partials(model, g_N, v_N)
    return CovectorPair(cost_weight * dg, cost_weight * dv)


def adjoint_sweep(model: SystemModel, traj: Trajectory, cost_weight: float = AMALGAMATED):
    """Backward covector recursion from the transversality value.

    Returns ``(zeta, xi)`` arrays of length N.
    """
    N = traj.horizon
    zeta = np.zeros(N)
    xi = np.zeros(N)
    last = transversality(model, traj.g[N], float(traj.v[N]), cost_weight)
    zeta[N - 1], xi[N - 1] = last.zeta, last.xi
    for k in range(N - 1, 0, -1):
        prev = adjoint_step(model, traj.stage(k, zeta, xi), cost_weight)
        zeta[k - 1], xi[k - 1] = prev.zeta, prev.xi
    return zeta, xi


def rho_from_zeta(g_prev: Rotation2, g_k: Rotation2, zeta: float, h: float = 1e-6) -> float:
    """Pull zeta back through the cotangent map of s -> exp^{-1}(g_prev^-1 g_k exp(s)).

    Computed by central differences; on SO(2) this is the identity map.
    """
    rel = g_prev.inverse() @ g_k
    slope = (log_so2(rel @ exp_so2(h)) - log_so2(rel @ exp_so2(-h))) / (2.0 * h)
    return zeta * slope


# --------------------------------------------------------------------------
# forward dynamics


def forward_rollout(model: SystemModel, g0: Rotation2, v0: float,
                    u_seq: Sequence[float], d_seq: Sequence[float]):
    N = model.horizon
    if len(u_seq) != N or len(d_seq) != N:
        raise ValueError(f"input sequences must have length {N}")
    g = [g0]
    v = np.empty(N + 1)
    v[0] = v0
    for k in range(N):
        try:
            f = model.kinematics(g[k], float(v[k]))
        except DomainViolation as exc:
            raise DomainViolation(f"kinematics precondition fails at stage {k}: {exc}", stage=k) from exc
        g.append((g[k] @ f).reorthonormalized())
        v[k + 1] = model.dynamics(g[k], float(v[k]), float(u_seq[k]), float(d_seq[k]))
    return g, v


# --------------------------------------------------------------------------
# saddle-point (variational) condition


@dataclass(frozen=True)
class VariationalReport:
    k: int
    passed: bool
    u_ok: bool
    d_ok: bool
    grad_u: float
    grad_d: float
    u_violation: float
    d_violation: float


def interval_violation(grad: float, x: float, lo: float, hi: float, sense: int) -> float:
    """How far ``sense * grad * (x' - x) <= 0`` is from holding over x' in [lo, hi].

    sense=+1 is the control inequality, sense=-1 the disturbance one.
    """
    s = sense * grad
    band = 1e-12 * (1.0 + abs(x))
    at_hi = math.isfinite(hi) and x >= hi - band
    at_lo = math.isfinite(lo) and x <= lo + band
    if at_hi and at_lo:
        return 0.0
    if at_hi:
        # only x' <= x is feasible
        return max(0.0, -s)
    if at_lo:
        return max(0.0, s)
    return abs(s)


def variational_check(model: SystemModel, t: StageTuple, u_interval=(-math.inf, math.inf),
                      d_interval=(-math.inf, math.inf), tol: float = VARIATIONAL_TOL,
                      cost_weight: float = AMALGAMATED) -> VariationalReport:
    """Check <dH/du, u'-u> <= 0 and <dH/dd, d'-d> >= 0 over the input intervals."""
    grad = hamiltonian_gradient(model, t, cost_weight)
    u_viol = interval_violation(grad.u, t.u, *u_interval, sense=+1)
    d_viol = interval_violation(grad.d, t.d, *d_interval, sense=-1)
    u_ok, d_ok = u_viol <= tol, d_viol <= tol
    return VariationalReport(t.k, u_ok and d_ok, u_ok, d_ok, grad.u, grad.d, u_viol, d_viol)


# --------------------------------------------------------------------------
# residuals of the full set of necessary conditions


def condition_residuals(model: SystemModel, traj: Trajectory, zeta, xi,
                        cost_weight: float = AMALGAMATED,
                        u_interval=(-math.inf, math.inf),
                        d_interval=(-math.inf, math.inf)) -> dict:
    """Max-abs residual of each necessary condition (state, adjoint, terminal, saddle)."""
    N = traj.horizon
    state = adjoint = saddle = 0.0
    for k in range(N):
        t = traj.stage(k, zeta, xi)
        grad = hamiltonian_gradient(model, t, cost_weight)
        step = log_so2(traj.g[k].inverse() @ traj.g[k + 1])
        state = max(state, abs(step - grad.zeta), abs(traj.v[k + 1] - grad.xi))
        if k >= 1:
            transported = coadjoint_action(exp_so2(-grad.zeta), t.covectors.zeta)
            adjoint = max(adjoint,
                          abs(zeta[k - 1] - (transported + grad.g)),
                          abs(xi[k - 1] - grad.v))
        saddle = max(saddle,
                     interval_violation(grad.u, t.u, *u_interval, sense=+1),
                     interval_violation(grad.d, t.d, *d_interval, sense=-1))
    last = transversality(model, traj.g[N], float(traj.v[N]), cost_weight)
    terminal = max(abs(zeta[N - 1] - last.zeta), abs(xi[N - 1] - last.xi))
    return {"state": state, "adjoint": adjoint, "transversality": terminal, "saddle": saddle}


@dataclass(frozen=True)
class ScalingReport:
    r: float
    base: dict
    scaled: dict
    passed_by_condition: dict
    passed: bool


def scaling_invariance_check(model: SystemModel, solution: Trajectory, r: float,
                             tol: float = SCALING_TOL, **intervals) -> ScalingReport:
    """Rescale the multiplier and every covector by ``r`` and re-evaluate the conditions.

    Each scaled residual must stay below ``tol`` and agree with ``r`` times the
    unscaled residual (the state residual does not depend on the covectors).
    """
    if not r > 0:
        raise ValueError("scaling factor must be positive")
    zeta, xi = np.asarray(solution.zeta), np.asarray(solution.xi)
    base = condition_residuals(model, solution, zeta, xi, AMALGAMATED, **intervals)
    scaled = condition_residuals(model, solution, r * zeta, r * xi, r * AMALGAMATED, **intervals)
    passed = {}
    for name, value in scaled.items():
        expected = base[name] if name == "state" else r * base[name]
        passed[name] = value <= tol and abs(value - expected) <= tol * max(1.0, r)
    return ScalingReport(r, base, scaled, passed, all(passed.values()))


# --------------------------------------------------------------------------
# the two sub-problems behind the amalgamated conditions


@dataclass(frozen=True)
class ConsistencyReport:
    zeta_negation: float  # max |zeta_min + zeta_max|
    xi_negation: float
    deviation_from_amalgamated: float
    abnormal_zero_exact: bool
    min_gradient_ok: bool
    max_gradient_ok: bool
    zeta_min: np.ndarray = field(repr=False)
    xi_min: np.ndarray = field(repr=False)
    zeta_max: np.ndarray = field(repr=False)
    xi_max: np.ndarray = field(repr=False)
    tol: float = NEGATION_TOL

    @property
    def passed(self) -> bool:
        return (self.zeta_negation <= self.tol and self.xi_negation <= self.tol
                and self.deviation_from_amalgamated <= self.tol
                and self.abnormal_zero_exact and self.min_gradient_ok and self.max_gradient_ok)


def subproblem_consistency(model: SystemModel, solution: Trajectory,
                           u_interval=(-math.inf, math.inf), d_interval=(-math.inf, math.inf),
                           tol: float = NEGATION_TOL,
                           gradient_tol: float = VARIATIONAL_TOL) -> ConsistencyReport:
    """Run the minimisation and maximisation sub-problem recursions independently.

    The minimisation problem uses multiplier nu_min = -1 on +J, the maximisation
    problem nu_max = -1 on -J. Their covectors must be exact negatives, the
    minimisation ones must equal the amalgamated ones, and nu_min = 0 must
    force every covector to vanish.
    """
    nu_min = nu_max = -1.0
    zeta_min, xi_min = adjoint_sweep(model, solution, cost_weight=nu_min)
    zeta_max, xi_max = adjoint_sweep(model, solution, cost_weight=-nu_max)
    zeta_amg, xi_amg = adjoint_sweep(model, solution, cost_weight=AMALGAMATED)
    zeta_zero, xi_zero = adjoint_sweep(model, solution, cost_weight=0.0)

    min_ok = max_ok = True
    for k in range(solution.horizon):
        # minimisation: <dH_min/du, u'-u> <= 0 with the disturbance frozen
        g_min = hamiltonian_gradient(model, solution.stage(k, zeta_min, xi_min), nu_min)
        min_ok &= interval_violation(g_min.u, float(solution.u[k]), *u_interval, sense=+1) <= gradient_tol
        # maximisation, posed as minimising -J: <dH_max/dd, d'-d> <= 0
        g_max = hamiltonian_gradient(model, solution.stage(k, zeta_max, xi_max), -nu_max)
        max_ok &= interval_violation(g_max.d, float(solution.d[k]), *d_interval, sense=+1) <= gradient_tol

    return ConsistencyReport(
        zeta_negation=float(np.max(np.abs(zeta_min + zeta_max))),
        xi_negation=float(np.max(np.abs(xi_min + xi_max))),
        deviation_from_amalgamated=float(max(np.max(np.abs(zeta_min - zeta_amg)),
                                             np.max(np.abs(xi_min - xi_amg)))),
        abnormal_zero_exact=bool(np.all(zeta_zero == 0.0) and np.all(xi_zero == 0.0)),
        min_gradient_ok=bool(min_ok),
        max_gradient_ok=bool(max_ok),
        zeta_min=zeta_min, xi_min=xi_min, zeta_max=zeta_max, xi_max=xi_max,
        tol=tol,
    )


def with_covectors(traj: Trajectory, zeta, xi) -> Trajectory:
    return replace(traj, zeta=np.asarray(zeta, dtype=float), xi=np.asarray(xi, dtype=float))
