"""The maximum principle on R^n: no group part, a single covector xi.

Hamiltonian: H(k, xi, v, u, d) = -c_k(v, u, d) + <xi, F(v, u, d)>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .pmp import VARIATIONAL_TOL, interval_violation


@dataclass(frozen=True)
class EuclidModel:
    dynamics: Callable  # (v, u, d) -> R^n
    stage_cost: Callable  # (k, v, u, d) -> R
    terminal_cost: Callable  # v -> R
    horizon: int
    # optional analytic overrides
    dynamics_jacobians: Optional[Callable] = None  # (v, u, d) -> (F_v, F_u, F_d)
    cost_gradients: Optional[Callable] = None  # (k, v, u, d) -> (c_v, c_u, c_d)
    terminal_gradient: Optional[Callable] = None  # v -> c_N'(v)
    fd_step: float = 1e-6


def _fd_grad(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        hi = h * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = hi
        g[i] = (f(x + e) - f(x - e)) / (2.0 * hi)
    return g


def _fd_jac(f, x, h):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        hi = h * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = hi
        cols.append((np.atleast_1d(f(x + e)) - np.atleast_1d(f(x - e))) / (2.0 * hi))
    return np.column_stack(cols)


def _vec(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _partials(model: EuclidModel, k, v, u, d):
    v, u, d = _vec(v), _vec(u), _vec(d)
    if model.dynamics_jacobians is not None:
        Fv, Fu, Fd = (np.atleast_2d(a) for a in model.dynamics_jacobians(v, u, d))
    else:
        h, F = model.fd_step, model.dynamics
        Fv = _fd_jac(lambda x: F(x, u, d), v, h)
        Fu = _fd_jac(lambda x: F(v, x, d), u, h)
        Fd = _fd_jac(lambda x: F(v, u, x), d, h)
    if model.cost_gradients is not None:
        cv, cu, cd = (_vec(a) for a in model.cost_gradients(k, v, u, d))
    else:
        h, c = model.fd_step, model.stage_cost
        cv = _fd_grad(lambda x: c(k, x, u, d), v, h)
        cu = _fd_grad(lambda x: c(k, v, x, d), u, h)
        cd = _fd_grad(lambda x: c(k, v, u, x), d, h)
    return Fv, Fu, Fd, cv, cu, cd


def euclid_hamiltonian(model: EuclidModel, k, xi, v, u, d) -> float:
    return -float(model.stage_cost(k, _vec(v), _vec(u), _vec(d))) + float(_vec(xi) @ _vec(model.dynamics(_vec(v), _vec(u), _vec(d))))


def euclid_hamiltonian_gradient(model: EuclidModel, k, xi, v, u, d):
    """(D_v H, D_u H, D_d H)."""
    Fv, Fu, Fd, cv, cu, cd = _partials(model, k, v, u, d)
    xi = _vec(xi)
    return -cv + Fv.T @ xi, -cu + Fu.T @ xi, -cd + Fd.T @ xi


def euclid_adjoint_pass(model: EuclidModel, v_traj, u_seq, d_seq) -> np.ndarray:
    """Backward sweep; returns xi with shape (N, n), row k the stage-k covector."""
    v_traj = np.asarray(v_traj, dtype=float)
    if v_traj.ndim == 1:
        v_traj = v_traj[:, None]
    u_seq = np.asarray(u_seq, dtype=float).reshape(model.horizon, -1)
    d_seq = np.asarray(d_seq, dtype=float).reshape(model.horizon, -1)
    N = model.horizon
    n = v_traj.shape[1]
    xi = np.zeros((N, n))
    vN = v_traj[N]
    if model.terminal_gradient is not None:
        xi[N - 1] = -_vec(model.terminal_gradient(vN))
    else:
        xi[N - 1] = -_fd_grad(model.terminal_cost, vN, model.fd_step)
    for k in range(N - 1, 0, -1):
        xi[k - 1] = euclid_hamiltonian_gradient(model, k, xi[k], v_traj[k], u_seq[k], d_seq[k])[0]
    return xi


@dataclass(frozen=True)
class EuclidVariationalReport:
    passed: bool
    u_violation: np.ndarray
    d_violation: np.ndarray
    grad_u: np.ndarray
    grad_d: np.ndarray


def euclid_variational_check(model: EuclidModel, k, xi, v, u, d, u_box=None, d_box=None,
                             tol: float = VARIATIONAL_TOL) -> EuclidVariationalReport:
    """Box version of the saddle condition, coordinate by coordinate.

    ``u_box``/``d_box`` are ``(lo, hi)`` array pairs; ``None`` means unbounded.
    """
    u, d = _vec(u), _vec(d)
    _, gu, gd = euclid_hamiltonian_gradient(model, k, xi, v, u, d)

    def bounds(box, n):
        if box is None:
            return np.full(n, -math.inf), np.full(n, math.inf)
        lo, hi = box
        return np.broadcast_to(_vec(lo), (n,)), np.broadcast_to(_vec(hi), (n,))

    ulo, uhi = bounds(u_box, u.size)
    dlo, dhi = bounds(d_box, d.size)
    uv = np.array([interval_violation(gu[i], u[i], ulo[i], uhi[i], +1) for i in range(u.size)])
    dv = np.array([interval_violation(gd[i], d[i], dlo[i], dhi[i], -1) for i in range(d.size)])
    return EuclidVariationalReport(bool(np.all(uv <= tol) and np.all(dv <= tol)), uv, dv, gu, gd)
