"""Closed-form solution of the unconstrained linear-quadratic game (psi = 0).

With lambda = 1 the saddle-point strategies are

    u_k = -s M_{k+1} v_k / L_k,    d_k = s M_{k+1} v_k / (mu^2 L_k),    v_{k+1} = v_k / L_k,
    L_k = 1 + s^2 M_{k+1} (1 - mu^-2),    M_k = Lambda^2 + M_{k+1} / L_k,    M_N = Lambda^2.

``mu = inf`` is accepted and reduces to the one-player LQR recursion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GameIllPosed
from .spacecraft import ProblemParams, TrajectorySolution, roll_theta


@dataclass(frozen=True)
class RiccatiSequences:
    M: np.ndarray  # length N + 1
    L: np.ndarray  # length N


def _mu_inv2(mu: float) -> float:
    return 0.0 if math.isinf(mu) else mu ** -2


def riccati_recursion(p: ProblemParams) -> RiccatiSequences:
    if p.lam != 1.0:
        raise ValueError("the closed form assumes lambda = 1; rescale the problem explicitly")
    if not p.mu > 0:
        raise ValueError("mu must be positive")
    N, s = p.N, p.s
    L2 = p.Lambda ** 2
    w = 1.0 - _mu_inv2(p.mu)
    M = np.empty(N + 1)
    L = np.empty(N)
    M[N] = L2
    for k in range(N - 1, -1, -1):
        L[k] = 1.0 + s * s * M[k + 1] * w
        if not L[k] > 0:
            raise GameIllPosed(f"L_{k} = {L[k]} <= 0: no saddle point for these weights")
        M[k] = L2 + M[k + 1] / L[k]
    return RiccatiSequences(M, L)


def lq_trajectory(p: ProblemParams, seqs: RiccatiSequences | None = None) -> TrajectorySolution:
    """Forward rollout of the closed-form strategies.

    ``residual_inf`` is NaN: this trajectory is not produced by a root finder.
    """
    if seqs is None:
        seqs = riccati_recursion(p)
    N, s = p.N, p.s
    M, L = seqs.M, seqs.L
    mi2 = _mu_inv2(p.mu)
    v = np.empty(N + 1)
    u = np.empty(N)
    d = np.empty(N)
    v[0] = p.v0
    for k in range(N):
        gain = s * M[k + 1] / L[k]
        u[k] = -gain * v[k]
        d[k] = mi2 * gain * v[k]
        v[k + 1] = v[k] / L[k]
    xi = -p.Lambda ** 2 * np.cumsum(v[1:][::-1])[::-1]
    return TrajectorySolution(roll_theta(p, v), v, u, d, np.zeros(N), xi, math.nan)
