"""Saddle-point verification: grid characterisations and a Hessian certificate."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalBreakdown

EQUALITY_BAND = 1e-12


@dataclass(frozen=True)
class GridSpec:
    u_range: tuple
    u_count: int
    d_range: tuple
    d_count: int

    def __post_init__(self):
        for (lo, hi), count in ((self.u_range, self.u_count), (self.d_range, self.d_count)):
            if count < 2:
                raise ValueError("each grid axis needs at least two points")
            if not lo < hi:
                raise ValueError(f"empty range [{lo}, {hi}]")

    def axes(self, candidate):
        """Grid axes with the candidate coordinates inserted."""
        u_star, d_star = candidate
        us = np.union1d(np.linspace(*self.u_range, self.u_count), [u_star])
        ds = np.union1d(np.linspace(*self.d_range, self.d_count), [d_star])
        return us, ds


@dataclass(frozen=True)
class GridSaddleReport:
    definition: bool  # the two defining inequalities
    union_characterization: bool  # (Omega_1 u Omega_2 u {c}) n box == {c}
    separate_characterization: bool  # Omega_1' n box == {c} and Omega_2' n box == {c}
    box: tuple  # ((u_lo, u_hi), (d_lo, d_hi)) actually sampled

    @property
    def agree(self) -> bool:
        return self.definition == self.union_characterization == self.separate_characterization

    @property
    def is_saddle(self) -> bool:
        if not self.agree:
            raise AssertionError(f"saddle characterisations disagree: {self}")
        return self.definition


def grid_saddle_check(F: Callable[[float, float], float], grid: GridSpec, candidate,
                      band: float = EQUALITY_BAND) -> GridSaddleReport:
    """Decide on a finite grid whether ``candidate`` is a saddle point of F.

    The verdict holds only on the sampled box; nothing is claimed about
    open neighbourhoods.
    """
    u_star, d_star = map(float, candidate)
    (u_lo, u_hi), (d_lo, d_hi) = grid.u_range, grid.d_range
    if not (u_lo <= u_star <= u_hi and d_lo <= d_star <= d_hi):
        raise ValueError("candidate lies outside the grid box")
    us, ds = grid.axes((u_star, d_star))
    values = np.array([[F(u, d) for d in ds] for u in us])
    iu = int(np.searchsorted(us, u_star))
    id_ = int(np.searchsorted(ds, d_star))
    f_star = values[iu, id_]

    # definition: F(u*, d) <= F* <= F(u, d*)
    definition = bool(np.all(values[iu, :] <= f_star + band) and np.all(values[:, id_] >= f_star - band))

    # set characterisations, by membership test over the whole box
    star = (iu, id_)
    omega1, omega2 = set(), set()
    for i, u in enumerate(us):
        for j, d in enumerate(ds):
            if d == d_star and values[i, j] < f_star - band:
                omega1.add((i, j))
            if u == u_star and values[i, j] > f_star + band:
                omega2.add((i, j))
    union = (omega1 | omega2 | {star})
    union_ok = union == {star}
    separate_ok = (omega1 | {star}) == {star} and (omega2 | {star}) == {star}
    return GridSaddleReport(definition, union_ok, separate_ok, ((u_lo, u_hi), (d_lo, d_hi)))


@dataclass(frozen=True)
class HessianReport:
    grad_u_norm: float
    grad_d_norm: float
    min_eig_Huu: float
    max_eig_Hdd: float
    is_saddle_certified: bool
    grad_tol: float = 1e-6

    def to_dict(self) -> dict:
        return {
            "grad_u_norm": self.grad_u_norm,
            "grad_d_norm": self.grad_d_norm,
            "min_eig_Huu": self.min_eig_Huu,
            "max_eig_Hdd": self.max_eig_Hdd,
            "is_saddle_certified": self.is_saddle_certified,
            "grad_tol": self.grad_tol,
        }


def _gradient(f, x, rel_step):
    g = np.empty(x.size)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_hessian(f: Callable[[np.ndarray], float], x, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian with step ``rel_step * (1 + |x_i|)`` per coordinate."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = rel_step * (1.0 + np.abs(x))
    f0 = f(x)
    H = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej)
                                 - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h[i] * h[j])
    if not np.all(np.isfinite(H)):
        raise NumericalBreakdown("non-finite Hessian entries")
    return H


def sufficient_saddle_check(F: Callable[[np.ndarray, np.ndarray], float], candidate,
                            fd_step: float = 1e-4, grad_step: float = 1e-6,
                            grad_tol: float = 1e-6) -> HessianReport:
    """Second-order sufficient certificate for a local saddle of F(u, d).

    Requires zero gradient in both blocks, a positive definite u-block and a
    negative definite d-block.
    """
    u_star = np.atleast_1d(np.asarray(candidate[0], dtype=float))
    d_star = np.atleast_1d(np.asarray(candidate[1], dtype=float))
    fu = lambda u: F(u, d_star)  # noqa: E731
    fd = lambda d: F(u_star, d)  # noqa: E731

    gu = _gradient(fu, u_star, grad_step)
    gd = _gradient(fd, d_star, grad_step)
    Huu = fd_hessian(fu, u_star, fd_step)
    Hdd = fd_hessian(fd, d_star, fd_step)
    min_u = float(np.linalg.eigvalsh(0.5 * (Huu + Huu.T))[0])
    max_d = float(np.linalg.eigvalsh(0.5 * (Hdd + Hdd.T))[-1])
    gu_n = float(np.linalg.norm(gu, np.inf))
    gd_n = float(np.linalg.norm(gd, np.inf))
    certified = gu_n <= grad_tol and gd_n <= grad_tol and min_u > 0.0 and max_d < 0.0
    return HessianReport(gu_n, gd_n, min_u, max_d, bool(certified), grad_tol)
