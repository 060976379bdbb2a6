"""SO(2) and so(2) primitives.

Group elements are kept as 2x2 matrices. Algebra elements (and, through the
trace pairing, covectors) are plain floats identified with skew matrices by
``hat``/``vex``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-12
REORTHO_TOL = 1e-10


def hat(x: float) -> np.ndarray:
    """Real number -> skew-symmetric 2x2 matrix."""
    return np.array([[0.0, -x], [x, 0.0]])


def vex(m: np.ndarray) -> float:
    """Inverse of :func:`hat`; reads the (2,1) entry of the skew part."""
    return 0.5 * float(m[1, 0] - m[0, 1])


@dataclass(frozen=True, eq=False)
class Rotation2:
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"rotation matrix must be 2x2, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "Rotation2":
        return cls(np.eye(2))

    def __matmul__(self, other: "Rotation2") -> "Rotation2":
        return Rotation2(self.m @ other.m)

    def inverse(self) -> "Rotation2":
        return Rotation2(self.m.T.copy())

    @property
    def angle(self) -> float:
        return log_so2(self)

    def orthogonality_defect(self) -> float:
        return float(np.max(np.abs(self.m.T @ self.m - np.eye(2))))

    def is_valid(self, tol: float = ORTHO_TOL) -> bool:
        m = self.m
        return (
            np.max(np.abs(m.T @ m - np.eye(2))) <= tol
            and np.max(np.abs(m @ m.T - np.eye(2))) <= tol
            and abs(np.linalg.det(m) - 1.0) <= tol
        )

    def reorthonormalized(self, tol: float = REORTHO_TOL) -> "Rotation2":
        """Project back onto SO(2) when accumulated round-off exceeds ``tol``."""
        if self.orthogonality_defect() <= tol:
            return self
        c, s = self.m[0, 0], self.m[1, 0]
        r = math.hypot(c, s)
        c, s = c / r, s / r
        return Rotation2(np.array([[c, -s], [s, c]]))


def exp_so2(x: float) -> Rotation2:
    c, s = math.cos(x), math.sin(x)
    return Rotation2(np.array([[c, -s], [s, c]]))


def log_so2(g: Rotation2) -> float:
    """Principal angle in (-pi, pi]."""
    sin_part = g.m[1, 0]
    # a signed-zero sine sits on the cut: send it to +pi, never -pi
    if sin_part == 0.0:
        sin_part = 0.0
    return math.atan2(sin_part, g.m[0, 0])


def pairing(eta: float, v: float) -> float:
    """Trace pairing 0.5 tr(hat(eta)^T hat(v)) on so(2)."""
    return 0.5 * float(np.trace(hat(eta).T @ hat(v)))


def adjoint_action(g: Rotation2, v: float) -> float:
    """Ad_g v = vex(g hat(v) g^-1); the identity on the abelian group SO(2)."""
    out = vex(g.m @ hat(v) @ g.m.T)
    assert abs(out - v) <= 1e-12 * max(1.0, abs(v)), "Ad on SO(2) must be trivial"
    return out


def coadjoint_action(g: Rotation2, eta: float) -> float:
    """Ad*_g, the dual of Ad_g under the trace pairing."""
    # Ad_g is multiplication by a scalar on so(2); read it off hat(1)
    return adjoint_action(g, 1.0) * eta


def group_deviation_cost(g: Rotation2) -> float:
    """2 - tr(g), i.e. 4 sin^2(theta/2)."""
    return 2.0 - float(np.trace(g.m))


def skew_gradient(g: Rotation2) -> float:
    """vex((g^T - g)/2) = -sin(theta)."""
    return vex(0.5 * (g.m.T - g.m))


def wrap_to_2pi(theta):
    """Map angles into [0, 2pi) (counterclockwise plotting convention)."""
    out = np.mod(theta, 2.0 * math.pi)
    # np.mod can round a tiny negative up to exactly 2pi
    return np.where(out >= 2.0 * math.pi, 0.0, out)


def wrap_to_pi(theta):
    """Map angles into (-pi, pi]."""
    out = -np.mod(-np.asarray(theta, dtype=float) + math.pi, 2.0 * math.pi) + math.pi
    return out
