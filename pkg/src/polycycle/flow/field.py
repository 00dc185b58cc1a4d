"""Planar vector fields, saddles and cross-sections."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError

__all__ = ["PlanarField", "Saddle", "Section", "fd_jacobian"]

FD_STEP = 1e-6


def fd_jacobian(f: Callable, p, params=(), h: float = FD_STEP) -> np.ndarray:
    """Central-difference jacobian of ``f(p, params)``; columns are d/dx, d/dy."""
    p = np.asarray(p, dtype=float)
    J = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        J[:, k] = (np.asarray(f(p + e, params)) - np.asarray(f(p - e, params))) / (2 * h)
    return J


@dataclass(frozen=True)
class PlanarField:
    """Vector field ``evaluator(p, params) -> (u, v)`` on the plane.

    ``jacobian`` may be omitted, in which case central differences are used.
    Instances are immutable and safe to share across workers.
    """

    evaluator: Callable
    jacobian: Callable | None = None
    params: tuple = ()
    name: str = "field"
    sign: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))

    def __call__(self, p) -> np.ndarray:
        return self.sign * np.asarray(self.evaluator(np.asarray(p, dtype=float), self.params), dtype=float)

    def rhs(self, t, p):
        return self(p)

    def jac(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.jacobian is None:
            return self.sign * fd_jacobian(self.evaluator, p, self.params)
        return self.sign * np.asarray(self.jacobian(p, self.params), dtype=float)

    def reversed(self) -> "PlanarField":
        """Same orbits traversed backwards."""
        return replace(self, sign=-self.sign, name=f"{self.name}[reversed]")

    def with_params(self, params: Sequence[float]) -> "PlanarField":
        return replace(self, params=tuple(params))


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.hypot(*v))
    if n == 0.0:
        raise DomainError("zero direction vector")
    return v / n


@dataclass(frozen=True)
class Section:
    """Straight transversal ``base + x*direction`` for ``|x| <= halfwidth``.

    ``x`` is the signed arclength along ``direction``.  Crossings are counted
    positive when the orbit crosses in the direction of ``normal``, the
    direction rotated by a quarter turn counterclockwise.
    """

    base: tuple
    direction: tuple
    halfwidth: float

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(float(v) for v in self.base))
        object.__setattr__(self, "direction", tuple(float(v) for v in _unit(self.direction)))
        if not self.halfwidth > 0:
            raise DomainError(f"halfwidth must be positive, got {self.halfwidth}")

    @property
    def normal(self) -> np.ndarray:
        d = self.direction
        return np.array([-d[1], d[0]])

    def coordinate(self, p) -> float:
        return float((np.asarray(p) - self.base) @ self.direction)

    def offset(self, p) -> float:
        """Signed distance from the section line along ``normal``."""
        return float((np.asarray(p) - self.base) @ self.normal)

    def point(self, x: float) -> np.ndarray:
        return np.asarray(self.base) + x * np.asarray(self.direction)

    def check_transversal(self, fld: PlanarField, min_angle: float = 1e-3):
        v = fld(self.base)
        speed = float(np.hypot(*v))
        if speed == 0.0 or abs(float(v @ self.normal)) < min_angle * speed:
            raise DomainError("field is not transversal to the section at its base")

    def to_dict(self) -> dict:
        return {"base": list(self.base), "direction": list(self.direction), "halfwidth": self.halfwidth}


@dataclass(frozen=True)
class Saddle:
    """Hyperbolic saddle with ``eigenvalues = (positive, negative)``.

    ``eigenvectors[0]`` spans the unstable direction, ``eigenvectors[1]`` the
    stable one; each is a unit vector with nonnegative x-component (positive
    y-component if vertical).
    """

    position: tuple
    eigenvalues: tuple
    eigenvectors: tuple = field(repr=False)

    @property
    def nu(self) -> float:
        return -self.eigenvalues[1] / self.eigenvalues[0]

    def vector(self, branch: str) -> np.ndarray:
        """Signed unit vector of ``branch`` in {unstable+, unstable-, stable+, stable-}."""
        kind, sgn = _parse_branch(branch)
        v = np.asarray(self.eigenvectors[0 if kind == "unstable" else 1])
        return sgn * v

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "eigenvalues": list(self.eigenvalues),
            "eigenvectors": [list(v) for v in self.eigenvectors],
            "nu": self.nu,
        }


BRANCHES = ("unstable+", "unstable-", "stable+", "stable-")


def _parse_branch(branch: str) -> tuple[str, float]:
    if branch not in BRANCHES:
        raise DomainError(f"branch must be one of {BRANCHES}, got {branch!r}")
    return branch[:-1], (1.0 if branch[-1] == "+" else -1.0)
