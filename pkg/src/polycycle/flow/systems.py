"""Concrete planar fields used as testbeds."""
from __future__ import annotations

import numpy as np

from .field import PlanarField

__all__ = [
    "bogdanov_takens",
    "hamiltonian_cubic",
    "cubic_energy",
    "linear_field",
    "rotation",
]


def _bt(p, q):
    x, y = p
    b1, b2 = q
    return (y, b1 + b2 * x + x * x + x * y)


def _bt_jac(p, q):
    x, y = p
    return ((0.0, 1.0), (q[1] + 2 * x + y, x))


def bogdanov_takens(beta1: float, beta2: float) -> PlanarField:
    """``x' = y``, ``y' = beta1 + beta2*x + x**2 + x*y``."""
    return PlanarField(_bt, _bt_jac, (beta1, beta2), "bogdanov-takens")


def _cubic(p, q):
    x, y = p
    return (y, x - x * x + q[0] * y)


def _cubic_jac(p, q):
    x, _ = p
    return ((0.0, 1.0), (1 - 2 * x, q[0]))


def hamiltonian_cubic(nu: float = 0.0) -> PlanarField:
    """``x' = y``, ``y' = x - x**2 + nu*y``; Hamiltonian for ``nu = 0``.

    Along orbits the energy :func:`cubic_energy` changes at rate ``nu*y**2``.
    """
    return PlanarField(_cubic, _cubic_jac, (nu,), "hamiltonian-cubic")


def cubic_energy(p) -> float:
    x, y = np.asarray(p, dtype=float)[..., 0], np.asarray(p, dtype=float)[..., 1]
    return y * y / 2 - x * x / 2 + x ** 3 / 3


def _linear(p, q):
    a, b, c, d = q
    x, y = p
    return (a * x + b * y, c * x + d * y)


def _linear_jac(p, q):
    a, b, c, d = q
    return ((a, b), (c, d))


def linear_field(a: float, b: float, c: float, d: float) -> PlanarField:
    """``(x', y') = [[a, b], [c, d]] (x, y)``."""
    return PlanarField(_linear, _linear_jac, (a, b, c, d), "linear")


def rotation(omega: float = 1.0) -> PlanarField:
    """Rigid rotation ``x' = -omega*y``, ``y' = omega*x``."""
    return linear_field(0.0, -omega, omega, 0.0)
