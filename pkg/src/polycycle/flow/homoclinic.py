"""One-parameter loop families: homoclinic location and flow-level sparkling.

A :class:`LoopFamily` bundles a field factory, a saddle seed, a section
across the loop pointing to the inside, and the separatrix branches that
form the loop.  The splitting ``x(S) - x(U)`` on that section vanishes on
the homoclinic parameter; on the side where it is positive the orbit of a
marked point inside the loop winds a finite number of times before escaping
through the gap, and the sparkling parameters are where the escape switches
from one turn to the next.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..errors import (
    BoundingBoxExit,
    ConvergenceError,
    DomainError,
    ExistenceError,
    MissingCrossingError,
    PrecisionError,
)
from .field import PlanarField, Saddle, Section
from .integrate import DEFAULT_BBOX, DEFAULT_RTOL, integrate
from .saddle import find_saddle, first_crossing
from .systems import bogdanov_takens, hamiltonian_cubic

__all__ = [
    "LoopFamily",
    "SparklingMeasurement",
    "bt_family",
    "cubic_family",
    "find_homoclinic",
    "measure_sparkling_flow",
    "orbit_returns",
]

#: tighter default for sparkling runs, whose splittings reach 1e-11
SPARKLING_RTOL = 1e-13


@dataclass(frozen=True)
class LoopFamily:
    """A field family ``make(param)`` with a saddle loop crossing ``section``."""

    make: Callable[[float], PlanarField]
    saddle_seed: tuple
    section: Section
    unstable: str = "unstable+"
    stable: str = "stable+"
    t_max: float = 200.0
    bbox: tuple = DEFAULT_BBOX
    name: str = "family"
    #: parameter offset at which the loop is clearly but mildly broken
    scale: float = 1e-3

    def field(self, param: float) -> PlanarField:
        return self.make(param)

    def saddle(self, param: float) -> Saddle:
        return find_saddle(self.make(param), self.saddle_seed)

    def crossings(self, param: float, tol: float = DEFAULT_RTOL):
        """First hits ``(S, U)`` of the stable and unstable branches on the section."""
        fld = self.make(param)
        s = find_saddle(fld, self.saddle_seed)
        cs = first_crossing(fld, s, self.stable, self.section, self.t_max, tol, bbox=self.bbox)
        cu = first_crossing(fld, s, self.unstable, self.section, self.t_max, tol, bbox=self.bbox)
        return cs, cu

    def splitting(self, param: float, tol: float = DEFAULT_RTOL) -> float:
        cs, cu = self.crossings(param, tol)
        return cs.coordinate - cu.coordinate


def _bt_reversed(beta2, beta1):
    return bogdanov_takens(beta1, beta2).reversed()


def bt_family(beta2: float = -0.5, section: Section | None = None) -> LoopFamily:
    """Bogdanov-Takens loops in ``beta1`` at fixed ``beta2 < 0``, in reversed time.

    Forward in time the loop has characteristic number below one; reversing
    time makes it attract from the inside.  The default section lies on
    ``y = 0`` through the far side of the loop, pointing toward the focus.
    """
    if not beta2 < 0:
        raise DomainError("the loop exists for beta2 < 0")
    s = abs(beta2)
    if section is None:
        section = Section((-0.92 * s, 0.0), (1.0, 0.0), 0.6 * s)
    return LoopFamily(partial(_bt_reversed, beta2), (1.19 * s, 0.0), section,
                      unstable="unstable-", stable="stable-", t_max=200.0 / s,
                      name=f"bogdanov-takens(beta2={beta2})[reversed]", scale=0.01 * s * s)


def cubic_family(section: Section | None = None) -> LoopFamily:
    """Cubic Hamiltonian loop broken by the dissipation ``nu*y``."""
    if section is None:
        section = Section((1.5, 0.0), (-1.0, 0.0), 0.5)
    return LoopFamily(hamiltonian_cubic, (0.1, 0.1), section, name="hamiltonian-cubic", scale=1e-2)


def find_homoclinic(family: LoopFamily, bracket: tuple[float, float], tol: float = 1e-10,
                    int_tol: float = SPARKLING_RTOL, max_iter: int = 200) -> float:
    """Bisection on the splitting until ``|eps| < tol``."""
    a, b = map(float, bracket)
    ea, eb = family.splitting(a, int_tol), family.splitting(b, int_tol)
    if ea == 0.0:
        return a
    if eb == 0.0:
        return b
    if ea * eb > 0:
        raise ExistenceError(f"splitting has the same sign at both ends of {bracket}: {ea}, {eb}")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        em = family.splitting(m, int_tol)
        if abs(em) < tol:
            return m
        if (em > 0) == (ea > 0):
            a, ea = m, em
        else:
            b, eb = m, em
    raise ConvergenceError(f"bracket exhausted before |eps| < {tol} (last |eps| = {min(abs(ea), abs(eb))})")


def orbit_returns(family: LoopFamily, param: float, p0: float, n_max: int,
                  tol: float = SPARKLING_RTOL, x_s: float | None = None) -> list[float]:
    """Return coordinates ``y_k = x_k - x(S)`` of the marked point, ``k = 1, 2, ...``.

    Stops after ``n_max`` returns or at the first return with ``y_k <= 0``
    (escape through the gap), which is included.
    """
    fld = family.make(param)
    sec = family.section
    if x_s is None:
        try:
            x_s = family.crossings(param, tol)[0].coordinate
        except MissingCrossingError:
            # loop broken beyond the section: no turns at all
            return [-math.inf]
    flow_dir = 1 if float(fld(sec.point(p0)) @ sec.normal) > 0 else -1
    ys: list[float] = []

    def stop(c):
        if c.direction != flow_dir:
            return False
        ys.append(c.coordinate - x_s)
        return ys[-1] <= 0 or len(ys) >= n_max

    t_max = family.t_max * (n_max + 1)
    try:
        integrate(fld, sec.point(p0), t_max, tol, [sec], bbox=family.bbox, stop=stop, record=False)
    except BoundingBoxExit:
        pass
    return ys


def _turns(ys: list[float]) -> int:
    """Completed turns: positive returns before the first escape."""
    return next((k for k, y in enumerate(ys) if y <= 0), len(ys))


@dataclass(frozen=True)
class SparklingMeasurement:
    n: int
    param: float
    eps: float
    offset: float  # |param - homoclinic parameter|
    returns: tuple = field(default=(), repr=False)


def _eps_side(family: LoopFamily, hom: float, tol: float, probe: float) -> int:
    e = family.splitting(hom + probe, tol)
    return 1 if e > 0 else -1


def measure_sparkling_flow(
    family: LoopFamily,
    hom: float,
    p0: float,
    n: int,
    tol: float = SPARKLING_RTOL,
    start: float | None = None,
    side: int | None = None,
    rel_tol: float = 1e-12,
) -> SparklingMeasurement:
    """Family parameter where the marked point's ``n``-th return hits S.

    The search moves away from the homoclinic parameter ``hom`` on the side of
    positive splitting, halving the offset from ``start`` until the orbit
    completes ``n`` turns, then solves ``y_n = 0`` on that bracket.  Returns the
    parameter and the splitting measured there.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    scale = max(1.0, abs(hom))
    if side is None:
        side = _eps_side(family, hom, tol, 1e-3 * family.scale)
    d = family.scale if start is None else float(start)

    def returns(dd):
        return orbit_returns(family, hom + side * dd, p0, n, tol)

    ys = returns(d)
    grow = 0
    while _turns(ys) >= n:
        d *= 2
        grow += 1
        if grow > 40:
            raise ConvergenceError("no parameter with fewer than n turns found")
        ys = returns(d)
    lo_d, hi_d = None, d
    for _ in range(200):
        dd = 0.5 * hi_d
        if dd < 1e-15 * scale:
            raise ConvergenceError(f"turn {n} not reached before double precision ran out")
        ys_dd = returns(dd)
        if _turns(ys_dd) >= n:
            lo_d = dd
            break
        hi_d, ys = dd, ys_dd
    if lo_d is None:
        raise ConvergenceError("bracket search did not terminate")

    # tighten until the far end escapes exactly at return n (y_n <= 0 finite)
    def hits(ys_):
        return len(ys_) >= n and _turns(ys_) == n - 1 and math.isfinite(ys_[n - 1])

    while not hits(ys):
        mid = 0.5 * (lo_d + hi_d)
        if hi_d - lo_d <= rel_tol * hi_d:
            raise ExistenceError(f"return {n} of the marked point never reaches S inside the section")
        ys_mid = returns(mid)
        if _turns(ys_mid) >= n:
            lo_d = mid
        else:
            hi_d, ys = mid, ys_mid

    def f(dd):
        ys_ = returns(dd)
        return ys_[n - 1] if hits(ys_) or _turns(ys_) >= n else -1.0

    root = brentq(f, lo_d, hi_d, xtol=rel_tol * lo_d, rtol=4 * np.finfo(float).eps)
    param = hom + side * root
    eps = family.splitting(param, tol)
    if not eps > 0:
        raise PrecisionError(f"splitting at sheet {n} is {eps}: below the double-precision noise floor")
    return SparklingMeasurement(n, param, eps, root, tuple(returns(root)))
