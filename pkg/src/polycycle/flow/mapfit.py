"""Fit the one-dimensional loop map to flow-measured sparkling values."""
from __future__ import annotations

import math
from typing import Mapping

import numpy as np
from scipy.optimize import least_squares

from ..dulac import LoopReturnMap, solve_sparkling
from ..errors import ConvergenceError, DomainError, PolycycleError

__all__ = ["fit_map_model", "predict_sparkling"]

FIT_BITS = 128
#: annulus bound for fitted models; large enough to never clip a fitted orbit
FIT_Y_MAX = 1e6


def predict_sparkling(g: LoopReturnMap, ns, bits: int = FIT_BITS) -> dict[int, float]:
    return {int(n): float(solve_sparkling(g, int(n), bits=bits)) for n in ns}


def _initial_guess(lam: float, ns, logs) -> tuple[float, float]:
    # deep-sheet asymptotics: ln eps_n ~ (lam**n - 1)/(lam - 1) ln c + lam**n ln p0
    A = np.array([[(lam ** n - 1) / (lam - 1), lam ** n] for n in ns])
    sol, *_ = np.linalg.lstsq(A, np.asarray(logs), rcond=None)
    return float(sol[0]), float(sol[1])


def fit_map_model(measured: Mapping[int, float], lam: float | None = None,
                  bits: int = FIT_BITS) -> LoopReturnMap:
    """Loop map ``c*y**lam - eps`` whose sheets pass through ``measured``.

    ``measured`` maps sheet index to splitting.  With ``lam`` given, ``(c, p0)``
    are fitted (two values determine them exactly); with ``lam=None`` the
    exponent is fitted as well and at least three values are needed.  The fit
    minimizes squared differences of ``ln eps_n``.
    """
    ns = sorted(int(n) for n in measured)
    logs = [math.log(measured[n]) for n in ns]
    free = lam is None
    if len(ns) < (3 if free else 2):
        raise DomainError(f"need at least {3 if free else 2} sheets, got {len(ns)}")
    if free:
        L = np.log(-np.asarray(logs))
        lam0 = math.exp((L[-1] - L[0]) / (ns[-1] - ns[0]))
        lam0 = max(lam0, 1.05)
    else:
        lam0 = float(lam)
    u0, v0 = _initial_guess(lam0, ns, logs)
    x0 = [u0, v0] + ([math.log(lam0 - 1)] if free else [])

    def model(z):
        lam_ = 1 + math.exp(z[2]) if free else lam0
        return LoopReturnMap(lam_, math.exp(z[0]), 0.0, math.exp(z[1]), FIT_Y_MAX)

    def resid(z):
        try:
            g = model(z)
            return [math.log(float(solve_sparkling(g, n, bits=bits))) - t for n, t in zip(ns, logs)]
        except (PolycycleError, OverflowError, ValueError):
            return [1e3] * len(ns)

    sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
    if not sol.success:
        raise ConvergenceError(f"map fit failed: {sol.message}")
    return model(sol.x)
