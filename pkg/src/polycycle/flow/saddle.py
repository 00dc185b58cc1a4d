"""Saddle location, separatrix tracing and splitting measurement."""
from __future__ import annotations

import numpy as np

from ..errors import BoundingBoxExit, ConvergenceError, MissingCrossingError, NotASaddleError
from .field import PlanarField, Saddle, Section, _parse_branch
from .integrate import DEFAULT_BBOX, DEFAULT_RTOL, Trajectory, integrate

__all__ = ["find_saddle", "seed_offset", "splitting", "trace_separatrix", "first_crossing"]

SEED_SCALE = 1e-7


def _orient(v: np.ndarray) -> np.ndarray:
    v = v / np.hypot(*v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


def find_saddle(fld: PlanarField, seed, tol: float = 1e-12, max_iter: int = 50) -> Saddle:
    """Newton's method on the velocity, then eigen-decomposition of the jacobian."""
    p = np.asarray(seed, dtype=float).copy()
    for _ in range(max_iter):
        v = fld(p)
        if np.hypot(*v) < tol:
            break
        try:
            p = p - np.linalg.solve(fld.jac(p), v)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular jacobian at {p}") from exc
        if not np.all(np.isfinite(p)):
            raise ConvergenceError("Newton iteration diverged")
    else:
        if np.hypot(*fld(p)) >= tol:
            raise ConvergenceError(f"no equilibrium within {tol} after {max_iter} Newton steps")
    w, V = np.linalg.eig(fld.jac(p))
    if np.iscomplexobj(w) and np.any(np.abs(w.imag) > 0):
        raise NotASaddleError(f"complex eigenvalues {w} at {p}")
    w = w.real
    V = V.real
    if not w[0] * w[1] < 0:
        raise NotASaddleError(f"eigenvalues {w} do not straddle zero at {p}")
    iu, is_ = (0, 1) if w[0] > 0 else (1, 0)
    return Saddle(
        (float(p[0]), float(p[1])),
        (float(w[iu]), float(w[is_])),
        (tuple(_orient(V[:, iu])), tuple(_orient(V[:, is_]))),
    )


def seed_offset(saddle: Saddle, branch: str, scale: float = SEED_SCALE) -> float:
    """Default seed distance ``scale / max(1, |eigenvalue|)`` for ``branch``."""
    kind, _ = _parse_branch(branch)
    mu = abs(saddle.eigenvalues[0 if kind == "unstable" else 1])
    return scale / max(1.0, mu)


def trace_separatrix(
    fld: PlanarField,
    saddle: Saddle,
    branch: str,
    h: float | None = None,
    sections=(),
    t_max: float = 100.0,
    tol: float = DEFAULT_RTOL,
    bbox=DEFAULT_BBOX,
    stop=None,
    **kwargs,
) -> Trajectory:
    """Integrate a separatrix from ``position + h * (signed eigenvector)``.

    Unstable branches run forward, stable branches in reversed time (crossing
    times are then negative).
    """
    kind, _ = _parse_branch(branch)
    if h is None:
        h = seed_offset(saddle, branch)
    x0 = np.asarray(saddle.position) + h * saddle.vector(branch)
    t_end = t_max if kind == "unstable" else -t_max
    return integrate(fld, x0, t_end, tol, sections, bbox=bbox, stop=stop, **kwargs)


def first_crossing(fld: PlanarField, saddle: Saddle, branch: str, section: Section,
                   t_max: float = 100.0, tol: float = DEFAULT_RTOL, h: float | None = None,
                   bbox=DEFAULT_BBOX):
    """First crossing of ``section`` by a separatrix branch."""
    try:
        tr = trace_separatrix(fld, saddle, branch, h, [section], t_max, tol, bbox,
                              stop=lambda c: True, record=False)
    except BoundingBoxExit as exc:
        raise MissingCrossingError(f"{branch} separatrix left the bounding box before the section") from exc
    if not tr.crossings:
        raise MissingCrossingError(f"{branch} separatrix did not reach the section within t={t_max}")
    return tr.crossings[0]


def splitting(fld: PlanarField, saddle: Saddle, section: Section,
              unstable: str = "unstable+", stable: str = "stable+",
              t_max: float = 100.0, tol: float = DEFAULT_RTOL, bbox=DEFAULT_BBOX,
              stable_saddle: Saddle | None = None) -> float:
    """``x(S) - x(U)``: first hits of the stable and unstable branches on ``section``.

    The section direction should point to the side of the winding separatrix
    (the inside of the loop).  For a saddle-to-saddle connection pass the
    target saddle as ``stable_saddle``.
    """
    target = saddle if stable_saddle is None else stable_saddle
    s = first_crossing(fld, target, stable, section, t_max, tol, bbox=bbox)
    u = first_crossing(fld, saddle, unstable, section, t_max, tol, bbox=bbox)
    return s.coordinate - u.coordinate
