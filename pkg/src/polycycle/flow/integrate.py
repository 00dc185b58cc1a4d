"""Adaptive integration with section-crossing detection.

scipy's DOP853 pair is stepped by hand so that each step's dense
interpolant can be searched for section crossings and the run can stop on a
crossing-dependent condition.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from ..errors import BoundingBoxExit, DomainError, IntegrationError
from .field import PlanarField, Section

__all__ = ["Crossing", "Trajectory", "integrate", "DEFAULT_RTOL", "DEFAULT_ATOL", "DEFAULT_EVENT_TOL"]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
DEFAULT_EVENT_TOL = 1e-11
DEFAULT_BBOX = (-1e3, 1e3, -1e3, 1e3)


@dataclass(frozen=True)
class Crossing:
    time: float
    coordinate: float
    direction: int  # +1 along the section normal in forward time, -1 against it
    section: int = 0
    point: tuple = ()


@dataclass
class Trajectory:
    t: np.ndarray
    xy: np.ndarray
    crossings: list = field(default_factory=list)
    status: str = "done"  # "done", "stopped" or "bbox"

    @property
    def end(self) -> np.ndarray:
        return self.xy[-1]

    def crossings_of(self, section: int = 0, direction: int | None = None) -> list[Crossing]:
        return [c for c in self.crossings
                if c.section == section and (direction is None or c.direction == direction)]

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y"])
        for t, (x, y) in zip(self.t, self.xy):
            w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])
        if fh is not None:
            fh.write(buf.getvalue())
        return buf.getvalue()

    def crossings_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "coord", "dir"])
        for c in self.crossings:
            w.writerow([repr(c.time), repr(c.coordinate), c.direction])
        if fh is not None:
            fh.write(buf.getvalue())
        return buf.getvalue()


def _locate(dense, sec: Section, t0: float, t1: float, s0: float, s1: float,
            event_tol: float, field_: PlanarField) -> float:
    if s1 == 0.0:
        return t1
    f = lambda t: sec.offset(dense(t))
    speed = float(np.hypot(*field_(dense(0.5 * (t0 + t1)))))
    xtol = max(event_tol / max(speed, 1e-300), 4 * np.finfo(float).eps * abs(t1))
    lo, hi = (t0, t1) if t0 < t1 else (t1, t0)
    return brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def integrate(
    fld: PlanarField,
    x0,
    t_end: float,
    tol: float = DEFAULT_RTOL,
    sections: Sequence[Section] = (),
    *,
    atol: float | None = None,
    event_tol: float | None = None,
    bbox: tuple | None = DEFAULT_BBOX,
    max_step: float = np.inf,
    stop: Callable[[Crossing], bool] | None = None,
    record: bool = True,
) -> Trajectory:
    """Integrate ``fld`` from ``x0`` for time ``t_end`` (negative for reversed time).

    ``tol`` is the relative tolerance; ``atol`` and ``event_tol`` default to
    ``tol/100`` and ``tol/10``.  Crossings of each section's segment are
    located on the dense interpolant; a crossing exactly at the start point is
    not reported.  ``stop`` is called on every crossing and ends the run when
    it returns true.  Leaving ``bbox = (xmin, xmax, ymin, ymax)`` raises
    :class:`BoundingBoxExit` with the partial trajectory attached.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    atol = tol / 100 if atol is None else atol
    event_tol = tol / 10 if event_tol is None else event_tol
    x0 = np.asarray(x0, dtype=float)
    if t_end == 0:
        return Trajectory(np.array([0.0]), x0[None, :].copy())
    solver = DOP853(fld.rhs, 0.0, x0, t_end, rtol=tol, atol=atol, max_step=max_step)
    ts = [0.0]
    ps = [x0.copy()]
    crossings: list[Crossing] = []
    offsets = [sec.offset(x0) for sec in sections]
    status = "done"
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integration failed at t={solver.t}: {msg}")
        t0, t1 = solver.t_old, solver.t
        p1 = solver.y
        dense = None
        found = []
        for k, sec in enumerate(sections):
            s0, s1 = offsets[k], sec.offset(p1)
            offsets[k] = s1
            if s0 == 0.0 or s0 * s1 > 0:
                continue
            if dense is None:
                dense = solver.dense_output()
            tc = _locate(dense, sec, t0, t1, s0, s1, event_tol, fld)
            pc = dense(tc)
            x = sec.coordinate(pc)
            if abs(x) > sec.halfwidth:
                continue
            # forward-time sense, also when integrating backwards
            direction = 1 if (s1 > s0) == (t1 > t0) else -1
            found.append(Crossing(float(tc), x, direction, k, (float(pc[0]), float(pc[1]))))
        found.sort(key=lambda c: abs(c.time))
        halt = False
        for c in found:
            crossings.append(c)
            if stop is not None and stop(c):
                halt = True
                status = "stopped"
                t1 = c.time
                p1 = np.asarray(c.point)
                break
        if record or halt:
            ts.append(t1)
            ps.append(np.array(p1, dtype=float))
        if halt:
            break
        if bbox is not None:
            xmin, xmax, ymin, ymax = bbox
            if not (xmin <= p1[0] <= xmax and ymin <= p1[1] <= ymax):
                traj = Trajectory(np.array(ts), np.array(ps), crossings, "bbox")
                err = BoundingBoxExit(f"trajectory left the bounding box at t={t1}")
                err.trajectory = traj
                raise err
    if not record and ts[-1] != solver.t and status == "done":
        ts.append(solver.t)
        ps.append(np.array(solver.y))
    return Trajectory(np.array(ts), np.array(ps), crossings, status)
