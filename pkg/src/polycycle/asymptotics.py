"""Finite-data proxies for asymptotic statements.

Slopes of ``ln(-ln eps_n)`` against ``n``, limits of ratio sequences, and the
bounded-versus-growing verdict that separates an O(1) difference from a
geometrically growing profile.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateFitError, DomainError

__all__ = [
    "FitResult",
    "band",
    "band_stable",
    "boundedness_check",
    "limit_estimate",
    "linear_fit",
]

#: default band-widening factor for the O(1) proxy
BAND_FACTOR = 1.5
#: absolute floor below which a band is indistinguishable from rounding noise
BAND_FLOOR = 1e-12


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    window: tuple[int, int]

    def to_json(self) -> str:
        d = asdict(self)
        d["window"] = list(self.window)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        d = json.loads(text)
        return cls(d["slope"], d["intercept"], d["residual"], tuple(d["window"]))


def _window(n: int, window) -> tuple[int, int]:
    if window is None:
        return 0, n
    lo, hi = window
    if not (0 <= lo < hi <= n):
        raise DomainError(f"window {window} outside [0, {n}]")
    return int(lo), int(hi)


def linear_fit(xs: Sequence[float], ys: Sequence[float], window=None) -> FitResult:
    """Ordinary least squares ``y = slope*x + intercept`` over ``xs[lo:hi]``.

    ``window`` is a half-open index range ``(lo, hi)``; the whole sequence by
    default.  ``xs`` must be sorted; repeated abscissae are allowed as long as
    they are not all equal.  ``residual`` is the largest absolute deviation
    from the fitted line.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise DomainError("xs and ys differ in length")
    lo, hi = _window(len(x), window)
    x, y = x[lo:hi], y[lo:hi]
    if len(x) < 3:
        raise DomainError("need at least 3 points in the window")
    if np.any(np.diff(x) < 0):
        raise DomainError("xs must be non-decreasing")
    xm = x.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateFitError("all abscissae are equal")
    slope = float(dx @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * xm)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return FitResult(slope, intercept, residual, (lo, hi))


def limit_estimate(seq: Sequence[float]) -> tuple[float, float]:
    """Mean of the last quarter of ``seq`` and the largest deviation within it."""
    s = np.asarray(seq, dtype=float)
    if len(s) < 8:
        raise DomainError(f"need at least 8 entries, got {len(s)}")
    tail = s[-(len(s) // 4):]
    value = float(tail.mean())
    return value, float(np.max(np.abs(tail - value)))


def boundedness_check(seq: Sequence[float], split: int, threshold: float = 4.0, atol: float = BAND_FLOOR):
    """Compare the magnitude of ``seq[split:]`` to that of ``seq[:split]``.

    Returns ``(verdict, growth_factor)`` with verdict ``"growing"`` when the
    tail maximum exceeds ``threshold`` times the head maximum.  A head that is
    identically zero (up to ``atol``) is judged by the tail alone.
    """
    s = np.abs(np.asarray(seq, dtype=float))
    if not 0 < split < len(s):
        raise DomainError(f"split {split} outside the sequence")
    head, tail = float(s[:split].max()), float(s[split:].max())
    if head <= atol:
        if tail <= atol:
            return "bounded", 1.0
        return "growing", float("inf")
    factor = tail / head
    return ("growing" if factor > threshold else "bounded"), factor


def band(seq: Sequence[float]) -> float:
    """Spread ``max - min`` of a sequence.

    Extended-precision entries stay extended, so bands far below double
    resolution remain comparable.
    """
    s = list(seq)
    if not s:
        raise DomainError("empty sequence")
    b = max(s) - min(s)
    return float(b) if isinstance(b, (float, int, np.floating, np.integer)) else b


def band_stable(first: Sequence[float], second: Sequence[float],
                factor: float = BAND_FACTOR, floor: float = BAND_FLOOR) -> bool:
    """O(1) proxy: the later band is no wider than ``factor`` times the earlier one.

    Bands below ``floor`` are rounding noise and count as zero width.
    """
    return band(second) <= factor * max(band(first), 0.0) + floor
