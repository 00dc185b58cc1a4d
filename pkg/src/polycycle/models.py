"""Two-loop polycycle models ("glasses" and "ears").

A left loop with characteristic number ``lam > 1`` and a right loop with
``rho < 1`` are joined by a bridge connection.  The right loop repels from the
inside, so it is modeled in reversed time with exponent ``1/rho``.  On the
synchronizing curve both L-to-R connections exist at once and the splittings
obey ``delta = c_delta * eps**(lam*rho)``; counting turns on both loops along
that curve recovers ``phi = -ln(rho)/ln(lam)`` from integer data alone.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import asymptotics
from .dulac import (
    DulacMap,
    LoopReturnMap,
    SparklingTable,
    compose_dulac,
    count_turns,
    dulac_apply,
    sparkling_table,
)
from .errors import DegenerateFitError, DomainError, OrbitOverflowError, TurnCapError
from .precision import DEFAULT_BITS, bits_of, context

__all__ = [
    "BridgeTransition",
    "Curve",
    "CurveSet",
    "FamilyComparison",
    "PolycycleModel",
    "StaircasePoint",
    "bifurcation_diagram",
    "compare_families",
    "estimate_phi",
    "holder_profile",
    "index_profile",
    "phi",
    "staircase",
    "staircase_point",
    "staircase_eps",
    "staircase_to_csv",
    "synchronize",
    "synchronize_ears",
    "synchronize_glasses",
]

VARIANTS = ("glasses", "ears")


def phi(lam: float, rho: float) -> float:
    """The modulus ``-ln(rho) / ln(lam)`` of a glasses/ears polycycle."""
    if not lam > 1:
        raise DomainError(f"lam must exceed 1, got {lam}")
    if not 0 < rho < 1:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    return -math.log(rho) / math.log(lam)


@dataclass(frozen=True)
class BridgeTransition:
    """Regular transition along the bridge: ``x -> c_b*x``, offset by ``sigma``.

    ``sigma == 0`` exactly when the bridge connection survives.
    """

    c_b: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.c_b > 0:
            raise DomainError(f"c_b must be positive, got {self.c_b}")

    def __call__(self, x):
        return self.c_b * x + self.sigma


@dataclass(frozen=True)
class PolycycleModel:
    """Left loop, right loop (in reversed time) and the bridge between them.

    ``eta`` holds passive parameters; nothing reads it.
    """

    variant: str
    left: LoopReturnMap
    right: LoopReturnMap
    bridge: BridgeTransition = BridgeTransition()
    eta: tuple = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        # LoopReturnMap already enforces lam > 1 on both sides, i.e. rho < 1
        object.__setattr__(self, "eta", tuple(self.eta))

    @classmethod
    def build(
        cls,
        variant: str,
        lam: float,
        rho: float,
        c_left: float = 1.0,
        c_right: float = 1.0,
        c_b: float = 1.0,
        p0: float = 0.3,
        q0: float = 0.3,
        y_max: float = 1.0,
        sigma: float = 0.0,
        eta: Iterable[float] = (),
    ) -> "PolycycleModel":
        """Model from characteristic numbers; ``c_right`` is the reversed-time coefficient."""
        if not 0 < rho < 1:
            raise DomainError(f"rho must lie in (0, 1), got {rho}")
        left = LoopReturnMap(lam, c_left, 0.0, p0, y_max)
        right = LoopReturnMap(1.0 / rho, c_right, 0.0, q0, y_max)
        return cls(variant, left, right, BridgeTransition(c_b, sigma), tuple(eta))

    @property
    def lam(self) -> float:
        return float(self.left.lam)

    @property
    def rho(self) -> float:
        return 1.0 / float(self.right.lam)

    @property
    def phi(self) -> float:
        return math.log(float(self.right.lam)) / math.log(self.lam)

    @property
    def right_forward_c(self) -> float:
        """Coefficient of the right saddle's forward map (inverse of ``y -> c*y**(1/rho)``)."""
        return float(self.right.c) ** (-self.rho)

    def left_map(self) -> DulacMap:
        return DulacMap(self.lam, float(self.left.c), float(self.left.y_max))

    def bridge_map(self) -> DulacMap:
        return DulacMap(1.0, self.bridge.c_b, math.inf)

    def right_map(self) -> DulacMap:
        return DulacMap(self.rho, self.right_forward_c, math.inf)

    def delta_map(self) -> DulacMap:
        """Correspondence from the outer half of the left section to the right one."""
        d = compose_dulac(compose_dulac(self.left_map(), self.bridge_map()), self.right_map())
        return replace(d, x_max=float(self.left.y_max))

    @property
    def c_delta(self) -> float:
        return self.delta_map().c

    @property
    def ears_coefficients(self) -> tuple[float, float]:
        """``(c1, c2)`` in ``sigma = c1*eps**lam``, ``delta = c2*sigma**rho``."""
        return float(self.left.c) * self.bridge.c_b, self.right_forward_c

    def with_eta(self, eta: Iterable[float]) -> "PolycycleModel":
        return replace(self, eta=tuple(eta))


def _check_eps(model: PolycycleModel, eps, bits):
    ctx = context(bits)
    eps = ctx.mpf(eps)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if eps > ctx.mpf(model.left.y_max):
        raise DomainError(f"eps={eps} exceeds the outer section bound {model.left.y_max}")
    return eps


def synchronize_glasses(model: PolycycleModel, eps, bits: int | None = None):
    """Right-loop splitting on the synchronizing curve of a glasses model.

    Needs the bridge intact (``sigma == 0``); returns ``c_delta * eps**(lam*rho)``.
    """
    if model.variant != "glasses":
        raise DomainError("synchronize_glasses needs a glasses model")
    if model.bridge.sigma != 0:
        raise DomainError("the synchronizing curve of glasses lies in the plane sigma = 0")
    bits = bits or bits_of(eps)
    eps = _check_eps(model, eps, bits)
    return dulac_apply(model.delta_map(), eps, bits)


def synchronize_ears(model: PolycycleModel, eps, bits: int | None = None):
    """``(sigma, delta)`` on the synchronizing curve of an ears model.

    One connection follows ``l`` then ``b`` (fixing ``sigma = c1*eps**lam``),
    the other follows ``b`` then ``r`` (fixing ``delta = c2*sigma**rho``).
    """
    if model.variant != "ears":
        raise DomainError("synchronize_ears needs an ears model")
    bits = bits or bits_of(eps)
    eps = _check_eps(model, eps, bits)
    ctx = context(bits)
    c1, c2 = model.ears_coefficients
    sigma = ctx.mpf(c1) * eps ** ctx.mpf(model.lam)
    delta = ctx.mpf(c2) * sigma ** ctx.mpf(model.rho)
    return sigma, delta


def synchronize(model: PolycycleModel, eps, bits: int | None = None):
    """Right-loop splitting on the synchronizing curve, for either variant."""
    if model.variant == "glasses":
        return synchronize_glasses(model, eps, bits)
    return synchronize_ears(model, eps, bits)[1]


@dataclass(frozen=True)
class StaircasePoint:
    eps: object
    delta: object
    n_left: int
    m_right: int


def staircase_point(model: PolycycleModel, eps, cap: int = 10_000, bits: int | None = None):
    """One staircase point, or ``None`` when a turn count hits ``cap`` or an orbit overflows."""
    bits = bits or DEFAULT_BITS
    eps = context(bits).mpf(eps)
    delta = synchronize(model, eps, bits)
    try:
        n = count_turns(model.left.with_eps(eps), cap=cap, bits=bits)
        m = count_turns(model.right.with_eps(delta), cap=cap, bits=bits)
    except (TurnCapError, OrbitOverflowError):
        return None
    return StaircasePoint(eps, delta, n, m)


def _point_task(args):
    return staircase_point(*args)


def staircase(
    model: PolycycleModel,
    eps_sequence: Sequence,
    cap: int = 10_000,
    bits: int | None = None,
    mapper=None,
) -> list[StaircasePoint]:
    """Turn counts of both winding separatrices along the synchronizing curve.

    ``eps_sequence`` must be decreasing.  The list stops at the first ``eps``
    where a turn count exceeds ``cap`` or an orbit leaves its annulus.  Points
    are independent, so ``mapper`` (an ordered ``map``) may farm them out.
    """
    bits = bits or DEFAULT_BITS
    ctx = context(bits)
    eps_list = [ctx.mpf(e) for e in eps_sequence]
    for a, b in zip(eps_list, eps_list[1:]):
        if not b < a:
            raise DomainError("eps_sequence must be strictly decreasing")
    mapper = map if mapper is None else mapper
    out: list[StaircasePoint] = []
    for p in mapper(_point_task, [(model, e, cap, bits) for e in eps_list]):
        if p is None:
            break
        out.append(p)
    return out


def staircase_eps(lo: float, hi: float, num: int, bits: int | None = None) -> list:
    """Splittings with ``ln(-ln eps)`` evenly spaced on ``[lo, hi]``, decreasing in eps."""
    ctx = context(bits or DEFAULT_BITS)
    return [ctx.exp(-ctx.exp(ctx.mpf(s))) for s in np.linspace(lo, hi, num)]


def staircase_to_csv(points: Sequence[StaircasePoint], fh=None, digits: int = 20) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "delta", "n_left", "m_right"])
    for p in points:
        ctx = context(bits_of(p.eps))
        w.writerow([ctx.nstr(p.eps, digits, min_fixed=0, max_fixed=0, strip_zeros=False),
                    ctx.nstr(p.delta, digits, min_fixed=0, max_fixed=0, strip_zeros=False),
                    p.n_left, p.m_right])
    if fh is not None:
        fh.write(buf.getvalue())
    return buf.getvalue()


def estimate_phi(points: Sequence[StaircasePoint], window: tuple[int, int] | None = None):
    """Least-squares slope of ``n_left`` against ``m_right``.

    ``window`` restricts to points with ``lo <= n_left <= hi``.  Returns
    ``(phi_hat, residual)`` where the residual is on the slope scale: twice the
    largest deviation from the fitted line divided by the span of ``m_right``.
    """
    if window is not None:
        lo, hi = window
        points = [p for p in points if lo <= p.n_left <= hi]
    if len(points) < 5:
        raise DomainError(f"window holds {len(points)} points, need at least 5")
    ns = [p.n_left for p in points]
    ms = [p.m_right for p in points]
    if len(set(ns)) < 2:
        raise DomainError("n_left does not increase across the window")
    if len(set(ms)) < 2:
        raise DegenerateFitError("all m_right are equal")
    order = np.argsort(ms, kind="stable")
    fit = asymptotics.linear_fit(np.asarray(ms)[order], np.asarray(ns)[order])
    span = max(ms) - min(ms)
    return fit.slope, 2.0 * fit.residual / span


def index_profile(model: PolycycleModel, n_max: int, bits: int | None = None,
                  table: SparklingTable | None = None) -> list[tuple[int, int]]:
    """``(n, m)`` pairs: right turn count on the synchronizing curve inside left sheet ``n``.

    The left splitting is taken at the geometric midpoint of ``[eps_{n+1}, eps_n)``.
    """
    bits = bits or DEFAULT_BITS
    if table is None:
        table = sparkling_table(model.left, n_max + 1, bits=bits)
    ctx = context(bits)
    out = []
    for n in range(1, min(n_max, len(table) - 1) + 1):
        eps = ctx.sqrt(table.eps(n) * table.eps(n + 1))
        delta = synchronize(model, eps, bits)
        out.append((n, count_turns(model.right.with_eps(delta), bits=bits)))
    return out


@dataclass(frozen=True)
class FamilyComparison:
    """Index-matched comparison of two one-loop families.

    ``ratios[i] = ln(-ln eps~_{n+a}) / ln(-ln eps_n)`` and
    ``differences[i] = ln(-ln eps~_{n+a})/ln lam~ - ln(-ln eps_n)/ln lam``
    for ``n = ns[i]`` and shift ``a = index_shift``; ``kappas`` is the Hölder
    profile ``ln eps~_{n+a} / ln eps_n``.
    """

    ns: tuple
    ratios: tuple
    differences: tuple
    kappas: tuple
    index_shift: int = 0
    target_ratio: float = float("nan")

    def ratio_limit(self) -> tuple[float, float]:
        return asymptotics.limit_estimate(self.ratios)

    def difference_verdict(self, threshold: float = 4.0):
        return asymptotics.boundedness_check(self.differences, len(self.differences) // 2, threshold)

    def holder_verdict(self, threshold: float = 4.0):
        return asymptotics.boundedness_check(self.kappas, len(self.kappas) // 2, threshold)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "ratio", "difference", "kappa"])
        for row in zip(self.ns, self.ratios, self.differences, self.kappas):
            w.writerow([row[0]] + [format(v, ".17g") for v in row[1:]])
        if fh is not None:
            fh.write(buf.getvalue())
        return buf.getvalue()

    def verdicts(self) -> dict:
        value, half = self.ratio_limit()
        dv, dfac = self.difference_verdict()
        hv, hfac = self.holder_verdict()
        return {
            "index_shift": self.index_shift,
            "ratio_limit": value,
            "ratio_halfwidth": half,
            "target_ratio": self.target_ratio,
            "difference_verdict": dv,
            "difference_growth": dfac,
            "holder_verdict": hv,
            "holder_growth": hfac,
        }


def _table(family, n_hi: int, bits: int, mapper=None) -> SparklingTable:
    if isinstance(family, SparklingTable):
        if not family.entries or family.indices[-1] < n_hi:
            raise DomainError(f"table stops before n={n_hi}")
        return family
    table = sparkling_table(family, n_hi, bits=bits, mapper=mapper)
    if len(table) < n_hi:
        raise DomainError(f"family only solvable up to n={len(table)}: {table.reason}")
    return table


def compare_families(A, B, n_range: tuple[int, int], shift: int = 0, bits: int | None = None,
                     mapper=None) -> FamilyComparison:
    """Compare family ``A`` (untilded) with ``B`` (tilded) under index shift ``shift``.

    ``A`` and ``B`` are loop maps or precomputed sparkling tables; ``n_range``
    is inclusive.
    """
    lo, hi = n_range
    if lo < 1 or hi < lo or lo + shift < 1:
        raise DomainError(f"bad index range {n_range} with shift {shift}")
    bits = bits or DEFAULT_BITS
    ta = _table(A, hi, bits, mapper)
    tb = _table(B, hi + shift, bits, mapper)
    ctx = context(bits)
    lam_a = ctx.ln(ctx.mpf(ta.model.lam))
    lam_b = ctx.ln(ctx.mpf(tb.model.lam))
    ns, ratios, diffs, kappas = [], [], [], []
    for n in range(lo, hi + 1):
        la = ctx.ln(ta.eps(n))
        lb = ctx.ln(tb.eps(n + shift))
        sa, sb = ctx.ln(-la), ctx.ln(-lb)
        ns.append(n)
        ratios.append(float(sb / sa))
        diffs.append(float(sb / lam_b - sa / lam_a))
        kappas.append(float(lb / la))
    return FamilyComparison(tuple(ns), tuple(ratios), tuple(diffs), tuple(kappas), shift,
                            float(lam_b / lam_a))


def holder_profile(A, B, n_range: tuple[int, int], shift: int = 0, bits: int | None = None) -> np.ndarray:
    """``kappa_n = ln eps~_{n+a} / ln eps_n`` over the inclusive range."""
    return np.asarray(compare_families(A, B, n_range, shift, bits).kappas)


@dataclass(frozen=True)
class Curve:
    family: str  # "left", "right" or "sync"
    index: int
    points: tuple

    def to_dict(self) -> dict:
        return {"family": self.family, "index": self.index, "points": [list(p) for p in self.points]}


@dataclass(frozen=True)
class CurveSet:
    curves: tuple
    eps_range: tuple
    delta_range: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def by_family(self, family: str) -> list[Curve]:
        return [c for c in self.curves if c.family == family]

    def to_json(self) -> str:
        return json.dumps([c.to_dict() for c in self.curves])


def bifurcation_diagram(
    model: PolycycleModel,
    n_max: int = 4,
    m_max: int = 4,
    eps_range: tuple[float, float] | None = None,
    delta_range: tuple[float, float] | None = None,
    samples: int = 64,
    families: Sequence[str] = ("left", "right", "sync"),
    bits: int | None = None,
    mapper=None,
) -> CurveSet:
    """Sheets of both loops and the synchronizing curve in the ``(eps, delta)`` plane.

    Left sheets ``eps = eps_n`` are vertical lines, right sheets
    ``delta = delta_m`` horizontal ones, and the synchronizing curve is
    ``delta = c_delta * eps**(lam*rho)``.  Only ``families`` are emitted.
    """
    if model.variant != "glasses":
        raise DomainError("the diagram is drawn for glasses models")
    if model.bridge.sigma != 0:
        raise DomainError("the diagram lives in the plane sigma = 0")
    unknown = set(families) - {"left", "right", "sync"}
    if unknown:
        raise DomainError(f"unknown curve families {sorted(unknown)}")
    bits = bits or DEFAULT_BITS
    lt = sparkling_table(model.left, n_max + 1, bits=bits, mapper=mapper) if n_max > 0 else None
    rt = sparkling_table(model.right, m_max + 1, bits=bits, mapper=mapper) if m_max > 0 else None
    y_max = float(model.left.y_max)
    if eps_range is None:
        lo = float(lt.values[-1]) / 2 if lt is not None and len(lt) else 1e-6
        eps_range = (lo, y_max)
    if delta_range is None:
        lo = float(rt.values[-1]) / 2 if rt is not None and len(rt) else 1e-6
        hi = max(model.c_delta * y_max ** (model.lam * model.rho), float(rt.values[0]) * 2 if rt else 1.0)
        delta_range = (lo, hi)
    for r in (eps_range, delta_range):
        if not 0 < r[0] < r[1]:
            raise DomainError(f"bad range {r}")
    es = np.geomspace(*eps_range, samples)
    ds = np.geomspace(*delta_range, samples)
    curves: list[Curve] = []

    def _as_float(v, what):
        f = float(v)
        if f == 0.0:
            raise DomainError(f"{what} underflows double precision; lower the sheet count")
        return f

    if "left" in families and lt is not None:
        for n in range(1, min(n_max, len(lt)) + 1):
            x = _as_float(lt.eps(n), f"eps_{n}")
            curves.append(Curve("left", n, tuple((x, float(d)) for d in ds)))
    if "right" in families and rt is not None:
        for m in range(1, min(m_max, len(rt)) + 1):
            y = _as_float(rt.eps(m), f"delta_{m}")
            curves.append(Curve("right", m, tuple((float(e), y) for e in es)))
    if "sync" in families:
        d = model.delta_map()
        pts = tuple((float(e), float(dulac_apply(d, e, 53))) for e in es)
        curves.append(Curve("sync", 0, pts))
    meta = {"lam": model.lam, "rho": model.rho, "c_delta": model.c_delta}
    return CurveSet(tuple(curves), tuple(eps_range), tuple(delta_range), meta)
