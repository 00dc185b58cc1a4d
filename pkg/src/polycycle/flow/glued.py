"""A glasses polycycle glued from linear saddles and flow-box channels.

Two exact linear saddles L (eigenvalues ``1, -lam``) and R (eigenvalues
``rho, -1``) sit in disks.  Three tracks carry the connections: the loop
``l`` leaves L along +x and comes back down the +y axis, the bridge ``b``
runs from L along -x into R, and the loop ``r`` leaves R upward and returns
into R from the -x side.  Near a track the field is the unit tangent at the
nearest track point, so all parallel curves are orbits; corners are clothoid
pairs, which keeps the curvature (hence the field's derivative) continuous.
A transverse bump on one straight piece of each track shifts the orbits by
exactly the requested offset, so the splitting measured on the section after
the bump equals that offset.

Everything is blended by C^1 cutoffs: radial ones around the saddles and a
transverse one across each channel.  Away from disks and channels the field
vanishes.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import fresnel

from ..errors import DomainError, GeometryError
from .field import PlanarField, Section, fd_jacobian

__all__ = ["GluedGeometry", "GluedGlassesSpec", "GluedGlasses", "build_glued_glasses", "glued_splittings"]


def _step(t):
    """C^1 step: 0 for t <= 0, 1 for t >= 1, smoothstep in between."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return t * t * (3.0 - 2.0 * t)


def _rot(theta):
    return np.array([math.cos(theta), math.sin(theta)])


class _Segment:
    kind = "segment"

    def __init__(self, start, theta, length):
        self.p = np.asarray(start, dtype=float)
        self.theta = theta
        self.t = _rot(theta)
        self.n = np.array([-self.t[1], self.t[0]])
        self.length = length
        end = self.p + length * self.t
        self.end = end
        self.end_theta = theta
        self.lo = np.minimum(self.p, end)
        self.hi = np.maximum(self.p, end)

    def point(self, s):
        return self.p + s * self.t

    def nearest(self, q):
        s = float((q - self.p) @ self.t)
        s = min(max(s, 0.0), self.length)
        c = self.p + s * self.t
        return s, c, self.t, float(np.hypot(*(q - c)))


class _Corner:
    """Symmetric clothoid pair turning by ``turn`` over arclength ``2*half``."""

    kind = "corner"

    def __init__(self, start, theta, turn, half, samples=48):
        self.p = np.asarray(start, dtype=float)
        self.theta = theta
        self.turn = turn
        self.half = half
        self.length = 2 * half
        self.a = turn / (2 * half * half)  # heading = theta + a*s**2 on the first half
        self.end_theta = theta + turn
        self.mid = self._first(half)
        self.end = self.mid - self._back(half)
        ss = np.linspace(0.0, self.length, samples)
        self._ss = ss
        self._pts = np.array([self.point(s) for s in ss])
        self.lo = self._pts.min(axis=0)
        self.hi = self._pts.max(axis=0)

    def _first(self, s):
        # int_0^s exp(i (theta + a u^2)) du via Fresnel integrals
        k = math.sqrt(2 * abs(self.a) / math.pi)
        S, C = fresnel(s * k)
        z = complex(C, math.copysign(S, self.a)) / k * complex(math.cos(self.theta), math.sin(self.theta))
        return self.p + np.array([z.real, z.imag])

    def _back(self, r):
        # displacement from the end, walking the second half backwards for length r
        k = math.sqrt(2 * abs(self.a) / math.pi)
        S, C = fresnel(r * k)
        back = self.end_theta + math.pi
        z = complex(C, -math.copysign(S, self.a)) / k * complex(math.cos(back), math.sin(back))
        return np.array([z.real, z.imag])

    def heading(self, s):
        if s <= self.half:
            return self.theta + self.a * s * s
        r = self.length - s
        return self.end_theta - self.a * r * r

    def curvature(self, s):
        return 2 * self.a * (s if s <= self.half else self.length - s)

    def point(self, s):
        if s <= self.half:
            return self._first(s)
        return self.end + self._back(self.length - s)

    def nearest(self, q):
        d2 = np.sum((self._pts - q) ** 2, axis=1)
        s = float(self._ss[int(np.argmin(d2))])
        for _ in range(8):
            c = self.point(s)
            t = _rot(self.heading(s))
            nvec = np.array([-t[1], t[0]])
            r = q - c
            f = float(r @ t)
            fp = -1.0 + float(r @ nvec) * self.curvature(s)
            if fp == 0.0:
                break
            ds = -f / fp
            s = min(max(s + ds, 0.0), self.length)
            if abs(ds) < 1e-15 * max(1.0, self.length):
                break
        c = self.point(s)
        t = _rot(self.heading(s))
        return s, c, t, float(np.hypot(*(q - c)))


class _Track:
    """Chain of pieces built turtle-style from a start point and heading."""

    def __init__(self, name, start, theta):
        self.name = name
        self.pieces = []
        self._pos = np.asarray(start, dtype=float)
        self._theta = theta

    def straight(self, length):
        if length <= 0:
            raise GeometryError(f"track {self.name}: non-positive straight length {length}")
        seg = _Segment(self._pos, self._theta, length)
        self.pieces.append(seg)
        self._pos, self._theta = seg.end, seg.end_theta
        return seg

    def corner(self, turn, half):
        c = _Corner(self._pos, self._theta, turn, half)
        self.pieces.append(c)
        self._pos, self._theta = c.end, c.end_theta
        return c

    @property
    def position(self):
        return self._pos


def corner_extent(half: float) -> float:
    """Advance (= lateral shift) of a symmetric 90-degree clothoid corner."""
    c = _Corner((0.0, 0.0), 0.0, math.pi / 2, half)
    return float(c.end[0])


@dataclass(frozen=True)
class GluedGeometry:
    disk_radius: float = 0.3
    channel_width: float = 0.08
    centers: tuple = ((0.0, 0.0), (-1.2, 0.0))
    loop_size: float = 1.0
    corner: float = 0.15

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(tuple(map(float, c)) for c in self.centers))


@dataclass(frozen=True)
class GluedGlassesSpec:
    lam: float
    rho: float
    eps: float = 0.0
    sigma: float = 0.0
    delta: float = 0.0
    geometry: GluedGeometry = GluedGeometry()

    @classmethod
    def from_dict(cls, d: dict) -> "GluedGlassesSpec":
        g = dict(d.get("geometry", {}))
        if "centers" in g and isinstance(g["centers"], dict):
            g["centers"] = (g["centers"]["L"], g["centers"]["R"])
        return cls(d["lambda"], d["rho"], d.get("eps", 0.0), d.get("sigma", 0.0), d.get("delta", 0.0),
                   GluedGeometry(**g))

    @classmethod
    def from_json(cls, text: str) -> "GluedGlassesSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        g = asdict(self.geometry)
        g["centers"] = {"L": list(self.geometry.centers[0]), "R": list(self.geometry.centers[1])}
        return {"lambda": self.lam, "rho": self.rho, "eps": self.eps, "sigma": self.sigma,
                "delta": self.delta, "geometry": g}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class _Channel:
    track: _Track
    bump_piece: _Segment
    bump_lo: float
    bump_hi: float
    offset: float
    outward: np.ndarray

    def bump(self, piece, s):
        if piece is not self.bump_piece or self.offset == 0.0:
            return 0.0
        if not self.bump_lo < s < self.bump_hi:
            return 0.0
        ln = self.bump_hi - self.bump_lo
        z = 2 * (s - self.bump_lo) / ln - 1
        # C^1 bump with unit integral over [bump_lo, bump_hi]
        return 15.0 / (8.0 * ln) * (1 - z * z) ** 2


@dataclass
class GluedGlasses:
    """The assembled field together with its saddles, sections and branch labels."""

    spec: GluedGlassesSpec
    field: PlanarField
    L: tuple
    R: tuple
    sections: dict
    branches: dict

    def saddle_centers(self) -> dict:
        return {"L": self.L, "R": self.R}


class _GluedEvaluator:
    # callable object so that the field stays picklable and shareable

    def __init__(self, spec: GluedGlassesSpec, channels, r_in, r_out, width):
        self.L = np.asarray(spec.geometry.centers[0], dtype=float)
        self.R = np.asarray(spec.geometry.centers[1], dtype=float)
        self.AL = np.array([[1.0, 0.0], [0.0, -spec.lam]])
        # stable along the bridge axis, unstable vertically
        self.AR = np.array([[-1.0, 0.0], [0.0, spec.rho]])
        self.channels = channels
        self.r_in, self.r_out, self.width = r_in, r_out, width

    def _chi(self, q, c):
        r = float(np.hypot(*(q - c)))
        return 1.0 - _step((r - self.r_in) / (self.r_out - self.r_in))

    def _channel_field(self, q):
        w = self.width
        out = np.zeros(2)
        for ch in self.channels:
            best = None
            for piece in ch.track.pieces:
                if np.any(q < piece.lo - w) or np.any(q > piece.hi + w):
                    continue
                s, c, t, d = piece.nearest(q)
                if best is None or d < best[3]:
                    best = (s, c, t, d, piece)
            if best is None:
                continue
            s, c, t, d, piece = best
            psi = 1.0 - _step((d - 0.5 * w) / (0.5 * w))
            if psi == 0.0:
                continue
            out += psi * (t + ch.offset * ch.bump(piece, s) * ch.outward)
        return out

    def __call__(self, q, params=()):
        q = np.asarray(q, dtype=float)
        chi_l = self._chi(q, self.L)
        chi_r = self._chi(q, self.R)
        v = np.zeros(2)
        if chi_l > 0:
            v += chi_l * (self.AL @ (q - self.L))
        if chi_r > 0:
            v += chi_r * (self.AR @ (q - self.R))
        rest = 1.0 - chi_l - chi_r
        if rest > 0:
            v += rest * self._channel_field(q)
        return v

    def jacobian(self, q, params=()):
        q = np.asarray(q, dtype=float)
        if np.hypot(*(q - self.L)) <= self.r_in:
            return self.AL.copy()
        if np.hypot(*(q - self.R)) <= self.r_in:
            return self.AR.copy()
        return fd_jacobian(self, q)


def build_glued_glasses(spec: GluedGlassesSpec | dict) -> GluedGlasses:
    """Assemble the glued glasses field described by ``spec``.

    Raises :class:`GeometryError` when disks, channels or bumps would overlap.
    """
    if isinstance(spec, dict):
        spec = GluedGlassesSpec.from_dict(spec)
    if not spec.lam > 1:
        raise DomainError(f"lambda must exceed 1, got {spec.lam}")
    if not 0 < spec.rho < 1:
        raise DomainError(f"rho must lie in (0, 1), got {spec.rho}")
    g = spec.geometry
    r_out = g.disk_radius
    r_in = 0.5 * r_out
    w = g.channel_width
    size = g.loop_size
    L = np.asarray(g.centers[0], dtype=float)
    R = np.asarray(g.centers[1], dtype=float)
    D = float(L[0] - R[0])
    half_w = 0.5 * w
    for off in (spec.eps, spec.sigma, spec.delta):
        if abs(off) >= 0.25 * half_w:
            raise GeometryError(f"offset {off} too large for channel width {w}")
    if L[1] != R[1] or D <= 0:
        raise GeometryError("R must lie to the left of L on the same horizontal line")
    if w <= 0 or r_out <= 0:
        raise GeometryError("disk radius and channel width must be positive")
    if r_in <= math.sqrt(2) * w:
        raise GeometryError("channels would overlap inside the blend annulus: need disk_radius > 2*sqrt(2)*channel_width")
    e = corner_extent(g.corner)
    straight_min = size - 2 * e
    if straight_min <= r_out + 0.05 * size:
        raise GeometryError("loop too small for its corners and saddle disks")
    if D <= 2 * r_out + 2 * w:
        raise GeometryError("saddle disks too close for a bridge bump")
    if size <= 2 * w:
        raise GeometryError("loop narrower than two channel widths")

    # loop l: +x out of L, counterclockwise around [0, size]^2, back down the +y axis
    tl = _Track("l", L, 0.0)
    tl.straight(size - e)
    tl.corner(math.pi / 2, g.corner)
    tl.straight(size - 2 * e)
    tl.corner(math.pi / 2, g.corner)
    top_l = tl.straight(size - 2 * e)
    tl.corner(math.pi / 2, g.corner)
    tl.straight(size - e)
    # bridge b: -x out of L into R
    tb = _Track("b", L, math.pi)
    bridge = tb.straight(D)
    # loop r: +y out of R, counterclockwise around [-size, 0] x [0, size], back into R along +x
    tr = _Track("r", R, math.pi / 2)
    tr.straight(size - e)
    tr.corner(math.pi / 2, g.corner)
    top_r = tr.straight(size - 2 * e)
    tr.corner(math.pi / 2, g.corner)
    tr.straight(size - 2 * e)
    tr.corner(math.pi / 2, g.corner)
    tr.straight(size - e)
    for t, target in ((tl, L), (tr, R)):
        if np.hypot(*(t.position - target)) > 1e-12 * size:
            raise GeometryError(f"track {t.name} does not close ({t.position} vs {target})")

    # bumps on the first part of a straight piece; sections after them
    def layout(piece, lo, hi):
        ln = piece.length
        return lo * ln, hi * ln

    lo_l, hi_l = layout(top_l, 0.1, 0.45)
    lo_r, hi_r = layout(top_r, 0.1, 0.45)
    b_lo, b_hi = r_out + w, r_out + w + 0.35 * (D - 2 * r_out - 2 * w)
    up = np.array([0.0, 1.0])
    # the inside of both loops is below their top pieces; the bridge section points up
    channels = [
        _Channel(tl, top_l, lo_l, hi_l, spec.eps, up.copy()),
        _Channel(tb, bridge, b_lo, b_hi, spec.sigma, -up),
        _Channel(tr, top_r, lo_r, hi_r, spec.delta, up.copy()),
    ]
    ev = _GluedEvaluator(spec, channels, r_in, r_out, w)
    fld = PlanarField(ev, ev.jacobian, (), "glued-glasses")
    sections = {
        "l": Section(top_l.point(0.7 * top_l.length), (0.0, -1.0), half_w),
        "b": Section(bridge.point(b_hi + 0.5 * (D - r_out - b_hi)), (0.0, 1.0), half_w),
        "r": Section(top_r.point(0.7 * top_r.length), (0.0, -1.0), half_w),
    }
    branches = {
        "l": ("L", "unstable+", "L", "stable+"),
        "b": ("L", "unstable-", "R", "stable+"),
        "r": ("R", "unstable+", "R", "stable-"),
    }
    return GluedGlasses(spec, fld, tuple(L), tuple(R), sections, branches)


def glued_splittings(gg: GluedGlasses, tol: float = 1e-10, t_max: float = 200.0) -> dict:
    """Measured splittings ``{"l": eps, "b": sigma, "r": delta}``."""
    from .saddle import find_saddle, splitting

    saddles = {"L": find_saddle(gg.field, gg.L), "R": find_saddle(gg.field, gg.R)}
    out = {}
    for key, (su, bu, ss, bs) in gg.branches.items():
        out[key] = splitting(gg.field, saddles[su], gg.sections[key], bu, bs,
                             t_max=t_max, tol=tol, stable_saddle=saddles[ss])
    return out
