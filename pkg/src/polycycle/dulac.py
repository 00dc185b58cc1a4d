"""One-dimensional maps near a saddle loop.

Power-law correspondence maps of hyperbolic saddles, the return map of a
broken saddle loop on a cross-section, turn counting for the winding
separatrix, and the sparkling-connection solver.

Section coordinates put the first hit S of the stable separatrix at ``y = 0``
and are positive on the side of the winding separatrix, so a broken loop
returns ``y`` to ``c * y**lam - eps`` and an iterate in ``[-eps, 0)`` has
escaped through the gap between U and S.

All arithmetic runs in :mod:`mpmath` at a configurable precision; the splitting
values decay doubly exponentially and underflow doubles after a handful of
turns.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple, Sequence

from .errors import (
    ConvergenceError,
    DomainError,
    ExistenceError,
    NonPositiveSplitting,
    OrbitOverflowError,
    PolycycleError,
    PrecisionError,
    TurnCapError,
)
from .precision import DEFAULT_BITS, bits_of, context, log2_ceil

__all__ = [
    "DulacMap",
    "LoopReturnMap",
    "OrbitResult",
    "SparklingTable",
    "compose_dulac",
    "count_turns",
    "default_tol",
    "dulac_apply",
    "loop_iterate",
    "read_sparkling_csv",
    "solve_sparkling",
    "sparkling_table",
]

DEFAULT_TURN_CAP = 100_000


def _exponent(ctx, e):
    # integer powers are much cheaper and exact in mpmath
    fe = float(e)
    if fe.is_integer() and abs(fe) < 2**31 and ctx.mpf(e) == int(fe):
        return int(fe)
    return ctx.mpf(e)


def default_tol(bits: int) -> float:
    """Default relative bisection tolerance ``2**-(bits - 32)``."""
    return 2.0 ** -(bits - 32)


@dataclass(frozen=True)
class DulacMap:
    """Correspondence map ``x -> c * x**mu * (1 + a*x)`` on ``(0, x_max]``.

    ``a`` is the optional regular-part perturbation; ``a = 0`` gives the pure
    power law.
    """

    mu: float
    c: float
    x_max: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        for name in ("mu", "c", "x_max"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    def __call__(self, x, bits: int | None = None):
        return dulac_apply(self, x, bits)


def dulac_apply(m: DulacMap, x, bits: int | None = None):
    """Evaluate the correspondence map at ``x``; raises DomainError off ``(0, x_max]``."""
    ctx = context(bits or bits_of(x))
    x = ctx.mpf(x)
    if not (0 < x <= ctx.mpf(m.x_max)):
        raise DomainError(f"x={x} outside (0, {m.x_max}]")
    y = ctx.mpf(m.c) * x ** _exponent(ctx, m.mu)
    if m.a:
        y *= 1 + ctx.mpf(m.a) * x
    return y


def compose_dulac(first: DulacMap, second: DulacMap) -> DulacMap:
    """Return ``second o first`` as a single power law.

    Exponents multiply; the coefficient is ``c2 * c1**mu2``.  The domain is the
    part of ``first``'s domain that ``first`` maps into ``second``'s domain.
    Only pure power laws compose in closed form.
    """
    if first.a or second.a:
        raise DomainError("closed-form composition needs unperturbed maps (a = 0)")
    image_top = first.c * first.x_max**first.mu
    if not image_top > 0 or not second.x_max > 0:
        raise DomainError("image of first map misses the domain of the second")
    x_max = min(first.x_max, (second.x_max / first.c) ** (1 / first.mu))
    return DulacMap(first.mu * second.mu, second.c * first.c**second.mu, x_max)


@dataclass(frozen=True)
class LoopReturnMap:
    """Return map ``y -> c * y**lam * (1 + a*y) - eps`` of a broken saddle loop.

    ``p0`` is the marked entry point of the winding separatrix and ``y_max``
    the half-width of the section.  ``eps`` may be any real; numbers too small
    for a double should be passed as strings or mpf values.
    """

    lam: float
    c: float = 1.0
    eps: object = 0.0
    p0: float = 0.5
    y_max: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if not self.lam > 1:
            raise DomainError(f"characteristic number must exceed 1, got {self.lam}")
        if not self.c > 0:
            raise DomainError(f"coefficient must be positive, got {self.c}")
        if not self.y_max > 0:
            raise DomainError(f"y_max must be positive, got {self.y_max}")
        if not self.p0 > 0:
            raise DomainError(f"p0 must be positive, got {self.p0}")

    def with_eps(self, eps) -> "LoopReturnMap":
        return replace(self, eps=eps)

    def __call__(self, y, bits: int | None = None):
        ctx = context(bits or bits_of(y))
        return _Kernel(self, ctx.prec).step0(ctx.mpf(y)) - ctx.mpf(self.eps)

    @property
    def repelling_point(self) -> float:
        """Fixed point of the unbroken map; orbits starting below it wind onto the loop."""
        return self.c ** (-1.0 / (self.lam - 1.0))


class _Kernel:
    """Model constants converted once to a working context."""

    __slots__ = ("ctx", "c", "e", "a", "p0", "y_max")

    def __init__(self, g: LoopReturnMap, bits: int):
        ctx = context(bits)
        self.ctx = ctx
        self.c = ctx.mpf(g.c)
        self.e = _exponent(ctx, g.lam)
        self.a = ctx.mpf(g.a) if g.a else None
        self.p0 = ctx.mpf(g.p0)
        self.y_max = ctx.mpf(g.y_max)

    def step0(self, y):
        v = self.c * y**self.e
        if self.a is not None:
            v *= 1 + self.a * y
        return v


class OrbitResult(NamedTuple):
    """Outcome of :func:`loop_iterate`.

    ``turns`` is the number of applications performed; when ``escaped`` is true
    ``value`` is the first non-positive iterate and ``turns`` its index.
    """

    value: object
    turns: int
    escaped: bool


def loop_iterate(g: LoopReturnMap, y, n: int, bits: int | None = None) -> OrbitResult:
    """Apply the return map ``n`` times to ``y``, stopping at the first escape."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    k = _Kernel(g, bits or bits_of(y))
    ctx = k.ctx
    y = ctx.mpf(y)
    eps = ctx.mpf(g.eps)
    if not (0 < y <= k.y_max):
        raise DomainError(f"y={y} outside (0, {g.y_max}]")
    for turn in range(1, n + 1):
        y = k.step0(y) - eps
        if y <= 0:
            return OrbitResult(y, turn, True)
        if y > k.y_max:
            raise OrbitOverflowError(f"iterate {turn} = {y} exceeds y_max={g.y_max}")
    return OrbitResult(y, n, False)


def _count(k: _Kernel, eps, cap: int) -> int:
    y = k.p0
    turns = 0
    while True:
        y = k.step0(y) - eps
        if y <= 0:
            return turns
        turns += 1
        if y > k.y_max:
            raise OrbitOverflowError(f"orbit left the annulus after {turns} turns (y={y})")
        if turns > cap:
            raise TurnCapError(f"more than {cap} turns; eps too close to 0 for this precision")


def count_turns(g: LoopReturnMap, cap: int = DEFAULT_TURN_CAP, bits: int | None = None) -> int:
    """Number of full turns of the winding orbit before it escapes.

    ``N = max{n >= 0 : g^n(p0) > 0}``, equivalently ``eps_{N+1} <= eps < eps_N``
    with ``eps_0 = +inf``.  Relative rounding errors grow by a factor ``lam``
    per turn, so the orbit is recomputed with enough guard bits to make the
    count exact.
    """
    bits = bits or bits_of(g.eps)
    eps = context(bits).mpf(g.eps)
    if eps <= 0:
        raise NonPositiveSplitting(g.eps, "loop" if eps == 0 else "cycle")
    if not g.p0 < g.y_max:
        raise DomainError(f"p0={g.p0} must lie below y_max={g.y_max}")
    per_turn = math.log2(float(g.lam))
    guard = 64
    while True:
        k = _Kernel(g, bits + guard)
        n = _count(k, k.ctx.mpf(eps), cap)
        needed = int(math.ceil(n * per_turn)) + 48
        if needed <= guard:
            return n
        guard = needed + 16


# sentinel residuals: orbit escaped before the last turn / left the annulus upward
_NEG = (-1, None)
_POS = (1, None)


def _residual(k: _Kernel, u, n: int):
    """Sign and log-residual of ``g^n(p0)`` at ``eps = exp(u)``.

    The value ``ln(c*y_{n-1}**lam) - u`` has the sign of ``g^n(p0)`` and is
    close to linear in ``u``, which keeps regula falsi fast.
    """
    ctx = k.ctx
    eps = ctx.exp(u)
    y = k.p0
    for _ in range(n - 1):
        y = k.step0(y) - eps
        if y <= 0:
            return _NEG
        if y > k.y_max:
            return _POS
    h = ctx.ln(k.step0(y)) - u
    if h > 0:
        return (1, h)
    if h < 0:
        return (-1, h)
    return (0, h)


def _guard_bits(g: LoopReturnMap, n: int) -> int:
    spread = 1 + abs(math.log(float(g.p0))) + abs(math.log(float(g.c))) + abs(math.log(float(g.y_max)))
    return int(math.ceil(n * math.log2(float(g.lam)))) + log2_ceil(spread) + 24


def solve_sparkling(
    g: LoopReturnMap,
    n: int,
    tol: float | None = None,
    bits: int | None = None,
    upper=None,
):
    """Splitting ``eps_n > 0`` for which the winding orbit hits S after ``n`` turns.

    ``g.eps`` is ignored.  ``eps -> g^n(p0)`` is strictly decreasing, so the
    root is bracketed and refined by a safeguarded regula falsi (Illinois
    variant, with bisection fallback) on ``u = ln eps``; the bracket width in
    ``u`` is the relative accuracy in ``eps``.  ``upper``, if given, must be a
    splitting known to lie above the root (e.g. ``eps_{n-1}``).

    Returns an mpf at ``bits`` precision.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    bits = bits or DEFAULT_BITS
    tol = default_tol(bits) if tol is None else float(tol)
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    if not g.p0 < g.y_max:
        raise ExistenceError(f"p0={g.p0} must lie below y_max={g.y_max}")
    k = _Kernel(g, bits + _guard_bits(g, n))
    ctx = k.ctx

    first = k.step0(k.p0)
    if n == 1:
        u_hi, u_lo = ctx.ln(first) + 1, ctx.ln(first) - 1
    else:
        u_hi = ctx.ln(first)
        y = k.p0
        for _ in range(n):
            y = k.step0(y)
            if not (0 < y <= k.y_max):
                break
        else:
            u_hi = min(u_hi, ctx.ln(y))
        if upper is not None:
            u_hi = min(u_hi, ctx.ln(ctx.mpf(upper)))
        u_lo = u_hi - 1

    s_hi, f_hi = _residual(k, u_hi, n)
    if s_hi == 0:
        return context(bits).mpf(ctx.exp(u_hi))
    if s_hi > 0:
        raise ConvergenceError(f"upper bracket for n={n} is not above the root")
    step = ctx.mpf(1)
    for _ in range(4 * ctx.prec):
        s_lo, f_lo = _residual(k, u_lo, n)
        if s_lo > 0:
            break
        if s_lo == 0:
            return context(bits).mpf(ctx.exp(u_lo))
        u_hi, f_hi = u_lo, f_hi if f_lo is None else f_lo
        step *= 2
        u_lo = u_hi - step
    else:
        raise ExistenceError(f"no connection with {n} turns found")

    u = _bracket_solve(k, n, u_lo, f_lo, u_hi, f_hi, tol)
    return context(bits).mpf(ctx.exp(u))


def _bracket_solve(k, n, u_lo, f_lo, u_hi, f_hi, tol):
    ctx = k.ctx
    tol = ctx.mpf(tol)
    margin = tol / 4
    side = 0
    width_before = u_hi - u_lo
    stalls = 0
    for _ in range(20 * ctx.prec):
        width = u_hi - u_lo
        if width <= tol:
            return (u_lo + u_hi) / 2
        if stalls >= 2 or f_lo is None or f_hi is None:
            u = (u_lo + u_hi) / 2
            stalls = 0
        else:
            u = (u_lo * f_hi - u_hi * f_lo) / (f_hi - f_lo)
        u = min(max(u, u_lo + margin), u_hi - margin)
        if not (u_lo < u < u_hi):
            raise PrecisionError(
                f"bracket [{u_lo}, {u_hi}] collapsed below representable spacing before tol={tol}"
            )
        s, f = _residual(k, u, n)
        if s == 0:
            return u
        if s > 0:
            u_lo, f_lo = u, f
            if side > 0 and f_hi is not None:
                f_hi /= 2
            side = 1
        else:
            u_hi, f_hi = u, f
            if side < 0 and f_lo is not None:
                f_lo /= 2
            side = -1
        if u_hi - u_lo > width_before / 2:
            stalls += 1
        else:
            stalls = 0
            width_before = u_hi - u_lo
    raise ConvergenceError("sparkling solver exceeded its iteration budget")


@dataclass(frozen=True)
class SparklingTable:
    """Splittings ``eps_n`` of the sparkling connections, ``n = 1, 2, ...``."""

    model: LoopReturnMap
    entries: tuple = ()
    bits: int = DEFAULT_BITS
    tol: float = 0.0
    truncated: bool = False
    reason: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.entries)

    @property
    def indices(self) -> list[int]:
        return [n for n, _ in self.entries]

    @property
    def values(self) -> list:
        return [e for _, e in self.entries]

    def eps(self, n: int):
        lo = self.entries[0][0]
        return self.entries[n - lo][1]

    def ln_neg_ln(self) -> list:
        """``ln(-ln eps_n)``; NaN for splittings at or above 1."""
        ctx = context(self.bits)
        return [ctx.ln(-ctx.ln(e)) if e < 1 else ctx.nan for _, e in self.entries]

    def bracket_index(self, eps) -> int:
        """Turn count implied by the table: ``N`` with ``eps_{N+1} <= eps < eps_N``."""
        ctx = context(self.bits)
        eps = ctx.mpf(eps)
        if not self.entries or eps < self.entries[-1][1]:
            raise DomainError("eps below the last tabulated splitting")
        n = 0
        for idx, e in self.entries:
            if eps < e:
                n = idx
            else:
                break
        return n

    def to_csv(self, fh=None) -> str:
        """Write ``n,eps,ln_neg_ln_eps`` rows; returns the text."""
        digits = int(math.ceil(self.bits * math.log10(2))) + 1
        ctx = context(self.bits)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "eps", "ln_neg_ln_eps"])
        for (n, e), s in zip(self.entries, self.ln_neg_ln()):
            w.writerow([n, ctx.nstr(e, digits, min_fixed=0, max_fixed=0, strip_zeros=False),
                        format(float(s), ".17g")])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def read_sparkling_csv(text: str, bits: int = DEFAULT_BITS) -> list[tuple]:
    """Parse the CSV written by :meth:`SparklingTable.to_csv` into ``(n, eps)`` pairs."""
    ctx = context(bits)
    rows = list(csv.DictReader(io.StringIO(text)))
    return [(int(r["n"]), ctx.mpf(r["eps"])) for r in rows]


def _solve_verified(g: LoopReturnMap, n: int, tol: float, bits: int, upper=None):
    eps = solve_sparkling(g, n, tol, bits, upper=upper)
    _verify(g, n, eps, tol, bits)
    return eps


def _solve_task(args):
    # picklable worker entry point; failures travel back as values
    g, n, tol, bits = args
    try:
        return _solve_verified(g, n, tol, bits)
    except PolycycleError as exc:
        return exc


def sparkling_table(
    g: LoopReturnMap,
    n_max: int,
    tol: float | None = None,
    bits: int | None = None,
    start: int = 1,
    mapper=None,
) -> SparklingTable:
    """Solve ``eps_n`` for ``n = start..n_max`` and verify each by iteration.

    A solver failure truncates the table at the last good index, sets
    ``truncated`` and emits a warning instead of raising.

    By default each solve reuses ``eps_{n-1}`` as an upper bracket.  With a
    ``mapper`` (any ordered ``map``, e.g. ``Executor.map``) every index is
    solved as an independent task instead; the table is then the same for
    every mapper.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    bits = bits or DEFAULT_BITS
    tol = default_tol(bits) if tol is None else float(tol)
    ns = range(start, n_max + 1)
    if mapper is not None:
        results = iter(mapper(_solve_task, [(g, n, tol, bits) for n in ns]))
    entries: list[tuple] = []
    prev = None
    reason = ""
    for n in ns:
        if mapper is not None:
            eps = next(results)
        else:
            try:
                eps = _solve_verified(g, n, tol, bits, upper=prev)
            except PolycycleError as exc:
                eps = exc
        if isinstance(eps, PolycycleError):
            reason = f"n={n}: {eps}"
            warnings.warn(f"sparkling table truncated at n={n - 1}: {eps}", RuntimeWarning, stacklevel=2)
            break
        if prev is not None and not eps < prev:
            reason = f"n={n}: non-decreasing splitting"
            warnings.warn(f"sparkling table truncated at n={n - 1}: {reason}", RuntimeWarning, stacklevel=2)
            break
        entries.append((n, eps))
        prev = eps
    return SparklingTable(g, tuple(entries), bits, tol, truncated=bool(reason), reason=reason)


def _verify(g, n, eps, tol, bits):
    # the orbit must survive n turns just below eps_n and be dead by turn n just above it
    work = bits + _guard_bits(g, n)
    ctx = context(work)
    eps = ctx.mpf(eps)
    below = loop_iterate(g.with_eps(eps * (1 - ctx.mpf(tol))), g.p0, n, bits=work)
    above = loop_iterate(g.with_eps(eps * (1 + ctx.mpf(tol))), g.p0, n, bits=work)
    if below.escaped or not above.escaped or above.turns < n - 1:
        raise ConvergenceError(
            f"eps_{n} failed verification: below={below.value} ({below.turns} turns), "
            f"above={above.value} ({above.turns} turns)"
        )


def table_from_pairs(model: LoopReturnMap, pairs: Sequence[tuple], bits: int = DEFAULT_BITS) -> SparklingTable:
    return SparklingTable(model, tuple(pairs), bits, default_tol(bits))
