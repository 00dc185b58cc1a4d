"""Configurable-precision scalars.

Scalars are ``mpmath`` floats bound to a per-precision context.  Contexts are
cached and never mutated after creation, so they can be shared by threads.
"""
from __future__ import annotations

import copyreg
import functools
import math
import os

import mpmath

__all__ = ["DEFAULT_BITS", "context", "scalar", "bits_of", "default_bits", "to_float"]


def default_bits() -> int:
    """Default mantissa bits, overridable with ``POLYCYCLE_BITS``."""
    raw = os.environ.get("POLYCYCLE_BITS")
    if raw is None:
        return 256
    bits = int(raw)
    if bits < 53:
        raise ValueError(f"POLYCYCLE_BITS must be >= 53, got {bits}")
    return bits


DEFAULT_BITS = default_bits()


@functools.lru_cache(maxsize=None)
def context(bits: int) -> mpmath.ctx_mp.MPContext:
    """Return the shared context with ``bits`` mantissa bits."""
    bits = int(bits)
    if bits < 53:
        raise ValueError(f"precision must be at least 53 bits, got {bits}")
    ctx = mpmath.MPContext()
    ctx.prec = bits
    # each context has its own mpf class; teach pickle to rebuild values in
    # the matching context so they can cross process boundaries
    copyreg.pickle(ctx.mpf, _reduce_mpf)
    return ctx


def _rebuild_mpf(bits: int, raw):
    return context(bits).make_mpf(raw)


def _reduce_mpf(x):
    return _rebuild_mpf, (x.context.prec, x._mpf_)


def bits_of(x, fallback: int | None = None) -> int:
    """Precision carried by ``x`` (an mpf), else ``fallback`` or the default."""
    ctx = getattr(x, "context", None)
    if ctx is not None and hasattr(ctx, "prec"):
        return ctx.prec
    return DEFAULT_BITS if fallback is None else fallback


def scalar(value, bits: int | None = None):
    """Convert ``value`` (float, int, str or mpf) to a Scalar of ``bits`` bits.

    Floats convert exactly; strings are parsed at the target precision.
    """
    if bits is None:
        bits = bits_of(value)
    return context(bits).mpf(value)


def to_float(x) -> float:
    return float(x)


def log2_ceil(x: float) -> int:
    return int(math.ceil(math.log2(max(x, 1.0))))
