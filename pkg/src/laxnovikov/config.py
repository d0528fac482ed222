"""Precision settings shared by the numeric modules."""

from __future__ import annotations

import os

import mpmath

DEFAULT_PRECISION_BITS = 128
PRECISION_ENV = "LAXNOVIKOV_PRECISION_BITS"
MIN_PRECISION_BITS = 53


def precision_bits(override: int | None = None) -> int:
    """Explicit value, else the environment override, else the default."""
    if override is None:
        env = os.environ.get(PRECISION_ENV)
        override = int(env) if env else DEFAULT_PRECISION_BITS
    bits = int(override)
    if bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision must be at least {MIN_PRECISION_BITS} bits, got {bits}")
    return bits


def make_context(bits: int | None = None) -> mpmath.MPContext:
    """A private mpmath context, so callers never touch the global mp state."""
    ctx = mpmath.MPContext()
    ctx.prec = precision_bits(bits)
    return ctx
