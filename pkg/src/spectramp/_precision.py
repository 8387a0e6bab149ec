"""Working-precision policy.

binary64 is the default everywhere.  Phase synthesis (and, on request,
certificate evaluation) can run through mpmath with a configurable number of
decimal digits; the environment variable SPECTRAMP_PRECISION in {"f64",
"extended"} forces one mode globally.
"""

from __future__ import annotations

import os

import mpmath

_DEFAULT_DIGITS = 40


def precision_mode() -> str:
    mode = os.environ.get("SPECTRAMP_PRECISION", "auto").lower()
    if mode not in ("auto", "f64", "extended"):
        raise ValueError(f"SPECTRAMP_PRECISION must be 'f64' or 'extended', got {mode!r}")
    return mode


def extended_digits(n_hint: int = 0) -> int:
    """Decimal digits for the extended path; grows with problem size."""
    return max(_DEFAULT_DIGITS, 25 + n_hint // 3)


def mp_context(digits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.mp.clone()
    ctx.dps = digits
    return ctx
