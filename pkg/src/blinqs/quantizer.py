"""Sub-band-adaptive scalar quantisation.

Detail bands at level b get step delta = min(2 + (levels - b), delta_max), so
the coarsest detail level starts at 2 and each finer level adds 1 until the
cap; the LL band always uses delta = 1 (plain rounding).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantError


@dataclass(frozen=True)
class DeltaSchedule:
    """Per-band quantisation steps for one decomposition."""

    levels: int
    delta_max: int
    ll: int
    detail: dict[int, int]  # level -> delta

    def for_band(self, band: str, level: int) -> int:
        if band == "LL":
            return self.ll
        return self.detail[level]


def compute_delta_schedule(levels: int, delta_max: int) -> DeltaSchedule:
    if levels < 1:
        raise InvariantError("levels must be >= 1")
    if delta_max < 1:
        raise InvariantError("delta_max must be >= 1")
    detail = {b: min(2 + (levels - b), delta_max) for b in range(1, levels + 1)}
    return DeltaSchedule(levels=levels, delta_max=delta_max, ll=1, detail=detail)


def quantize(coeffs: np.ndarray, delta: int) -> np.ndarray:
    """Map coefficients to signed integers.

    delta == 1 rounds half away from zero; larger steps divide then truncate
    toward zero (deadzone around 0 of width 2*delta).
    """
    if delta < 1:
        raise InvariantError("delta must be >= 1")
    c = np.asarray(coeffs, dtype=np.float64)
    if delta == 1:
        q = np.sign(c) * np.floor(np.abs(c) + 0.5)
    else:
        q = np.trunc(c / delta)
    return q.astype(np.int32)


def dequantize(q: np.ndarray, delta: int, midpoint: bool = True) -> np.ndarray:
    """Map quantised integers back to coefficient values.

    With `midpoint` (default) nonzero bins reconstruct at their centre:
    (q + 0.5*sign(q)) * delta for delta > 1.  For delta == 1 the bin of q is
    [q-0.5, q+0.5), whose centre is q itself, so the value is returned
    unchanged (keeps the roundtrip error strictly below delta).
    """
    if delta < 1:
        raise InvariantError("delta must be >= 1")
    qf = np.asarray(q, dtype=np.float64)
    if not midpoint or delta == 1:
        return qf * delta
    return (qf + 0.5 * np.sign(qf)) * delta
