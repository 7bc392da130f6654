"""Rate-distortion optimised truncation baseline.

Unlike the blind transcoder, this allocator sees everything: it decodes each
block's embedded string at every bit-plane boundary, measures the resulting
distortion against the original coefficients, and picks per-block truncation
points on the convex hull of the (rate, distortion) curves.  A bisection on
the Lagrange multiplier finds the largest total rate that fits the budget.

Distortion is measured in the pixel domain up to the standard additivity
approximation: per-band synthesis energy gains are computed numerically from
unit impulses and multiply the coefficient-domain squared error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvariantError
from .quantizer import dequantize
from .spiht.codec import CodedBlock, decode_block
from .wavelet import SubbandPyramid, band_shapes, block_secondary_idwt, inverse_dwt


@dataclass(frozen=True)
class RDPoint:
    """Truncating a block after `planes` bit planes costs `rate_bits` and
    leaves `distortion` (weighted squared error)."""

    planes: int
    rate_bits: int
    distortion: float


@lru_cache(maxsize=None)
def synthesis_gain(levels: int, kind: str, level: int) -> float:
    """Energy a unit coefficient of band (kind, level) injects into pixels.

    Measured directly: synthesize an impulse placed away from the band
    borders and sum the squared samples.
    """
    side = max(64, 1 << (levels + 3))
    shapes = band_shapes((side, side), levels)
    pyr = SubbandPyramid(
        levels=levels,
        shape=(side, side),
        ll=np.zeros(shapes[("LL", levels)]),
        details={key: np.zeros(shp) for key, shp in shapes.items() if key[0] != "LL"},
    )
    band = pyr.band(kind, level)
    band[band.shape[0] // 2, band.shape[1] // 2] = 1.0
    img = inverse_dwt(pyr)
    return float(np.sum(img * img))


def block_rd_points(cb: CodedBlock, reference: np.ndarray, delta: int) -> list[RDPoint]:
    """Measured (rate, distortion) at every plane boundary of one block.

    `reference` is the block's float coefficient grid in the sub-band domain
    (before the secondary transform and quantization).
    """
    gain = synthesis_gain_for_block(cb)
    points: list[RDPoint] = []
    for planes in range(cb.n_planes + 1):
        bits = cb.prefix_bits(planes)
        q = decode_block(cb, n_bits=bits)
        rec = dequantize(q, delta)
        if cb.secondary:
            rec = block_secondary_idwt(rec)
        err = reference - rec
        points.append(RDPoint(planes, bits, gain * float(np.sum(err * err))))
    return points


def synthesis_gain_for_block(cb: CodedBlock) -> float:
    """Pixel-energy weight for squared error in block `cb`'s band.

    A level-l coefficient passes through l synthesis stages regardless of how
    much deeper the pyramid goes, so an l-level impulse measurement suffices.
    """
    return synthesis_gain(cb.level, cb.band, cb.level)


def prune_hull(points: list[RDPoint]) -> list[RDPoint]:
    """Lower convex hull of an RD curve: strictly decreasing positive slopes."""
    if not points:
        raise InvariantError("a block always has the zero-rate point")
    hull = [points[0]]
    for p in points[1:]:
        if p.rate_bits == hull[-1].rate_bits or p.distortion >= hull[-1].distortion:
            continue
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            s_last = (a.distortion - b.distortion) / (b.rate_bits - a.rate_bits)
            s_new = (b.distortion - p.distortion) / (p.rate_bits - b.rate_bits)
            if s_new >= s_last:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def select_for_lambda(hull: list[RDPoint], lam: float) -> RDPoint:
    """Deepest hull point whose marginal distortion drop beats 1/lambda."""
    if lam <= 0.0:
        return hull[0]
    threshold = 1.0 / lam
    pick = hull[0]
    for a, b in zip(hull, hull[1:]):
        slope = (a.distortion - b.distortion) / (b.rate_bits - a.rate_bits)
        if slope > threshold:
            pick = b
        else:
            break
    return pick


def _slope_range(hulls: dict[int, list[RDPoint]]) -> tuple[float, float]:
    lo, hi = math.inf, 0.0
    for hull in hulls.values():
        for a, b in zip(hull, hull[1:]):
            s = (a.distortion - b.distortion) / (b.rate_bits - a.rate_bits)
            lo = min(lo, s)
            hi = max(hi, s)
    return lo, hi


def bisect_lambda(
    hulls: dict[int, list[RDPoint]], budget_bits: int, max_iter: int = 64
) -> tuple[float, dict[int, RDPoint]]:
    """Largest-rate Lagrangian selection with total rate <= budget_bits."""
    if budget_bits < 0:
        raise InvariantError("bit budget must be non-negative")

    def select(lam: float) -> dict[int, RDPoint]:
        return {i: select_for_lambda(h, lam) for i, h in hulls.items()}

    def rate(sel: dict[int, RDPoint]) -> int:
        return sum(p.rate_bits for p in sel.values())

    s_min, s_max = _slope_range(hulls)
    if not math.isfinite(s_min):  # every hull is the single zero point
        return 0.0, select(0.0)
    lam_hi = 2.0 / s_min
    if rate(select(lam_hi)) <= budget_bits:
        return lam_hi, select(lam_hi)
    lam_lo = 0.5 / s_max  # threshold above every slope: selects nothing
    for _ in range(max_iter):
        lam_mid = math.sqrt(lam_lo * lam_hi)
        if rate(select(lam_mid)) <= budget_bits:
            lam_lo = lam_mid
        else:
            lam_hi = lam_mid
    return lam_lo, select(lam_lo)


def compute_hulls(
    blocks: list[CodedBlock], references: list[np.ndarray], deltas: list[int]
) -> dict[int, list[RDPoint]]:
    """Pruned RD hull of every block, keyed by block index.

    Hulls depend only on the full-quality stream, so one computation serves
    any number of budgets.
    """
    return {
        cb.index: prune_hull(block_rd_points(cb, ref, delta))
        for cb, ref, delta in zip(blocks, references, deltas)
    }


def allocate(hulls: dict[int, list[RDPoint]], budget_bits: int) -> tuple[dict[int, int], dict]:
    """Per-block truncation bits minimising distortion within the budget."""
    lam, selection = bisect_lambda(hulls, budget_bits)
    bits = {i: p.rate_bits for i, p in selection.items()}
    info = {
        "lambda": lam,
        "budget_bits": budget_bits,
        "achieved_bits": sum(bits.values()),
        "planes": {i: p.planes for i, p in selection.items()},
    }
    return bits, info


def optimize_truncation(
    blocks: list[CodedBlock],
    references: list[np.ndarray],
    deltas: list[int],
    budget_bits: int,
) -> tuple[dict[int, int], dict]:
    """One-shot convenience: compute hulls, then allocate for one budget."""
    return allocate(compute_hulls(blocks, references, deltas), budget_bits)
