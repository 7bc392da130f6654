"""Biorthogonal 4.4 (CDF 9/7) wavelet transform and code-block partitioning.

The 1-D transform is implemented with the lifting scheme and whole-sample
symmetric boundary extension; it matches direct convolution with the
published 9/7 analysis taps (sqrt(2)-normalised lowpass) to rounding error.
Low-pass output keeps ceil(n/2) samples, high-pass floor(n/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError

# Lifting constants for the irreversible 9/7 filter pair.
ALPHA = -1.586134342059924
BETA = -0.052980118572961
GAMMA = 0.882911075530934
DELTA = 0.443506852043971
_K = 1.230174104914001
SQRT2 = math.sqrt(2.0)
# Output scaling chosen so the analysis lowpass has DC gain sqrt(2)
# (the usual bior4.4 normalisation; synthesis basis norms are then ~1).
SCALE_LO = SQRT2 / _K
SCALE_HI = _K / SQRT2

LEVEL_SHIFT = 127.0

DETAIL_KINDS = ("HL", "LH", "HH")


def level_shift(img: np.ndarray) -> np.ndarray:
    """Centre 8-bit samples around zero: float grid of img - 127."""
    return np.asarray(img, dtype=np.float64) - LEVEL_SHIFT


def level_unshift(grid: np.ndarray) -> np.ndarray:
    """Undo `level_shift`, clamp to [0, 255] and round to uint8."""
    out = np.asarray(grid, dtype=np.float64) + LEVEL_SHIFT
    return np.clip(np.rint(out), 0.0, 255.0).astype(np.uint8)


def _sym_indices(lo: int, hi: int, n: int) -> np.ndarray:
    """Whole-sample symmetric index map for positions lo..hi-1 of a length-n signal."""
    idx = np.arange(lo, hi)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * n - 2
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def _analyze_1d(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One lifting level along the last axis; returns (low, high)."""
    n = a.shape[-1]
    if n == 1:
        return a * SQRT2, a[..., :0]
    ext = a[..., _sym_indices(-4, n + 4, n)]
    even = ext[..., 0::2]
    odd = ext[..., 1::2]
    ne, no = even.shape[-1], odd.shape[-1]

    k = min(no, ne - 1)
    odd[..., :k] += ALPHA * (even[..., :k] + even[..., 1 : k + 1])
    t = min(ne - 1, no - 1)
    even[..., 1 : t + 1] += BETA * (odd[..., :t] + odd[..., 1 : t + 1])
    odd[..., :k] += GAMMA * (even[..., :k] + even[..., 1 : k + 1])
    even[..., 1 : t + 1] += DELTA * (odd[..., :t] + odd[..., 1 : t + 1])

    nlo = (n + 1) // 2
    nhi = n // 2
    low = SCALE_LO * even[..., 2 : 2 + nlo]
    high = SCALE_HI * odd[..., 2 : 2 + nhi]
    return low, high


def _synthesize_1d(low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Inverse of `_analyze_1d`; returns the length-n signal."""
    nlo = low.shape[-1]
    nhi = high.shape[-1]
    n = nlo + nhi
    if n == 1:
        return low / SQRT2
    z = np.empty(low.shape[:-1] + (n,), dtype=np.result_type(low, high, np.float64))
    z[..., 0::2] = low / SCALE_LO
    z[..., 1::2] = high / SCALE_HI

    ext = z[..., _sym_indices(-4, n + 4, n)]
    even = ext[..., 0::2]
    odd = ext[..., 1::2]
    ne, no = even.shape[-1], odd.shape[-1]
    k = min(no, ne - 1)
    t = min(ne - 1, no - 1)

    even[..., 1 : t + 1] -= DELTA * (odd[..., :t] + odd[..., 1 : t + 1])
    odd[..., :k] -= GAMMA * (even[..., :k] + even[..., 1 : k + 1])
    even[..., 1 : t + 1] -= BETA * (odd[..., :t] + odd[..., 1 : t + 1])
    odd[..., :k] -= ALPHA * (even[..., :k] + even[..., 1 : k + 1])

    return ext[..., 4 : 4 + n]


def _analyze_2d(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Single separable 2-D level; returns (ll, hl, lh, hh)."""
    lo_c, hi_c = _analyze_1d(grid)  # along columns (horizontal filtering)
    ll, lh = _analyze_1d(lo_c.swapaxes(-1, -2))
    hl, hh = _analyze_1d(hi_c.swapaxes(-1, -2))
    return (
        ll.swapaxes(-1, -2),
        hl.swapaxes(-1, -2),
        lh.swapaxes(-1, -2),
        hh.swapaxes(-1, -2),
    )


def _synthesize_2d(
    ll: np.ndarray, hl: np.ndarray, lh: np.ndarray, hh: np.ndarray
) -> np.ndarray:
    lo_c = _synthesize_1d(ll.swapaxes(-1, -2), lh.swapaxes(-1, -2)).swapaxes(-1, -2)
    hi_c = _synthesize_1d(hl.swapaxes(-1, -2), hh.swapaxes(-1, -2)).swapaxes(-1, -2)
    return _synthesize_1d(lo_c, hi_c)


@dataclass
class SubbandPyramid:
    """Multi-level 2-D decomposition: one LL band plus HL/LH/HH per level.

    `level` counts from 1 (finest) to `levels` (coarsest); the LL band lives
    at the coarsest level.
    """

    levels: int
    shape: tuple[int, int]
    ll: np.ndarray
    details: dict[tuple[str, int], np.ndarray] = field(default_factory=dict)

    def band(self, kind: str, level: int) -> np.ndarray:
        if kind == "LL":
            if level != self.levels:
                raise InvariantError(f"LL lives at level {self.levels}, not {level}")
            return self.ll
        return self.details[(kind, level)]

    def bands(self):
        """Canonical order: LL, then HL/LH/HH per level, coarsest first."""
        for kind, level in band_order(self.levels):
            yield kind, level, self.band(kind, level)


def band_order(levels: int):
    yield "LL", levels
    for level in range(levels, 0, -1):
        for kind in DETAIL_KINDS:
            yield kind, level


def band_shapes(shape: tuple[int, int], levels: int) -> dict[tuple[str, int], tuple[int, int]]:
    """Shape of every band of a `levels`-deep decomposition of `shape`."""
    h, w = shape
    shapes: dict[tuple[str, int], tuple[int, int]] = {}
    for level in range(1, levels + 1):
        ch, fh = (h + 1) // 2, h // 2
        cw, fw = (w + 1) // 2, w // 2
        shapes[("HL", level)] = (ch, fw)
        shapes[("LH", level)] = (fh, cw)
        shapes[("HH", level)] = (fh, fw)
        h, w = ch, cw
    shapes[("LL", levels)] = (h, w)
    return shapes


def forward_dwt(grid: np.ndarray, levels: int) -> SubbandPyramid:
    """`levels`-deep 9/7 decomposition of a 2-D grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise InvariantError("forward_dwt expects a 2-D grid")
    h, w = grid.shape
    if levels < 1:
        raise InvariantError("levels must be >= 1")
    if min(h, w) < 2**levels:
        raise InvariantError(
            f"grid {grid.shape} too small for {levels} decomposition levels"
        )
    details: dict[tuple[str, int], np.ndarray] = {}
    ll = grid
    for level in range(1, levels + 1):
        ll, hl, lh, hh = _analyze_2d(ll)
        details[("HL", level)] = hl
        details[("LH", level)] = lh
        details[("HH", level)] = hh
    return SubbandPyramid(levels=levels, shape=(h, w), ll=ll, details=details)


def inverse_dwt(pyr: SubbandPyramid) -> np.ndarray:
    """Reconstruct the grid from a pyramid (exact up to float rounding)."""
    ll = pyr.ll
    for level in range(pyr.levels, 0, -1):
        ll = _synthesize_2d(
            ll,
            pyr.details[("HL", level)],
            pyr.details[("LH", level)],
            pyr.details[("HH", level)],
        )
    if ll.shape != pyr.shape:
        raise InvariantError(f"reconstructed {ll.shape}, expected {pyr.shape}")
    return ll


# ---------------------------------------------------------------------------
# Code-block partitioning
# ---------------------------------------------------------------------------

# Blocks whose shorter side is below this cannot take a secondary transform.
MIN_SECONDARY_SIDE = 8


@dataclass
class CodeBlock:
    """One rectangular tile of a band, in canonical stream order."""

    index: int
    band: str
    level: int
    y0: int
    x0: int
    data: np.ndarray  # float coefficients (pre-quantisation)
    secondary: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass
class CodeBlockGrid:
    """All code blocks of a pyramid, plus the geometry needed to rebuild it."""

    shape: tuple[int, int]
    levels: int
    cb_size: int
    blocks: list[CodeBlock]

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)


def block_layout(
    shape: tuple[int, int], levels: int, cb_size: int
) -> list[tuple[str, int, int, int, int, int]]:
    """Canonical block geometry: (band, level, y0, x0, h, w) per block.

    Bands are visited in `band_order`; inside a band tiles run row-major.
    Edge tiles keep their natural (smaller) size.
    """
    out = []
    shapes = band_shapes(shape, levels)
    for kind, level in band_order(levels):
        bh, bw = shapes[(kind, level)]
        for y0 in range(0, bh, cb_size):
            for x0 in range(0, bw, cb_size):
                out.append(
                    (kind, level, y0, x0, min(cb_size, bh - y0), min(cb_size, bw - x0))
                )
    return out


def partition_codeblocks(pyr: SubbandPyramid, cb_size: int) -> CodeBlockGrid:
    """Tile every band into cb_size x cb_size blocks (edge tiles smaller)."""
    if cb_size < 8 or cb_size & (cb_size - 1):
        raise InvariantError("cb_size must be a power of two >= 8")
    blocks: list[CodeBlock] = []
    for kind, level, y0, x0, h, w in block_layout(pyr.shape, pyr.levels, cb_size):
        band = pyr.band(kind, level)
        data = band[y0 : y0 + h, x0 : x0 + w].copy()
        blocks.append(
            CodeBlock(
                index=len(blocks), band=kind, level=level, y0=y0, x0=x0, data=data
            )
        )
    return CodeBlockGrid(shape=pyr.shape, levels=pyr.levels, cb_size=cb_size, blocks=blocks)


def assemble_pyramid(
    shape: tuple[int, int],
    levels: int,
    cb_size: int,
    block_grids: list[np.ndarray],
) -> SubbandPyramid:
    """Inverse of `partition_codeblocks` given per-block coefficient grids."""
    shapes = band_shapes(shape, levels)
    arrays = {key: np.zeros(s) for key, s in shapes.items()}
    layout = block_layout(shape, levels, cb_size)
    if len(layout) != len(block_grids):
        raise InvariantError(
            f"layout has {len(layout)} blocks, got {len(block_grids)} grids"
        )
    for (kind, level, y0, x0, h, w), grid in zip(layout, block_grids):
        if grid.shape != (h, w):
            raise InvariantError(f"block grid {grid.shape} != layout {(h, w)}")
        arrays[(kind, level)][y0 : y0 + h, x0 : x0 + w] = grid
    ll = arrays.pop(("LL", levels))
    return SubbandPyramid(levels=levels, shape=shape, ll=ll, details=arrays)


def block_secondary_dwt(block: np.ndarray) -> np.ndarray:
    """One extra 9/7 level inside a detail block, packed [LL HL; LH HH]."""
    h, w = block.shape
    if min(h, w) < MIN_SECONDARY_SIDE:
        raise InvariantError(f"block {block.shape} too small for a secondary level")
    ll, hl, lh, hh = _analyze_2d(np.asarray(block, dtype=np.float64))
    out = np.empty((h, w), dtype=np.float64)
    ch, cw = ll.shape
    out[:ch, :cw] = ll
    out[:ch, cw:] = hl
    out[ch:, :cw] = lh
    out[ch:, cw:] = hh
    return out


def block_secondary_idwt(packed: np.ndarray) -> np.ndarray:
    """Inverse of `block_secondary_dwt`."""
    h, w = packed.shape
    ch, cw = (h + 1) // 2, (w + 1) // 2
    return _synthesize_2d(
        packed[:ch, :cw], packed[:ch, cw:], packed[ch:, :cw], packed[ch:, cw:]
    )
