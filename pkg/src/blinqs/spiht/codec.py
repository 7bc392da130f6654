"""Block-level coding API on top of the selected SPIHT kernel."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError

log = logging.getLogger(__name__)

# Band identifiers used on the wire (one byte each).
BAND_IDS = {"LL": 0, "HL": 1, "LH": 2, "HH": 3}
BAND_NAMES = {v: k for k, v in BAND_IDS.items()}

FLAG_SECONDARY = 0x01


@dataclass
class CodedBlock:
    """One embedded-coded block plus the header metadata that describes it."""

    index: int
    band: str
    level: int
    secondary: bool
    n_planes: int
    plane_lengths: list[int]
    payload: bytes
    shape: tuple[int, int]

    @property
    def total_bits(self) -> int:
        return sum(self.plane_lengths)

    @property
    def flags(self) -> int:
        return FLAG_SECONDARY if self.secondary else 0

    def prefix_bits(self, n_planes: int) -> int:
        """Bits covering the first `n_planes` coding passes."""
        return sum(self.plane_lengths[:n_planes])


def encode_block(
    q: np.ndarray,
    index: int = 0,
    band: str = "HH",
    level: int = 1,
    secondary: bool | None = None,
) -> CodedBlock:
    """Encode one quantised integer block.

    Tree-structured scanning is used when the block carries a secondary
    decomposition (`secondary`, defaulting to non-LL bands); LL blocks use a
    flat significance scan.
    """
    q = np.asarray(q)
    if q.ndim != 2:
        raise InvariantError("encode_block expects a 2-D integer grid")
    if secondary is None:
        secondary = band != "LL"
    from . import encode_block_kernel

    payload, plane_lengths, n_planes = encode_block_kernel(q, secondary)
    if n_planes:
        expect = int(np.abs(q).max()).bit_length()
        if n_planes != expect:
            raise InvariantError(f"plane count {n_planes} != msb position {expect}")
    return CodedBlock(
        index=index,
        band=band,
        level=level,
        secondary=bool(secondary),
        n_planes=n_planes,
        plane_lengths=list(map(int, plane_lengths)),
        payload=payload,
        shape=(int(q.shape[0]), int(q.shape[1])),
    )


def decode_block(cb: CodedBlock, n_bits: int | None = None) -> np.ndarray:
    """Decode the first `n_bits` of a coded block (all bits when omitted).

    Budgets beyond the stored length are clamped (with a log notice);
    unresolved coefficients keep their current estimate (midpoint at
    significance, clamped into the interval on refinement), which makes
    block MSE non-increasing in the prefix length.
    """
    total = cb.total_bits
    if n_bits is None:
        n_bits = total
    elif n_bits > total:
        log.info("decode budget %d bits exceeds stored %d; clamping", n_bits, total)
        n_bits = total
    from . import decode_block_kernel

    h, w = cb.shape
    return decode_block_kernel(cb.payload, int(n_bits), h, w, cb.n_planes, cb.secondary)
