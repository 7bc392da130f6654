"""Single-file stream container (.bqs).

Byte layout (all integers little-endian):

    magic     4 bytes  "BQS1"
    version   u8       currently 1
    width     u32
    height    u32
    levels    u8
    cb_size   u16
    delta_max u8
    n_blocks  u32
    records   n_blocks x { band_id u8, level u8, flags u8, n_planes u8,
                           plane_lengths u32 x n_planes }   (lengths in bits)
    payload   per block, in record order, zero-padded to a byte boundary

The fixed prefix before the records is 21 bytes.  Excluded blocks keep their
record with all plane lengths zero and contribute no payload bytes; the
decoder zero-fills them.  See FORMAT.md for the full contract.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import FormatError, InvariantError
from .spiht.codec import BAND_IDS, BAND_NAMES, FLAG_SECONDARY, CodedBlock
from .wavelet import block_layout

MAGIC = b"BQS1"
VERSION = 1
_PREFIX = struct.Struct("<4sBIIBHBI")
PREFIX_BYTES = _PREFIX.size  # 21


@dataclass
class BlockRecord:
    """Header entry for one block; shape is derived from the geometry."""

    band: str
    level: int
    flags: int
    n_planes: int
    plane_lengths: list[int]
    shape: tuple[int, int] = (0, 0)

    @property
    def total_bits(self) -> int:
        return sum(self.plane_lengths)

    @property
    def payload_bytes(self) -> int:
        return (self.total_bits + 7) // 8

    @property
    def secondary(self) -> bool:
        return bool(self.flags & FLAG_SECONDARY)


@dataclass
class StreamHeader:
    width: int
    height: int
    levels: int
    cb_size: int
    delta_max: int
    records: list[BlockRecord] = field(default_factory=list)
    version: int = VERSION

    @property
    def n_blocks(self) -> int:
        return len(self.records)

    @property
    def header_bytes(self) -> int:
        return PREFIX_BYTES + sum(4 + 4 * r.n_planes for r in self.records)

    @property
    def payload_bits(self) -> int:
        return sum(r.total_bits for r in self.records)

    def block_lengths(self) -> list[int]:
        """Per-block embedded string lengths in bits (the transcoder's input)."""
        return [r.total_bits for r in self.records]


@dataclass
class StreamContainer:
    header: StreamHeader
    payloads: list[bytes]

    @property
    def n_blocks(self) -> int:
        return self.header.n_blocks


def container_from_blocks(
    width: int,
    height: int,
    levels: int,
    cb_size: int,
    delta_max: int,
    blocks: list[CodedBlock],
) -> StreamContainer:
    records = [
        BlockRecord(
            band=cb.band,
            level=cb.level,
            flags=cb.flags,
            n_planes=cb.n_planes,
            plane_lengths=list(cb.plane_lengths),
            shape=cb.shape,
        )
        for cb in blocks
    ]
    header = StreamHeader(
        width=width,
        height=height,
        levels=levels,
        cb_size=cb_size,
        delta_max=delta_max,
        records=records,
    )
    return StreamContainer(header=header, payloads=[cb.payload for cb in blocks])


def serialize(container: StreamContainer) -> bytes:
    h = container.header
    if len(container.payloads) != h.n_blocks:
        raise InvariantError("payload count does not match header records")
    out = bytearray()
    out += _PREFIX.pack(
        MAGIC, h.version, h.width, h.height, h.levels, h.cb_size, h.delta_max, h.n_blocks
    )
    for rec in h.records:
        if rec.n_planes != len(rec.plane_lengths):
            raise InvariantError("n_planes does not match plane_lengths")
        if rec.n_planes > 255:
            raise InvariantError("plane count exceeds header field")
        out += struct.pack(
            "<BBBB", BAND_IDS[rec.band], rec.level, rec.flags, rec.n_planes
        )
        out += struct.pack(f"<{rec.n_planes}I", *rec.plane_lengths)
    for rec, payload in zip(h.records, container.payloads):
        need = rec.payload_bytes
        if len(payload) != need:
            raise InvariantError(
                f"payload is {len(payload)} bytes, lengths require {need}"
            )
        out += payload
    return bytes(out)


def _parse_prefix(data: bytes):
    if len(data) < PREFIX_BYTES:
        raise FormatError("truncated stream: missing fixed prefix")
    magic, version, width, height, levels, cb_size, delta_max, n_blocks = _PREFIX.unpack_from(
        data
    )
    if magic != MAGIC:
        raise FormatError("not a BlinQS stream")
    if version != VERSION:
        raise FormatError(f"unsupported stream version {version}")
    return width, height, levels, cb_size, delta_max, n_blocks


def parse_header(data: bytes) -> StreamHeader:
    """Decode the header section only; never touches payload bytes."""
    width, height, levels, cb_size, delta_max, n_blocks = _parse_prefix(data)
    layout = block_layout((height, width), levels, cb_size)
    if len(layout) != n_blocks:
        raise FormatError(
            f"stream claims {n_blocks} blocks, geometry implies {len(layout)}"
        )
    records: list[BlockRecord] = []
    pos = PREFIX_BYTES
    for band, level, _y0, _x0, bh, bw in layout:
        if pos + 4 > len(data):
            raise FormatError("truncated stream: block record cut short")
        band_id, rec_level, flags, n_planes = struct.unpack_from("<BBBB", data, pos)
        pos += 4
        if BAND_NAMES.get(band_id) != band or rec_level != level:
            raise FormatError("block record does not match stream geometry")
        if pos + 4 * n_planes > len(data):
            raise FormatError("truncated stream: plane lengths cut short")
        lengths = list(struct.unpack_from(f"<{n_planes}I", data, pos))
        pos += 4 * n_planes
        records.append(
            BlockRecord(
                band=band,
                level=level,
                flags=flags,
                n_planes=n_planes,
                plane_lengths=lengths,
                shape=(bh, bw),
            )
        )
    return StreamHeader(
        width=width,
        height=height,
        levels=levels,
        cb_size=cb_size,
        delta_max=delta_max,
        records=records,
    )


def parse(data: bytes) -> StreamContainer:
    """Decode header and split the payload into per-block byte strings."""
    header = parse_header(data)
    pos = header.header_bytes
    payloads: list[bytes] = []
    for rec in header.records:
        need = rec.payload_bytes
        if pos + need > len(data):
            raise FormatError("truncated stream: payload cut short")
        payloads.append(bytes(data[pos : pos + need]))
        pos += need
    if pos != len(data):
        raise FormatError(f"{len(data) - pos} trailing bytes after payload")
    return StreamContainer(header=header, payloads=payloads)


def _cut_lengths(plane_lengths: list[int], n_bits: int) -> list[int]:
    """Rewrite per-plane lengths so they sum to n_bits (cutting from the end)."""
    out = []
    left = n_bits
    for length in plane_lengths:
        take = min(length, left)
        out.append(take)
        left -= take
    if left:
        raise InvariantError(f"cut of {n_bits} bits exceeds stored length")
    return out


def _cut_payload(payload: bytes, n_bits: int) -> bytes:
    """First n_bits of a payload, zero-padding the final byte's tail."""
    n_bytes = (n_bits + 7) // 8
    cut = bytearray(payload[:n_bytes])
    tail = n_bits & 7
    if tail and n_bytes:
        cut[-1] &= (0xFF << (8 - tail)) & 0xFF
    return bytes(cut)


def retruncate(container: StreamContainer, plan: dict[int, int]) -> StreamContainer:
    """New container keeping `plan[index]` bits per block (0/absent: excluded).

    Excluded blocks keep their record with all-zero plane lengths; included
    blocks get their lengths rewritten and payload cut at the bit budget.
    """
    h = container.header
    records: list[BlockRecord] = []
    payloads: list[bytes] = []
    for idx, (rec, payload) in enumerate(zip(h.records, container.payloads)):
        n_bits = int(plan.get(idx, 0))
        if n_bits < 0:
            raise InvariantError("negative bit budget")
        if n_bits > rec.total_bits:
            raise InvariantError(
                f"budget {n_bits} exceeds stored {rec.total_bits} bits (block {idx})"
            )
        records.append(
            BlockRecord(
                band=rec.band,
                level=rec.level,
                flags=rec.flags,
                n_planes=rec.n_planes,
                plane_lengths=_cut_lengths(rec.plane_lengths, n_bits),
                shape=rec.shape,
            )
        )
        payloads.append(_cut_payload(payload, n_bits))
    header = StreamHeader(
        width=h.width,
        height=h.height,
        levels=h.levels,
        cb_size=h.cb_size,
        delta_max=h.delta_max,
        records=records,
        version=h.version,
    )
    return StreamContainer(header=header, payloads=payloads)
