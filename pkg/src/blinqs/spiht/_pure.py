"""Pure-Python SPIHT block codec (reference implementation).

The compiled kernel in `_kernel.pyx` mirrors this module bit-for-bit; tests
assert byte-identical output between the two.

Two scan modes share the pass structure:

* tree mode (blocks that carry an extra decomposition level): a quadtree
  rooted at the top-left 2x2 group; every cell (i, j) except (0, 0) parents
  the 2x2 group at (2i, 2j), clipped to the block; sets beyond the block are
  treated as exhausted.
* flat mode (LL-band or tiny blocks): every cell starts in the insignificant
  list, no sets.

Bits are packed MSB-first.  Sign convention: 0 positive, 1 negative.
Per-plane bit counts cover the sorting plus refinement pass of that plane.
"""

from __future__ import annotations

import numpy as np

_TYPE_A = 0
_TYPE_B = 1


class _BitWriter:
    def __init__(self):
        self.buf = bytearray()
        self.acc = 0
        self.n_acc = 0
        self.total = 0

    def put(self, bit: int):
        self.acc = (self.acc << 1) | (bit & 1)
        self.n_acc += 1
        self.total += 1
        if self.n_acc == 8:
            self.buf.append(self.acc)
            self.acc = 0
            self.n_acc = 0

    def getvalue(self) -> bytes:
        if self.n_acc:
            return bytes(self.buf) + bytes([self.acc << (8 - self.n_acc)])
        return bytes(self.buf)


class _OutOfBits(Exception):
    pass


class _BitReader:
    def __init__(self, data: bytes, n_bits: int):
        self.data = data
        self.n_bits = min(n_bits, len(data) * 8)
        self.pos = 0

    def get(self) -> int:
        if self.pos >= self.n_bits:
            raise _OutOfBits
        byte = self.data[self.pos >> 3]
        bit = (byte >> (7 - (self.pos & 7))) & 1
        self.pos += 1
        return bit


def _children(i: int, j: int, h: int, w: int):
    """Tree-mode offspring of (i, j), raster order, clipped to the block."""
    if i == 0 and j == 0:
        return ()
    ci, cj = 2 * i, 2 * j
    if ci >= h or cj >= w:
        return ()
    out = [(ci, cj)]
    if cj + 1 < w:
        out.append((ci, cj + 1))
    if ci + 1 < h:
        out.append((ci + 1, cj))
        if cj + 1 < w:
            out.append((ci + 1, cj + 1))
    return tuple(out)


def _init_lists(h: int, w: int, tree: bool):
    if tree:
        lip = [(i, j) for i in range(min(2, h)) for j in range(min(2, w))]
        lis = [
            (i, j, _TYPE_A)
            for (i, j) in lip
            if (i, j) != (0, 0) and 2 * i < h and 2 * j < w
        ]
    else:
        lip = [(i, j) for i in range(h) for j in range(w)]
        lis = []
    return lip, lis


class _PureEncoder:
    """Runs the full embedded encode; state kept inspectable for tests."""

    def __init__(self, q: np.ndarray, tree: bool):
        q = np.asarray(q, dtype=np.int64)
        self.h, self.w = q.shape
        self.mag = np.abs(q)
        self.neg = q < 0
        self.tree = tree
        maxmag = int(self.mag.max()) if q.size else 0
        self.n_planes = maxmag.bit_length()
        if tree:
            self._build_desc_max()
        self.lip, self.lis = _init_lists(self.h, self.w, tree)
        self.lsp: list[tuple[int, int]] = []
        self.writer = _BitWriter()
        self.plane_lengths: list[int] = []

    def _build_desc_max(self):
        h, w = self.h, self.w
        mag = self.mag
        dm = np.zeros((h, w), dtype=np.int64)  # max over all descendants
        lm = np.zeros((h, w), dtype=np.int64)  # max past the direct children
        for i in range(h - 1, -1, -1):
            for j in range(w - 1, -1, -1):
                best = 0
                lbest = 0
                for ci, cj in _children(i, j, h, w):
                    v = int(mag[ci, cj])
                    d = int(dm[ci, cj])
                    if v > best:
                        best = v
                    if d > best:
                        best = d
                    if d > lbest:
                        lbest = d
                dm[i, j] = best
                lm[i, j] = lbest
        self.dm = dm
        self.lm = lm

    def _sorting_pass(self, threshold: int):
        mag, neg, put = self.mag, self.neg, self.writer.put
        h, w = self.h, self.w

        new_lip = []
        for i, j in self.lip:
            if mag[i, j] >= threshold:
                put(1)
                put(1 if neg[i, j] else 0)
                self.lsp.append((i, j))
            else:
                put(0)
                new_lip.append((i, j))
        self.lip = new_lip

        lis = self.lis
        idx = 0
        while idx < len(lis):
            entry = lis[idx]
            if entry is None:
                idx += 1
                continue
            i, j, typ = entry
            if typ == _TYPE_A:
                if self.dm[i, j] >= threshold:
                    put(1)
                    for ci, cj in _children(i, j, h, w):
                        if mag[ci, cj] >= threshold:
                            put(1)
                            put(1 if neg[ci, cj] else 0)
                            self.lsp.append((ci, cj))
                        else:
                            put(0)
                            self.lip.append((ci, cj))
                    if 4 * i < h and 4 * j < w:  # grand-offspring exist
                        lis.append((i, j, _TYPE_B))
                    lis[idx] = None
                else:
                    put(0)
            else:
                if self.lm[i, j] >= threshold:
                    put(1)
                    for ci, cj in _children(i, j, h, w):
                        lis.append((ci, cj, _TYPE_A))
                    lis[idx] = None
                else:
                    put(0)
            idx += 1
        self.lis = [e for e in lis if e is not None]

    def run(self):
        for n in range(self.n_planes - 1, -1, -1):
            start = self.writer.total
            lsp_before = len(self.lsp)
            self._sorting_pass(1 << n)
            for k in range(lsp_before):
                i, j = self.lsp[k]
                self.writer.put((int(self.mag[i, j]) >> n) & 1)
            self.plane_lengths.append(self.writer.total - start)
        return self


class _PureDecoder:
    """Mirror of the encoder; reconstructs clamped-midpoint estimates.

    A coefficient found significant at plane n is estimated at the midpoint
    of its uncertainty interval [2^n, 2^(n+1)).  Each refinement bit halves
    the interval; the estimate is then *clamped* into the new interval rather
    than re-centred.  Re-centring can move the estimate away from the true
    value, so a longer prefix could decode to a strictly larger error;
    clamping keeps the per-coefficient error non-increasing in prefix length.
    At full length the interval is a single integer, so decoding stays exact.
    """

    def __init__(self, data: bytes, n_bits: int, h: int, w: int, n_planes: int, tree: bool):
        self.h, self.w = h, w
        self.n_planes = n_planes
        self.tree = tree
        self.reader = _BitReader(data, n_bits)
        self.lip, self.lis = _init_lists(h, w, tree)
        self.lsp: list[tuple[int, int]] = []
        self.m = np.zeros((h, w), dtype=np.int64)  # known magnitude floor
        self.est = np.zeros((h, w), dtype=np.int64)  # reconstruction estimate
        self.neg = np.zeros((h, w), dtype=bool)

    def _significant(self, i: int, j: int, n: int):
        self.neg[i, j] = bool(self.reader.get())
        t = 1 << n
        self.m[i, j] = t
        self.est[i, j] = t + (t >> 1)  # midpoint of [2^n, 2^(n+1)); exact at n = 0
        self.lsp.append((i, j))

    def _sorting_pass(self, n: int):
        get = self.reader.get
        h, w = self.h, self.w

        new_lip = []
        lip = self.lip
        pos = 0
        try:
            while pos < len(lip):
                i, j = lip[pos]
                pos += 1
                if get():
                    self._significant(i, j, n)
                else:
                    new_lip.append((i, j))
        finally:
            # keep unprocessed entries when the budget runs out mid-pass
            self.lip = new_lip + lip[pos:]

        lis = self.lis
        idx = 0
        try:
            while idx < len(lis):
                entry = lis[idx]
                if entry is None:
                    idx += 1
                    continue
                i, j, typ = entry
                if typ == _TYPE_A:
                    if get():
                        for ci, cj in _children(i, j, h, w):
                            if get():
                                self._significant(ci, cj, n)
                            else:
                                self.lip.append((ci, cj))
                        if 4 * i < h and 4 * j < w:
                            lis.append((i, j, _TYPE_B))
                        lis[idx] = None
                else:
                    if get():
                        for ci, cj in _children(i, j, h, w):
                            lis.append((ci, cj, _TYPE_A))
                        lis[idx] = None
                idx += 1
        finally:
            self.lis = [e for e in lis if e is not None]

    def run(self) -> np.ndarray:
        try:
            for n in range(self.n_planes - 1, -1, -1):
                lsp_before = len(self.lsp)
                self._sorting_pass(n)
                for k in range(lsp_before):
                    i, j = self.lsp[k]
                    if self.reader.get():
                        self.m[i, j] += 1 << n
                    # clamp the estimate into the refined interval [m, m + 2^n)
                    lo = self.m[i, j]
                    hi = lo + (1 << n) - 1
                    if self.est[i, j] < lo:
                        self.est[i, j] = lo
                    elif self.est[i, j] > hi:
                        self.est[i, j] = hi
        except _OutOfBits:
            pass
        return self._reconstruct()

    def _reconstruct(self) -> np.ndarray:
        est = self.est.copy()
        est[self.neg] = -est[self.neg]
        return est.astype(np.int32)


def encode_block_kernel(q: np.ndarray, tree: bool) -> tuple[bytes, list[int], int]:
    """Embedded-encode one integer block; returns (payload, plane bit counts, N_p)."""
    enc = _PureEncoder(q, tree)
    if enc.n_planes == 0:
        return b"", [], 0
    enc.run()
    return enc.writer.getvalue(), enc.plane_lengths, enc.n_planes


def decode_block_kernel(
    data: bytes, n_bits: int, h: int, w: int, n_planes: int, tree: bool
) -> np.ndarray:
    """Decode a payload prefix back to (partially refined) integers."""
    if n_planes == 0 or n_bits <= 0:
        return np.zeros((h, w), dtype=np.int32)
    return _PureDecoder(data, n_bits, h, w, n_planes, tree).run()
