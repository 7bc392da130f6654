# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SPIHT block codec.

Bit-for-bit mirror of `_pure.py`; see that module for the algorithm notes.
Coordinates are packed as i * w + j; list entries use -1 as a tombstone.
"""

import numpy as np

cimport cython

ctypedef long long i64


cdef struct BitWriter:
    unsigned char *buf
    Py_ssize_t cap_bytes
    long total  # bits written


cdef inline void bw_put(BitWriter *bw, int bit) noexcept nogil:
    cdef long pos = bw.total
    if bit:
        bw.buf[pos >> 3] |= <unsigned char> (1 << (7 - (pos & 7)))
    bw.total = pos + 1


cdef struct BitReader:
    const unsigned char *buf
    long n_bits
    long pos


cdef inline int br_get(BitReader *br) noexcept nogil:
    """Next bit, or -1 when the budget is exhausted."""
    cdef long pos = br.pos
    if pos >= br.n_bits:
        return -1
    br.pos = pos + 1
    return (br.buf[pos >> 3] >> (7 - (pos & 7))) & 1


cdef inline int child_count(int i, int j, int h, int w, int *ci, int *cj) noexcept nogil:
    """Fill ci/cj (size 4) with clipped offspring of (i, j); returns count."""
    cdef int y = 2 * i
    cdef int x = 2 * j
    cdef int n = 0
    if (i == 0 and j == 0) or y >= h or x >= w:
        return 0
    ci[n] = y; cj[n] = x; n += 1
    if x + 1 < w:
        ci[n] = y; cj[n] = x + 1; n += 1
    if y + 1 < h:
        ci[n] = y + 1; cj[n] = x; n += 1
        if x + 1 < w:
            ci[n] = y + 1; cj[n] = x + 1; n += 1
    return n


def encode_block_kernel(q_in, bint tree):
    """Embedded-encode one integer block; returns (payload, plane bit counts, N_p)."""
    q_arr = np.ascontiguousarray(q_in, dtype=np.int64)
    cdef i64[:, ::1] q = q_arr
    cdef int h = q.shape[0]
    cdef int w = q.shape[1]
    cdef int i, j, n, k, c, nc, idx
    cdef int ci[4]
    cdef int cj[4]

    mag_arr = np.abs(q_arr)
    cdef i64[:, ::1] mag = mag_arr
    cdef i64 maxmag = mag_arr.max() if h * w else 0
    cdef int n_planes = int(maxmag).bit_length()
    if n_planes == 0:
        return b"", [], 0

    # descendant-max maps (tree mode only)
    cdef i64[:, ::1] dm = None
    cdef i64[:, ::1] lm = None
    cdef i64 best, lbest, v, d
    if tree:
        dm_arr = np.zeros((h, w), dtype=np.int64)
        lm_arr = np.zeros((h, w), dtype=np.int64)
        dm = dm_arr
        lm = lm_arr
        for i in range(h - 1, -1, -1):
            for j in range(w - 1, -1, -1):
                best = 0
                lbest = 0
                nc = child_count(i, j, h, w, ci, cj)
                for c in range(nc):
                    v = mag[ci[c], cj[c]]
                    d = dm[ci[c], cj[c]]
                    if v > best: best = v
                    if d > best: best = d
                    if d > lbest: lbest = d
                dm[i, j] = best
                lm[i, j] = lbest

    # coordinate lists
    cdef int cells = h * w
    lip_arr = np.empty(cells + 8, dtype=np.int32)
    lsp_arr = np.empty(cells, dtype=np.int32)
    lis_arr = np.empty(2 * cells + 8, dtype=np.int32)
    lis_type_arr = np.empty(2 * cells + 8, dtype=np.int8)
    cdef int[::1] lip = lip_arr
    cdef int[::1] lsp = lsp_arr
    cdef int[::1] lis = lis_arr
    cdef signed char[::1] lis_type = lis_type_arr
    cdef int lip_len = 0, lsp_len = 0, lis_len = 0

    if tree:
        for i in range(min(2, h)):
            for j in range(min(2, w)):
                lip[lip_len] = i * w + j
                lip_len += 1
                if (i or j) and 2 * i < h and 2 * j < w:
                    lis[lis_len] = i * w + j
                    lis_type[lis_len] = 0
                    lis_len += 1
    else:
        for i in range(cells):
            lip[i] = i
        lip_len = cells

    # output buffer: generous worst-case bound on emitted bits
    cdef long bits_bound = (<long> 4 * n_planes + 2) * cells + 64
    buf_arr = np.zeros((bits_bound + 7) // 8, dtype=np.uint8)
    cdef unsigned char[::1] bufview = buf_arr
    cdef BitWriter bw
    bw.buf = &bufview[0]
    bw.cap_bytes = bufview.shape[0]
    bw.total = 0

    plane_lengths = []
    cdef long plane_start
    cdef i64 threshold
    cdef int lsp_before, wr, coord, typ, sig

    for n in range(n_planes - 1, -1, -1):
        plane_start = bw.total
        lsp_before = lsp_len
        threshold = (<i64> 1) << n

        # --- LIP pass (in-place compaction) ---
        wr = 0
        for k in range(lip_len):
            coord = lip[k]
            i = coord // w; j = coord % w
            if mag[i, j] >= threshold:
                bw_put(&bw, 1)
                bw_put(&bw, 1 if q[i, j] < 0 else 0)
                lsp[lsp_len] = coord
                lsp_len += 1
            else:
                bw_put(&bw, 0)
                lip[wr] = coord
                wr += 1
        lip_len = wr

        # --- LIS pass (index walk, tombstones, in-pass appends) ---
        idx = 0
        while idx < lis_len:
            coord = lis[idx]
            if coord < 0:
                idx += 1
                continue
            i = coord // w; j = coord % w
            typ = lis_type[idx]
            if typ == 0:  # type A: all descendants
                if dm[i, j] >= threshold:
                    bw_put(&bw, 1)
                    nc = child_count(i, j, h, w, ci, cj)
                    for c in range(nc):
                        if mag[ci[c], cj[c]] >= threshold:
                            bw_put(&bw, 1)
                            bw_put(&bw, 1 if q[ci[c], cj[c]] < 0 else 0)
                            lsp[lsp_len] = ci[c] * w + cj[c]
                            lsp_len += 1
                        else:
                            bw_put(&bw, 0)
                            lip[lip_len] = ci[c] * w + cj[c]
                            lip_len += 1
                    if 4 * i < h and 4 * j < w:
                        lis[lis_len] = coord
                        lis_type[lis_len] = 1
                        lis_len += 1
                    lis[idx] = -1
                else:
                    bw_put(&bw, 0)
            else:  # type B: descendants past the children
                if lm[i, j] >= threshold:
                    bw_put(&bw, 1)
                    nc = child_count(i, j, h, w, ci, cj)
                    for c in range(nc):
                        lis[lis_len] = ci[c] * w + cj[c]
                        lis_type[lis_len] = 0
                        lis_len += 1
                    lis[idx] = -1
                else:
                    bw_put(&bw, 0)
            idx += 1
        # compaction
        wr = 0
        for k in range(lis_len):
            if lis[k] >= 0:
                lis[wr] = lis[k]
                lis_type[wr] = lis_type[k]
                wr += 1
        lis_len = wr

        # --- refinement pass ---
        for k in range(lsp_before):
            coord = lsp[k]
            bw_put(&bw, <int> ((mag[coord // w, coord % w] >> n) & 1))

        plane_lengths.append(bw.total - plane_start)

    n_bytes = (bw.total + 7) // 8
    return bytes(buf_arr[:n_bytes].tobytes()), plane_lengths, n_planes


def decode_block_kernel(data, long n_bits, int h, int w, int n_planes, bint tree):
    """Decode a payload prefix back to (partially refined) integers."""
    out_arr = np.zeros((h, w), dtype=np.int32)
    if n_planes == 0 or n_bits <= 0:
        return out_arr
    data = bytes(data)
    cdef const unsigned char[::1] dview = data
    cdef BitReader br
    br.buf = &dview[0] if dview.shape[0] else NULL
    br.n_bits = min(n_bits, <long> dview.shape[0] * 8)
    br.pos = 0

    cdef int cells = h * w
    m_arr = np.zeros((h, w), dtype=np.int64)
    est_arr = np.zeros((h, w), dtype=np.int64)
    neg_arr = np.zeros((h, w), dtype=np.int8)
    cdef i64[:, ::1] m = m_arr
    cdef i64[:, ::1] est = est_arr
    cdef signed char[:, ::1] neg = neg_arr

    lip_arr = np.empty(cells + 8, dtype=np.int32)
    lsp_arr = np.empty(cells, dtype=np.int32)
    lis_arr = np.empty(2 * cells + 8, dtype=np.int32)
    lis_type_arr = np.empty(2 * cells + 8, dtype=np.int8)
    cdef int[::1] lip = lip_arr
    cdef int[::1] lsp = lsp_arr
    cdef int[::1] lis = lis_arr
    cdef signed char[::1] lis_type = lis_type_arr
    cdef int lip_len = 0, lsp_len = 0, lis_len = 0

    cdef int i, j, n, k, c, nc, idx, wr, coord, typ, bit, sbit
    cdef i64 t, lo, hi
    cdef int ci[4]
    cdef int cj[4]

    if tree:
        for i in range(min(2, h)):
            for j in range(min(2, w)):
                lip[lip_len] = i * w + j
                lip_len += 1
                if (i or j) and 2 * i < h and 2 * j < w:
                    lis[lis_len] = i * w + j
                    lis_type[lis_len] = 0
                    lis_len += 1
    else:
        for i in range(cells):
            lip[i] = i
        lip_len = cells

    cdef int lsp_before
    cdef bint stopped = 0

    for n in range(n_planes - 1, -1, -1):
        if stopped:
            break
        lsp_before = lsp_len

        # --- LIP pass ---
        wr = 0
        for k in range(lip_len):
            coord = lip[k]
            bit = br_get(&br)
            if bit < 0:
                stopped = 1
                break
            if bit:
                sbit = br_get(&br)
                if sbit < 0:
                    stopped = 1
                    break
                i = coord // w; j = coord % w
                neg[i, j] = <signed char> sbit
                t = (<i64> 1) << n
                m[i, j] = t
                est[i, j] = t + (t >> 1)  # midpoint of [2^n, 2^(n+1)); exact at n = 0
                lsp[lsp_len] = coord
                lsp_len += 1
            else:
                lip[wr] = coord
                wr += 1
        if stopped:
            break
        lip_len = wr

        # --- LIS pass ---
        idx = 0
        while idx < lis_len and not stopped:
            coord = lis[idx]
            if coord < 0:
                idx += 1
                continue
            i = coord // w; j = coord % w
            typ = lis_type[idx]
            if typ == 0:
                bit = br_get(&br)
                if bit < 0:
                    stopped = 1
                    break
                if bit:
                    nc = child_count(i, j, h, w, ci, cj)
                    for c in range(nc):
                        bit = br_get(&br)
                        if bit < 0:
                            stopped = 1
                            break
                        if bit:
                            sbit = br_get(&br)
                            if sbit < 0:
                                stopped = 1
                                break
                            neg[ci[c], cj[c]] = <signed char> sbit
                            t = (<i64> 1) << n
                            m[ci[c], cj[c]] = t
                            est[ci[c], cj[c]] = t + (t >> 1)
                            lsp[lsp_len] = ci[c] * w + cj[c]
                            lsp_len += 1
                        else:
                            lip[lip_len] = ci[c] * w + cj[c]
                            lip_len += 1
                    if stopped:
                        break
                    if 4 * i < h and 4 * j < w:
                        lis[lis_len] = coord
                        lis_type[lis_len] = 1
                        lis_len += 1
                    lis[idx] = -1
            else:
                bit = br_get(&br)
                if bit < 0:
                    stopped = 1
                    break
                if bit:
                    nc = child_count(i, j, h, w, ci, cj)
                    for c in range(nc):
                        lis[lis_len] = ci[c] * w + cj[c]
                        lis_type[lis_len] = 0
                        lis_len += 1
                    lis[idx] = -1
            idx += 1
        if stopped:
            break
        # compaction
        wr = 0
        for k in range(lis_len):
            if lis[k] >= 0:
                lis[wr] = lis[k]
                lis_type[wr] = lis_type[k]
                wr += 1
        lis_len = wr

        # --- refinement pass ---
        for k in range(lsp_before):
            coord = lsp[k]
            bit = br_get(&br)
            if bit < 0:
                stopped = 1
                break
            i = coord // w; j = coord % w
            if bit:
                m[i, j] += (<i64> 1) << n
            # clamp the estimate into the refined interval [m, m + 2^n)
            lo = m[i, j]
            hi = lo + ((<i64> 1) << n) - 1
            if est[i, j] < lo:
                est[i, j] = lo
            elif est[i, j] > hi:
                est[i, j] = hi

    cdef int[:, ::1] out = out_arr
    for i in range(h):
        for j in range(w):
            out[i, j] = <int> (-est[i, j] if neg[i, j] else est[i, j])
    return out_arr
