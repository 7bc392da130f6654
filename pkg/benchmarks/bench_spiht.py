#!/usr/bin/env python3
"""Throughput comparison of the two SPIHT kernel backends.

The package ships a compiled (Cython) significance-scan kernel and a
pure-Python twin with identical semantics; import-time selection picks the
compiled one when built.  This script times both on the same workload so the
speedup is measurable rather than assumed.

The workload is realistic, not random noise: a synthetic image is pushed
through the actual front half of the codec (level shift, wavelet pyramid,
code-block partition, secondary transform, quantisation), and the resulting
integer blocks are what the kernels encode and decode.  Three phases are
timed per backend:

  encode     all blocks, full depth
  decode     every stream at full length
  truncated  every stream cut to 25% of its bits (the transcoder's hot path)

Usage:
  python3 benchmarks/bench_spiht.py [--side 512] [--repeats 3]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from blinqs.quantizer import compute_delta_schedule, quantize  # noqa: E402
from blinqs.spiht import _pure  # noqa: E402
from blinqs.wavelet import (  # noqa: E402
    MIN_SECONDARY_SIDE,
    block_secondary_dwt,
    forward_dwt,
    level_shift,
    partition_codeblocks,
)

try:
    from blinqs.spiht import _kernel
except ImportError:
    _kernel = None


def make_image(side: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:side, 0:side].astype(np.float64) / side
    img = (
        96.0
        + 80.0 * np.sin(5.1 * x + 1.3) * np.cos(3.7 * y)
        + 60.0 * np.exp(-((x - 0.6) ** 2 + (y - 0.3) ** 2) / 0.02)
        + rng.normal(0.0, 6.0, (side, side))
    )
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def prepare_blocks(side: int, levels: int, cb_size: int, delta_max: int, seed: int):
    """Run the encoder front end; return (quantised block, tree flag) pairs."""
    img = make_image(side, seed)
    pyr = forward_dwt(level_shift(img), levels)
    grid = partition_codeblocks(pyr, cb_size)
    schedule = compute_delta_schedule(levels, delta_max)
    out = []
    for blk in grid.blocks:
        secondary = blk.band != "LL" and min(blk.shape) >= MIN_SECONDARY_SIDE
        coeffs = block_secondary_dwt(blk.data) if secondary else blk.data
        q = quantize(coeffs, schedule.for_band(blk.band, blk.level))
        out.append((np.ascontiguousarray(q, dtype=np.int64), secondary))
    return out


def bench_backend(impl, blocks, repeats: int):
    encode = impl.encode_block_kernel
    decode = impl.decode_block_kernel

    best_enc = best_dec = best_cut = float("inf")
    streams = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        streams = [(encode(q, tree), q.shape, tree) for q, tree in blocks]
        best_enc = min(best_enc, time.perf_counter() - t0)

    total_bits = sum(sum(lengths) for (_, lengths, _), _, _ in streams)

    for _ in range(repeats):
        t0 = time.perf_counter()
        for (payload, lengths, n_planes), (h, w), tree in streams:
            decode(payload, sum(lengths), h, w, n_planes, tree)
        best_dec = min(best_dec, time.perf_counter() - t0)

    for _ in range(repeats):
        t0 = time.perf_counter()
        for (payload, lengths, n_planes), (h, w), tree in streams:
            decode(payload, sum(lengths) // 4, h, w, n_planes, tree)
        best_cut = min(best_cut, time.perf_counter() - t0)

    return best_enc, best_dec, best_cut, total_bits


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=512, help="test image side length")
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--cb-size", type=int, default=32)
    ap.add_argument("--delta-max", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=3, help="best-of-N timing")
    ap.add_argument("--seed", type=int, default=20260825)
    args = ap.parse_args(argv)

    blocks = prepare_blocks(args.side, args.levels, args.cb_size, args.delta_max, args.seed)
    n_coeff = sum(q.size for q, _ in blocks)
    print(
        f"workload: {args.side}x{args.side} image, {len(blocks)} blocks, "
        f"{n_coeff} coefficients, best of {args.repeats}"
    )

    backends = [("pure", _pure)] + ([("cython", _kernel)] if _kernel else [])
    if _kernel is None:
        print("note: compiled kernel not built; timing pure backend only")

    rows = []
    for name, impl in backends:
        enc, dec, cut, bits = bench_backend(impl, blocks, args.repeats)
        rows.append((name, enc, dec, cut))
        print(
            f"{name:>7}: encode {enc * 1e3:8.1f} ms ({n_coeff / enc / 1e6:6.2f} Mcoeff/s, "
            f"{bits / enc / 1e6:6.2f} Mbit/s)   decode {dec * 1e3:8.1f} ms   "
            f"truncated decode {cut * 1e3:8.1f} ms"
        )

    if len(rows) == 2:
        (_, pe, pd, pc), (_, ce, cd, cc) = rows
        print(
            f"speedup cython/pure: encode {pe / ce:4.1f}x   "
            f"decode {pd / cd:4.1f}x   truncated {pc / cc:4.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
