#!/usr/bin/env python3
"""Regenerate the golden stream fixtures under tests/data/golden/.

Each fixture is a triple:

    <name>.pgm        source image (committed, canonical input)
    <name>.bqs        serialized stream the encoder must reproduce byte-for-byte
    <name>.dec.pgm    decoder output for the stream, byte-for-byte

Sources are built from integer arithmetic and seeded integer draws only, so
regeneration is bit-stable across platforms.  Run from the repository root:

    python3 scripts/make_golden.py
"""

from __future__ import annotations

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from blinqs.container import serialize  # noqa: E402
from blinqs.pipeline import decode_pipeline, encode_image  # noqa: E402
from blinqs.raster import write_pgm  # noqa: E402
from blinqs.transcoder import transcode  # noqa: E402

GOLDEN_DIR = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "golden"
SEED = 20260825


def gradient_disc(side: int) -> np.ndarray:
    y, x = np.mgrid[0:side, 0:side]
    img = (64 + (128 * x) // side + (32 * y) // side).astype(np.int64)
    cy = cx = side // 2
    disc = (y - cy) ** 2 + (x - cx) ** 2 <= (side // 4) ** 2
    img[disc] += 48
    return np.clip(img, 0, 255).astype(np.uint8)


def bars_and_noise(h: int, w: int) -> np.ndarray:
    rng = np.random.default_rng(SEED)
    y, x = np.mgrid[0:h, 0:w]
    img = np.where((x // 6) % 2 == 0, 70, 180).astype(np.int64)
    img += (60 * y) // h - 30
    img += rng.integers(-6, 7, size=(h, w))
    return np.clip(img, 0, 255).astype(np.uint8)


def plateau_card(side: int) -> np.ndarray:
    rng = np.random.default_rng(SEED + 1)
    img = np.full((side, side), 96, dtype=np.int64)
    img[: side // 2, : side // 2] = 160
    img[side // 3 :, side // 2 :] = 48
    img += rng.integers(-4, 5, size=(side, side))
    return np.clip(img, 0, 255).astype(np.uint8)


FIXTURES = [
    # name, image, encode kwargs, optional blind-transcode rate
    ("gradient_disc_32", gradient_disc(32), dict(levels=2, cb_size=8, delta_max=4), None),
    ("bars_48x40", bars_and_noise(48, 40), dict(levels=2, cb_size=16, delta_max=3), None),
    ("plateau_64_cut045", plateau_card(64), dict(levels=3, cb_size=32, delta_max=4), 0.45),
]


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    for name, img, kwargs, rate in FIXTURES:
        result = encode_image(img, **kwargs)
        container = result.container
        if rate is not None:
            container, _ = transcode(container, rate)
        stream = serialize(container)
        decoded = decode_pipeline(container)
        (GOLDEN_DIR / f"{name}.pgm").write_bytes(write_pgm(img))
        (GOLDEN_DIR / f"{name}.bqs").write_bytes(stream)
        (GOLDEN_DIR / f"{name}.dec.pgm").write_bytes(write_pgm(decoded))
        print(f"{name}: {len(stream)} stream bytes")


if __name__ == "__main__":
    main()
