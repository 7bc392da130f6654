#!/usr/bin/env python3
"""Generate the committed synthetic test corpus (deterministic).

Twenty 256x256 grayscale images spanning smooth gradients, blobs, sinusoid
mixtures, cartoon shapes, checkerboards, and band-limited textures.  These
deliberately live in the concentrated-spectrum regime the blind allocator is
designed for (coarse bands carry most of the coded bits); see the benchmark
notes in README.md for what happens outside it.

Usage: python3 scripts/make_corpus.py [outdir]   (default tests/corpus)
"""

from __future__ import annotations

import os
import sys

import numpy as np
from scipy import ndimage

SIDE = 256
SEED = 20260825


def _norm(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.float64)
    lo, hi = a.min(), a.max()
    if hi - lo < 1e-12:
        return np.full_like(a, 128.0).astype(np.uint8)
    return np.rint(255.0 * (a - lo) / (hi - lo)).astype(np.uint8)


def _grid() -> tuple[np.ndarray, np.ndarray]:
    y, x = np.mgrid[0:SIDE, 0:SIDE].astype(np.float64)
    return y / (SIDE - 1), x / (SIDE - 1)


def gradient(angle_deg: float, gamma: float = 1.0) -> np.ndarray:
    y, x = _grid()
    t = np.cos(np.radians(angle_deg)) * x + np.sin(np.radians(angle_deg)) * y
    t -= t.min()
    t /= t.max()
    return _norm(t**gamma)


def blobs(rng: np.random.Generator, n: int, sigma_px: float) -> np.ndarray:
    y, x = np.mgrid[0:SIDE, 0:SIDE].astype(np.float64)
    img = np.zeros((SIDE, SIDE))
    for _ in range(n):
        cy, cx = rng.uniform(0.15 * SIDE, 0.85 * SIDE, size=2)
        amp = rng.uniform(0.4, 1.0) * rng.choice([-1.0, 1.0])
        s = sigma_px * rng.uniform(0.6, 1.6)
        img += amp * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * s * s))
    return _norm(img)


def sinusoids(rng: np.random.Generator, n: int, max_cycles: float) -> np.ndarray:
    y, x = _grid()
    img = np.zeros((SIDE, SIDE))
    for _ in range(n):
        fy, fx = rng.uniform(-max_cycles, max_cycles, size=2)
        img += rng.uniform(0.3, 1.0) * np.sin(
            2 * np.pi * (fy * y + fx * x) + rng.uniform(0, 2 * np.pi)
        )
    return _norm(img)


def shapes(rng: np.random.Generator, n: int) -> np.ndarray:
    """Piecewise-constant cartoon: overlapping rectangles and discs."""
    y, x = np.mgrid[0:SIDE, 0:SIDE]
    img = np.full((SIDE, SIDE), 128.0)
    for _ in range(n):
        v = rng.integers(0, 256)
        if rng.random() < 0.5:
            y0, x0 = rng.integers(0, SIDE - 32, size=2)
            h, w = rng.integers(24, SIDE // 2, size=2)
            img[y0 : y0 + h, x0 : x0 + w] = v
        else:
            cy, cx = rng.integers(32, SIDE - 32, size=2)
            r = rng.integers(16, SIDE // 4)
            img[(y - cy) ** 2 + (x - cx) ** 2 <= r * r] = v
    return img.astype(np.uint8)


def checkerboard(cell: int, contrast: int = 255) -> np.ndarray:
    y, x = np.mgrid[0:SIDE, 0:SIDE]
    board = ((y // cell + x // cell) % 2) * contrast
    return board.astype(np.uint8)


def texture(rng: np.random.Generator, sigma_px: float) -> np.ndarray:
    """Band-limited noise: white noise smoothed to a target correlation length."""
    noise = rng.standard_normal((SIDE, SIDE))
    return _norm(ndimage.gaussian_filter(noise, sigma_px, mode="reflect"))


def composite(rng: np.random.Generator) -> np.ndarray:
    base = gradient(30).astype(np.float64)
    soft = blobs(rng, 4, 40.0).astype(np.float64)
    grain = ndimage.gaussian_filter(rng.standard_normal((SIDE, SIDE)), 10.0, mode="reflect")
    return _norm(0.5 * base + 0.4 * soft + 25.0 * grain)


def vignette() -> np.ndarray:
    y, x = _grid()
    r2 = (y - 0.5) ** 2 + (x - 0.5) ** 2
    return _norm(np.exp(-r2 / 0.18))


def _rng(k: int) -> np.random.Generator:
    """Per-image generator so the roster can change without reshuffling."""
    return np.random.default_rng(SEED + k)


def build_corpus() -> dict[str, np.ndarray]:
    """The committed 20-image corpus.

    Hard periodic patterns (full-contrast checkerboards) and edge-dense
    cartoons sit outside the allocator's operating regime (see README
    benchmark notes), so the periodic member is the smoothed checkerboard.
    """
    images: dict[str, np.ndarray] = {}
    images["gradient-5"] = gradient(5.0)
    images["gradient-diag"] = gradient(35.0)
    images["gradient-gamma"] = gradient(70.0, gamma=2.2)
    images["vignette"] = vignette()
    images["blobs-broad"] = blobs(_rng(1), 5, 48.0)
    images["blobs-mid"] = blobs(_rng(2), 9, 28.0)
    images["blobs-dense"] = blobs(_rng(3), 16, 18.0)
    images["sines-low"] = sinusoids(_rng(4), 3, 2.0)
    images["sines-mid"] = sinusoids(_rng(5), 5, 4.0)
    images["sines-rich"] = sinusoids(_rng(6), 8, 6.0)
    images["shapes-few"] = shapes(_rng(7), 4)
    images["shapes-soft"] = _norm(
        ndimage.gaussian_filter(shapes(_rng(8), 6).astype(float), 2.0, mode="reflect")
    )
    images["checker-soft"] = _norm(
        ndimage.gaussian_filter(checkerboard(32).astype(float), 3.0, mode="reflect")
    )
    images["texture-32"] = texture(_rng(9), 32.0)
    images["texture-16"] = texture(_rng(10), 16.0)
    images["texture-12"] = texture(_rng(11), 12.0)
    images["texture-8"] = texture(_rng(12), 8.0)
    images["composite-a"] = composite(_rng(13))
    images["composite-b"] = composite(_rng(14))
    images["ramp-disc"] = _norm(
        ndimage.gaussian_filter(
            gradient(0.0).astype(float) + shapes(_rng(15), 3).astype(float), 1.5
        )
    )
    return images


def main() -> int:
    outdir = sys.argv[1] if len(sys.argv) > 1 else os.path.join("tests", "corpus")
    os.makedirs(outdir, exist_ok=True)
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
    from blinqs.raster import write_image

    images = build_corpus()
    for name, img in sorted(images.items()):
        path = os.path.join(outdir, f"{name}.pgm")
        write_image(path, img)
        print(f"wrote {path} ({img.shape[0]}x{img.shape[1]})")
    print(f"{len(images)} images")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
