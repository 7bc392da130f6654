#!/usr/bin/env python3
"""Fetch the classic 512x512 grayscale test images used by the acceptance suite.

The published PSNR reference tables are tied to specific well-known images
(the acceptance suite needs ``lena512`` at tests/data/lena512.pgm), which are
not redistributable and therefore not committed to this repository.  This
script obtains them and converts them to the binary PGM the test suite reads.

Two modes:

  python3 scripts/fetch_corpus.py                 # download from known mirrors
  python3 scripts/fetch_corpus.py --from-file X   # convert a local copy (air-gapped)

Every acquired file is validated structurally (dimensions, bit depth, file
size for the canonical BMP) and its SHA-256 is printed so it can be checked
against public records; pass ``--sha256 <hex>`` to enforce a digest you
trust.  Nothing is overwritten unless ``--force`` is given, and nothing here
should ever be committed: tests/data/*.pgm produced by this script is for
local runs only.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import urllib.error
import urllib.request
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from blinqs.raster import read_bmp, read_pgm, write_image  # noqa: E402

DEST = ROOT / "tests" / "data" / "lena512.pgm"

# Canonical source: 8-bit palettised grayscale BMP, 512x512.  File size is
# exact by construction: 54-byte header + 1024-byte palette + 512*512 pixels.
MIRRORS = ["https://www.ece.rice.edu/~wakin/images/lena512.bmp"]
CANONICAL_BMP_SIZE = 54 + 1024 + 512 * 512


def decode_source(blob: bytes) -> "object":
    """Decode a BMP or PGM blob into a grayscale array."""
    if blob[:2] == b"BM":
        return read_bmp(blob)
    if blob[:2] == b"P5":
        return read_pgm(blob)
    raise SystemExit("unsupported source format (need 8-bit grayscale BMP or binary PGM)")


def validate(img, blob: bytes, is_download: bool) -> None:
    if img.shape != (512, 512):
        raise SystemExit(f"expected a 512x512 image, got {img.shape[0]}x{img.shape[1]}")
    if is_download and blob[:2] == b"BM" and len(blob) != CANONICAL_BMP_SIZE:
        raise SystemExit(
            f"downloaded BMP is {len(blob)} bytes, expected {CANONICAL_BMP_SIZE}; refusing"
        )


def download() -> bytes:
    last_error: Exception | None = None
    for url in MIRRORS:
        try:
            print(f"fetching {url} ...")
            with urllib.request.urlopen(url, timeout=60) as resp:
                return resp.read()
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            print(f"  failed: {exc}")
            last_error = exc
    raise SystemExit(f"all mirrors failed (no network access?): {last_error}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--from-file", metavar="PATH", help="convert a local BMP/PGM instead of downloading")
    ap.add_argument("--sha256", metavar="HEX", help="require this digest of the source blob")
    ap.add_argument("--force", action="store_true", help="overwrite an existing destination")
    args = ap.parse_args(argv)

    if DEST.exists() and not args.force:
        print(f"{DEST} already exists; use --force to replace it")
        return 0

    if args.from_file:
        blob = Path(args.from_file).read_bytes()
        is_download = False
    else:
        blob = download()
        is_download = True

    digest = hashlib.sha256(blob).hexdigest()
    print(f"source sha256: {digest}  ({len(blob)} bytes)")
    if args.sha256 and digest != args.sha256.lower():
        raise SystemExit(f"digest mismatch: expected {args.sha256.lower()}")
    if not args.sha256:
        print("  (no --sha256 given; verify the digest against a source you trust)")

    img = decode_source(blob)
    validate(img, blob, is_download)

    DEST.parent.mkdir(parents=True, exist_ok=True)
    write_image(str(DEST), img)
    print(f"wrote {DEST} (512x512 binary PGM); do not commit this file")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
