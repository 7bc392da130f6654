"""8-bit grayscale image files: binary PGM (P5) and uncompressed BMP."""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError


def _read_pgm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token, skipping whitespace and # comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError("truncated PGM header")
    return data[start:pos], pos


def read_pgm(data: bytes) -> np.ndarray:
    magic, pos = _read_pgm_token(data, 0)
    if magic == b"P2":
        raise FormatError("ASCII PGM (P2) is not supported; use binary P5")
    if magic != b"P5":
        raise FormatError(f"not a PGM file (magic {magic!r})")
    fields = []
    for _ in range(3):
        tok, pos = _read_pgm_token(data, pos)
        if not tok.isdigit():
            raise FormatError(f"malformed PGM header token {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"only maxval 255 PGM is supported, got {maxval}")
    if width <= 0 or height <= 0:
        raise FormatError("PGM dimensions must be positive")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos : pos + width * height]
    if len(pixels) < width * height:
        raise FormatError("PGM pixel data shorter than header promises")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(img: np.ndarray) -> bytes:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.ndim != 2:
        raise FormatError("PGM output requires a 2-D grayscale image")
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def read_bmp(data: bytes) -> np.ndarray:
    if len(data) < 54 or data[:2] != b"BM":
        raise FormatError("not a BMP file")
    pixel_offset = struct.unpack_from("<I", data, 10)[0]
    dib_size = struct.unpack_from("<I", data, 14)[0]
    if dib_size < 40:
        raise FormatError(f"unsupported BMP header ({dib_size} bytes)")
    width, height = struct.unpack_from("<ii", data, 18)
    planes, bpp = struct.unpack_from("<HH", data, 26)
    compression = struct.unpack_from("<I", data, 30)[0]
    if planes != 1 or bpp != 8 or compression != 0:
        raise FormatError("only uncompressed 8-bit BMP is supported")
    if width <= 0 or height == 0:
        raise FormatError("BMP dimensions must be non-zero")
    top_down = height < 0
    height = abs(height)

    n_colors = struct.unpack_from("<I", data, 46)[0] or 256
    pal_off = 14 + dib_size
    palette = np.frombuffer(data[pal_off : pal_off + 4 * n_colors], dtype=np.uint8)
    if len(palette) < 4 * n_colors:
        raise FormatError("BMP palette truncated")
    palette = palette.reshape(-1, 4)  # B, G, R, reserved
    if not (palette[:, 0] == palette[:, 1]).all() or not (
        palette[:, 1] == palette[:, 2]
    ).all():
        raise FormatError("BMP palette is not grayscale")
    gray = np.zeros(256, dtype=np.uint8)
    gray[: len(palette)] = palette[:, 0]

    stride = (width + 3) & ~3
    end = pixel_offset + stride * height
    if len(data) < end:
        raise FormatError("BMP pixel data shorter than header promises")
    rows = np.frombuffer(data[pixel_offset:end], dtype=np.uint8).reshape(height, stride)
    img = gray[rows[:, :width]]
    return img if top_down else img[::-1].copy()


def read_image(path: str) -> np.ndarray:
    """Load a grayscale image, sniffing PGM/BMP from the magic bytes."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P5" or data[:2] == b"P2":
        return read_pgm(data)
    if data[:2] == b"BM":
        return read_bmp(data)
    raise FormatError(f"unsupported image format in {path!r}")


def write_image(path: str, img: np.ndarray) -> None:
    """Write a grayscale image as binary PGM."""
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))
