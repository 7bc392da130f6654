"""SPIHT block codec with selectable backend.

Importing this package picks the compiled kernel when available and falls
back to the pure-Python twin otherwise.  Set BLINQS_SPIHT_BACKEND=pure (or
=cython) to force a choice; forcing cython without the built extension is an
error.
"""

from __future__ import annotations

import os

from . import _pure

_requested = os.environ.get("BLINQS_SPIHT_BACKEND", "").strip().lower()

if _requested == "pure":
    BACKEND = "pure"
    _impl = _pure
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "BLINQS_SPIHT_BACKEND=cython but the compiled kernel is not built"
            )
        BACKEND = "pure"
        _impl = _pure

encode_block_kernel = _impl.encode_block_kernel
decode_block_kernel = _impl.decode_block_kernel

from .codec import CodedBlock, decode_block, encode_block  # noqa: E402

__all__ = [
    "BACKEND",
    "CodedBlock",
    "encode_block",
    "decode_block",
    "encode_block_kernel",
    "decode_block_kernel",
]
