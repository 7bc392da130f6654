"""Embedded block codec tests.

The single-coefficient traces were derived by hand from the pass structure
(significance scan over the insignificant lists, set partitioning, sign bit,
then refinement) and are frozen here as byte-level oracles.
"""

from __future__ import annotations

import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import blinqs.spiht as spiht_pkg
from blinqs.errors import InvariantError
from blinqs.spiht import _pure
from blinqs.spiht.codec import BAND_IDS, FLAG_SECONDARY, CodedBlock, decode_block, encode_block

try:
    from blinqs.spiht import _kernel as _compiled
except ImportError:  # pragma: no cover - exercised only without the extension
    _compiled = None


def _mse(a, b):
    return float(np.mean((np.asarray(a, float) - np.asarray(b, float)) ** 2))


# ------------------------------------------------------------- frozen traces


def test_tree_mode_single_root_neighbor_trace():
    # 4x4 block, q[0,0] = 5 (planes 2..0), quadtree scan.
    q = np.zeros((4, 4), dtype=np.int32)
    q[0, 0] = 5
    cb = encode_block(q, secondary=True)
    assert cb.n_planes == 3
    assert cb.plane_lengths == [8, 7, 7]
    assert cb.payload == bytes.fromhex("800004")
    np.testing.assert_array_equal(decode_block(cb), q)


def test_flat_mode_single_coefficient_trace():
    # Same block under the flat scan: every cell polled in every plane.
    q = np.zeros((4, 4), dtype=np.int32)
    q[0, 0] = 5
    cb = encode_block(q, secondary=False)
    assert cb.n_planes == 3
    assert cb.plane_lengths == [17, 16, 16]
    assert cb.payload == bytes.fromhex("80000000000080")
    np.testing.assert_array_equal(decode_block(cb), q)


def test_all_zero_block_encodes_to_nothing():
    for secondary in (False, True):
        cb = encode_block(np.zeros((8, 8), dtype=np.int32), secondary=secondary)
        assert cb.n_planes == 0
        assert cb.plane_lengths == []
        assert cb.payload == b""
        np.testing.assert_array_equal(decode_block(cb), np.zeros((8, 8)))


@pytest.mark.parametrize("secondary", [False, True])
@pytest.mark.parametrize("value", [1, -1, 32767, -32767])
def test_one_hot_blocks_roundtrip(secondary, value):
    rng = np.random.default_rng(abs(value) + secondary)
    for _ in range(8):
        h, w = rng.integers(8, 33, size=2)
        q = np.zeros((h, w), dtype=np.int32)
        q[rng.integers(h), rng.integers(w)] = value
        cb = encode_block(q, secondary=secondary)
        assert cb.n_planes == int(abs(value)).bit_length()
        np.testing.assert_array_equal(decode_block(cb), q)


@pytest.mark.parametrize("secondary", [False, True])
def test_random_blocks_roundtrip_bit_exact(secondary):
    rng = np.random.default_rng(42 + secondary)
    for _ in range(40):
        h, w = rng.integers(8, 65, size=2)
        q = rng.integers(-2000, 2001, size=(h, w)).astype(np.int32)
        cb = encode_block(q, secondary=secondary)
        np.testing.assert_array_equal(decode_block(cb), q)


@given(
    h=st.integers(2, 24),
    w=st.integers(2, 24),
    secondary=st.booleans(),
    seed=st.integers(0, 2**31),
)
def test_roundtrip_property(h, w, secondary, seed):
    rng = np.random.default_rng(seed)
    q = rng.integers(-(2**12), 2**12, size=(h, w)).astype(np.int32)
    cb = encode_block(q, secondary=secondary)
    np.testing.assert_array_equal(decode_block(cb), q)


# -------------------------------------------------------------- plane counts


def test_plane_count_matches_magnitude_msb():
    q = np.zeros((8, 8), dtype=np.int32)
    q[3, 3] = 5  # needs planes 2,1,0
    assert encode_block(q).n_planes == 3
    q[3, 3] = -8  # needs planes 3..0
    assert encode_block(q).n_planes == 4


def test_plane_lengths_sum_to_payload_bits():
    rng = np.random.default_rng(9)
    q = rng.integers(-300, 301, size=(16, 16)).astype(np.int32)
    cb = encode_block(q)
    assert cb.total_bits == sum(cb.plane_lengths)
    assert len(cb.payload) == (cb.total_bits + 7) // 8
    assert cb.prefix_bits(2) == cb.plane_lengths[0] + cb.plane_lengths[1]
    assert cb.prefix_bits(0) == 0
    assert cb.prefix_bits(cb.n_planes) == cb.total_bits


def test_encode_block_rejects_non_2d_input():
    with pytest.raises(InvariantError):
        encode_block(np.zeros(16, dtype=np.int32))


def test_coded_block_metadata_defaults():
    q = np.zeros((8, 8), dtype=np.int32)
    assert encode_block(q, band="LL").secondary is False
    assert encode_block(q, band="HH").secondary is True
    assert encode_block(q, band="HH").flags == FLAG_SECONDARY
    assert encode_block(q, band="LL").flags == 0
    assert BAND_IDS == {"LL": 0, "HL": 1, "LH": 2, "HH": 3}


# ---------------------------------------------------------- truncated decode


def test_decode_with_zero_bits_gives_zeros():
    rng = np.random.default_rng(5)
    q = rng.integers(-100, 101, size=(8, 8)).astype(np.int32)
    cb = encode_block(q)
    np.testing.assert_array_equal(decode_block(cb, n_bits=0), np.zeros((8, 8)))


def test_decode_clamps_over_budget_requests():
    rng = np.random.default_rng(6)
    q = rng.integers(-100, 101, size=(8, 8)).astype(np.int32)
    cb = encode_block(q)
    np.testing.assert_array_equal(decode_block(cb, n_bits=cb.total_bits + 999), q)


def test_decode_never_errors_at_any_prefix():
    rng = np.random.default_rng(7)
    q = rng.integers(-500, 501, size=(12, 12)).astype(np.int32)
    cb = encode_block(q)
    for n in range(cb.total_bits + 1):
        out = decode_block(cb, n_bits=n)
        assert out.shape == q.shape


def test_truncated_mse_non_increasing_at_plane_boundaries_and_offsets():
    rng = np.random.default_rng(8)
    for _ in range(25):
        h, w = rng.integers(8, 33, size=2)
        q = rng.integers(-(2**10), 2**10, size=(h, w)).astype(np.int32)
        cb = encode_block(q, secondary=bool(rng.integers(2)))
        cuts = {cb.prefix_bits(k) for k in range(cb.n_planes + 1)}
        cuts.update(int(v) for v in rng.integers(0, cb.total_bits + 1, size=16))
        prev = None
        for n in sorted(cuts):
            err = _mse(q, decode_block(cb, n_bits=n))
            if prev is not None:
                assert err <= prev + 1e-12, f"MSE rose at {n} bits"
            prev = err


def test_full_prefix_at_last_plane_boundary_is_lossless():
    rng = np.random.default_rng(10)
    q = rng.integers(-50, 51, size=(8, 8)).astype(np.int32)
    cb = encode_block(q)
    np.testing.assert_array_equal(decode_block(cb, n_bits=cb.total_bits), q)


# --------------------------------------------------------- backend equivalence


@pytest.mark.skipif(_compiled is None, reason="compiled kernel not built")
def test_backends_produce_identical_streams_and_decodes():
    rng = np.random.default_rng(11)
    for _ in range(25):
        h, w = rng.integers(2, 49, size=2)
        q = rng.integers(-(2**14), 2**14, size=(h, w)).astype(np.int32)
        for secondary in (False, True):
            pe = _pure.encode_block_kernel(q, secondary)
            ce = _compiled.encode_block_kernel(q, secondary)
            assert pe[0] == ce[0]  # payload bytes
            assert list(pe[1]) == list(ce[1])  # plane lengths
            assert pe[2] == ce[2]  # plane count
            total = sum(pe[1])
            for n in sorted({0, total, *rng.integers(0, total + 1, size=8)}):
                pd = _pure.decode_block_kernel(pe[0], int(n), h, w, pe[2], secondary)
                cd = _compiled.decode_block_kernel(ce[0], int(n), h, w, ce[2], secondary)
                np.testing.assert_array_equal(pd, cd)


def test_backend_selection_env_var():
    # The backend is fixed at import time, so probe it in a fresh interpreter.
    import subprocess
    import sys

    env = dict(os.environ, BLINQS_SPIHT_BACKEND="pure")
    out = subprocess.run(
        [sys.executable, "-c", "import blinqs.spiht as s; print(s.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "pure"


def test_active_backend_exposed():
    assert spiht_pkg.BACKEND in ("pure", "cython")
    if _compiled is not None and os.environ.get("BLINQS_SPIHT_BACKEND") in (None, "cython"):
        assert spiht_pkg.BACKEND == "cython"
