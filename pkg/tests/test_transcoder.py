"""Blind transcoder tests: contribution model, rate grid, inclusion, cuts.

Frozen numeric values were computed by hand from the definitions
(percentages, population moments, the j/(k+1) refinement grid and the
sigma-step boundary schedule).
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blinqs.container import parse, serialize
from blinqs.errors import DegenerateStreamError, InvariantError
from blinqs.pipeline import decode_pipeline
from blinqs.transcoder import (
    BASE_LOC,
    SIGMA_STEPS,
    STANDARD_RATES,
    analyze_rate,
    build_plan,
    compute_location,
    find_x_new,
    gaussian_profile,
    inclusion_map,
    locate_rate,
    percentage_lengths,
    transcode,
    truncation_points,
)

RATE_GRID = [0.05, 0.0625, 0.1, 0.125, 0.2, 0.25, 0.3125, 0.375, 0.45, 0.5, 1.0]


# ------------------------------------------------------------ contribution model


def test_percentage_lengths_equal_blocks():
    np.testing.assert_allclose(percentage_lengths([1, 1, 1, 1]), [25.0] * 4)


def test_percentage_lengths_proportional():
    np.testing.assert_allclose(percentage_lengths([3, 1]), [75.0, 25.0])


def test_percentage_lengths_rejects_empty_stream():
    with pytest.raises(DegenerateStreamError):
        percentage_lengths([0, 0, 0])


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=200).filter(lambda v: sum(v) > 0))
def test_percentage_lengths_sum_to_100(lengths):
    assert abs(percentage_lengths(lengths).sum() - 100.0) < 1e-9


def test_gaussian_profile_population_moments():
    p = gaussian_profile([10, 20, 30, 40])
    assert p.mu == 25.0
    assert p.sigma2 == 125.0
    assert p.sigma == math.sqrt(125.0)
    assert not p.degenerate


def test_gaussian_profile_density_values():
    # X(pl) = exp(-(pl-mu)^2 / (2 sigma^2)) / sqrt(2 pi sigma^2); at the mean
    # that is 1/sqrt(2 pi * 125) = 0.0356824823...
    p = gaussian_profile([10, 20, 30, 40])
    assert abs(1.0 / math.sqrt(2 * math.pi * 125.0) - 0.035682482323055424) < 1e-15
    np.testing.assert_allclose(
        p.density,
        [0.014507414696784586, 0.03228684517430724, 0.03228684517430724, 0.014507414696784586],
        atol=1e-15,
    )


def test_gaussian_profile_degenerate_when_all_equal():
    p = gaussian_profile([7, 7, 7])
    assert p.degenerate
    assert p.sigma2 == 0.0
    assert np.all(p.density == 0.0)


# ------------------------------------------------------------------- rate grid


def test_standard_rate_table():
    assert STANDARD_RATES == (0.0625, 0.125, 0.25, 0.5, 1.0, 2.0)
    assert SIGMA_STEPS == (2, 1, 0, -1, -2, -3)
    assert BASE_LOC == (2, 3, 4, 5, 6, 7)


def test_locate_rate_standard_and_bracketing():
    assert locate_rate(0.25) == ("standard", 3, 0.0, 0.0)
    kind, s, dl, dh = locate_rate(0.3)
    assert (kind, s) == ("interpolated", 3)
    assert abs(dl - 0.05) < 1e-12 and abs(dh - 0.2) < 1e-12
    assert locate_rate(0.03)[:2] == ("clamped-low", 1)
    assert locate_rate(5.0)[:2] == ("clamped-high", 6)


def test_locate_rate_rejects_bad_values():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            locate_rate(bad)


def test_find_x_new_midpoint_shortcut():
    # Exactly halfway between standard rates: (j, k) = (1, 1) without a search.
    for s, (lo, hi) in enumerate(zip(STANDARD_RATES, STANDARD_RATES[1:]), start=1):
        j, k, x, beta = find_x_new((lo + hi) / 2.0, s)
        assert (j, k, x, beta) == (1, 1, 0.5, 0.0)


def test_find_x_new_exact_grid_hits():
    # 0.3125 = 0.25 + 0.25*(1/4): approached from below with j/(k+1) = 1/4.
    assert find_x_new(0.3125, 3) == (1, 3, 0.25, 0.0)
    # 0.45 = 0.5 - 0.25*(1/5): approached from above with j/(k+1) = 1/5.
    assert find_x_new(0.45, 3) == (1, 4, 0.2, 0.0)
    # 0.3  = 0.25 + 0.25*(1/5).
    assert find_x_new(0.3, 3) == (1, 4, 0.2, 0.0)


def test_find_x_new_rejects_out_of_bracket():
    with pytest.raises(InvariantError):
        find_x_new(0.6, 3)


def test_find_x_new_tol_zero_scans_full_grid():
    rng = np.random.default_rng(1)
    for _ in range(50):
        r = float(rng.uniform(0.0626, 1.9999))
        kind, s, dl, dh = locate_rate(r)
        if kind != "interpolated" or dl == dh:
            continue
        j, k, x, beta = find_x_new(r, s, k_max=16, tol=0.0)
        lo, hi = STANDARD_RATES[s - 1], STANDARD_RATES[s]
        span = hi - lo
        from_low = dl < dh
        best = min(
            (abs(r - (lo + span * (jj / (kk + 1)) if from_low else hi - span * (jj / (kk + 1)))), kk, jj)
            for kk in range(1, 17)
            for jj in range(1, kk + 1)
        )
        assert (beta, k, j) == pytest.approx((best[0], best[1], best[2]))
        assert x == j / (k + 1)


def test_compute_location_literal_offsets():
    # From below the location advances j partitions past the base; from above
    # it advances k - j partitions past the next base.
    assert compute_location(3, 1, 3, 0.0625, 0.1875) == BASE_LOC[2] + 1
    assert compute_location(3, 1, 4, 0.2, 0.05) == BASE_LOC[2] + 3


def test_analyze_rate_frozen_table():
    cases = {
        0.0625: ("standard", 1, 2, 2.0),
        0.125: ("standard", 2, 3, 1.0),
        0.25: ("standard", 3, 4, 0.0),
        0.5: ("standard", 4, 5, -1.0),
        1.0: ("standard", 5, 6, -2.0),
        2.0: ("standard", 6, 7, -3.0),
        0.3: ("interpolated", 3, 5, -0.2),
        0.3125: ("interpolated", 3, 5, -0.25),
        0.375: ("interpolated", 3, 4, -0.5),
        0.45: ("interpolated", 3, 7, -0.8),
        0.03: ("clamped-low", 1, 2, 2.0),
        5.0: ("clamped-high", 6, 7, -math.inf),
    }
    for rate, (kind, s, loc, t) in cases.items():
        q = analyze_rate(rate)
        assert (q.kind, q.s, q.loc) == (kind, s, loc), rate
        assert q.boundary_t == pytest.approx(t), rate


def test_analyze_rate_midpoint_uses_low_side_boundary():
    q = analyze_rate(0.375)
    assert (q.j, q.k, q.x_new) == (1, 1, 0.5)
    assert q.boundary_t == pytest.approx(SIGMA_STEPS[2] - 0.5)


# ------------------------------------------------------------------- inclusion


def test_inclusion_boundary_ties_are_included():
    # PL = [30, 30, 20, 20], mu = 25, sigma = 5; at t = +1 the bound is
    # exactly 30 and both 30% blocks stay in.
    profile = gaussian_profile([30, 30, 20, 20])
    included, fallback = inclusion_map(profile, 1.0)
    assert included == [0, 1]
    assert not fallback


def test_inclusion_degenerate_profile_includes_all():
    profile = gaussian_profile([5, 5, 5])
    included, fallback = inclusion_map(profile, 2.0)
    assert included == [0, 1, 2]
    assert not fallback


def test_inclusion_minus_infinity_includes_all():
    profile = gaussian_profile([1, 2, 3, 4])
    included, fallback = inclusion_map(profile, -math.inf)
    assert included == [0, 1, 2, 3]


def test_inclusion_empty_selection_falls_back_to_largest():
    # Strict boundary above every PL: keep the single largest contributor.
    profile = gaussian_profile([10, 20, 30, 40])
    included, fallback = inclusion_map(profile, 10.0)
    assert included == [3]
    assert fallback


def test_inclusion_sets_grow_as_boundary_drops():
    profile = gaussian_profile([5, 10, 20, 30, 35])
    previous = set()
    for t in (2.0, 1.0, 0.0, -1.0, -2.0, -3.0):
        included, _ = inclusion_map(profile, t)
        assert previous <= set(included)
        previous = set(included)


# ------------------------------------------------------------ truncation points


def test_truncation_budget_exceeds_total_keeps_everything():
    bits, scale = truncation_points([100, 300], [0, 1], 1000)
    assert bits == {0: 100, 1: 300}
    assert scale == 1.0


def test_truncation_proportional_cut():
    bits, scale = truncation_points([100, 300], [0, 1], 200)
    assert scale == 0.5
    assert bits == {0: 50, 1: 150}


def test_truncation_floors_leave_bounded_slack():
    rng = np.random.default_rng(3)
    for _ in range(50):
        lengths = [int(v) for v in rng.integers(1, 5000, size=12)]
        budget = int(rng.integers(0, sum(lengths)))
        bits, _ = truncation_points(lengths, list(range(12)), budget)
        got = sum(bits.values())
        assert got <= budget
        assert got >= budget - 12  # one floored bit per block at most


def test_truncation_validates_inputs():
    with pytest.raises(InvariantError):
        truncation_points([10], [], 5)
    with pytest.raises(InvariantError):
        truncation_points([10], [0], -1)


# -------------------------------------------------------------------- planning


def header_with_lengths(lengths):
    """16x16 geometry (4 blocks) with prescribed per-block total bits."""
    from blinqs.container import BlockRecord, StreamHeader
    from blinqs.wavelet import block_layout

    records = []
    for (band, level, _y0, _x0, bh, bw), total in zip(
        block_layout((16, 16), 1, 8), lengths
    ):
        records.append(
            BlockRecord(
                band=band,
                level=level,
                flags=0,
                n_planes=1 if total else 0,
                plane_lengths=[total] if total else [],
                shape=(bh, bw),
            )
        )
    return StreamHeader(
        width=16, height=16, levels=1, cb_size=8, delta_max=4, records=records
    )


def test_build_plan_keeps_boundary_set_when_it_covers_the_budget():
    # PL = [40, 30, 20, 10], mu = 25, sigma ≈ 11.18.  At 0.125 bpp the +1
    # sigma boundary keeps only block 0, whose 400 bits dwarf the 32-bit
    # budget, so no fill is needed.
    header = header_with_lengths([400, 300, 200, 100])
    plan, report = build_plan(header, 0.125)
    assert report.budget_bits == 32
    assert plan.included == [0]
    assert report.fill_extended == 0


def test_build_plan_fills_budget_along_contribution_order():
    # Same shares but a short stream: at 0.5 bpp the -1 sigma boundary keeps
    # {0, 1, 2} (90 bits) yet the budget is 128, so the plan walks the PL
    # ordering and pulls in block 3 as well.
    header = header_with_lengths([40, 30, 20, 10])
    plan, report = build_plan(header, 0.5)
    assert report.budget_bits == 128
    assert plan.included == [0, 1, 2, 3]
    assert report.fill_extended == 1
    assert plan.scale == 1.0
    assert plan.achieved_bits == 100


def test_build_plan_respects_budget_and_reports_consistently():
    header = header_with_lengths([400, 300, 200, 100])
    for rate in RATE_GRID:
        plan, report = build_plan(header, rate)
        assert plan.achieved_bits <= report.budget_bits or plan.scale == 1.0
        assert report.achieved_bits == plan.achieved_bits
        assert report.included == plan.included
        assert set(plan.bits) == set(plan.included)
        assert report.achieved_bpp == pytest.approx(plan.achieved_bits / 256.0)


def test_build_plan_empty_fallback_skips_budget_fill():
    # One dominant block far above the +2 sigma boundary keeps the fallback
    # selection at exactly one block.
    header = header_with_lengths([10, 10, 10, 1000])
    plan, report = build_plan(header, 0.0625)
    assert report.empty_fallback or plan.included == [3]
    if report.empty_fallback:
        assert plan.included == [3]
        assert report.fill_extended == 0


def test_build_plan_report_dict_keys():
    header = header_with_lengths([400, 300, 200, 100])
    _, report = build_plan(header, 0.45)
    d = report.as_dict()
    assert set(d) == {
        "target_bpp",
        "budget_bits",
        "n_blocks",
        "mu",
        "sigma2",
        "degenerate",
        "rate_kind",
        "standard_index",
        "j",
        "k",
        "x_new",
        "location",
        "boundary_sigma",
        "included",
        "fill_extended",
        "empty_fallback",
        "bits",
        "achieved_payload_bits",
        "achieved_bpp",
    }
    assert d["rate_kind"] == "interpolated"
    assert all(isinstance(k, str) for k in d["bits"])


# --------------------------------------------------------------- full transcode


def test_transcode_is_blind_to_pixels(encoded_small):
    # Planning from a header parsed out of raw bytes must equal planning from
    # the encoder's in-memory header: lengths are the only signal.
    container = encoded_small.container
    reparsed = parse(serialize(container))
    for rate in (0.1, 0.25, 0.45, 1.0):
        plan_a, _ = build_plan(container.header, rate)
        plan_b, _ = build_plan(reparsed.header, rate)
        assert plan_a.included == plan_b.included
        assert plan_a.bits == plan_b.bits


def test_transcode_meets_budget_and_decodes(encoded_small):
    container = encoded_small.container
    pixels = container.header.width * container.header.height
    for rate in RATE_GRID:
        cut, report = transcode(container, rate)
        budget = int(math.floor(rate * pixels))
        assert cut.header.payload_bits <= budget or report.achieved_bits == pytest.approx(
            container.header.payload_bits
        )
        assert cut.header.payload_bits == report.achieved_bits
        img = decode_pipeline(cut)
        assert img.shape == (container.header.height, container.header.width)
        assert img.dtype == np.uint8


def test_transcode_nested_rates_nest_inclusion_sets(encoded_small):
    # The inclusion sets form a ⊆-chain across the standard rates.  Per-block
    # bit counts are only guaranteed to grow while the set is unchanged (a
    # growing set can dilute the proportional scale).
    container = encoded_small.container
    previous_bits: dict[int, int] = {}
    previous_set: set[int] = set()
    for rate in STANDARD_RATES:
        _, report = transcode(container, rate)
        current = set(report.included)
        assert previous_set <= current
        if current == previous_set:
            for idx, bits in previous_bits.items():
                assert report.bits.get(idx, 0) >= bits
        previous_set = current
        previous_bits = report.bits


def test_transcode_twice_conditional_idempotence(encoded_small):
    # Re-cutting an already-cut stream at the same rate can only shrink it;
    # when the inclusion set is unchanged the result is byte-identical.
    container = encoded_small.container
    once, r1 = transcode(container, 0.25)
    twice, r2 = transcode(once, 0.25)
    assert twice.header.payload_bits <= once.header.payload_bits
    if r1.included == r2.included and r1.bits == r2.bits:
        assert serialize(twice) == serialize(once)


def test_transcode_all_zero_stream_raises_degenerate(encoded_small):
    from blinqs.container import retruncate

    empty = retruncate(encoded_small.container, {})
    with pytest.raises(DegenerateStreamError):
        transcode(empty, 0.25)
