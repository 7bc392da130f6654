"""Blind transcoding: pick a bit budget per block from header statistics only.

Every decision here is a function of the per-block embedded string lengths
recorded in the stream header; payload bits and original pixels are never
inputs.  The length shares are modelled with a Gaussian profile and a target
rate maps to a boundary expressed in standard deviations:

    0.0625 bpp -> mu + 2 sigma      0.5 bpp -> mu - 1 sigma
    0.125  bpp -> mu + 1 sigma      1.0 bpp -> mu - 2 sigma
    0.25   bpp -> mu                2.0 bpp -> mu - 3 sigma

Blocks whose share sits at or above the boundary are included (largest
contributors first); rates between the standard ones move the boundary by a
fraction x_new = j / (k + 1) found by grid search from the nearer standard
rate.  Included blocks are then cut proportionally to fit the bit budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .container import StreamContainer, StreamHeader, retruncate
from .errors import DegenerateStreamError, InvariantError

STANDARD_RATES = (0.0625, 0.125, 0.25, 0.5, 1.0, 2.0)
SIGMA_STEPS = (2.0, 1.0, 0.0, -1.0, -2.0, -3.0)  # boundary at mu + t*sigma
BASE_LOC = (2, 3, 4, 5, 6, 7)  # partition index of each standard rate

_RATE_EPS = 1e-12


@dataclass(frozen=True)
class ContributionProfile:
    """Gaussian model of per-block percentage contributions."""

    pl: np.ndarray  # percentage length of each block
    mu: float
    sigma2: float
    density: np.ndarray  # Gaussian density evaluated at each pl
    degenerate: bool  # all blocks contribute equally (sigma2 == 0)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class RateQuery:
    """Where a target rate falls relative to the standard-rate grid."""

    r_new: float
    kind: str  # "standard" | "interpolated" | "clamped-low" | "clamped-high"
    s: int  # 1-based index of the bracketing standard rate R_s
    delta_l: float = 0.0
    delta_h: float = 0.0
    j: int = 0
    k: int = 0
    x_new: float = 0.0
    beta: float = 0.0
    loc: int = 0
    boundary_t: float = 0.0  # inclusion boundary in sigma units


@dataclass
class TruncationPlan:
    included: list[int]
    bits: dict[int, int]
    budget_bits: int
    scale: float
    fill_extended: int = 0  # blocks added past the sigma boundary to cover the budget
    empty_fallback: bool = False

    @property
    def achieved_bits(self) -> int:
        return sum(self.bits.values())


def percentage_lengths(lengths) -> np.ndarray:
    """PL_i = 100 * L_i / sum(L)."""
    arr = np.asarray(lengths, dtype=np.float64)
    total = float(arr.sum())
    if total <= 0:
        raise DegenerateStreamError("stream has no payload bits to transcode")
    return 100.0 * arr / total


def gaussian_profile(lengths) -> ContributionProfile:
    """Fit the Gaussian contribution model over percentage lengths."""
    pl = percentage_lengths(lengths)
    mu = float(pl.mean())
    sigma2 = float(np.mean((pl - mu) ** 2))  # population variance
    if sigma2 <= 0.0:
        return ContributionProfile(
            pl=pl, mu=mu, sigma2=0.0, density=np.zeros_like(pl), degenerate=True
        )
    density = np.exp(-((pl - mu) ** 2) / (2.0 * sigma2)) / math.sqrt(
        2.0 * math.pi * sigma2
    )
    return ContributionProfile(pl=pl, mu=mu, sigma2=sigma2, density=density, degenerate=False)


def locate_rate(r_new: float) -> tuple[str, int, float, float]:
    """Classify a target rate: (kind, s, delta_l, delta_h), s 1-based."""
    if not (r_new > 0.0) or not math.isfinite(r_new):
        raise ValueError(f"target rate must be positive and finite, got {r_new}")
    for s, r in enumerate(STANDARD_RATES, start=1):
        if abs(r_new - r) <= _RATE_EPS:
            return "standard", s, 0.0, 0.0
    if r_new < STANDARD_RATES[0]:
        return "clamped-low", 1, 0.0, 0.0
    if r_new > STANDARD_RATES[-1]:
        return "clamped-high", len(STANDARD_RATES), 0.0, 0.0
    s = max(i for i, r in enumerate(STANDARD_RATES, start=1) if r < r_new)
    return (
        "interpolated",
        s,
        r_new - STANDARD_RATES[s - 1],
        STANDARD_RATES[s] - r_new,
    )


def find_x_new(
    r_new: float, s: int, k_max: int = 16, tol: float = 1e-4
) -> tuple[int, int, float, float]:
    """Grid-search the partition split (j, k) whose rate best matches r_new.

    Candidate rates step by j/(k+1) from the nearer bracketing standard rate;
    returns (j, k, x_new, beta).  A rate exactly halfway between standard
    rates takes (1, 1) without searching.  The scan stops early once
    beta <= tol; pass tol=0 to force the full-grid minimiser.
    """
    r_lo, r_hi = STANDARD_RATES[s - 1], STANDARD_RATES[s]
    if not (r_lo < r_new < r_hi):
        raise InvariantError(f"{r_new} does not lie inside ({r_lo}, {r_hi})")
    delta_l = r_new - r_lo
    delta_h = r_hi - r_new
    if delta_l == delta_h:
        return 1, 1, 0.5, 0.0
    from_low = delta_l < delta_h
    span = r_hi - r_lo
    best = (math.inf, 0, 0, 0.0)
    for k in range(1, k_max + 1):
        for j in range(1, k + 1):
            x = j / (k + 1)
            cand = r_lo + span * x if from_low else r_hi - span * x
            beta = abs(r_new - cand)
            if beta < best[0]:
                best = (beta, j, k, x)
            if beta <= tol:
                return j, k, x, beta
    beta, j, k, x = best
    return j, k, x, beta


def compute_location(s: int, j: int, k: int, delta_l: float, delta_h: float) -> int:
    """Partition index of the interpolated rate on the j/(k+1)-refined grid."""
    base = BASE_LOC[s - 1]
    return base + j if delta_l < delta_h else base + (k - j)


def analyze_rate(r_new: float, k_max: int = 16, tol: float = 1e-4) -> RateQuery:
    """Full rate analysis: bracketing, grid split, and the sigma boundary."""
    kind, s, delta_l, delta_h = locate_rate(r_new)
    if kind == "standard":
        return RateQuery(
            r_new=r_new, kind=kind, s=s, loc=BASE_LOC[s - 1],
            boundary_t=SIGMA_STEPS[s - 1],
        )
    if kind == "clamped-low":
        return RateQuery(r_new=r_new, kind=kind, s=1, loc=BASE_LOC[0],
                         boundary_t=SIGMA_STEPS[0])
    if kind == "clamped-high":
        return RateQuery(r_new=r_new, kind=kind, s=len(STANDARD_RATES),
                         loc=BASE_LOC[-1], boundary_t=-math.inf)
    j, k, x_new, beta = find_x_new(r_new, s, k_max=k_max, tol=tol)
    if delta_l < delta_h or delta_l == delta_h:
        boundary_t = SIGMA_STEPS[s - 1] - x_new
    else:
        boundary_t = SIGMA_STEPS[s] + x_new
    return RateQuery(
        r_new=r_new, kind=kind, s=s, delta_l=delta_l, delta_h=delta_h,
        j=j, k=k, x_new=x_new, beta=beta,
        loc=compute_location(s, j, k, delta_l, delta_h),
        boundary_t=boundary_t,
    )


def inclusion_map(profile: ContributionProfile, boundary_t: float) -> tuple[list[int], bool]:
    """Blocks whose share reaches mu + boundary_t*sigma (ties included).

    Returns (indices, empty_fallback).  A degenerate profile includes every
    block; an empty selection falls back to the single largest contributor.
    """
    n = len(profile.pl)
    if profile.degenerate or boundary_t == -math.inf:
        return list(range(n)), False
    bound = profile.mu + boundary_t * profile.sigma
    included = [i for i in range(n) if profile.pl[i] >= bound]
    if not included:
        return [int(np.argmax(profile.pl))], True
    return included, False


def truncation_points(
    lengths, included: list[int], budget_bits: int
) -> tuple[dict[int, int], float]:
    """Proportional cut: n_i = floor(f * L_i), f = min(1, budget / sum L_i)."""
    if not included:
        raise InvariantError("truncation needs a non-empty inclusion set")
    if budget_bits < 0:
        raise InvariantError("bit budget must be non-negative")
    lengths = list(lengths)
    total = sum(lengths[i] for i in included)
    scale = 1.0 if total == 0 else min(1.0, budget_bits / total)
    bits = {i: int(math.floor(scale * lengths[i])) for i in included}
    return bits, scale


def _contribution_order(pl: np.ndarray) -> list[int]:
    """Block indices by descending share; index breaks ties deterministically."""
    return sorted(range(len(pl)), key=lambda i: (-pl[i], i))


@dataclass
class TranscodeReport:
    target_bpp: float
    budget_bits: int
    n_blocks: int
    mu: float
    sigma2: float
    degenerate: bool
    query: RateQuery
    included: list[int]
    fill_extended: int
    empty_fallback: bool
    bits: dict[int, int]
    achieved_bits: int
    achieved_bpp: float

    def as_dict(self) -> dict:
        return {
            "target_bpp": self.target_bpp,
            "budget_bits": self.budget_bits,
            "n_blocks": self.n_blocks,
            "mu": self.mu,
            "sigma2": self.sigma2,
            "degenerate": self.degenerate,
            "rate_kind": self.query.kind,
            "standard_index": self.query.s,
            "j": self.query.j,
            "k": self.query.k,
            "x_new": self.query.x_new,
            "location": self.query.loc,
            "boundary_sigma": self.query.boundary_t,
            "included": list(self.included),
            "fill_extended": self.fill_extended,
            "empty_fallback": self.empty_fallback,
            "bits": {str(i): b for i, b in sorted(self.bits.items())},
            "achieved_payload_bits": self.achieved_bits,
            "achieved_bpp": self.achieved_bpp,
        }


def build_plan(
    header: StreamHeader,
    target_bpp: float,
    k_max: int = 16,
    tol: float = 1e-4,
) -> tuple[TruncationPlan, TranscodeReport]:
    """Plan a truncation for `target_bpp` from header statistics alone."""
    lengths = header.block_lengths()
    profile = gaussian_profile(lengths)
    query = analyze_rate(target_bpp, k_max=k_max, tol=tol)
    budget_bits = int(math.floor(target_bpp * header.width * header.height))

    included, empty_fallback = inclusion_map(profile, query.boundary_t)

    # The boundary set is a prefix of the contribution ordering.  When it
    # cannot absorb the budget, keep walking the same ordering so the
    # achieved rate tracks the target (nesting across rates is preserved:
    # both prefix lengths grow with the rate).
    order = _contribution_order(profile.pl)
    count = len(included)
    fill_extended = 0
    if not empty_fallback:
        covered = sum(lengths[i] for i in included)
        while covered < budget_bits and count < len(order):
            covered += lengths[order[count]]
            count += 1
            fill_extended += 1
        included = sorted(order[:count])

    bits, scale = truncation_points(lengths, included, budget_bits)
    plan = TruncationPlan(
        included=included,
        bits=bits,
        budget_bits=budget_bits,
        scale=scale,
        fill_extended=fill_extended,
        empty_fallback=empty_fallback,
    )
    pixels = header.width * header.height
    report = TranscodeReport(
        target_bpp=target_bpp,
        budget_bits=budget_bits,
        n_blocks=header.n_blocks,
        mu=profile.mu,
        sigma2=profile.sigma2,
        degenerate=profile.degenerate,
        query=query,
        included=included,
        fill_extended=fill_extended,
        empty_fallback=empty_fallback,
        bits=bits,
        achieved_bits=plan.achieved_bits,
        achieved_bpp=plan.achieved_bits / pixels,
    )
    return plan, report


def transcode(
    container: StreamContainer,
    target_bpp: float,
    k_max: int = 16,
    tol: float = 1e-4,
) -> tuple[StreamContainer, TranscodeReport]:
    """Cut a full-quality stream down to `target_bpp` bits per pixel."""
    plan, report = build_plan(container.header, target_bpp, k_max=k_max, tol=tol)
    return retruncate(container, plan.bits), report
