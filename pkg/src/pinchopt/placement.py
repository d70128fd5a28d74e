"""Waveguide antenna placement: bisection search plus phase fine-tuning.

The solver works in two nested layers.  The outer layer bisects the
centre-antenna position between the two users' x-coordinates, contracting
toward the strong user whenever the rate targets are met.  The inner layer
takes the rigid minimum-pitch array built at the current centre and nudges
each off-centre antenna outward in wavelength-scale steps until its
composite phase lines up with its inner neighbour's for both users, which
turns the per-antenna contributions from incoherent into coherent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    AntennaLayout,
    SystemParams,
    UserPosition,
    phases_and_distances,
    pinching_gain,
    wavelength,
)
from .noma import (
    Alpha2Result,
    FeasibilityReport,
    PowerSplit,
    QosTargets,
    RateReport,
    ZERO_RATES,
    check_feasibility,
    optimal_alpha2,
    rate_report,
    snr_scale,
)

TWO_PI = 2.0 * math.pi


class PlacementError(ValueError):
    """The requested placement cannot be built (geometry or scenario)."""


@dataclass(frozen=True)
class AlgoConfig:
    """Knobs of the placement solver.

    epsilon          bisection convergence threshold on the centre position, m
    delta1, delta2   phase alignment tolerances for the weak/strong user, rad
    fine_step        fine-tuning step, m (default: wavelength / 100)
    max_fine_shifts  cap on outward steps per antenna (default: a
                     10-wavelength window, ceil(10 * wavelength / fine_step))
    baseline_mode    fixed-antenna combining used by comparison harnesses
    """

    epsilon: float = 1e-5
    delta1: float = 0.5
    delta2: float = 0.02
    fine_step: float | None = None
    max_fine_shifts: int | None = None
    baseline_mode: str = "uniform"

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.delta1 < 0 or self.delta2 < 0:
            raise ValueError("phase tolerances must be non-negative")
        if self.fine_step is not None and self.fine_step <= 0:
            raise ValueError("fine_step must be positive")
        if self.max_fine_shifts is not None and self.max_fine_shifts < 1:
            raise ValueError("max_fine_shifts must be >= 1")

    def resolved_fine_step(self, params: SystemParams) -> float:
        return self.fine_step if self.fine_step is not None else wavelength(params) / 100.0

    def resolved_max_shifts(self, params: SystemParams) -> int:
        if self.max_fine_shifts is not None:
            return self.max_fine_shifts
        return math.ceil(10.0 * wavelength(params) / self.resolved_fine_step(params))


@dataclass(frozen=True)
class PlacementSolution:
    """Best placement found, with its power split and constraint verdicts."""

    layout: AntennaLayout
    split: PowerSplit
    rates: RateReport
    feasibility: FeasibilityReport
    iterations: int
    feasible_found: bool
    alpha_clamped: str = "none"
    pinned_antennas: tuple[int, ...] = ()


def circular_phase_error(a: float, b: float) -> float:
    """Distance between two phases on the circle, in [0, pi]."""
    m = abs(a - b) % TWO_PI
    return min(m, TWO_PI - m)


def center_index(n_antennas: int) -> int:
    """0-based index of the centre antenna (middle of an odd array)."""
    return (n_antennas - 1) // 2


def center_bounds(params: SystemParams) -> tuple[float, float]:
    """Admissible centre-antenna range so the rigid array fits the region."""
    c = center_index(params.n_antennas)
    half = params.side_d / 2.0
    lo = -half + c * params.delta_min
    hi = half - (params.n_antennas - 1 - c) * params.delta_min
    if lo > hi:
        raise PlacementError(
            f"{params.n_antennas} antennas at spacing {params.delta_min} "
            f"do not fit in a region of side {params.side_d}"
        )
    return lo, hi


def initial_layout(params: SystemParams, center_x: float, feed_x: float) -> AntennaLayout:
    """Rigid array at minimum pitch with its centre antenna at ``center_x``."""
    lo, hi = center_bounds(params)
    if not (lo <= center_x <= hi):
        raise PlacementError(
            f"centre {center_x} leaves no room for the array; "
            f"valid range is [{lo}, {hi}]"
        )
    c = center_index(params.n_antennas)
    xs = tuple(
        center_x + (n - c) * params.delta_min for n in range(params.n_antennas)
    )
    return AntennaLayout(xs=xs, feed_x=feed_x)


def _antenna_cap(params: SystemParams, n: int, side: int) -> float:
    """Outermost position antenna ``n`` may take while leaving minimum-pitch
    room for every antenna beyond it on the same side (+1 right, -1 left)."""
    half = params.side_d / 2.0
    if side > 0:
        return half - (params.n_antennas - 1 - n) * params.delta_min
    return -half + n * params.delta_min


def _pick_candidate(
    params: SystemParams,
    users: tuple[UserPosition, UserPosition],
    cfg: AlgoConfig,
    feed_x: float,
    cand: np.ndarray,
    inner_x: float,
    side: int,
    cap: float,
) -> float:
    """Pick the tuned position of one antenna from an outward candidate grid.

    The grid is truncated at the room-preserving region cap (keeping the cap
    itself as a final candidate).  The first candidate that keeps spacing
    >= delta_min to the inner neighbour and aligns the composite-phase
    difference within (delta1, delta2) for both users wins; if none does,
    the valid candidate with the smallest tolerance-weighted error is used.
    """
    if side > 0:
        keep = cand <= cap + 1e-15
        truncated = not keep.all()
        cand = cand[keep]
        if truncated and (cand.size == 0 or cand[-1] < cap - 1e-15):
            cand = np.append(cand, cap)
        spacing_ok = cand - inner_x >= params.delta_min - AntennaLayout.SPACING_SLACK
    else:
        keep = cand >= cap - 1e-15
        truncated = not keep.all()
        cand = cand[keep]
        if truncated and (cand.size == 0 or cand[-1] > cap + 1e-15):
            cand = np.append(cand, cap)
        spacing_ok = inner_x - cand >= params.delta_min - AntennaLayout.SPACING_SLACK

    if not spacing_ok.any():
        # inner neighbour moved past the whole grid; sit at minimum pitch
        fallback = inner_x + side * params.delta_min
        return min(fallback, cap) if side > 0 else max(fallback, cap)

    phase_inner = [
        float(phases_and_distances(params, u, np.asarray(inner_x), feed_x)[0])
        for u in users
    ]
    errs = []
    for u, ref in zip(users, phase_inner):
        ph, _ = phases_and_distances(params, u, cand, feed_x)
        m = np.abs(ph - ref) % TWO_PI
        errs.append(np.minimum(m, TWO_PI - m))
    ok = spacing_ok & (errs[0] <= cfg.delta1) & (errs[1] <= cfg.delta2)
    if ok.any():
        return float(cand[int(np.argmax(ok))])
    # tolerance-weighted fallback; guard against a zero tolerance
    score = errs[0] / max(cfg.delta1, 1e-300) + errs[1] / max(cfg.delta2, 1e-300)
    weighted = np.where(spacing_ok, score, np.inf)
    return float(cand[int(np.argmin(weighted))])


def fine_tune(
    params: SystemParams,
    layout: AntennaLayout,
    users: tuple[UserPosition, UserPosition],
    cfg: AlgoConfig,
) -> AntennaLayout:
    """Align off-centre antennas' composite phases with their inner neighbour.

    Antennas right of the centre are processed in ascending order shifting
    right, then antennas left of the centre in descending order shifting
    left; the centre antenna never moves.  The returned layout always
    satisfies the spacing and region invariants.
    """
    xs = list(layout.xs)
    c = center_index(params.n_antennas)
    step = cfg.resolved_fine_step(params)
    max_shifts = cfg.resolved_max_shifts(params)
    offsets = step * np.arange(max_shifts + 1)
    for n in range(c + 1, params.n_antennas):
        xs[n] = _pick_candidate(
            params, users, cfg, layout.feed_x,
            cand=xs[n] + offsets, inner_x=xs[n - 1], side=+1,
            cap=_antenna_cap(params, n, +1),
        )
    for n in range(c - 1, -1, -1):
        xs[n] = _pick_candidate(
            params, users, cfg, layout.feed_x,
            cand=xs[n] - offsets, inner_x=xs[n + 1], side=-1,
            cap=_antenna_cap(params, n, -1),
        )
    return AntennaLayout(xs=tuple(xs), feed_x=layout.feed_x)


def pinned_antennas(params: SystemParams, layout: AntennaLayout) -> tuple[int, ...]:
    """Indices of antennas sitting exactly on their region cap."""
    c = center_index(params.n_antennas)
    pinned = []
    for n in range(params.n_antennas):
        if n == c:
            continue
        side = +1 if n > c else -1
        if math.isclose(layout.xs[n], _antenna_cap(params, n, side), abs_tol=1e-12):
            pinned.append(n)
    return tuple(pinned)


def evaluate_placement(
    params: SystemParams,
    layout: AntennaLayout,
    users: tuple[UserPosition, UserPosition],
    qos: QosTargets,
) -> tuple[PowerSplit, RateReport, FeasibilityReport, Alpha2Result]:
    """Optimal power split, rates and constraint verdicts for one layout."""
    g1 = pinching_gain(params, layout, users[0])
    g2 = pinching_gain(params, layout, users[1])
    rho = snr_scale(params)
    snr1 = rho * abs(g1) ** 2
    snr2 = rho * abs(g2) ** 2
    alpha = optimal_alpha2(snr1, qos)
    split = PowerSplit.from_alpha2(alpha.alpha2)
    rates = rate_report(snr1, snr2, split)
    report = check_feasibility(params, layout, (g1, g2), split, qos)
    return split, rates, report, alpha


def bisection_solve(
    params: SystemParams,
    users: tuple[UserPosition, UserPosition],
    qos: QosTargets,
    cfg: AlgoConfig,
    feed_x: float | None = None,
) -> PlacementSolution:
    """Bisection placement search between the users' x-coordinates.

    ``users`` must be ordered (weak, strong).  The search interval starts at
    [x_strong, x_weak]; each iteration builds and fine-tunes the array at
    the interval midpoint (clamped so it fits the region), solves the power
    split in closed form, and contracts toward the strong user when the
    rate targets hold.  The best fully feasible iterate by sum rate is
    returned; if none is feasible the last iterate comes back with zero
    rates and feasible_found False.
    """
    u1, u2 = users
    if not all(math.isfinite(v) for v in (u1.x, u1.y, u2.x, u2.y)):
        raise PlacementError("user coordinates must be finite")
    if u1.x == u2.x:
        raise PlacementError("degenerate scenario: users share the same x-coordinate")
    if feed_x is None:
        feed_x = -params.side_d / 2.0
    lo_bound, hi_bound = center_bounds(params)

    left = u2.x
    right = u1.x
    best: PlacementSolution | None = None
    last: PlacementSolution | None = None
    iterations = 0
    while iterations == 0 or abs(right - left) > cfg.epsilon:
        iterations += 1
        mid = 0.5 * (left + right)
        center = min(max(mid, lo_bound), hi_bound)
        layout = fine_tune(params, initial_layout(params, center, feed_x), users, cfg)
        split, rates, report, alpha = evaluate_placement(params, layout, users, qos)
        last = PlacementSolution(
            layout=layout,
            split=split,
            rates=rates,
            feasibility=report,
            iterations=iterations,
            feasible_found=report.overall,
            alpha_clamped=alpha.clamped,
            pinned_antennas=pinned_antennas(params, layout),
        )
        if report.overall and (best is None or rates.sum_rate > best.rates.sum_rate):
            best = last
        if report.qos_ok:
            right = mid
        else:
            left = mid

    if best is not None:
        return PlacementSolution(
            layout=best.layout,
            split=best.split,
            rates=best.rates,
            feasibility=best.feasibility,
            iterations=iterations,
            feasible_found=True,
            alpha_clamped=best.alpha_clamped,
            pinned_antennas=best.pinned_antennas,
        )
    return PlacementSolution(
        layout=last.layout,
        split=last.split,
        rates=ZERO_RATES,
        feasibility=last.feasibility,
        iterations=iterations,
        feasible_found=False,
        alpha_clamped=last.alpha_clamped,
        pinned_antennas=last.pinned_antennas,
    )


def iteration_bound(params: SystemParams, cfg: AlgoConfig) -> int:
    """Worst-case bisection iteration count for a region of side D."""
    return math.ceil(math.log2(params.side_d / cfg.epsilon)) + 1
