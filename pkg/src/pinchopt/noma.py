"""Two-user downlink NOMA rates and closed-form power allocation.

User 1 is the weak user and decodes its signal treating user 2's as
interference; user 2 is the strong user and applies successive interference
cancellation (SIC).  All rates are in bits/s/Hz.  The per-user operating
SNR fed to these functions is rho * |g|^2 where rho = Pt / (N * sigma^2)
and g is the effective channel gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .channel import AntennaLayout, SystemParams, dbm_to_watts, wavelength

RATE_TOL = 1e-9  # slack on rate-target comparisons
ALPHA_TOL = 1e-12  # slack on power-coefficient sanity checks


@dataclass(frozen=True)
class PowerSplit:
    """Power allocation coefficients (alpha1 for the weak user)."""

    alpha1: float
    alpha2: float

    def __post_init__(self) -> None:
        if abs(self.alpha1 + self.alpha2 - 1.0) > ALPHA_TOL:
            raise ValueError("alpha1 + alpha2 must equal 1")
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError("power coefficients must be non-negative")

    @classmethod
    def from_alpha2(cls, alpha2: float) -> "PowerSplit":
        return cls(1.0 - alpha2, alpha2)


@dataclass(frozen=True)
class QosTargets:
    """Minimum per-user rate targets, bits/s/Hz."""

    r1_min: float = 0.5
    r2_min: float = 0.5

    def __post_init__(self) -> None:
        if self.r1_min < 0 or self.r2_min < 0:
            raise ValueError("rate targets must be non-negative")


@dataclass(frozen=True)
class RateReport:
    """Achievable rates of one configuration, bits/s/Hz."""

    r1: float
    r2: float
    r2_to_1: float
    sum_rate: float


ZERO_RATES = RateReport(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class FeasibilityReport:
    """Per-constraint verdicts for one (layout, power split) candidate."""

    spacing: bool
    r1_qos: bool
    r2_qos: bool
    sic: bool
    order_alpha: bool
    order_channel: bool

    @property
    def overall(self) -> bool:
        return (
            self.spacing
            and self.r1_qos
            and self.r2_qos
            and self.sic
            and self.order_alpha
            and self.order_channel
        )

    @property
    def qos_ok(self) -> bool:
        """The three rate constraints that steer the placement search."""
        return self.r1_qos and self.r2_qos and self.sic


class Alpha2Result(NamedTuple):
    alpha2: float
    clamped: str  # 'none', 'low' or 'high'


def snr_scale(params: SystemParams) -> float:
    """Transmit-to-noise power ratio per radiating point, Pt / (N sigma^2)."""
    return dbm_to_watts(params.pt_dbm) / (
        params.n_antennas * dbm_to_watts(params.noise_dbm)
    )


def rate_weak(snr_weak: float, split: PowerSplit) -> float:
    """Rate of the weak user decoding under the strong user's interference."""
    return math.log2(1.0 + split.alpha1 * snr_weak / (split.alpha2 * snr_weak + 1.0))


def rate_sic(snr_strong: float, split: PowerSplit) -> float:
    """Rate at which the strong user decodes the weak user's signal for SIC."""
    return math.log2(
        1.0 + split.alpha1 * snr_strong / (split.alpha2 * snr_strong + 1.0)
    )


def rate_strong(snr_strong: float, split: PowerSplit) -> float:
    """Rate of the strong user after perfect interference cancellation."""
    return math.log2(1.0 + split.alpha2 * snr_strong)


def sum_rate_objective(snr_weak: float, snr_strong: float, alpha2: float) -> float:
    """Interference-resolved sum-rate objective f(alpha2).

    log2(1 + f) equals rate_weak + rate_strong, which makes f the quantity
    to maximise; it is nondecreasing in alpha2 whenever snr_strong >=
    snr_weak, so the optimum sits on the feasible upper boundary.
    """
    return alpha2 * snr_strong + (1.0 - alpha2) * (
        1.0 + alpha2 * snr_strong
    ) * snr_weak / (alpha2 * snr_weak + 1.0)


def rate_report(snr_weak: float, snr_strong: float, split: PowerSplit) -> RateReport:
    """Evaluate all three achievable rates for one power split."""
    r1 = rate_weak(snr_weak, split)
    r2 = rate_strong(snr_strong, split)
    return RateReport(r1=r1, r2=r2, r2_to_1=rate_sic(snr_strong, split),
                      sum_rate=r1 + r2)


def optimal_alpha2(snr_weak: float, qos: QosTargets) -> Alpha2Result:
    """Closed-form optimal strong-user power coefficient.

    The unconstrained optimum gives the weak user exactly its rate target:
    alpha2 = (snr_weak + 1 - 2**r1_min) / (snr_weak * 2**r1_min), clamped
    into [0, 0.5].  A 'low' clamp means the weak user needs all the power
    (the target is unreachable at this channel); a 'high' clamp caps the
    strong user at an equal split.  snr_weak = 0 degenerates to (0, 'low').
    """
    if snr_weak <= 0.0:
        return Alpha2Result(0.0, "low")
    gate = 2.0**qos.r1_min
    raw = (snr_weak + 1.0 - gate) / (snr_weak * gate)
    if raw <= 0.0:
        return Alpha2Result(0.0, "low")
    if raw >= 0.5:
        return Alpha2Result(0.5, "high")
    return Alpha2Result(raw, "none")


def check_feasibility(
    params: SystemParams,
    layout: AntennaLayout,
    gains: tuple[complex, complex],
    split: PowerSplit,
    qos: QosTargets,
) -> FeasibilityReport:
    """Evaluate every constraint of the sum-rate problem for one candidate.

    Rate comparisons carry a 1e-9 slack and the spacing check a 1e-12 *
    wavelength slack.  The alpha ordering accepts the closed interval
    [0, 0.5]: the equal-split boundary is the clamped optimum at high SNR,
    not a violation.
    """
    lam = wavelength(params)
    spacing_tol = 1e-12 * lam
    spacing = all(
        b - a >= params.delta_min - spacing_tol
        for a, b in zip(layout.xs, layout.xs[1:])
    )
    rho = snr_scale(params)
    snr1 = rho * abs(gains[0]) ** 2
    snr2 = rho * abs(gains[1]) ** 2
    rates = rate_report(snr1, snr2, split)
    return FeasibilityReport(
        spacing=spacing,
        r1_qos=rates.r1 >= qos.r1_min - RATE_TOL,
        r2_qos=rates.r2 >= qos.r2_min - RATE_TOL,
        sic=rates.r2_to_1 >= qos.r1_min - RATE_TOL,
        order_alpha=(-ALPHA_TOL <= split.alpha2 <= 0.5 + ALPHA_TOL),
        order_channel=abs(gains[1]) ** 2 >= abs(gains[0]) ** 2,
    )
