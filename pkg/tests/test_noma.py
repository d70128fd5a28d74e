import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinchopt import (
    AntennaLayout,
    PowerSplit,
    QosTargets,
    SystemParams,
    check_feasibility,
    optimal_alpha2,
    rate_sic,
    rate_strong,
    rate_weak,
    snr_scale,
    sum_rate_objective,
)

snrs = st.floats(min_value=1e-6, max_value=1e9)
alphas = st.floats(min_value=0.0, max_value=0.5)


class TestSnrScale:
    def test_reference_setting(self, params):
        # 1 W over 3 antennas against 1e-12 W noise
        assert snr_scale(params) == pytest.approx(1.0 / 3e-12, rel=1e-12)

    def test_unit_when_power_equals_noise(self):
        p = SystemParams(n_antennas=1, pt_dbm=-20.0, noise_dbm=-20.0)
        assert snr_scale(p) == pytest.approx(1.0, rel=1e-12)

    def test_halves_when_antennas_double(self, params):
        p6 = SystemParams(n_antennas=6)
        assert snr_scale(p6) == pytest.approx(snr_scale(params) / 2.0, rel=1e-12)


class TestRates:
    def test_weak_user_unit_rate(self):
        split = PowerSplit.from_alpha2(1.0 / 3.0)
        assert rate_weak(3.0, split) == pytest.approx(1.0, rel=1e-12)

    def test_weak_user_zero_channel(self):
        assert rate_weak(0.0, PowerSplit.from_alpha2(0.3)) == 0.0

    def test_weak_user_oma_limit(self):
        split = PowerSplit.from_alpha2(0.0)
        assert rate_weak(7.0, split) == pytest.approx(math.log2(8.0), rel=1e-12)

    def test_sic_rate_value(self):
        # oracle: log2(1 + 6/4) = log2(2.5)
        split = PowerSplit.from_alpha2(1.0 / 3.0)
        assert rate_sic(9.0, split) == pytest.approx(1.3219280948873624, rel=1e-12)

    def test_sic_equals_weak_formula(self):
        split = PowerSplit.from_alpha2(0.21)
        assert rate_sic(4.2, split) == rate_weak(4.2, split)

    def test_sic_interference_limited_ceiling(self):
        split = PowerSplit.from_alpha2(0.25)
        ceiling = math.log2(1.0 + split.alpha1 / split.alpha2)
        assert rate_sic(1e15, split) == pytest.approx(ceiling, rel=1e-6)

    def test_strong_user_value(self):
        split = PowerSplit.from_alpha2(1.0 / 3.0)
        assert rate_strong(9.0, split) == pytest.approx(2.0, rel=1e-12)

    def test_strong_user_no_power(self):
        assert rate_strong(9.0, PowerSplit.from_alpha2(0.0)) == 0.0

    def test_strong_user_zero_channel(self):
        assert rate_strong(0.0, PowerSplit.from_alpha2(0.4)) == 0.0


class TestObjective:
    def test_reference_point(self):
        # oracle: 3 + (2/3)(1 + 3)(3)/(2) = 7, and log2(8) = 3 = R1 + R2
        f = sum_rate_objective(3.0, 9.0, 1.0 / 3.0)
        assert f == pytest.approx(7.0, rel=1e-12)
        split = PowerSplit.from_alpha2(1.0 / 3.0)
        assert math.log2(1.0 + f) == pytest.approx(
            rate_weak(3.0, split) + rate_strong(9.0, split), rel=1e-12
        )

    def test_alpha2_zero_boundary(self):
        assert sum_rate_objective(5.5, 9.0, 0.0) == pytest.approx(5.5, rel=1e-12)

    def test_zero_channels(self):
        assert sum_rate_objective(0.0, 0.0, 0.3) == 0.0

    @given(snrs, snrs, alphas)
    def test_sum_rate_identity(self, snr1, snr2, alpha2):
        split = PowerSplit.from_alpha2(alpha2)
        lhs = math.log2(1.0 + sum_rate_objective(snr1, snr2, alpha2))
        rhs = rate_weak(snr1, split) + rate_strong(snr2, split)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_conditional_monotonicity_grid(self, rng):
        grid = np.linspace(0.0, 0.5, 200)
        for _ in range(100):
            snr1 = 10 ** rng.uniform(-2, 4)
            snr2 = snr1 * 10 ** rng.uniform(0, 3)
            f = np.array([sum_rate_objective(snr1, snr2, a) for a in grid])
            assert np.all(np.diff(f) >= -1e-12)


class TestOptimalAlpha2:
    def test_interior_solution_meets_target_exactly(self):
        alpha2, clamped = optimal_alpha2(3.0, QosTargets(1.0, 0.5))
        assert clamped == "none"
        assert alpha2 == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert rate_weak(3.0, PowerSplit.from_alpha2(alpha2)) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_vanishing_numerator_clamps_low(self):
        alpha2, clamped = optimal_alpha2(2**0.5 - 1.0, QosTargets(0.5, 0.0))
        assert (alpha2, clamped) == (0.0, "low")

    def test_ample_headroom_clamps_high(self):
        # oracle: raw value (10 + 1 - 2**0.5) / (10 * 2**0.5) = 0.6778 > 0.5
        alpha2, clamped = optimal_alpha2(10.0, QosTargets(0.5, 0.0))
        assert (alpha2, clamped) == (0.5, "high")

    def test_zero_channel_degenerates(self):
        assert optimal_alpha2(0.0, QosTargets(0.5, 0.5)) == (0.0, "low")

    @given(st.floats(min_value=1e-3, max_value=1e8),
           st.floats(min_value=0.01, max_value=4.0))
    @settings(max_examples=200)
    def test_unclamped_solution_is_tight(self, snr1, r1_min):
        alpha2, clamped = optimal_alpha2(snr1, QosTargets(r1_min, 0.0))
        if clamped == "none":
            split = PowerSplit.from_alpha2(alpha2)
            assert rate_weak(snr1, split) == pytest.approx(r1_min, abs=1e-9)

    def test_sic_dominance(self, rng):
        # whenever snr2 >= snr1 the SIC stage supports at least the weak rate
        for _ in range(300):
            snr1 = 10 ** rng.uniform(-3, 6)
            snr2 = snr1 * 10 ** rng.uniform(0, 4)
            split = PowerSplit.from_alpha2(rng.uniform(0, 0.5))
            assert rate_sic(snr2, split) >= rate_weak(snr1, split) - 1e-12


class TestPowerSplit:
    def test_sum_must_be_one(self):
        with pytest.raises(ValueError):
            PowerSplit(0.7, 0.6)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            PowerSplit(1.2, -0.2)

    def test_candidate_splits_above_half_are_constructible(self):
        # feasibility of the NOMA ordering is judged by check_feasibility,
        # not at construction time
        split = PowerSplit(0.4, 0.6)
        assert split.alpha2 == 0.6


class TestCheckFeasibility:
    @staticmethod
    def _unit_rho_params():
        # Pt == noise and N = 1 make rho exactly 1, so |g|^2 is the SNR
        return SystemParams(n_antennas=1, pt_dbm=0.0, noise_dbm=0.0)

    def test_reference_configuration_all_pass(self):
        p = self._unit_rho_params()
        layout = AntennaLayout(xs=(0.0,), feed_x=0.0)
        gains = (complex(math.sqrt(3.0)), complex(3.0))
        report = check_feasibility(
            p, layout, gains, PowerSplit.from_alpha2(1.0 / 3.0), QosTargets(1.0, 0.5)
        )
        assert report.overall
        assert report.qos_ok

    def test_oversized_alpha2_fails_ordering(self):
        p = self._unit_rho_params()
        layout = AntennaLayout(xs=(0.0,), feed_x=0.0)
        gains = (complex(1.0), complex(2.0))
        report = check_feasibility(
            p, layout, gains, PowerSplit(0.4, 0.6), QosTargets(0.0, 0.0)
        )
        assert not report.order_alpha
        assert not report.overall

    def test_equal_split_boundary_is_accepted(self):
        p = self._unit_rho_params()
        layout = AntennaLayout(xs=(0.0,), feed_x=0.0)
        gains = (complex(100.0), complex(200.0))
        report = check_feasibility(
            p, layout, gains, PowerSplit.from_alpha2(0.5), QosTargets(0.0, 0.0)
        )
        assert report.order_alpha

    def test_wrong_channel_order_flagged(self):
        p = self._unit_rho_params()
        layout = AntennaLayout(xs=(0.0,), feed_x=0.0)
        gains = (complex(3.0), complex(1.0))
        report = check_feasibility(
            p, layout, gains, PowerSplit.from_alpha2(0.3), QosTargets(0.0, 0.0)
        )
        assert not report.order_channel

    def test_spacing_violation_flagged(self, params):
        layout = AntennaLayout(
            xs=(0.0, params.delta_min / 3, params.delta_min), feed_x=0.0
        )
        report = check_feasibility(
            params,
            layout,
            (complex(1.0), complex(2.0)),
            PowerSplit.from_alpha2(0.4),
            QosTargets(0.0, 0.0),
        )
        assert not report.spacing
