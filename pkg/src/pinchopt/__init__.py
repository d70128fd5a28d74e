"""NOMA-assisted waveguide-antenna placement: solver, oracles and harness."""

from .channel import (
    SPEED_OF_LIGHT,
    AntennaLayout,
    LayoutError,
    SystemParams,
    UserPosition,
    conventional_channel,
    conventional_effective_gain,
    dbm_to_watts,
    guided_wavelength,
    inwaveguide_phase,
    antenna_user_phase,
    path_gain_factor,
    pinching_gain,
    watts_to_dbm,
    wavelength,
)
from .noma import (
    Alpha2Result,
    FeasibilityReport,
    PowerSplit,
    QosTargets,
    RateReport,
    check_feasibility,
    optimal_alpha2,
    rate_report,
    rate_sic,
    rate_strong,
    rate_weak,
    snr_scale,
    sum_rate_objective,
)
from .oracle import OracleConfig, OracleSizeError, exhaustive_placement, grid_alpha2
from .placement import (
    AlgoConfig,
    PlacementError,
    PlacementSolution,
    bisection_solve,
    circular_phase_error,
    evaluate_placement,
    fine_tune,
    initial_layout,
    iteration_bound,
)
from .sim import (
    ResultTable,
    SamplingError,
    Scenario,
    SweepResult,
    SweepSpec,
    TrialRecord,
    evaluate_scheme,
    run_delta_sweep,
    run_oracle_comparison,
    run_power_sweep,
    sample_scenario,
    trial_rng,
    write_table,
)

__version__ = "0.1.0"
