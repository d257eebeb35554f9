"""punctsim: downlink eMBB/URLLC coexistence simulator on a sliced 5G-NR grid."""

from .backend import NUMBA_ENABLED, backend_name
from .channel import allocate_power, dbm_to_watts, noise_power_watts, place_users, sample_channel, snr
from .engine import (
    ANTENNA_MODES,
    CellKey,
    CellStats,
    SimConfig,
    SweepResult,
    run_slot,
    run_sweep,
    run_trial,
    run_trial_bundle,
)
from .errors import ConfigurationError, ContractViolation, InvariantViolation
from .grid import AllocationMatrix, Numerology, ResourceGrid, build_grid, initial_allocation
from .metrics import TrialResult, embb_reliability, objective_value, urllc_error_event
from .rate import (
    CONVEX_QUADRATIC,
    LINEAR,
    LossSpec,
    PunctureDecision,
    RateReport,
    embb_rate,
    embb_rate_compact,
    loss_from_weights,
)
from .schedulers import (
    POLICIES,
    SchedulerConfig,
    SlotState,
    Threshold,
    puncture_threshold,
    schedule,
    schedule_eds,
    schedule_proposed,
    schedule_ps,
    schedule_rs,
)
from .traffic import UrllcArrivals, sample_arrivals

__version__ = "0.1.0"
