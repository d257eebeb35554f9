"""Frame orchestration: slots, trials and multi-regime Monte-Carlo sweeps.

Randomness discipline: every stream is derived from the root seed and a
purpose/trial key through ``numpy.random.SeedSequence`` spawn keys, so results
never depend on execution order and serial and parallel sweeps are
bit-identical.  Cells that share a trial index also share the placement and
fading draws (and the arrival draws at matched traffic load), which pairs the
policy/shape/antenna comparisons on common random numbers; fading is always
drawn at the widest antenna count and sliced, so SISO cells see the first
column of the MISO fading.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .channel import (
    DEFAULT_MIN_DISTANCE_M,
    DEFAULT_NOISE_PSD_DBM_HZ,
    DEFAULT_PATHLOSS_EXPONENT,
    DEFAULT_REFERENCE_LOSS_DB,
    allocate_power,
    dbm_to_watts,
    noise_power_watts,
    place_users,
    sample_channel,
)
from .errors import ConfigurationError, InvariantViolation
from .grid import AllocationMatrix, ResourceGrid, build_grid, initial_allocation
from .kernels import proposed_cells
from .metrics import TrialResult, embb_reliability, objective_value, urllc_error_event
from .rate import CONVEX_QUADRATIC, LINEAR, LOSS_SHAPES, LossSpec, decision_from_cells, embb_rate
from .schedulers import (
    POLICIES,
    SchedulerConfig,
    SlotState,
    cells_from_order,
    eds_cells,
    ps_order,
    proposed_cells_for_state,
    rs_cells,
)
from .traffic import sample_arrivals

ANTENNA_MODES = {"siso": 1, "miso": 4}

# SeedSequence spawn-key purposes
_STREAM_PLACEMENT = 1
_STREAM_FADING = 2
_STREAM_TRAFFIC = 3
_STREAM_RS = 4


@dataclass(frozen=True)
class SimConfig:
    """Sweep configuration; defaults follow the reference simulation table."""

    numerology: int = 0
    total_bandwidth_khz: float = 20000.0
    guard_band_khz: float = 692.5
    frame_slots: int = 10
    frames_per_trial: int = 1
    embb_users: int = 5
    urllc_users: int = 3
    policies: tuple = POLICIES
    loss_shapes: tuple = LOSS_SHAPES
    antenna_modes: tuple = ("siso", "miso")
    lambdas: tuple = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0)
    trials: int = 500
    seed: int = 12345
    r_min_mbps: float = 5.0
    p_max_dbm: float = 40.0
    theta_max: float = 0.1
    packet_bytes: int = 50
    cell_radius_m: float = 500.0
    min_distance_m: float = DEFAULT_MIN_DISTANCE_M
    pathloss_exponent: float = DEFAULT_PATHLOSS_EXPONENT
    reference_loss_db: float = DEFAULT_REFERENCE_LOSS_DB
    noise_psd_dbm_hz: float = DEFAULT_NOISE_PSD_DBM_HZ
    offset_khz: float = 180.0
    workers: int = 1

    @property
    def r_min_bps(self) -> float:
        return self.r_min_mbps * 1e6

    @property
    def p_max_w(self) -> float:
        return dbm_to_watts(self.p_max_dbm)

    def grid(self) -> ResourceGrid:
        return build_grid(self.numerology, self.total_bandwidth_khz, self.guard_band_khz, self.frame_slots)

    def noise_w(self, grid: ResourceGrid) -> float:
        return noise_power_watts(grid.rb_bandwidth_khz, self.noise_psd_dbm_hz)

    def slots_per_trial(self) -> int:
        return self.frame_slots * self.frames_per_trial

    def validate(self) -> "SimConfig":
        grid = self.grid()  # raises on bad bandwidth/numerology
        if self.embb_users < 1:
            raise ConfigurationError("embb_users must be >= 1")
        if self.embb_users > grid.rb_count:
            raise ConfigurationError(
                f"embb_users (K={self.embb_users}) must satisfy K <= B "
                f"(B={grid.rb_count} resource blocks)"
            )
        if self.urllc_users < 1:
            raise ConfigurationError("urllc_users must be >= 1")
        for policy in self.policies:
            if policy not in POLICIES:
                raise ConfigurationError(f"unknown policy {policy!r}; choose from {POLICIES}")
        for shape in self.loss_shapes:
            if shape not in LOSS_SHAPES:
                raise ConfigurationError(f"unknown loss shape {shape!r}; choose from {LOSS_SHAPES}")
        for mode in self.antenna_modes:
            if mode not in ANTENNA_MODES:
                raise ConfigurationError(f"unknown antenna mode {mode!r}; choose siso or miso")
        if len(self.lambdas) == 0:
            raise ConfigurationError("lambda list must not be empty")
        for lam in self.lambdas:
            if lam < 0:
                raise ConfigurationError(f"lambda {lam} is negative; arrival rates must be >= 0")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.frames_per_trial < 1:
            raise ConfigurationError("frames_per_trial must be >= 1")
        if not 0.0 < self.theta_max < 1.0:
            raise ConfigurationError("theta_max must lie in (0, 1)")
        if self.r_min_mbps <= 0:
            raise ConfigurationError("r_min_mbps must be positive")
        if self.packet_bytes < 1:
            raise ConfigurationError("packet_bytes must be >= 1")
        if self.workers < 0:
            raise ConfigurationError("workers must be >= 0")
        return self


@dataclass(frozen=True, order=True)
class CellKey:
    """One sweep cell: (policy, loss shape, antenna mode, arrival rate)."""

    policy: str
    loss_shape: str
    antenna_mode: str
    lam: float


@dataclass(frozen=True)
class CellStats:
    mean_min_rate_bps: float
    min_rate_stderr_bps: float
    embb_reliability: float
    reliability_stderr: float
    urllc_outage: float
    outage_stderr: float
    trials: int


@dataclass
class SweepDiagnostics:
    slot_evaluations: int = 0
    budget_checks: int = 0
    conservation_checks: int = 0
    violations: int = 0

    def merge(self, other: "SweepDiagnostics") -> None:
        self.slot_evaluations += other.slot_evaluations
        self.budget_checks += other.budget_checks
        self.conservation_checks += other.conservation_checks
        self.violations += other.violations


@dataclass
class SweepResult:
    config: SimConfig
    cells: dict
    diagnostics: SweepDiagnostics
    trial_min_rates: dict = field(default_factory=dict)
    trial_reliability: dict = field(default_factory=dict)
    trial_outage: dict = field(default_factory=dict)

    def cell_keys(self):
        return list(self.cells.keys())


def derived_rng(root_seed: int, purpose: int, *key: int) -> np.random.Generator:
    """Independent stream addressed by (root seed, purpose, key...)."""
    ss = np.random.SeedSequence(entropy=root_seed, spawn_key=(purpose, *key))
    return np.random.default_rng(ss)


def _lam_key(lam: float) -> int:
    return int(round(lam * 1000.0))


def sweep_cells(config: SimConfig) -> list:
    return [
        CellKey(policy, shape, mode, float(lam))
        for policy, shape, mode, lam in product(
            config.policies, config.loss_shapes, config.antenna_modes, config.lambdas
        )
    ]


def run_slot(
    config: SimConfig,
    cell: CellKey,
    trial: int,
    slot_index: int,
) -> "SlotOutcome":
    """Evaluate one (cell, trial, slot) in isolation.

    Convenience wrapper over the bundled trial path: draws the same streams the
    sweep would and returns that slot's metrics.  Used by tests; sweeps go
    through run_trial/run_sweep which amortize the channel draws.
    """
    outcomes = _trial_outcomes(config, [cell], trial, SweepDiagnostics())
    return outcomes[cell][slot_index]


@dataclass(frozen=True)
class SlotOutcome:
    per_user_rate_bps: np.ndarray
    min_rate_bps: float
    urllc_error: bool
    served_units: int
    demand: int


def _trial_outcomes(config, cells, trial, diag):
    """Per-slot outcomes for every requested cell of one trial (shared draws)."""
    grid = config.grid()
    n_embb = config.embb_users
    n_urllc = config.urllc_users
    alloc = initial_allocation(grid, n_embb)
    noise_w = config.noise_w(grid)
    b_count = grid.rb_count
    m = grid.minislots_per_slot
    j_values = sorted({ANTENNA_MODES[c.antenna_mode] for c in cells})
    j_max = max(j_values)
    lams = sorted({c.lam for c in cells})

    rng_place = derived_rng(config.seed, _STREAM_PLACEMENT, trial)
    distances = place_users(rng_place, n_embb + n_urllc, config.cell_radius_m, config.min_distance_m)
    rng_fade = derived_rng(config.seed, _STREAM_FADING, trial)
    rng_traffic = {lam: derived_rng(config.seed, _STREAM_TRAFFIC, trial, _lam_key(lam)) for lam in lams}
    rng_rs = {lam: derived_rng(config.seed, _STREAM_RS, trial, _lam_key(lam)) for lam in lams}

    powers = {j: allocate_power(alloc, j, config.p_max_w) for j in j_values}
    for pm in powers.values():
        diag.budget_checks += 1
        if pm.total() > config.p_max_w * (1.0 + 1e-9):
            diag.violations += 1
            raise InvariantViolation(
                f"power budget: allocated {pm.total()} W exceeds P_max {config.p_max_w} W"
            )

    outcomes = {cell: [] for cell in cells}
    slots = config.slots_per_trial()
    scheduler_cfg = {
        policy: SchedulerConfig(
            policy=policy,
            r_min_bps=config.r_min_bps,
            offset_khz=config.offset_khz,
            theta_max=config.theta_max,
        )
        for policy in {c.policy for c in cells}
    }

    for _ in range(slots):
        gains = sample_channel(
            rng_fade,
            distances,
            b_count,
            j_max,
            config.pathloss_exponent,
            config.reference_loss_db,
        )
        arrivals = {
            lam: sample_arrivals(rng_traffic[lam], lam, m, b_count, config.packet_bytes)
            for lam in lams
        }
        demands = {lam: min(arrivals[lam].total, grid.capacity_units) for lam in lams}

        # Placement decisions that are shared between cells (common random
        # numbers): RS and EDS depend only on the demand; PS additionally on
        # the antenna slice.
        cells_rs = {lam: rs_cells(rng_rs[lam], demands[lam], b_count, m) for lam in lams}
        cells_eds = {lam: eds_cells(alloc, demands[lam], m) for lam in lams}
        states = {}
        for j in j_values:
            for lam in lams:
                states[(j, lam)] = SlotState(
                    grid=grid,
                    alloc=alloc,
                    power=powers[j].p,
                    gains_embb=gains[:n_embb, :, :j],
                    gains_urllc=gains[n_embb:, :, :j],
                    noise_w=noise_w,
                    arrivals=arrivals[lam],
                )
        ps_orders = {j: ps_order(states[(j, lams[0])]) for j in j_values}

        for cell in cells:
            j = ANTENNA_MODES[cell.antenna_mode]
            lam = cell.lam
            state = states[(j, lam)]
            spec = LossSpec(shape=cell.loss_shape, offset_khz=config.offset_khz)
            if cell.policy == "proposed":
                cells_vec, _ = proposed_cells_for_state(state, spec, scheduler_cfg["proposed"])
            elif cell.policy == "ps":
                cells_vec = cells_from_order(ps_orders[j], demands[lam], m)
            elif cell.policy == "rs":
                cells_vec = cells_rs[lam]
            else:
                cells_vec = cells_eds[lam]

            decision = decision_from_cells(alloc, cells_vec, demands[lam], grid, spec.shape)
            diag.conservation_checks += 1
            if decision.served_units != demands[lam]:
                diag.violations += 1
                raise InvariantViolation(
                    f"demand conservation in cell {cell}: served {decision.served_units}, "
                    f"demand {demands[lam]}"
                )
            report = embb_rate(alloc, decision, state.power, state.gains_embb, noise_w, grid)
            error = urllc_error_event(
                decision,
                state.gains_urllc,
                state.power,
                noise_w,
                config.packet_bytes,
                demands[lam],
                grid,
            )
            diag.slot_evaluations += 1
            outcomes[cell].append(
                SlotOutcome(
                    per_user_rate_bps=report.per_user_rate_bps,
                    min_rate_bps=float(report.per_user_rate_bps.min()),
                    urllc_error=error,
                    served_units=decision.served_units,
                    demand=demands[lam],
                )
            )
    return outcomes


def _summarize(outcomes, r_min_bps) -> TrialResult:
    min_rates = np.array([o.min_rate_bps for o in outcomes])
    all_rates = np.concatenate([o.per_user_rate_bps for o in outcomes])
    errors = np.array([o.urllc_error for o in outcomes])
    return TrialResult(
        mean_min_rate_bps=objective_value(min_rates),
        embb_reliability=embb_reliability(all_rates, r_min_bps),
        urllc_outage=float(errors.mean()),
        slots=len(outcomes),
    )


def run_trial(config: SimConfig, cell: CellKey, trial: int) -> TrialResult:
    """One trial of one sweep cell: T slots aggregated into a TrialResult."""
    diag = SweepDiagnostics()
    outcomes = _trial_outcomes(config, [cell], trial, diag)
    return _summarize(outcomes[cell], config.r_min_bps)


def run_trial_bundle(config: SimConfig, cells, trial: int):
    """All requested cells of one trial on shared draws; the parallel work unit."""
    diag = SweepDiagnostics()
    outcomes = _trial_outcomes(config, cells, trial, diag)
    results = {cell: _summarize(slot_list, config.r_min_bps) for cell, slot_list in outcomes.items()}
    return results, diag


def _bundle_worker(args):
    config, cells, trial = args
    results, diag = run_trial_bundle(config, cells, trial)
    return trial, results, diag


def run_sweep(
    config: SimConfig,
    progress=None,
    keep_trials: bool = False,
) -> SweepResult:
    """Full Cartesian sweep over policies x shapes x antenna modes x lambdas.

    Trials execute serially or on a process pool (config.workers > 1) with
    identical results either way.  With keep_trials the per-trial statistics
    are retained for paired analysis.
    """
    config.validate()
    cells = sweep_cells(config)
    n_trials = config.trials
    per_trial = [None] * n_trials
    diag = SweepDiagnostics()

    if config.workers > 1:
        _warm_kernel()
        jobs = [(config, cells, t) for t in range(n_trials)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for trial, results, tdiag in pool.map(_bundle_worker, jobs, chunksize=8):
                per_trial[trial] = results
                diag.merge(tdiag)
                if progress is not None:
                    progress(trial, n_trials)
    else:
        for trial in range(n_trials):
            results, tdiag = run_trial_bundle(config, cells, trial)
            per_trial[trial] = results
            diag.merge(tdiag)
            if progress is not None:
                progress(trial, n_trials)

    stats = {}
    trial_min = {}
    trial_rel = {}
    trial_out = {}
    for cell in cells:
        mins = np.array([per_trial[t][cell].mean_min_rate_bps for t in range(n_trials)])
        rels = np.array([per_trial[t][cell].embb_reliability for t in range(n_trials)])
        outs = np.array([per_trial[t][cell].urllc_outage for t in range(n_trials)])
        stats[cell] = CellStats(
            mean_min_rate_bps=float(mins.mean()),
            min_rate_stderr_bps=_stderr(mins),
            embb_reliability=float(rels.mean()),
            reliability_stderr=_stderr(rels),
            urllc_outage=float(outs.mean()),
            outage_stderr=_stderr(outs),
            trials=n_trials,
        )
        if keep_trials:
            trial_min[cell] = mins
            trial_rel[cell] = rels
            trial_out[cell] = outs

    return SweepResult(
        config=config,
        cells=stats,
        diagnostics=diag,
        trial_min_rates=trial_min,
        trial_reliability=trial_rel,
        trial_outage=trial_out,
    )


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def _warm_kernel():
    """Compile the numba kernel once in the parent before forking workers."""
    owner = np.zeros(2, dtype=np.int64)
    ones = np.ones(2, dtype=np.float64)
    proposed_cells(owner, ones, ones, ones, 1, 7, 1, False, 180.0, 1.0, 180.0)


def single_cell_config(config: SimConfig, cell: CellKey) -> SimConfig:
    """Restrict a config to one sweep cell (handy for fixed-cell experiments)."""
    return replace(
        config,
        policies=(cell.policy,),
        loss_shapes=(cell.loss_shape,),
        antenna_modes=(cell.antenna_mode,),
        lambdas=(cell.lam,),
    )
