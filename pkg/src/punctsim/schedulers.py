"""Per-slot URLLC puncture placement policies.

Four schedulers share one interface (SlotState, LossSpec, SchedulerConfig) ->
PunctureDecision: the threshold-based `proposed` policy plus the PS / RS / EDS
baselines.  All of them serve exactly min(D, B*M) RB x mini-slot units; the
random scheduler additionally takes the stream that drives its placement.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation, InvariantViolation
from .grid import AllocationMatrix, ResourceGrid
from .kernels import MOVE_REMAP, proposed_cells
from .rate import CONVEX_QUADRATIC, LossSpec, PunctureDecision, decision_from_cells
from .traffic import UrllcArrivals

POLICIES = ("proposed", "ps", "rs", "eds")

BRANCH_MAX_PARTIAL = "max_partial"
BRANCH_MAX_FULL_MINUS_OFFSET = "max_full_minus_offset"


@dataclass(frozen=True)
class SchedulerConfig:
    policy: str = "proposed"
    r_min_bps: float = 5e6
    offset_khz: float = 180.0
    theta_max: float = 0.1

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ConfigurationError(f"unknown policy {self.policy!r}; choose from {POLICIES}")
        if self.r_min_bps <= 0:
            raise ConfigurationError("R_min must be positive")
        if not 0.0 < self.theta_max < 1.0:
            raise ConfigurationError("theta_max must lie in (0, 1)")


@dataclass(frozen=True)
class Threshold:
    th_khz: float
    branch: str


@dataclass(frozen=True)
class SlotState:
    """Everything a scheduler may look at for one slot."""

    grid: ResourceGrid
    alloc: AllocationMatrix
    power: np.ndarray        # (B, J)
    gains_embb: np.ndarray   # (K, B, J)
    gains_urllc: np.ndarray  # (N, B, J)
    noise_w: float
    arrivals: UrllcArrivals

    @property
    def demand(self) -> int:
        return min(self.arrivals.total, self.grid.capacity_units)


def puncture_threshold(
    per_user_loss_khz: np.ndarray,
    phi_khz: np.ndarray,
    offset_khz: float,
) -> Threshold:
    """Per-slot puncturing-rate threshold from the provisional user losses.

    The threshold is the worst user's loss; when that user is fully punctured
    (loss equals its whole allocation) the threshold is pulled back by the
    configured offset, clamped at zero.
    """
    gamma = np.asarray(per_user_loss_khz, dtype=np.float64)
    phi = np.asarray(phi_khz, dtype=np.float64)
    if gamma.size == 0:
        raise ContractViolation("need at least one user loss")
    if np.any(gamma < -1e-9) or np.any(gamma > phi + 1e-6):
        raise ContractViolation("losses must lie in [0, phi]")
    imax = int(np.argmax(gamma))
    if gamma[imax] >= phi[imax] - 1e-9:
        return Threshold(th_khz=max(gamma[imax] - offset_khz, 0.0), branch=BRANCH_MAX_FULL_MINUS_OFFSET)
    return Threshold(th_khz=float(gamma[imax]), branch=BRANCH_MAX_PARTIAL)


def _owner_se_and_comparators(state: SlotState):
    """Owner-indexed per-RB spectral efficiency, gain sum and power sum."""
    b_idx = np.arange(state.alloc.rb_count)
    snr_all = (state.power[None, :, :] * state.gains_embb).sum(axis=-1) / state.noise_w  # (K, B)
    se = np.log2(1.0 + snr_all)[state.alloc.owner, b_idx]
    gain_cmp = state.gains_embb.sum(axis=-1)[state.alloc.owner, b_idx]
    power_cmp = state.power.sum(axis=-1)
    return se, gain_cmp, power_cmp


def proposed_cells_for_state(state: SlotState, spec: LossSpec, cfg: SchedulerConfig):
    """Cells and move log of the threshold scheduler for one slot."""
    se, gain_cmp, power_cmp = _owner_se_and_comparators(state)
    return proposed_cells(
        owner=state.alloc.owner,
        se=se,
        gain_cmp=gain_cmp,
        power_cmp=power_cmp,
        n_users=state.alloc.n_users,
        minislots=state.grid.minislots_per_slot,
        demand=state.demand,
        convex=spec.shape == CONVEX_QUADRATIC,
        f_b_khz=state.grid.rb_bandwidth_khz,
        r_min_bps=cfg.r_min_bps,
        offset_khz=spec.offset_khz,
    )


def schedule_proposed(state: SlotState, spec: LossSpec, cfg: SchedulerConfig) -> PunctureDecision:
    """Threshold scheduler: uniform spread, threshold cap, R_min-driven remap."""
    cells, _ = proposed_cells_for_state(state, spec, cfg)
    return _finish(state, cells, spec)


def ps_order(state: SlotState) -> np.ndarray:
    """All RBs ranked by descending SNR, ties broken in (user, RB) index order."""
    snr = (state.power[None, :, :] * state.gains_embb).sum(axis=-1) / state.noise_w
    owner_snr = snr[state.alloc.owner, np.arange(state.alloc.rb_count)]
    return np.lexsort((np.arange(state.alloc.rb_count), state.alloc.owner, -owner_snr))


def cells_from_order(order: np.ndarray, demand: int, minislots: int) -> np.ndarray:
    """Fill RBs to capacity in ranked order until the demand is placed."""
    cells = np.zeros(order.shape[0], dtype=np.int64)
    full = demand // minislots
    cells[order[:full]] = minislots
    if full < order.shape[0]:
        cells[order[full]] = demand - full * minislots
    return cells


def schedule_ps(state: SlotState, spec: LossSpec, cfg: SchedulerConfig) -> PunctureDecision:
    """Punctured Scheduling baseline: hit the highest-SNR RBs first.

    SNR order stands in for the MCS ranking; the simulator carries Shannon
    rates rather than an MCS table, and PS only needs the ordering.
    """
    cells = cells_from_order(ps_order(state), state.demand, state.grid.minislots_per_slot)
    return _finish(state, cells, spec)


def rs_cells(stream: np.random.Generator, demand: int, rb_count: int, minislots: int) -> np.ndarray:
    """Uniform placement over all RB x mini-slot cells, without replacement."""
    perm = stream.permutation(rb_count * minislots)
    return np.bincount(perm[:demand] // minislots, minlength=rb_count).astype(np.int64)


def schedule_rs(
    state: SlotState,
    spec: LossSpec,
    cfg: SchedulerConfig,
    stream: np.random.Generator,
) -> PunctureDecision:
    """Random Scheduler baseline: uniformly random cells, no replacement."""
    cells = rs_cells(stream, state.demand, state.alloc.rb_count, state.grid.minislots_per_slot)
    return _finish(state, cells, spec)


def eds_shares(rb_counts: np.ndarray, demand: int, minislots: int) -> np.ndarray:
    """Near-equal per-user unit shares, capped at each user's cell capacity.

    Remainders go to the lowest-indexed users; overflow from saturated users is
    re-split equally among the rest until everything is placed.
    """
    n_users = rb_counts.shape[0]
    cap = rb_counts.astype(np.int64) * minislots
    share = np.zeros(n_users, dtype=np.int64)
    remaining = int(demand)
    while remaining > 0:
        active = np.nonzero(share < cap)[0]
        if active.size == 0:
            raise ContractViolation("demand exceeds total cell capacity")
        base = remaining // active.size
        extra = remaining % active.size
        for rank, k in enumerate(active):
            want = base + (1 if rank < extra else 0)
            take = min(want, int(cap[k] - share[k]))
            share[k] += take
            remaining -= take
    return share


def spread_within_user(share: int, user_rbs: np.ndarray, minislots: int) -> np.ndarray:
    """Spread one user's share evenly over its RBs, remainder on the lowest b."""
    n = user_rbs.shape[0]
    base = share // n
    rem = share % n
    out = np.full(n, base, dtype=np.int64)
    out[:rem] += 1
    if np.any(out > minislots):
        raise ContractViolation("per-user share exceeds the user's cell capacity")
    return out


def eds_cells(alloc: AllocationMatrix, demand: int, minislots: int) -> np.ndarray:
    shares = eds_shares(alloc.rb_counts(), demand, minislots)
    cells = np.zeros(alloc.rb_count, dtype=np.int64)
    for k in range(alloc.n_users):
        rbs = alloc.user_rbs(k)
        cells[rbs] = spread_within_user(int(shares[k]), rbs, minislots)
    return cells


def schedule_eds(state: SlotState, spec: LossSpec, cfg: SchedulerConfig) -> PunctureDecision:
    """Equally Distributed Scheduler baseline: near-equal load per eMBB user."""
    cells = eds_cells(state.alloc, state.demand, state.grid.minislots_per_slot)
    return _finish(state, cells, spec)


def schedule(
    state: SlotState,
    spec: LossSpec,
    cfg: SchedulerConfig,
    stream: np.random.Generator | None = None,
) -> PunctureDecision:
    """Dispatch on cfg.policy; `rs` requires its placement stream."""
    if cfg.policy == "proposed":
        return schedule_proposed(state, spec, cfg)
    if cfg.policy == "ps":
        return schedule_ps(state, spec, cfg)
    if cfg.policy == "eds":
        return schedule_eds(state, spec, cfg)
    if cfg.policy == "rs":
        if stream is None:
            raise ContractViolation("the random scheduler needs a placement stream")
        return schedule_rs(state, spec, cfg, stream)
    raise ConfigurationError(f"unknown policy {cfg.policy!r}")


def _finish(state: SlotState, cells: np.ndarray, spec: LossSpec) -> PunctureDecision:
    decision = decision_from_cells(state.alloc, cells, state.demand, state.grid, spec.shape)
    if decision.served_units != state.demand:
        raise InvariantViolation(
            f"demand conservation: served {decision.served_units} != demand {state.demand}"
        )
    return decision
