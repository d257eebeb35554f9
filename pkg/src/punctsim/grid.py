"""Frequency-time resource grid and the initial eMBB RB allocation.

Numerology 0 only: 15 kHz subcarriers, 180 kHz RBs, 1 ms slots split into
7 mini-slots of 2 OFDM symbols.  Higher numerologies would be new registry
entries, not structural changes.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError

SYMBOLS_PER_SLOT = 14


@dataclass(frozen=True)
class Numerology:
    index: int
    subcarrier_spacing_khz: float
    rb_bandwidth_khz: float
    slot_duration_ms: float
    minislots_per_slot: int
    symbols_per_minislot: int

    def __post_init__(self):
        if abs(self.rb_bandwidth_khz - 12 * self.subcarrier_spacing_khz) > 1e-9:
            raise ConfigurationError("RB bandwidth must be 12 subcarriers wide")
        if self.minislots_per_slot * self.symbols_per_minislot != SYMBOLS_PER_SLOT:
            raise ConfigurationError("mini-slots x symbols must cover the 14-symbol slot")

    @property
    def minislot_duration_ms(self) -> float:
        return self.slot_duration_ms / self.minislots_per_slot


NUMEROLOGIES = {
    0: Numerology(
        index=0,
        subcarrier_spacing_khz=15.0,
        rb_bandwidth_khz=180.0,
        slot_duration_ms=1.0,
        minislots_per_slot=7,
        symbols_per_minislot=2,
    ),
}


@dataclass(frozen=True)
class ResourceGrid:
    """Immutable frequency-time geometry; safe to share across parallel trials."""

    numerology: Numerology
    total_bandwidth_khz: float
    guard_band_khz: float
    rb_count: int
    frame_slots: int

    @property
    def rb_bandwidth_khz(self) -> float:
        return self.numerology.rb_bandwidth_khz

    @property
    def minislots_per_slot(self) -> int:
        return self.numerology.minislots_per_slot

    @property
    def capacity_units(self) -> int:
        """Frequency-time units per slot: one unit is 1 RB x 1 mini-slot."""
        return self.rb_count * self.numerology.minislots_per_slot


def build_grid(
    numerology_index: int,
    total_bandwidth_khz: float,
    guard_band_khz: float,
    frame_slots: int,
) -> ResourceGrid:
    """Construct the resource grid for one carrier.

    The guard band is applied symmetrically at both band edges and the RB
    count is the largest whole number of RBs that fits between the guards.
    """
    if numerology_index not in NUMEROLOGIES:
        raise ConfigurationError(f"unsupported numerology index {numerology_index}")
    num = NUMEROLOGIES[numerology_index]
    if frame_slots < 1:
        raise ConfigurationError("frame_slots must be >= 1")
    usable = total_bandwidth_khz - 2.0 * guard_band_khz
    if usable < num.rb_bandwidth_khz:
        raise ConfigurationError(
            f"bandwidth {total_bandwidth_khz} kHz with {guard_band_khz} kHz guards "
            f"does not fit one {num.rb_bandwidth_khz} kHz RB"
        )
    rb_count = int(math.floor(usable / num.rb_bandwidth_khz))
    return ResourceGrid(
        numerology=num,
        total_bandwidth_khz=total_bandwidth_khz,
        guard_band_khz=guard_band_khz,
        rb_count=rb_count,
        frame_slots=frame_slots,
    )


@dataclass(frozen=True)
class AllocationMatrix:
    """Column-exclusive RB-to-user map: owner[b] is the eMBB user holding RB b."""

    owner: np.ndarray  # (B,) int
    n_users: int

    def __post_init__(self):
        owner = np.asarray(self.owner, dtype=np.int64)
        object.__setattr__(self, "owner", owner)
        if owner.ndim != 1:
            raise ConfigurationError("owner map must be one-dimensional")
        if owner.min() < 0 or owner.max() >= self.n_users:
            raise ConfigurationError("owner indices out of range")

    @property
    def rb_count(self) -> int:
        return int(self.owner.shape[0])

    @property
    def matrix(self) -> np.ndarray:
        """The K x B binary allocation map x_kb."""
        x = np.zeros((self.n_users, self.rb_count), dtype=np.int64)
        x[self.owner, np.arange(self.rb_count)] = 1
        return x

    def rb_counts(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.n_users)

    def user_rbs(self, k: int) -> np.ndarray:
        return np.nonzero(self.owner == k)[0]


def initial_allocation(grid: ResourceGrid, n_users: int, policy: str = "round_robin") -> AllocationMatrix:
    """Partition all B RBs among the eMBB users at the start of a slot.

    Round-robin by index (RB b goes to user b mod K): deterministic, and
    per-user counts differ by at most one with the remainder landing on the
    lowest-indexed users.
    """
    if policy != "round_robin":
        raise ConfigurationError(f"unknown allocation policy {policy!r}")
    if n_users < 1:
        raise ConfigurationError("need at least one eMBB user")
    if n_users > grid.rb_count:
        raise ConfigurationError(
            f"eMBB user count {n_users} exceeds RB count {grid.rb_count} (K <= B required)"
        )
    owner = np.arange(grid.rb_count, dtype=np.int64) % n_users
    return AllocationMatrix(owner=owner, n_users=n_users)
