"""Sporadic URLLC arrivals, Poisson per mini-slot, capped at system capacity."""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


@dataclass(frozen=True)
class UrllcArrivals:
    """Packet counts per mini-slot; one packet claims one RB x mini-slot unit."""

    per_minislot: np.ndarray  # (M,) int
    packet_bytes: int = 50

    @property
    def total(self) -> int:
        return int(self.per_minislot.sum())


def sample_arrivals(
    rng: np.random.Generator,
    mean_per_slot: float,
    minislots: int,
    rb_count: int,
    packet_bytes: int = 50,
) -> UrllcArrivals:
    """Draw one slot of URLLC arrivals.

    Each mini-slot receives an independent Poisson(mean_per_slot / M) count, so
    the slot total has mean mean_per_slot.  The total is clamped to the system
    capacity B*M by truncating the last mini-slots (never resampled, so the
    draw stays deterministic for a given stream).
    """
    if mean_per_slot < 0:
        raise ContractViolation("arrival rate must be nonnegative")
    counts = rng.poisson(mean_per_slot / minislots, size=minislots).astype(np.int64)
    cap = rb_count * minislots
    excess = int(counts.sum()) - cap
    for m in range(minislots - 1, -1, -1):
        if excess <= 0:
            break
        cut = min(excess, int(counts[m]))
        counts[m] -= cut
        excess -= cut
    return UrllcArrivals(per_minislot=counts, packet_bytes=packet_bytes)
