"""Puncturing loss evaluation and eMBB Shannon rates.

The puncture weight rho_kb in [0,1] is the fraction of RB b's mini-slot cells
overwritten for URLLC this slot (cells/M).  With u = D/(B*M) the normalized
slot demand, the bandwidth-equivalent loss of RB b is

    linear:           gamma_kb = x_kb * f_b * rho_kb * u
    convex_quadratic: gamma_kb = x_kb * f_b * (rho_kb * u)^2

The quadratic variant is the monic second-degree curve through (0, 0) and
(1, full), so it never exceeds the linear one and rates under it are at least
as high.  Rates follow Shannon capacity per RB with the loss subtracted from
the allocated bandwidth.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .grid import AllocationMatrix, ResourceGrid

LINEAR = "linear"
CONVEX_QUADRATIC = "convex_quadratic"
LOSS_SHAPES = (LINEAR, CONVEX_QUADRATIC)


@dataclass(frozen=True)
class LossSpec:
    """Loss-function shape plus the threshold offset it is tuned with."""

    shape: str = LINEAR
    offset_khz: float = 180.0

    def __post_init__(self):
        if self.shape not in LOSS_SHAPES:
            raise ContractViolation(f"unknown loss shape {self.shape!r}")
        if self.offset_khz < 0:
            raise ContractViolation("offset must be nonnegative")


@dataclass(frozen=True)
class PunctureDecision:
    """Per-slot puncturing outcome of a scheduler."""

    weights: np.ndarray            # (K, B) rho in [0, 1]
    per_rb_loss_khz: np.ndarray    # (K, B)
    per_user_loss_khz: np.ndarray  # (K,)
    cells: np.ndarray              # (B,) punctured mini-slot cells per RB
    served_units: int
    demand: int


def loss_fraction(rho: np.ndarray, u: float, shape: str) -> np.ndarray:
    """Fraction of an RB's bandwidth counted as lost, given its puncture weight."""
    frac = rho * u
    if shape == CONVEX_QUADRATIC:
        frac = frac * frac
    return frac


def loss_from_weights(
    alloc: AllocationMatrix,
    weights: np.ndarray,
    demand: int,
    grid: ResourceGrid,
    shape: str = LINEAR,
) -> PunctureDecision:
    """Evaluate the per-RB and per-user loss for a puncture-weight map.

    weights is the K x B map of rho_kb; every served unit punctures exactly one
    RB x mini-slot cell, so the map accounts for served = sum(rho) * M units.
    """
    if shape not in LOSS_SHAPES:
        raise ContractViolation(f"unknown loss shape {shape!r}")
    weights = np.asarray(weights, dtype=np.float64)
    x = alloc.matrix
    if weights.shape != x.shape:
        raise ContractViolation(f"weights shape {weights.shape} != allocation {x.shape}")
    if np.any(weights < -1e-12) or np.any(weights > 1.0 + 1e-12):
        raise ContractViolation("puncture weights must lie in [0, 1]")
    if np.any((x == 0) & (weights > 1e-12)):
        raise ContractViolation("puncture weight on an unallocated RB")
    capacity = grid.capacity_units
    if demand > capacity:
        raise ContractViolation(f"demand {demand} exceeds capacity {capacity}")

    m = grid.minislots_per_slot
    f_b = grid.rb_bandwidth_khz
    u = demand / capacity if capacity else 0.0
    per_rb = x * f_b * loss_fraction(weights, u, shape)
    per_user = per_rb.sum(axis=1)
    cells = np.rint(weights.sum(axis=0) * m).astype(np.int64)
    return PunctureDecision(
        weights=weights,
        per_rb_loss_khz=per_rb,
        per_user_loss_khz=per_user,
        cells=cells,
        served_units=int(cells.sum()),
        demand=int(demand),
    )


def decision_from_cells(
    alloc: AllocationMatrix,
    cells: np.ndarray,
    demand: int,
    grid: ResourceGrid,
    shape: str = LINEAR,
) -> PunctureDecision:
    """Build a PunctureDecision from per-RB punctured cell counts."""
    cells = np.asarray(cells, dtype=np.int64)
    m = grid.minislots_per_slot
    if np.any(cells < 0) or np.any(cells > m):
        raise ContractViolation("cell counts must lie in [0, M]")
    weights = np.zeros((alloc.n_users, alloc.rb_count), dtype=np.float64)
    weights[alloc.owner, np.arange(alloc.rb_count)] = cells / m
    return loss_from_weights(alloc, weights, demand, grid, shape)


@dataclass(frozen=True)
class RateReport:
    per_user_rate_bps: np.ndarray
    peak_rate_bps: np.ndarray
    phi_khz: np.ndarray


def snr_per_rb(power: np.ndarray, gains: np.ndarray, noise_w: float) -> np.ndarray:
    """Antenna-summed SNR per RB: sum_j p*h / sigma^2 over the last axis."""
    if noise_w <= 0:
        raise ContractViolation("noise power must be positive")
    return (power * gains).sum(axis=-1) / noise_w


def embb_rate(
    alloc: AllocationMatrix,
    decision: PunctureDecision,
    power: np.ndarray,
    gains: np.ndarray,
    noise_w: float,
    grid: ResourceGrid,
) -> RateReport:
    """Shannon rates per eMBB user for one slot.

    r_k = sum_b (x_kb*f_b - gamma_kb) * log2(1 + sum_j p*h / sigma^2), with
    bandwidths converted to Hz so rates come out in bits/s.  Also reports the
    unpunctured peak rate and each user's allocated bandwidth phi_k (kHz).

    gains is the eMBB users' (K, B, J) map; power the shared (B, J) map.
    """
    if noise_w <= 0:
        raise ContractViolation("noise power must be positive")
    x = alloc.matrix
    loss = decision.per_rb_loss_khz
    rb_khz_alloc = x * grid.rb_bandwidth_khz
    if np.any(loss > rb_khz_alloc + 1e-9):
        raise ContractViolation("per-RB loss exceeds allocated RB bandwidth")
    se_per_user = np.log2(1.0 + (power[None, :, :] * gains).sum(axis=-1) / noise_w)  # (K, B)
    rates = ((rb_khz_alloc - loss) * 1e3 * se_per_user).sum(axis=1)
    peaks = (rb_khz_alloc * 1e3 * se_per_user).sum(axis=1)
    phi = rb_khz_alloc.sum(axis=1).astype(np.float64)
    return RateReport(per_user_rate_bps=rates, peak_rate_bps=peaks, phi_khz=phi)


def embb_rate_compact(phi_khz: float, gamma_khz: float, per_unit_peak_bps_per_khz: float) -> float:
    """Compact rate form: (phi - gamma) scaled by the per-kHz peak rate.

    Agrees with embb_rate whenever all of a user's RBs see one SNR, which is
    what makes per_unit_peak = r_peak / phi the consistent normalization.
    """
    if gamma_khz < -1e-12 or gamma_khz > phi_khz + 1e-9:
        raise ContractViolation("loss must lie in [0, phi]")
    return (phi_khz - gamma_khz) * per_unit_peak_bps_per_khz
