"""URLLC outage events, eMBB reliability and the max-min rate objective."""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .grid import ResourceGrid
from .rate import PunctureDecision


@dataclass(frozen=True)
class SlotMetrics:
    per_user_rate_bps: np.ndarray
    min_rate_bps: float
    urllc_error: bool
    served_urllc_units: int


@dataclass(frozen=True)
class TrialResult:
    mean_min_rate_bps: float
    embb_reliability: float
    urllc_outage: float
    slots: int


def urllc_error_event(
    decision: PunctureDecision,
    urllc_gains: np.ndarray,
    power: np.ndarray,
    noise_w: float,
    packet_bytes: int,
    demand: int,
    grid: ResourceGrid,
) -> bool:
    """Classify one slot's URLLC delivery as an outage event.

    The punctured bandwidth is shared across the N URLLC users; each user's
    spectral efficiency is taken at its unit-weighted SNR over the punctured
    RBs (same equal power split as eMBB).  The delivered capacity in bits,

        C = sum_n sum_k gamma_k / (f_b * N) * log2(1 + SNR_n) * f_b * tau_slot,

    is compared against the demanded 8 * eta * D bits; the slot is an error
    when C falls strictly below the demand, so the exact boundary counts as a
    success.
    """
    if demand < 0:
        raise ContractViolation("demand must be nonnegative")
    if demand == 0:
        return False
    n_urllc = urllc_gains.shape[0]
    if n_urllc < 1:
        raise ContractViolation("need at least one URLLC user")
    delivered = 0.0
    punctured = int(decision.cells.sum())
    if punctured > 0:
        weights = decision.cells / punctured
        snr_nb = (power[None, :, :] * urllc_gains).sum(axis=-1) / noise_w  # (N, B)
        snr_n = (snr_nb * weights[None, :]).sum(axis=1)
        gamma_sum_hz = decision.per_user_loss_khz.sum() * 1e3
        tau_s = grid.numerology.slot_duration_ms * 1e-3
        delivered = (gamma_sum_hz / n_urllc) * np.log2(1.0 + snr_n).sum() * tau_s
    return bool(delivered < 8.0 * packet_bytes * demand)


def embb_reliability(rates_bps: np.ndarray, r_min_bps: float) -> float:
    """Fraction of (slot, user) rate samples meeting the R_min target."""
    rates = np.asarray(rates_bps, dtype=np.float64)
    if rates.size == 0:
        raise ContractViolation("reliability needs at least one rate sample")
    return float(np.mean(rates >= r_min_bps))


def objective_value(min_rates_bps: np.ndarray) -> float:
    """Sample estimate of the max-min objective: time-average of min_k r_k."""
    rates = np.asarray(min_rates_bps, dtype=np.float64)
    if rates.size == 0:
        raise ContractViolation("objective needs at least one slot")
    return float(rates.mean())
