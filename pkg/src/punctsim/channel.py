"""User placement, Rayleigh fading gains, transmit power and per-RB SNR.

Large-scale loss follows a log-distance law g(d) = g_ref * (d/d_ref)^-alpha;
small-scale fading is flat i.i.d. Rayleigh per (user, RB, antenna), so power
gains are exponential with the path-loss gain as mean.  Fading is redrawn
every slot and held constant within it.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation
from .grid import AllocationMatrix

# Defaults calibrated so the unpunctured worst-user rate sits near R_min = 5 Mbps
# for the Table-1 cell (see README); both are plain config knobs.
DEFAULT_PATHLOSS_EXPONENT = 4.0
DEFAULT_REFERENCE_LOSS_DB = 32.5
DEFAULT_REFERENCE_DISTANCE_M = 1.0
DEFAULT_MIN_DISTANCE_M = 10.0
DEFAULT_NOISE_PSD_DBM_HZ = -174.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def noise_power_watts(rb_bandwidth_khz: float, noise_psd_dbm_hz: float = DEFAULT_NOISE_PSD_DBM_HZ) -> float:
    """Thermal noise per RB: PSD integrated over one RB bandwidth."""
    dbm = noise_psd_dbm_hz + 10.0 * np.log10(rb_bandwidth_khz * 1e3)
    return dbm_to_watts(dbm)


def place_users(
    rng: np.random.Generator,
    count: int,
    cell_radius_m: float,
    min_distance_m: float = DEFAULT_MIN_DISTANCE_M,
) -> np.ndarray:
    """Draw user distances for uniform placement over the cell disc.

    Uniform area density gives the distance CDF (d/R)^2, i.e. d = R*sqrt(U).
    Distances are clamped below at min_distance_m to keep the path-loss law
    finite near the mast.
    """
    if cell_radius_m <= 0:
        raise ConfigurationError("cell radius must be positive")
    d = cell_radius_m * np.sqrt(rng.random(count))
    return np.maximum(d, min_distance_m)


def mean_path_gain(
    distances_m: np.ndarray,
    pathloss_exponent: float = DEFAULT_PATHLOSS_EXPONENT,
    reference_loss_db: float = DEFAULT_REFERENCE_LOSS_DB,
    reference_distance_m: float = DEFAULT_REFERENCE_DISTANCE_M,
) -> np.ndarray:
    """Linear mean power gain at each distance under the log-distance law."""
    g_ref = 10.0 ** (-reference_loss_db / 10.0)
    return g_ref * (np.asarray(distances_m) / reference_distance_m) ** (-pathloss_exponent)


def sample_channel(
    rng: np.random.Generator,
    distances_m: np.ndarray,
    rb_count: int,
    n_antennas: int,
    pathloss_exponent: float = DEFAULT_PATHLOSS_EXPONENT,
    reference_loss_db: float = DEFAULT_REFERENCE_LOSS_DB,
) -> np.ndarray:
    """Draw one slot of Rayleigh power gains, shape (n_users, B, J).

    Gains are i.i.d. exponential across (user, RB, antenna) with mean equal to
    the user's path-loss gain.
    """
    distances_m = np.asarray(distances_m, dtype=np.float64)
    if distances_m.size == 0:
        raise ContractViolation("need at least one user distance")
    g = mean_path_gain(distances_m, pathloss_exponent, reference_loss_db)
    h = rng.exponential(1.0, size=(distances_m.size, rb_count, n_antennas))
    return h * g[:, None, None]


@dataclass(frozen=True)
class PowerMap:
    """Per (RB, antenna) downlink transmit power in Watts."""

    p: np.ndarray  # (B, J)
    p_max_w: float

    def total(self) -> float:
        return float(self.p.sum())


def allocate_power(
    alloc: AllocationMatrix,
    n_antennas: int,
    p_max_w: float,
    policy: str = "equal_split",
) -> PowerMap:
    """Split the total budget equally over every allocated (RB, antenna) element.

    The budget is used exactly: sum over all elements equals p_max_w.
    """
    if policy != "equal_split":
        raise ConfigurationError(f"unknown power policy {policy!r}")
    n_alloc = alloc.rb_count
    if n_alloc == 0:
        raise ConfigurationError("cannot split power over an empty allocation")
    per_element = p_max_w / (n_alloc * n_antennas)
    p = np.full((n_alloc, n_antennas), per_element, dtype=np.float64)
    return PowerMap(p=p, p_max_w=p_max_w)


def snr(p: np.ndarray, h: np.ndarray, noise_w: float) -> np.ndarray:
    """Per-RB SNR with the antenna power-gain sum: sum_j p*h / sigma^2.

    p and h are (B, J) (or broadcastable); the antenna axis is the last one.
    """
    if noise_w <= 0:
        raise ContractViolation("noise power must be positive")
    return np.asarray(p * h).sum(axis=-1) / noise_w
