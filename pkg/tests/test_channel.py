import numpy as np
import pytest

from punctsim.channel import (
    allocate_power,
    mean_path_gain,
    noise_power_watts,
    place_users,
    sample_channel,
    snr,
)
from punctsim.errors import ConfigurationError, ContractViolation
from punctsim.grid import build_grid, initial_allocation


def test_placement_range_and_count():
    rng = np.random.default_rng(1)
    d = place_users(rng, 8, 500.0)
    assert d.shape == (8,)
    assert np.all(d >= 10.0) and np.all(d <= 500.0)


def test_placement_deterministic_given_seed():
    a = place_users(np.random.default_rng(7), 5, 500.0)
    b = place_users(np.random.default_rng(7), 5, 500.0)
    assert np.array_equal(a, b)


def test_placement_mean_distance_matches_disc_uniform():
    # E[d] = 2R/3 for uniform placement over a disc
    rng = np.random.default_rng(2)
    d = place_users(rng, 200_000, 500.0, min_distance_m=0.0)
    assert abs(d.mean() - 2.0 * 500.0 / 3.0) < 2.0


def test_gains_nonnegative_any_seed():
    rng = np.random.default_rng(3)
    h = sample_channel(rng, np.array([100.0, 400.0]), 10, 2)
    assert h.shape == (2, 10, 2)
    assert np.all(h >= 0)


def test_gain_mean_matches_pathloss_within_2pct():
    rng = np.random.default_rng(4)
    d = np.array([250.0])
    h = sample_channel(rng, d, 1000, 100)  # 1e5 draws
    expected = mean_path_gain(d)[0]
    assert abs(h.mean() - expected) / expected < 0.02


def test_gain_variance_matches_exponential_law():
    # Rayleigh power gains are exponential: variance = mean^2
    rng = np.random.default_rng(5)
    h = sample_channel(rng, np.array([300.0]), 1000, 100).ravel()
    mean, var = h.mean(), h.var()
    assert abs(var - mean**2) / mean**2 < 0.05


def test_double_distance_gain_ratio():
    rng = np.random.default_rng(6)
    d = np.array([100.0, 200.0])
    h = sample_channel(rng, d, 2000, 25, pathloss_exponent=3.5)
    ratio = h[1].mean() / h[0].mean()
    assert abs(ratio - 2.0 ** (-3.5)) / 2.0 ** (-3.5) < 0.05


def test_equal_split_power_values(default_grid):
    alloc = initial_allocation(default_grid, 5)
    pm = allocate_power(alloc, 1, 10.0)
    assert pm.p.shape == (103, 1)
    assert np.allclose(pm.p, 10.0 / 103)
    pm4 = allocate_power(alloc, 4, 10.0)
    assert np.allclose(pm4.p, pm.p[0, 0] / 4.0)


def test_power_budget_exact(default_grid):
    alloc = initial_allocation(default_grid, 5)
    for j in (1, 2, 4):
        pm = allocate_power(alloc, j, 10.0)
        assert abs(pm.total() - 10.0) < 10.0 * 1e-9


def test_power_rejects_bad_policy(default_grid):
    alloc = initial_allocation(default_grid, 5)
    with pytest.raises(ConfigurationError):
        allocate_power(alloc, 1, 10.0, policy="waterfilling")


def test_snr_identities():
    assert snr(np.array([[1.0]]), np.array([[2.0]]), 2.0) == pytest.approx(1.0)
    assert snr(np.array([[0.0]]), np.array([[5.0]]), 1.0) == pytest.approx(0.0)
    # two antennas, each p*h equal to the noise power -> SNR 2
    assert snr(np.array([1.0, 1.0]), np.array([3.0, 3.0]), 3.0) == pytest.approx(2.0)


def test_snr_requires_positive_noise():
    with pytest.raises(ContractViolation):
        snr(np.array([1.0]), np.array([1.0]), 0.0)


def test_noise_power_thermal_floor():
    # -174 dBm/Hz over 180 kHz is about -121.4 dBm
    sigma2 = noise_power_watts(180.0)
    dbm = 10 * np.log10(sigma2 * 1e3)
    assert abs(dbm - (-121.4)) < 0.1


def test_miso_antenna_sum_preserves_received_power():
    # Same budget split over more antennas: received power sum is unchanged in
    # expectation, so the J=2 mean must sit within noise of the J=1 mean.
    rng1 = np.random.default_rng(8)
    rng2 = np.random.default_rng(8)
    d = np.array([300.0])
    n = 20_000
    h1 = sample_channel(rng1, d, n, 1)
    h2 = sample_channel(rng2, d, n, 2)
    p1 = 1.0
    p2 = 0.5
    rx1 = (p1 * h1).sum(axis=-1).ravel()
    rx2 = (p2 * h2).sum(axis=-1).ravel()
    se = np.sqrt(rx1.var() / n + rx2.var() / n)
    assert rx2.mean() >= rx1.mean() - 3 * se


def test_miso_diversity_raises_expected_log_rate():
    # The antenna sum tightens the SNR distribution, so E[log2(1+snr)] grows.
    rng = np.random.default_rng(9)
    d = np.array([300.0])
    n = 20_000
    h1 = sample_channel(rng, d, n, 1)
    h4 = sample_channel(rng, d, n, 4)
    g = mean_path_gain(d)[0]
    snr1 = (1.0 * h1).sum(axis=-1) / g
    snr4 = (0.25 * h4).sum(axis=-1) / g
    assert np.log2(1 + snr4).mean() > np.log2(1 + snr1).mean()
