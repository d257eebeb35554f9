import numpy as np
import pytest

from punctsim.channel import allocate_power, noise_power_watts, sample_channel
from punctsim.grid import build_grid, initial_allocation
from punctsim.schedulers import SlotState
from punctsim.traffic import UrllcArrivals


def make_arrivals(per_minislot, packet_bytes=50):
    return UrllcArrivals(per_minislot=np.asarray(per_minislot, dtype=np.int64), packet_bytes=packet_bytes)


def make_state(
    n_rb=2,
    n_users=2,
    n_urllc=1,
    n_antennas=1,
    demand=0,
    seed=0,
    gains_embb=None,
    power=None,
    minislot_demand=None,
):
    """Small, fully-specified slot state for scheduler and rate tests."""
    grid = build_grid(0, n_rb * 180.0, 0.0, 1)
    assert grid.rb_count == n_rb
    alloc = initial_allocation(grid, n_users)
    noise_w = noise_power_watts(grid.rb_bandwidth_khz)
    rng = np.random.default_rng(seed)
    if gains_embb is None:
        distances = np.linspace(100.0, 400.0, n_users)
        gains_embb = sample_channel(rng, distances, n_rb, n_antennas)
    if power is None:
        power = allocate_power(alloc, n_antennas, 10.0).p
    gains_urllc = sample_channel(rng, np.full(n_urllc, 250.0), n_rb, n_antennas)
    m = grid.minislots_per_slot
    if minislot_demand is None:
        per_minislot = np.zeros(m, dtype=np.int64)
        left = demand
        for i in range(m):
            take = min(left, n_rb)
            per_minislot[i] = take
            left -= take
        assert left == 0, "demand does not fit the toy grid"
    else:
        per_minislot = np.asarray(minislot_demand, dtype=np.int64)
    return SlotState(
        grid=grid,
        alloc=alloc,
        power=np.asarray(power, dtype=np.float64),
        gains_embb=np.asarray(gains_embb, dtype=np.float64),
        gains_urllc=np.asarray(gains_urllc, dtype=np.float64),
        noise_w=noise_w,
        arrivals=make_arrivals(per_minislot),
    )


@pytest.fixture
def default_grid():
    return build_grid(0, 20000.0, 692.5, 10)
