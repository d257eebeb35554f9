import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from punctsim.errors import ContractViolation
from punctsim.grid import build_grid, initial_allocation
from punctsim.rate import (
    CONVEX_QUADRATIC,
    LINEAR,
    decision_from_cells,
    embb_rate,
    embb_rate_compact,
    loss_from_weights,
)


def _grid(n_rb):
    return build_grid(0, n_rb * 180.0, 0.0, 1)


def _uniform_weights(alloc, value):
    w = np.zeros((alloc.n_users, alloc.rb_count))
    w[alloc.owner, np.arange(alloc.rb_count)] = value
    return w


def _state_for_rate(n_rb, snr_linear):
    """Single user, deterministic gains chosen to hit the requested SNRs."""
    grid = _grid(n_rb)
    alloc = initial_allocation(grid, 1)
    noise_w = 1e-12
    power = np.ones((n_rb, 1))
    gains = (np.asarray(snr_linear, dtype=np.float64) * noise_w).reshape(1, n_rb, 1)
    return grid, alloc, power, gains, noise_w


def test_no_demand_no_loss():
    grid = _grid(4)
    alloc = initial_allocation(grid, 2)
    dec = loss_from_weights(alloc, _uniform_weights(alloc, 0.0), 0, grid, LINEAR)
    assert np.all(dec.per_user_loss_khz == 0)
    assert dec.served_units == 0


def test_full_puncture_loss_equals_allocation():
    grid = _grid(4)
    alloc = initial_allocation(grid, 2)
    dec = loss_from_weights(alloc, _uniform_weights(alloc, 1.0), grid.capacity_units, grid, LINEAR)
    phi = alloc.rb_counts() * grid.rb_bandwidth_khz
    assert np.allclose(dec.per_user_loss_khz, phi)


def test_half_load_rho_one_values():
    # rho = 1 at half demand (u = 1/2): linear loses 90 kHz/RB, convex 45 kHz.
    # M = 7 is odd, so realize u = 1/2 on a 2-RB grid: D = 7 of 14 units.
    grid = _grid(2)
    alloc = initial_allocation(grid, 1)
    w = _uniform_weights(alloc, 1.0)
    lin = loss_from_weights(alloc, w, 7, grid, LINEAR)
    conv = loss_from_weights(alloc, w, 7, grid, CONVEX_QUADRATIC)
    # per RB: linear 180 * 1 * 0.5 = 90 kHz, convex 180 * 0.25 = 45 kHz
    assert lin.per_rb_loss_khz[0, 0] == pytest.approx(90.0)
    assert conv.per_rb_loss_khz[0, 0] == pytest.approx(45.0)


def test_weights_out_of_range_rejected():
    grid = _grid(2)
    alloc = initial_allocation(grid, 1)
    w = _uniform_weights(alloc, 1.5)
    with pytest.raises(ContractViolation):
        loss_from_weights(alloc, w, 3, grid, LINEAR)


def test_weight_on_unallocated_rb_rejected():
    grid = _grid(2)
    alloc = initial_allocation(grid, 2)
    w = np.full((2, 2), 0.5)  # both users claim both RBs
    with pytest.raises(ContractViolation):
        loss_from_weights(alloc, w, 3, grid, LINEAR)


def test_rate_single_rb_unit_snr():
    grid, alloc, power, gains, noise_w = _state_for_rate(1, [1.0])
    dec = decision_from_cells(alloc, np.zeros(1, dtype=int), 0, grid, LINEAR)
    report = embb_rate(alloc, dec, power, gains, noise_w, grid)
    assert report.per_user_rate_bps[0] == pytest.approx(180e3, rel=1e-12)


def test_rate_zero_under_full_puncture():
    grid, alloc, power, gains, noise_w = _state_for_rate(2, [3.0, 1.0])
    dec = decision_from_cells(alloc, np.full(2, 7, dtype=int), grid.capacity_units, grid, LINEAR)
    report = embb_rate(alloc, dec, power, gains, noise_w, grid)
    assert report.per_user_rate_bps[0] == pytest.approx(0.0, abs=1e-6)


def test_rate_two_rbs_snr_3_and_1():
    grid, alloc, power, gains, noise_w = _state_for_rate(2, [3.0, 1.0])
    dec = decision_from_cells(alloc, np.zeros(2, dtype=int), 0, grid, LINEAR)
    report = embb_rate(alloc, dec, power, gains, noise_w, grid)
    # 180k * (log2 4 + log2 2) = 540 kbit/s
    assert report.per_user_rate_bps[0] == pytest.approx(540e3, rel=1e-12)


def test_compact_form_identities():
    assert embb_rate_compact(3780.0, 0.0, 1000.0) == pytest.approx(3.78e6)
    assert embb_rate_compact(3780.0, 3780.0, 1000.0) == pytest.approx(0.0)
    with pytest.raises(ContractViolation):
        embb_rate_compact(100.0, 101.0, 1000.0)


def test_compact_matches_full_form_on_equal_snr():
    grid, alloc, power, gains, noise_w = _state_for_rate(5, [2.0] * 5)
    dec = decision_from_cells(alloc, np.array([3, 1, 0, 2, 1]), 7, grid, LINEAR)
    report = embb_rate(alloc, dec, power, gains, noise_w, grid)
    per_unit_peak = report.peak_rate_bps[0] / report.phi_khz[0]
    compact = embb_rate_compact(
        float(report.phi_khz[0]), float(dec.per_user_loss_khz[0]), per_unit_peak
    )
    assert compact == pytest.approx(report.per_user_rate_bps[0], rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=7), st.floats(min_value=0.05, max_value=50.0))
def test_compact_matches_full_form_property(cells_per_rb, snr_value):
    grid, alloc, power, gains, noise_w = _state_for_rate(3, [snr_value] * 3)
    cells = np.full(3, cells_per_rb, dtype=int)
    demand = int(cells.sum())
    dec = decision_from_cells(alloc, cells, demand, grid, LINEAR)
    report = embb_rate(alloc, dec, power, gains, noise_w, grid)
    per_unit_peak = report.peak_rate_bps[0] / report.phi_khz[0]
    compact = embb_rate_compact(
        float(report.phi_khz[0]), float(dec.per_user_loss_khz[0]), per_unit_peak
    )
    assert compact == pytest.approx(report.per_user_rate_bps[0], rel=1e-9)


def test_rate_monotone_in_loss_and_demand():
    grid, alloc, power, gains, noise_w = _state_for_rate(2, [3.0, 1.0])
    last = None
    for demand in (0, 2, 6, 10, 14):
        w = _uniform_weights(alloc, demand / grid.capacity_units)
        dec = loss_from_weights(alloc, w, demand, grid, LINEAR)
        rate = embb_rate(alloc, dec, power, gains, noise_w, grid).per_user_rate_bps[0]
        if last is not None:
            assert rate <= last + 1e-9
        last = rate


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=0, max_value=14),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_convex_rate_at_least_linear(demand, seed):
    rng = np.random.default_rng(seed)
    grid = _grid(2)
    alloc = initial_allocation(grid, 2)
    cells = np.zeros(2, dtype=int)
    for _ in range(demand):
        choices = np.nonzero(cells < 7)[0]
        cells[choices[rng.integers(choices.size)]] += 1
    noise_w = 1e-12
    power = np.ones((2, 1))
    gains = rng.exponential(1.0, (2, 2, 1)) * noise_w * 5
    lin = decision_from_cells(alloc, cells, demand, grid, LINEAR)
    conv = decision_from_cells(alloc, cells, demand, grid, CONVEX_QUADRATIC)
    r_lin = embb_rate(alloc, lin, power, gains, noise_w, grid).per_user_rate_bps
    r_conv = embb_rate(alloc, conv, power, gains, noise_w, grid).per_user_rate_bps
    assert np.all(r_conv >= r_lin - 1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=14))
def test_served_units_match_cells(demand):
    grid = _grid(2)
    alloc = initial_allocation(grid, 2)
    cells = np.array([min(demand, 7), max(0, demand - 7)], dtype=int)
    dec = decision_from_cells(alloc, cells, demand, grid, LINEAR)
    assert dec.served_units == demand
    assert dec.cells.tolist() == cells.tolist()
