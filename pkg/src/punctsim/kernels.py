"""Placement kernels for the threshold ('proposed') scheduler.

This is the simulator's hot loop: per slot it spreads the URLLC demand
uniformly, caps per-user losses at the puncturing-rate threshold, and then
remaps units away from eMBB users whose rate falls under R_min, one
RB x mini-slot unit at a time.  The function is compiled with numba when the
backend allows (see backend.py) and runs unchanged in pure Python otherwise;
only integer counts and pre-computed float arrays cross the boundary, so both
paths produce identical decisions.

Move log layout: one row per executed relocation, [kind, src_rb, dst_rb] with
kind 0 for threshold-cap relocations and 1 for R_min remap moves.
"""

import numpy as np

from .backend import maybe_jit

MOVE_CAP = 0
MOVE_REMAP = 1


def _rb_loss_khz(cells: int, m: int, u: float, f_b_khz: float, convex: bool) -> float:
    frac = (cells / m) * u
    if convex:
        frac = frac * frac
    return f_b_khz * frac


def _proposed_impl(
    owner,        # (B,) int64: RB -> eMBB user
    se,           # (B,) float64: owner's log2(1 + SNR) on that RB
    gain_cmp,     # (B,) float64: owner's antenna-summed channel gain on that RB
    power_cmp,    # (B,) float64: antenna-summed transmit power on that RB
    n_users,      # int
    m,            # mini-slots per slot
    demand,       # URLLC units this slot, <= B*m
    u,            # demand / (B*m)
    convex,       # loss shape flag
    f_b_khz,      # RB bandwidth, kHz
    r_min_bps,    # minimum acceptable eMBB rate
    offset_khz,   # threshold offset for the fully-punctured branch
):
    n_rb = owner.shape[0]
    cells = np.zeros(n_rb, dtype=np.int64)

    # Provisional proportional puncture: demand spread evenly over all RBs,
    # remainder on the lowest-indexed ones.
    base = demand // n_rb
    rem = demand - base * n_rb
    for b in range(n_rb):
        if b < rem:
            cells[b] = base + 1
        else:
            cells[b] = base

    gamma = np.zeros(n_users, dtype=np.float64)
    phi = np.zeros(n_users, dtype=np.float64)
    for b in range(n_rb):
        k = owner[b]
        phi[k] += f_b_khz
        gamma[k] += _rb_loss_khz(cells[b], m, u, f_b_khz, convex)

    # Puncturing-rate threshold: max per-user loss, pulled back by `offset`
    # when the maximizing user is fully punctured.
    imax = 0
    for k in range(1, n_users):
        if gamma[k] > gamma[imax]:
            imax = k
    th = gamma[imax]
    if gamma[imax] >= phi[imax] - 1e-9:
        th = gamma[imax] - offset_khz
    if th < 0.0:
        th = 0.0

    max_moves = (n_users + 1) * demand + 8
    moves = np.empty((max_moves, 3), dtype=np.int64)
    n_moves = 0

    # Cap pass: pull every user's loss down to the threshold, relocating the
    # removed units onto whichever user ends up with the smallest loss.  With
    # the uniform provisional this only bites in the fully-punctured branch,
    # where relocation has nowhere to go and the load stays put.
    eps = 1e-9
    for k in range(n_users):
        while gamma[k] > th + eps:
            src = -1
            best_c = 0
            for b in range(n_rb):
                if owner[b] == k and cells[b] > best_c:
                    best_c = cells[b]
                    src = b
            if src < 0:
                break
            dst = -1
            dst_user = -1
            best_post = 0.0
            for b in range(n_rb):
                kp = owner[b]
                if kp == k or cells[b] >= m:
                    continue
                post = gamma[kp] + (
                    _rb_loss_khz(cells[b] + 1, m, u, f_b_khz, convex)
                    - _rb_loss_khz(cells[b], m, u, f_b_khz, convex)
                )
                if dst < 0 or post < best_post or (
                    post == best_post and (kp < dst_user or (kp == dst_user and b < dst))
                ):
                    dst = b
                    dst_user = kp
                    best_post = post
            if dst < 0:
                break
            gamma[k] -= _rb_loss_khz(cells[src], m, u, f_b_khz, convex) - _rb_loss_khz(
                cells[src] - 1, m, u, f_b_khz, convex
            )
            cells[src] -= 1
            gamma[dst_user] = best_post
            cells[dst] += 1
            moves[n_moves, 0] = MOVE_CAP
            moves[n_moves, 1] = src
            moves[n_moves, 2] = dst
            n_moves += 1

    rates = np.zeros(n_users, dtype=np.float64)
    for b in range(n_rb):
        k = owner[b]
        loss = _rb_loss_khz(cells[b], m, u, f_b_khz, convex)
        rates[k] += (f_b_khz - loss) * 1e3 * se[b]

    # Remap pass: users below R_min shed their assigned units onto a candidate
    # with higher power, larger gain, or lower loss, favouring the candidate
    # whose post-move loss is smallest.  Units received here are pinned; only
    # the assignment standing before this pass is movable.
    movable = cells.copy()
    for k in range(n_users):
        while rates[k] < r_min_bps:
            src = -1
            best_gain = 0.0
            for b in range(n_rb):
                if owner[b] == k and movable[b] > 0 and cells[b] > 0:
                    d_loss = _rb_loss_khz(cells[b], m, u, f_b_khz, convex) - _rb_loss_khz(
                        cells[b] - 1, m, u, f_b_khz, convex
                    )
                    gain = d_loss * se[b]
                    if src < 0 or gain > best_gain:
                        best_gain = gain
                        src = b
            if src < 0:
                break
            dst = -1
            dst_user = -1
            best_post = 0.0
            for b in range(n_rb):
                kp = owner[b]
                if kp == k or cells[b] >= m:
                    continue
                if not (
                    power_cmp[b] > power_cmp[src]
                    or gain_cmp[b] > gain_cmp[src]
                    or gamma[kp] < gamma[k]
                ):
                    continue
                post = gamma[kp] + (
                    _rb_loss_khz(cells[b] + 1, m, u, f_b_khz, convex)
                    - _rb_loss_khz(cells[b], m, u, f_b_khz, convex)
                )
                if dst < 0 or post < best_post or (
                    post == best_post and (kp < dst_user or (kp == dst_user and b < dst))
                ):
                    dst = b
                    dst_user = kp
                    best_post = post
            if dst < 0:
                break
            d_src = _rb_loss_khz(cells[src], m, u, f_b_khz, convex) - _rb_loss_khz(
                cells[src] - 1, m, u, f_b_khz, convex
            )
            gamma[k] -= d_src
            rates[k] += d_src * 1e3 * se[src]
            cells[src] -= 1
            movable[src] -= 1
            d_dst = _rb_loss_khz(cells[dst] + 1, m, u, f_b_khz, convex) - _rb_loss_khz(
                cells[dst], m, u, f_b_khz, convex
            )
            gamma[dst_user] += d_dst
            rates[dst_user] -= d_dst * 1e3 * se[dst]
            cells[dst] += 1
            moves[n_moves, 0] = MOVE_REMAP
            moves[n_moves, 1] = src
            moves[n_moves, 2] = dst
            n_moves += 1

    return cells, moves[:n_moves]


_rb_loss_khz = maybe_jit(_rb_loss_khz)
proposed_kernel = maybe_jit(_proposed_impl)


def proposed_cells(
    owner: np.ndarray,
    se: np.ndarray,
    gain_cmp: np.ndarray,
    power_cmp: np.ndarray,
    n_users: int,
    minislots: int,
    demand: int,
    convex: bool,
    f_b_khz: float,
    r_min_bps: float,
    offset_khz: float,
):
    """Run the threshold scheduler; returns (cells, move log)."""
    capacity = owner.shape[0] * minislots
    u = demand / capacity
    return proposed_kernel(
        np.ascontiguousarray(owner, dtype=np.int64),
        np.ascontiguousarray(se, dtype=np.float64),
        np.ascontiguousarray(gain_cmp, dtype=np.float64),
        np.ascontiguousarray(power_cmp, dtype=np.float64),
        n_users,
        minislots,
        demand,
        u,
        convex,
        f_b_khz,
        r_min_bps,
        offset_khz,
    )
