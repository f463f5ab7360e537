"""Pure-numpy fallback kernels, vectorized across replicas.

Same contract and same draw sequence as the JIT backend: every active
replica consumes three uniforms per event, categories are selected with
the identical threshold chain, and floating-point expressions match
term for term, so per-replica results agree with the JIT kernels to the
last bit up to libm rounding of log1p.

The simulation advances in rounds: in each round every still-active
replica executes one event.  All state lives in (replicas, n) arrays,
so memory is O(replicas * n) here versus O(n) per worker in the JIT
backend; prefer the JIT backend for large dimensions.
"""

import numpy as np

from .rng import stream_init_vec, next_uniform_vec

SYNC, BX, BY, UX, UY, PAIR = 0, 1, 2, 3, 4, 5

_ONE = np.uint64(1)
_U63 = np.int64(63)


def _flip_bits(words, rows, coords):
    bit = _ONE << (coords & _U63).astype(np.uint64)
    words[rows, coords >> 6] ^= bit


def _rates(n, kr, u_eff, b_eff):
    """Category thresholds; accumulation order mirrors the JIT kernel."""
    u = u_eff[kr]
    b = b_eff[kr]
    mm = n - kr
    r_sync = mm * (1.0 - b)
    r_break = mm * b
    r_single = kr * u
    r_pair = np.where(kr >= 2, kr * (1.0 - u), 0.0)
    c0 = r_sync
    c1 = c0 + r_break
    c2 = c1 + r_break
    c3 = c2 + r_single
    c4 = c3 + r_single
    total = c4 + r_pair
    return mm, c0, c1, c2, c3, c4, total


def _select_category(z, kr, c0, c1, c2, c3, c4):
    return np.select(
        [kr == 0, z < c0, z < c1, z < c2, z < c3, z < c4, kr >= 2],
        [SYNC, SYNC, BX, BY, UX, UY, PAIR], default=UY)


def _swap_to_slot(perm, pos, rows, coords, slot):
    """Swap ``coords`` with whatever occupies ``slot`` in each row."""
    other = perm[rows, slot]
    prev = pos[rows, coords]
    perm[rows, slot] = coords
    perm[rows, prev] = other
    pos[rows, coords] = slot
    pos[rows, other] = prev


def _init_state(n, perm0, replicas):
    perm = np.tile(perm0, (replicas, 1))
    pos0 = np.empty(n, dtype=np.int64)
    pos0[perm0] = np.arange(n, dtype=np.int64)
    pos = np.tile(pos0, (replicas, 1))
    return perm, pos


def _apply_events(n, rows, z, u3, kk, mm, c0, c1, c2, c3, c4,
                  perm, pos, on_flip_x, on_flip_y):
    """Select and apply one event per row; mutates perm/pos/kk.

    ``on_flip_x(rows, coords)`` / ``on_flip_y`` record the actual flips
    (bit toggles or counters, depending on the caller).
    """
    kr = kk[rows]
    cat = _select_category(z, kr, c0, c1, c2, c3, c4)

    sel = cat == SYNC
    if sel.any():
        rr = rows[sel]
        idx = kr[sel] + (u3[sel] * mm[sel]).astype(np.int64)
        c = perm[rr, idx]
        on_flip_x(rr, c)
        on_flip_y(rr, c)

    for code, on_flip in ((BX, on_flip_x), (BY, on_flip_y)):
        sel = cat == code
        if sel.any():
            rr = rows[sel]
            idx = kr[sel] + (u3[sel] * mm[sel]).astype(np.int64)
            c = perm[rr, idx]
            on_flip(rr, c)
            _swap_to_slot(perm, pos, rr, c, kk[rr])
            kk[rr] += 1

    for code, on_flip in ((UX, on_flip_x), (UY, on_flip_y)):
        sel = cat == code
        if sel.any():
            rr = rows[sel]
            idx = (u3[sel] * kr[sel]).astype(np.int64)
            c = perm[rr, idx]
            on_flip(rr, c)
            _swap_to_slot(perm, pos, rr, c, kk[rr] - 1)
            kk[rr] -= 1

    sel = cat == PAIR
    if sel.any():
        rr = rows[sel]
        kp = kr[sel]
        npairs = kp * (kp - 1)
        pidx = (u3[sel] * npairs).astype(np.int64)
        ia = pidx // (kp - 1)
        joff = pidx % (kp - 1)
        ja = joff + (joff >= ia)
        ci = perm[rr, ia]
        cj = perm[rr, ja]
        on_flip_x(rr, ci)
        on_flip_y(rr, cj)
        _swap_to_slot(perm, pos, rr, ci, kk[rr] - 1)
        kk[rr] -= 1
        _swap_to_slot(perm, pos, rr, cj, kk[rr] - 1)
        kk[rr] -= 1


def coupling_tau_batch(n, k0, perm0, x0w, y0w, u_eff, b_eff, t_max,
                       seed, stream0, replicas):
    """Simulate ``replicas`` coupled pairs to collision or t_max.

    Returns (tau, events, xw, yw); censored replicas carry tau = +inf.
    """
    tau = np.zeros(replicas, dtype=np.float64)
    events = np.zeros(replicas, dtype=np.int64)
    xw = np.tile(x0w, (replicas, 1))
    yw = np.tile(y0w, (replicas, 1))
    perm, pos = _init_state(n, perm0, replicas)
    kk = np.full(replicas, k0, dtype=np.int64)
    t = np.zeros(replicas, dtype=np.float64)
    states = stream_init_vec(seed, stream0 + np.arange(replicas))
    alive = kk > 0

    def flip_x(rr, c):
        _flip_bits(xw, rr, c)

    def flip_y(rr, c):
        _flip_bits(yw, rr, c)

    while alive.any():
        rows = np.flatnonzero(alive)
        st = states[rows]
        u1 = next_uniform_vec(st)
        u2 = next_uniform_vec(st)
        u3 = next_uniform_vec(st)
        states[rows] = st
        kr = kk[rows]
        mm, c0, c1, c2, c3, c4, total = _rates(n, kr, u_eff, b_eff)
        t[rows] += -np.log1p(-u1) / total
        cens = t[rows] > t_max
        if cens.any():
            dead = rows[cens]
            tau[dead] = np.inf
            alive[dead] = False
        keep = ~cens
        rows = rows[keep]
        if rows.size == 0:
            continue
        events[rows] += 1
        z = u2[keep] * total[keep]
        _apply_events(n, rows, z, u3[keep], kk, mm[keep], c0[keep],
                      c1[keep], c2[keep], c3[keep], c4[keep],
                      perm, pos, flip_x, flip_y)
        done = rows[kk[rows] == 0]
        if done.size:
            tau[done] = t[done]
            alive[done] = False
    return tau, events, xw, yw


def marginal_flip_batch(n, k0, perm0, u_eff, b_eff, horizon,
                        seed, stream0, replicas):
    """Run to the time horizon (no absorption) counting per-coordinate flips.

    Returns (flips_x, flips_y, events) with flips of shape (replicas, n).
    """
    flips_x = np.zeros((replicas, n), dtype=np.int64)
    flips_y = np.zeros((replicas, n), dtype=np.int64)
    events = np.zeros(replicas, dtype=np.int64)
    perm, pos = _init_state(n, perm0, replicas)
    kk = np.full(replicas, k0, dtype=np.int64)
    t = np.zeros(replicas, dtype=np.float64)
    states = stream_init_vec(seed, stream0 + np.arange(replicas))
    alive = np.ones(replicas, dtype=bool)

    def flip_x(rr, c):
        flips_x[rr, c] += 1

    def flip_y(rr, c):
        flips_y[rr, c] += 1

    while alive.any():
        rows = np.flatnonzero(alive)
        st = states[rows]
        u1 = next_uniform_vec(st)
        u2 = next_uniform_vec(st)
        u3 = next_uniform_vec(st)
        states[rows] = st
        kr = kk[rows]
        mm, c0, c1, c2, c3, c4, total = _rates(n, kr, u_eff, b_eff)
        t[rows] += -np.log1p(-u1) / total
        over = t[rows] > horizon
        if over.any():
            alive[rows[over]] = False
        keep = ~over
        rows = rows[keep]
        if rows.size == 0:
            continue
        events[rows] += 1
        z = u2[keep] * total[keep]
        _apply_events(n, rows, z, u3[keep], kk, mm[keep], c0[keep],
                      c1[keep], c2[keep], c3[keep], c4[keep],
                      perm, pos, flip_x, flip_y)
    return flips_x, flips_y, events
