"""JIT-compiled event-loop kernels: one replica at a time, O(1) per event.

Each replica owns a splitmix64 stream and consumes exactly three draws
per event (holding time, event category, index within category), so the
draw sequence is a pure function of (seed, stream id) and matches the
vectorized numpy backend lane for lane.  Category thresholds are
accumulated in a fixed order and the selection tree below is mirrored
verbatim in the numpy backend; do not reorder either.

State per replica: a permutation of the coordinates with the unmatched
ones occupying the prefix, its inverse, and the packed bit words of both
walks.  Every event touches at most two coordinates, so updates are a
couple of swaps.

Event categories, given k unmatched of n coordinates and weights
(u, b) = (u_eff[k], b_eff[k]):

    0 sync   rate (n-k)(1-b)   both chains flip one matched coordinate
    1 bx     rate (n-k) b      X alone flips a matched coordinate
    2 by     rate (n-k) b      Y alone flips a matched coordinate
    3 ux     rate k u          X alone flips an unmatched coordinate
    4 uy     rate k u          Y alone flips an unmatched coordinate
    5 pair   rate k (1-u)      X and Y flip two distinct unmatched ones
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.1102230246251565e-16
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)

SYNC, BX, BY, UX, UY, PAIR = 0, 1, 2, 3, 4, 5


@njit(cache=True, nogil=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True, inline="always")
def _stream_init(seed, stream):
    a = _mix(np.uint64(seed))
    return _mix((a ^ np.uint64(stream)) + _GOLDEN)


@njit(cache=True, nogil=True, inline="always")
def _u53(state):
    return np.float64(_mix(state) >> _S11) * _INV53


@njit(cache=True, nogil=True, inline="always")
def _to_unmatched(perm, pos, c, kk):
    """Move matched coordinate c into the unmatched prefix; new count."""
    p = pos[c]
    oc = perm[kk]
    perm[kk] = c
    perm[p] = oc
    pos[c] = kk
    pos[oc] = p
    return kk + 1


@njit(cache=True, nogil=True, inline="always")
def _to_matched(perm, pos, c, kk):
    """Move unmatched coordinate c out of the prefix; new count."""
    p = pos[c]
    oc = perm[kk - 1]
    perm[kk - 1] = c
    perm[p] = oc
    pos[c] = kk - 1
    pos[oc] = p
    return kk - 1


@njit(cache=True, nogil=True)
def coupling_tau_batch(n, k0, perm0, x0w, y0w, u_eff, b_eff, t_max,
                       seed, stream0, replicas):
    """Simulate ``replicas`` coupled pairs to collision or t_max.

    Returns (tau, events, xw, yw); censored replicas carry tau = +inf.
    """
    nw = x0w.shape[0]
    tau = np.empty(replicas, np.float64)
    events = np.zeros(replicas, np.int64)
    xw = np.empty((replicas, nw), np.uint64)
    yw = np.empty((replicas, nw), np.uint64)
    perm = np.empty(n, np.int64)
    pos = np.empty(n, np.int64)
    for r in range(replicas):
        st = _stream_init(seed, stream0 + r)
        for i in range(n):
            perm[i] = perm0[i]
            pos[perm0[i]] = i
        for w in range(nw):
            xw[r, w] = x0w[w]
            yw[r, w] = y0w[w]
        kk = k0
        t = 0.0
        ev = 0
        censored = False
        while kk > 0:
            u = u_eff[kk]
            b = b_eff[kk]
            mm = n - kk
            r_sync = mm * (1.0 - b)
            r_break = mm * b
            r_single = kk * u
            r_pair = kk * (1.0 - u) if kk >= 2 else 0.0
            c0 = r_sync
            c1 = c0 + r_break
            c2 = c1 + r_break
            c3 = c2 + r_single
            c4 = c3 + r_single
            total = c4 + r_pair
            st += _GOLDEN
            u1 = _u53(st)
            st += _GOLDEN
            u2 = _u53(st)
            st += _GOLDEN
            u3 = _u53(st)
            t += -np.log1p(-u1) / total
            if t > t_max:
                censored = True
                break
            ev += 1
            z = u2 * total
            if z < c0:
                cat = SYNC
            elif z < c1:
                cat = BX
            elif z < c2:
                cat = BY
            elif z < c3:
                cat = UX
            elif z < c4:
                cat = UY
            elif kk >= 2:
                cat = PAIR
            else:
                cat = UY
            if cat == SYNC:
                c = perm[kk + np.int64(u3 * mm)]
                w = c >> 6
                bit = _ONE << np.uint64(c & 63)
                xw[r, w] ^= bit
                yw[r, w] ^= bit
            elif cat == BX or cat == BY:
                c = perm[kk + np.int64(u3 * mm)]
                bit = _ONE << np.uint64(c & 63)
                if cat == BX:
                    xw[r, c >> 6] ^= bit
                else:
                    yw[r, c >> 6] ^= bit
                kk = _to_unmatched(perm, pos, c, kk)
            elif cat == UX or cat == UY:
                c = perm[np.int64(u3 * kk)]
                bit = _ONE << np.uint64(c & 63)
                if cat == UX:
                    xw[r, c >> 6] ^= bit
                else:
                    yw[r, c >> 6] ^= bit
                kk = _to_matched(perm, pos, c, kk)
            else:
                npairs = kk * (kk - 1)
                pidx = np.int64(u3 * npairs)
                ia = pidx // (kk - 1)
                joff = pidx % (kk - 1)
                ja = joff + 1 if joff >= ia else joff
                ci = perm[ia]
                cj = perm[ja]
                xw[r, ci >> 6] ^= _ONE << np.uint64(ci & 63)
                yw[r, cj >> 6] ^= _ONE << np.uint64(cj & 63)
                kk = _to_matched(perm, pos, ci, kk)
                kk = _to_matched(perm, pos, cj, kk)
        tau[r] = np.inf if censored else t
        events[r] = ev
    return tau, events, xw, yw


@njit(cache=True, nogil=True)
def marginal_flip_batch(n, k0, perm0, u_eff, b_eff, horizon,
                        seed, stream0, replicas):
    """Run to the time horizon (no absorption) counting per-coordinate flips.

    Returns (flips_x, flips_y, events) with flips of shape (replicas, n).
    """
    flips_x = np.zeros((replicas, n), np.int64)
    flips_y = np.zeros((replicas, n), np.int64)
    events = np.zeros(replicas, np.int64)
    perm = np.empty(n, np.int64)
    pos = np.empty(n, np.int64)
    for r in range(replicas):
        st = _stream_init(seed, stream0 + r)
        for i in range(n):
            perm[i] = perm0[i]
            pos[perm0[i]] = i
        kk = k0
        t = 0.0
        ev = 0
        while True:
            u = u_eff[kk]
            b = b_eff[kk]
            mm = n - kk
            r_sync = mm * (1.0 - b)
            r_break = mm * b
            r_single = kk * u
            r_pair = kk * (1.0 - u) if kk >= 2 else 0.0
            c0 = r_sync
            c1 = c0 + r_break
            c2 = c1 + r_break
            c3 = c2 + r_single
            c4 = c3 + r_single
            total = c4 + r_pair
            st += _GOLDEN
            u1 = _u53(st)
            st += _GOLDEN
            u2 = _u53(st)
            st += _GOLDEN
            u3 = _u53(st)
            t += -np.log1p(-u1) / total
            if t > horizon:
                break
            ev += 1
            z = u2 * total
            if kk == 0:
                cat = SYNC
            elif z < c0:
                cat = SYNC
            elif z < c1:
                cat = BX
            elif z < c2:
                cat = BY
            elif z < c3:
                cat = UX
            elif z < c4:
                cat = UY
            elif kk >= 2:
                cat = PAIR
            else:
                cat = UY
            if cat == SYNC:
                c = perm[kk + np.int64(u3 * mm)]
                flips_x[r, c] += 1
                flips_y[r, c] += 1
            elif cat == BX or cat == BY:
                c = perm[kk + np.int64(u3 * mm)]
                if cat == BX:
                    flips_x[r, c] += 1
                else:
                    flips_y[r, c] += 1
                kk = _to_unmatched(perm, pos, c, kk)
            elif cat == UX or cat == UY:
                c = perm[np.int64(u3 * kk)]
                if cat == UX:
                    flips_x[r, c] += 1
                else:
                    flips_y[r, c] += 1
                kk = _to_matched(perm, pos, c, kk)
            else:
                npairs = kk * (kk - 1)
                pidx = np.int64(u3 * npairs)
                ia = pidx // (kk - 1)
                joff = pidx % (kk - 1)
                ja = joff + 1 if joff >= ia else joff
                ci = perm[ia]
                cj = perm[ja]
                flips_x[r, ci] += 1
                flips_y[r, cj] += 1
                kk = _to_matched(perm, pos, ci, kk)
                kk = _to_matched(perm, pos, cj, kk)
        events[r] = ev
    return flips_x, flips_y, events
