"""Compiled random-walk kernels on a flattened grid.

Sites are flat indices into a padded grid; ``inside`` marks the interior and a
step is ``x + offsets[dir]``.  Directions are drawn two bits at a time from
62-bit words (rejection for 2d not a power of two).  All kernels release the
GIL so chunks can run in threads.
"""
from __future__ import annotations

import numpy as np
from numba import njit

WORD = 4611686018427387904  # 2**62


@njit(nogil=True, cache=True)
def direction(rng, buf, ndir, nbits):
    mask = (1 << nbits) - 1
    while True:
        if buf[1] <= 0:
            buf[0] = np.int64(rng.integers(0, WORD))
            buf[1] = 62 // nbits
        d = buf[0] & mask
        buf[0] >>= nbits
        buf[1] -= 1
        if d < ndir:
            return d


@njit(nogil=True, cache=True)
def walk_to_exit(rng, buf, inside, offsets, nbits, start, path, cap):
    """Walk from ``start`` until it leaves ``inside``; returns #vertices or -1 at the cap."""
    x = start
    path[0] = x
    L = 1
    ndir = offsets.shape[0]
    while inside[x]:
        if L > cap:
            return -1
        x += offsets[direction(rng, buf, ndir, nbits)]
        path[L] = x
        L += 1
    return L


@njit(nogil=True, cache=True)
def loop_erase_inplace(path, L, lepos):
    """Chronological loop erasure of path[:L] in place; ``lepos`` must be -1 on entry and is restored."""
    M = 0
    for t in range(L):
        x = path[t]
        p = lepos[x]
        if p >= 0:
            for q in range(p + 1, M):
                lepos[path[q]] = -1
            M = p + 1
        else:
            path[M] = x
            lepos[x] = M
            M += 1
    for q in range(M):
        lepos[path[q]] = -1
    return M


@njit(nogil=True, cache=True)
def pair_chunk(rng, inside, offsets, nbits, origin, eta_minus, eta_plus, a_exit, b_exit, ntrial, cap, work):
    """Sample (S1, S2) from the origin to the boundary.

    Counts: [trials, V_A, V_A and eta < eta-tilde, aborted].  ``a_exit`` and
    ``b_exit`` restrict to walks exiting at those sites (-1 for any).
    """
    stamp = work[0]
    lepos = work[1]
    n = inside.shape[0]
    p1 = np.empty(cap + 2, np.int64)
    p2 = np.empty(cap + 2, np.int64)
    buf = np.zeros(2, np.int64)
    out = np.zeros(4, np.int64)
    for t in range(ntrial):
        L1 = walk_to_exit(rng, buf, inside, offsets, nbits, origin, p1, cap)
        L2 = walk_to_exit(rng, buf, inside, offsets, nbits, origin, p2, cap)
        if L1 < 0 or L2 < 0:
            out[3] += 1
            continue
        if (a_exit >= 0 and p1[L1 - 1] != a_exit) or (b_exit >= 0 and p2[L2 - 1] != b_exit):
            out[0] += 1
            continue
        out[0] += 1
        tag = out[0] + 1
        for s in range(1, L2):
            stamp[p2[s]] = tag
        M1 = loop_erase_inplace(p1, L1, lepos)
        hit = False
        for s in range(M1):
            if stamp[p1[s]] == tag:
                hit = True
                break
        if hit:
            continue
        out[1] += 1
        M2 = loop_erase_inplace(p2, L2, lepos)
        ok = eta_minus.shape[0] <= M1 and eta_plus.shape[0] <= M2
        if ok:
            for i in range(eta_minus.shape[0]):
                if p1[i] != eta_minus[i]:
                    ok = False
                    break
        if ok:
            for i in range(eta_plus.shape[0]):
                if p2[i] != eta_plus[i]:
                    ok = False
                    break
        if ok:
            out[2] += 1
    return out


@njit(nogil=True, cache=True)
def phi_chunk(rng, inside, offsets, nbits, origin, tip, eta_mask, ntrial, cap, work):
    """Non-intersection event of the phi_A definition.

    S2 from the origin and S1 from ``tip`` must leave the domain without
    visiting eta after time 0, and LE(S1) must avoid S2[1, T].
    Counts: [trials, accepted, aborted].
    """
    stamp = work[0]
    lepos = work[1]
    le = np.empty(cap + 2, np.int64)
    buf = np.zeros(2, np.int64)
    out = np.zeros(3, np.int64)
    ndir = offsets.shape[0]
    for t in range(ntrial):
        out[0] += 1
        tag = out[0] + 1
        # S2 from the origin, stamping S2[1, T]
        x = origin
        ok = True
        steps = 0
        while True:
            x += offsets[direction(rng, buf, ndir, nbits)]
            steps += 1
            if eta_mask[x]:
                ok = False
                break
            stamp[x] = tag
            if not inside[x]:
                break
            if steps > cap:
                ok = False
                out[2] += 1
                break
        if not ok:
            continue
        # S1 from the tip with on-line chronological loop erasure
        x = tip
        le[0] = x
        lepos[x] = 0
        M = 1
        steps = 0
        while True:
            x += offsets[direction(rng, buf, ndir, nbits)]
            steps += 1
            if eta_mask[x]:
                ok = False
                break
            p = lepos[x]
            if p >= 0:
                for q in range(p + 1, M):
                    lepos[le[q]] = -1
                M = p + 1
            else:
                le[M] = x
                lepos[x] = M
                M += 1
            if not inside[x]:
                break
            if steps > cap or M > cap:
                ok = False
                out[2] += 1
                break
        hit = False
        for q in range(M):
            if ok and not hit and stamp[le[q]] == tag:
                hit = True
            lepos[le[q]] = -1
        if ok and not hit:
            out[1] += 1
    return out


@njit(nogil=True, cache=True)
def chordal_chunk(rng, inside, offsets, nbits, a_site, first, b_site, origin, eta_minus, eta_plus,
                  ntrial, cap, work, hvals, use_h):
    """Walks from ``a_site`` (first step forced to ``first``) kept if they exit at ``b_site``.

    With ``use_h`` the walk is the Doob transform by ``hvals`` and always
    exits at ``b_site``.  Counts: [trials, exits at b, LE through origin,
    ... and eta < eta-tilde, aborted].
    """
    lepos = work[1]
    path = np.empty(cap + 3, np.int64)
    buf = np.zeros(2, np.int64)
    out = np.zeros(5, np.int64)
    ndir = offsets.shape[0]
    for t in range(ntrial):
        out[0] += 1
        path[0] = a_site
        x = first
        path[1] = x
        L = 2
        aborted = False
        while inside[x]:
            if L > cap:
                aborted = True
                break
            if use_h:
                u = rng.random() * hvals[x] * ndir
                acc = 0.0
                d = ndir - 1
                for k in range(ndir):
                    acc += hvals[x + offsets[k]]
                    if u < acc:
                        d = k
                        break
                x += offsets[d]
            else:
                x += offsets[direction(rng, buf, ndir, nbits)]
            path[L] = x
            L += 1
        if aborted:
            out[4] += 1
            continue
        if x != b_site:
            continue
        out[1] += 1
        M = loop_erase_inplace(path, L, lepos)
        pos = -1
        for q in range(M):
            if path[q] == origin:
                pos = q
                break
        if pos < 0:
            continue
        out[2] += 1
        ok = eta_minus.shape[0] <= pos + 1 and eta_plus.shape[0] <= M - pos
        if ok:
            for i in range(eta_minus.shape[0]):
                if path[pos - i] != eta_minus[i]:
                    ok = False
                    break
        if ok:
            for i in range(eta_plus.shape[0]):
                if path[pos + i] != eta_plus[i]:
                    ok = False
                    break
        if ok:
            out[3] += 1
    return out
