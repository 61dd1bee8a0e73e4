"""Compiled inner loops for the Markov chains.

Every kernel draws from a ``numpy.random.Generator`` passed in from Python,
so results match the pure-numpy stream bit for bit.  One uniform ``r`` drives
a single-site update: the site is ``floor(r * n)`` and the coin is the
fractional part ``r * n - site``; the new spin is +1 iff ``coin < p``.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def free_count(lp, li, cnt, spins, u):
    own = 1 if spins[u] > 0 else 0
    k = 0
    for j in range(lp[u], lp[u + 1]):
        if cnt[li[j]] - own == 0:
            k += 1
    return k


@njit(cache=True, inline="always")
def set_left(lp, li, cnt, spins, u, s):
    if spins[u] == s:
        return
    delta = 1 if s > 0 else -1
    for j in range(lp[u], lp[u + 1]):
        cnt[li[j]] += delta
    spins[u] = s


@njit(cache=True)
def recount(lp, li, spins, cnt):
    cnt[:] = 0
    for u in range(spins.shape[0]):
        if spins[u] > 0:
            for j in range(lp[u], lp[u + 1]):
                cnt[li[j]] += 1


@njit(cache=True)
def nu_steps(lp, li, spins, cnt, probs, n_steps, rng):
    """``n_steps`` Glauber updates of the left marginal; ``probs[k]`` is Pr[+1] with ``k`` free neighbours."""
    n = spins.shape[0]
    if n == 0:
        return
    for _ in range(n_steps):
        r = rng.random() * n
        u = int(r)
        if u >= n:
            u = n - 1
        coin = r - u
        k = free_count(lp, li, cnt, spins, u)
        set_left(lp, li, cnt, spins, u, 1 if coin < probs[k] else -1)


@njit(cache=True)
def mu_steps(lp, li, rp, ri, spins_l, spins_r, cnt, p_left, p_right, n_steps, rng):
    """Glauber on the joint measure: a uniform site of L or R is resampled."""
    nl = spins_l.shape[0]
    n = nl + spins_r.shape[0]
    if n == 0:
        return
    for _ in range(n_steps):
        r = rng.random() * n
        i = int(r)
        if i >= n:
            i = n - 1
        coin = r - i
        if i < nl:
            ok = True
            for j in range(lp[i], lp[i + 1]):
                if spins_r[li[j]] > 0:
                    ok = False
                    break
            set_left(lp, li, cnt, spins_l, i, 1 if (ok and coin < p_left) else -1)
        else:
            v = i - nl
            spins_r[v] = 1 if (cnt[v] == 0 and coin < p_right) else -1


@njit(cache=True)
def fill_right(cnt, spins_r, p_right, rng):
    for v in range(spins_r.shape[0]):
        coin = rng.random()
        spins_r[v] = 1 if (cnt[v] == 0 and coin < p_right) else -1


@njit(cache=True)
def block_steps(lp, li, spins_l, spins_r, cnt, probs, p_right, n_steps, rng):
    """Resample one left vertex given the rest of L, then all of R given L."""
    for _ in range(n_steps):
        nu_steps(lp, li, spins_l, cnt, probs, 1, rng)
        fill_right(cnt, spins_r, p_right, rng)


@njit(cache=True)
def to_mask(spins):
    m = 0
    for i in range(spins.shape[0]):
        if spins[i] > 0:
            m |= 1 << i
    return m


@njit(cache=True)
def nu_curve(lp, li, n_left, n_right, probs, times, n_reps, rng):
    """Left masks of ``n_reps`` chains from all -1, recorded at each of ``times``."""
    out = np.empty((times.shape[0], n_reps), dtype=np.int64)
    spins = np.empty(n_left, dtype=np.int8)
    cnt = np.empty(n_right, dtype=np.int64)
    for rep in range(n_reps):
        spins[:] = -1
        cnt[:] = 0
        done = 0
        for k in range(times.shape[0]):
            nu_steps(lp, li, spins, cnt, probs, times[k] - done, rng)
            done = times[k]
            out[k, rep] = to_mask(spins)
    return out


@njit(cache=True)
def two_side_curve(lp, li, rp, ri, n_left, n_right, probs, p_left, p_right,
                   block, times, n_reps, rng):
    out = np.empty((times.shape[0], n_reps), dtype=np.int64)
    spins_l = np.empty(n_left, dtype=np.int8)
    spins_r = np.empty(n_right, dtype=np.int8)
    cnt = np.empty(n_right, dtype=np.int64)
    for rep in range(n_reps):
        spins_l[:] = -1
        spins_r[:] = -1
        cnt[:] = 0
        done = 0
        for k in range(times.shape[0]):
            steps = times[k] - done
            if block:
                block_steps(lp, li, spins_l, spins_r, cnt, probs, p_right, steps, rng)
            else:
                mu_steps(lp, li, rp, ri, spins_l, spins_r, cnt, p_left, p_right, steps, rng)
            done = times[k]
            out[k, rep] = to_mask(spins_l)
    return out


@njit(cache=True)
def field_outer(lp, li, spins, cnt, tilted_probs, theta, m, outer_rng, inner_rng, free):
    """One field-dynamics round with a Glauber inner chain of ``m`` steps."""
    n = spins.shape[0]
    n_free = 0
    for u in range(n):
        in_s = False
        if spins[u] < 0:
            in_s = outer_rng.random() < 1.0 - theta
        if in_s:
            spins[u] = -1
        else:
            spins[u] = 1
            free[n_free] = u
            n_free += 1
    recount(lp, li, spins, cnt)
    if n_free == 0:
        return
    for _ in range(m):
        r = inner_rng.random() * n_free
        i = int(r)
        if i >= n_free:
            i = n_free - 1
        coin = r - i
        u = free[i]
        k = free_count(lp, li, cnt, spins, u)
        set_left(lp, li, cnt, spins, u, 1 if coin < tilted_probs[k] else -1)


@njit(cache=True)
def field_curve(lp, li, n_left, n_right, tilted_probs, theta, m, times, n_reps,
                outer_rng, inner_rng):
    out = np.empty((times.shape[0], n_reps), dtype=np.int64)
    spins = np.empty(n_left, dtype=np.int8)
    cnt = np.empty(n_right, dtype=np.int64)
    free = np.empty(n_left, dtype=np.int64)
    for rep in range(n_reps):
        spins[:] = -1
        cnt[:] = 0
        done = 0
        for k in range(times.shape[0]):
            for _ in range(times[k] - done):
                field_outer(lp, li, spins, cnt, tilted_probs, theta, m,
                            outer_rng, inner_rng, free)
            done = times[k]
            out[k, rep] = to_mask(spins)
    return out
