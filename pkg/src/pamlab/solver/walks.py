"""Continuous-time simple random walk with exact exponential holding times.

Walk ``w`` under master seed ``s`` draws from the stream
``stream_key(s, w)``: counter ``2j`` gives the ``j``-th holding time,
counter ``2j+1`` the ``j``-th jump direction.  Direction ``k`` in ``0..2d-1``
moves coordinate ``k // 2`` by ``+1`` (``k`` even) or ``-1`` (``k`` odd).
"""

from __future__ import annotations

import numpy as np

from .. import rng
from .._jit import USE_NUMBA, njit


@njit
def _site_index(x, R):
    side = 2 * R + 1
    idx = 0
    for i in range(x.shape[0]):
        if x[i] > R or x[i] < -R:
            return -1
        idx = idx * side + (x[i] + R)
    return idx


@njit
def _inside(x, r):
    for i in range(x.shape[0]):
        if x[i] > r or x[i] < -r:
            return False
    return True


@njit
def _fk_weights_nb(values, trap, R, r_box, rate, t, z, n_walks, seed):
    d = z.shape[0]
    out = np.empty(n_walks)
    x = np.empty(d, dtype=np.int64)
    for w in range(n_walks):
        key = rng.stream_key_scalar(seed, np.uint64(w))
        for i in range(d):
            x[i] = z[i]
        if r_box >= 0 and not _inside(x, r_box):
            out[w] = 0.0
            continue
        idx = _site_index(x, R)
        if idx >= 0 and trap[idx]:
            out[w] = 0.0
            continue
        logw = 0.0
        now = 0.0
        j = np.uint64(0)
        alive = True
        while True:
            v = values[idx] if idx >= 0 else 0.0
            if rate > 0.0:
                hold = -np.log(rng.uniform_scalar(key, np.uint64(2) * j)) / rate
            else:
                hold = np.inf
            if now + hold >= t:
                logw += v * (t - now)
                break
            logw += v * hold
            now += hold
            k = int(rng.uniform_scalar(key, np.uint64(2) * j + np.uint64(1)) * 2 * d)
            if k >= 2 * d:
                k = 2 * d - 1
            x[k // 2] += 1 if k % 2 == 0 else -1
            j += np.uint64(1)
            if r_box >= 0 and not _inside(x, r_box):
                alive = False
                break
            idx = _site_index(x, R)
            if idx >= 0 and trap[idx]:
                alive = False
                break
        out[w] = np.exp(logw) if alive else 0.0
    return out


def _fk_weights_np(values, trap, R, r_box, rate, t, z, n_walks, seed):
    d = z.shape[0]
    side = 2 * R + 1
    strides = side ** np.arange(d - 1, -1, -1, dtype=np.int64)
    keys = rng.stream_key(seed, np.arange(n_walks, dtype=np.uint64))
    x = np.tile(np.asarray(z, dtype=np.int64), (n_walks, 1))
    logw = np.zeros(n_walks)
    now = np.zeros(n_walks)
    alive = np.ones(n_walks, dtype=bool)
    running = np.ones(n_walks, dtype=bool)

    def lookup(xs):
        inside = np.all(np.abs(xs) <= R, axis=1)
        idx = np.where(inside, (np.clip(xs, -R, R) + R) @ strides, 0)
        v = np.where(inside, values[idx], 0.0)
        tr = inside & trap[idx]
        return v, tr

    if r_box >= 0:
        out_box = np.any(np.abs(x) > r_box, axis=1)
        alive &= ~out_box
    v, tr = lookup(x)
    alive &= ~tr
    running &= alive
    j = 0
    while running.any():
        ids = np.flatnonzero(running)
        if rate > 0:
            hold = -np.log(rng.uniform(keys[ids], np.full(ids.size, 2 * j, dtype=np.uint64))) / rate
        else:
            hold = np.full(ids.size, np.inf)
        vi = v[ids]
        stop = now[ids] + hold >= t
        s_ids = ids[stop]
        logw[s_ids] += vi[stop] * (t - now[s_ids])
        running[s_ids] = False
        m_ids = ids[~stop]
        logw[m_ids] += vi[~stop] * hold[~stop]
        now[m_ids] += hold[~stop]
        if m_ids.size:
            u = rng.uniform(keys[m_ids], np.full(m_ids.size, 2 * j + 1, dtype=np.uint64))
            k = np.minimum((u * 2 * d).astype(np.int64), 2 * d - 1)
            x[m_ids, k // 2] += np.where(k % 2 == 0, 1, -1)
            dead = np.zeros(m_ids.size, dtype=bool)
            if r_box >= 0:
                dead |= np.any(np.abs(x[m_ids]) > r_box, axis=1)
            vn, trn = lookup(x[m_ids])
            dead |= trn
            v[m_ids] = vn
            alive[m_ids[dead]] = False
            running[m_ids[dead]] = False
        j += 1
    return np.where(alive, np.exp(logw), 0.0)


def fk_weights(values, trap, R, r_box, rate, t, z, n_walks, seed, use_numba=None):
    """Per-walk Feynman–Kac weights ``exp(int V) 1{survived}``.

    ``r_box < 0`` means no Dirichlet box; outside the field box ``V = 0``.
    """
    use = USE_NUMBA if use_numba is None else use_numba
    z = np.ascontiguousarray(z, dtype=np.int64)
    args = (
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(trap, dtype=np.bool_),
        int(R),
        int(r_box),
        float(rate),
        float(t),
        z,
        int(n_walks),
        np.uint64(int(seed) & ((1 << 64) - 1)),
    )
    if use:
        return _fk_weights_nb(*args)
    return _fk_weights_np(*args)


@njit
def _path_nb(d, rate, t, z, key, r_box, max_jumps):
    times = np.empty(max_jumps)
    dirs = np.empty(max_jumps, dtype=np.int64)
    x = z.copy()
    now = 0.0
    n = 0
    exit_time = -1.0
    j = np.uint64(0)
    while n < max_jumps:
        if rate > 0.0:
            hold = -np.log(rng.uniform_scalar(key, np.uint64(2) * j)) / rate
        else:
            break
        if now + hold >= t:
            break
        now += hold
        k = int(rng.uniform_scalar(key, np.uint64(2) * j + np.uint64(1)) * 2 * d)
        if k >= 2 * d:
            k = 2 * d - 1
        x[k // 2] += 1 if k % 2 == 0 else -1
        times[n] = now
        dirs[n] = k
        n += 1
        j += np.uint64(1)
        if r_box >= 0 and exit_time < 0 and not _inside(x, r_box):
            exit_time = now
    return times[:n], dirs[:n], n == max_jumps, exit_time


def _path_np(d, rate, t, z, key, r_box, max_jumps):
    times, dirs = [], []
    x = np.array(z, dtype=np.int64)
    now, exit_time, j = 0.0, -1.0, 0
    while rate > 0 and len(times) < max_jumps:
        hold = -np.log(rng.uniform(key, np.uint64(2 * j))) / rate
        if now + hold >= t:
            break
        now += float(hold)
        k = min(int(rng.uniform(key, np.uint64(2 * j + 1)) * 2 * d), 2 * d - 1)
        x[k // 2] += 1 if k % 2 == 0 else -1
        times.append(now)
        dirs.append(k)
        j += 1
        if r_box >= 0 and exit_time < 0 and np.any(np.abs(x) > r_box):
            exit_time = now
    return np.array(times), np.array(dirs, dtype=np.int64), len(times) == max_jumps, exit_time


def walk_path(d, rate, t, z, seed, walk_index=0, r_box=-1, max_jumps=None, use_numba=None):
    """Jump times and directions of one walk up to time ``t``, plus the
    first exit time from ``Q_{r_box}`` (``-1`` if none)."""
    use = USE_NUMBA if use_numba is None else use_numba
    if max_jumps is None:
        mean = rate * t
        max_jumps = int(mean + 20 * np.sqrt(mean + 1) + 100)
    key = np.uint64(int(rng.stream_key(seed, walk_index)))
    z = np.ascontiguousarray(z, dtype=np.int64)
    fn = _path_nb if use else _path_np
    while True:
        times, dirs, truncated, exit_time = fn(int(d), float(rate), float(t), z, key, int(r_box), int(max_jumps))
        if not truncated:
            return times, dirs, float(exit_time)
        max_jumps *= 2
