"""Compiled jump-chain kernel for the particle system.

Randomness comes from SplitMix64, a 64-bit counter-style generator whose
whole state is one integer, so each replica owns an independent stream that
is fully determined by ``(seed, replica)``.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> uint64(30))) * _M1
    z = (z ^ (z >> uint64(27))) * _M2
    return z ^ (z >> uint64(31))


@njit(cache=True, nogil=True)
def stream_seed(seed, replica):
    """Initial state of the stream owned by ``replica``."""
    return _mix(_mix(uint64(seed) + _GOLDEN) ^ (uint64(replica) * _GOLDEN + _M2))


@njit(cache=True, nogil=True)
def _next(state):
    state = state + _GOLDEN
    return state, _mix(state)


@njit(cache=True, nogil=True)
def _uniform(state):
    """Uniform draw in ``[0, 1)`` with 53 random bits."""
    state, x = _next(state)
    return state, float(x >> uint64(11)) * _INV53


@njit(cache=True, nogil=True)
def splitmix_uniforms(seed, replica, n):
    out = np.empty(n)
    state = stream_seed(seed, replica)
    for i in range(n):
        state, out[i] = _uniform(state)
    return out


@njit(cache=True, nogil=True)
def _site_rates(eta, N, drift, kill, rates):
    # drift = 1 + theta; kill = p / (N - 1); self-landing moves are thinned out
    total = 0.0
    for i in range(eta.size):
        r = eta[i] * (drift + kill * (N - eta[i]))
        rates[i] = r
        total += r
    return total


@njit(cache=True, nogil=True)
def _jump(eta, N, theta, kill, rates, total, state):
    K = eta.size
    state, u = _uniform(state)
    target = u * total
    i = 0
    acc = rates[0]
    while acc <= target and i < K - 1:
        i += 1
        acc += rates[i]
    while eta[i] == 0:  # guard against rounding landing on an empty site
        i = (i + K - 1) % K
    # per-particle channel weights: 1 (clockwise), theta, kill * (N - eta_i)
    free = N - eta[i]
    w_kill = kill * free
    state, v = _uniform(state)
    v *= 1.0 + theta + w_kill
    if v < 1.0:
        j = (i + 1) % K
    elif v < 1.0 + theta or free == 0:
        j = (i + K - 1) % K
    else:
        # uniform choice among the particles not at site i
        state, w = _uniform(state)
        m = int(w * free)
        if m >= free:
            m = free - 1
        j = -1
        for s in range(K):
            if s == i:
                continue
            if m < eta[s]:
                j = s
                break
            m -= eta[s]
    eta[i] -= 1
    eta[j] += 1
    return state


@njit(cache=True, nogil=True)
def run_replica(eta0, N, theta, p, times, seed, replica, out):
    """Simulate one replica and write the configuration at each of ``times`` into ``out``.

    ``times`` must be nondecreasing. Returns the number of jumps performed.
    """
    K = eta0.size
    eta = eta0.copy()
    rates = np.empty(K)
    drift = 1.0 + theta
    kill = p / (N - 1)
    state = stream_seed(seed, replica)
    total = _site_rates(eta, N, drift, kill, rates)
    state, u = _uniform(state)
    t_next = -np.log1p(-u) / total
    jumps = 0
    for a in range(times.size):
        while t_next <= times[a]:
            state = _jump(eta, N, theta, kill, rates, total, state)
            jumps += 1
            total = _site_rates(eta, N, drift, kill, rates)
            state, u = _uniform(state)
            t_next += -np.log1p(-u) / total
        for k in range(K):
            out[a, k] = eta[k]
    return jumps


@njit(cache=True, nogil=True)
def run_block(eta0, N, theta, p, times, seed, first, records):
    """Replicas ``first .. first + records.shape[0] - 1`` into ``records``."""
    jumps = 0
    for r in range(records.shape[0]):
        jumps += run_replica(eta0, N, theta, p, times, seed, first + r, records[r])
    return jumps
