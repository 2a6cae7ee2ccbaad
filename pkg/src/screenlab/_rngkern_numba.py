"""Numba implementations of the splitmix64 counter-based sampling kernels.

Counter-based design: every variate is a pure function of
(key, counter), where keys are derived from (seed, stream id). Sequential
loops here and the vectorized numpy fallback therefore consume identical
raw 64-bit outputs, which keeps the two paths exchangeable.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

U64_GAMMA = np.uint64(0x9E3779B97F4A7C15)  # splitmix64 counter increment
U64_STREAM = np.uint64(0xD1B54A32D192ED03)  # stream-key increment
U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 2.0**-53


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * U64_MIX1
    z = (z ^ (z >> _S27)) * U64_MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def derive_key(seed, stream):
    return _mix64(np.uint64(seed) + (np.uint64(stream) + _ONE) * U64_STREAM)


@njit(cache=True)
def _unit_at(key, ctr):
    # strictly inside (0,1); the 0.5 offset and 2^-53 scale are exact
    z = _mix64(key + (np.uint64(ctr) + _ONE) * U64_GAMMA)
    return (float(z >> _S11) + 0.5) * _INV_2_53


@njit(cache=True)
def uniform_block(key, start, n):
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = _unit_at(key, start + i)
    return out


@njit(cache=True)
def normal_block(key, start_pair, n):
    # Box-Muller, cosine branch only; draw i consumes counters
    # 2*(start_pair+i) and 2*(start_pair+i)+1
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        c = 2 * (start_pair + i)
        u1 = _unit_at(key, c)
        u2 = _unit_at(key, c + 1)
        out[i] = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
    return out


@njit(cache=True)
def _gamma_one(a, key):
    # Marsaglia-Tsang (2000) squeeze-free rejection for shape a; the a < 1
    # case uses the u^(1/a) boost on a draw with shape a+1. Counter layout:
    # optional boost uniform at 0, then triples (normal pair, accept) per try.
    boost = 1.0
    base = 0
    if a < 1.0:
        u = _unit_at(key, 0)
        boost = u ** (1.0 / a)
        a = a + 1.0
        base = 1
    d = a - 1.0 / 3.0
    c = 1.0 / (3.0 * math.sqrt(d))
    t = 0
    while True:
        c0 = base + 3 * t
        u1 = _unit_at(key, c0)
        u2 = _unit_at(key, c0 + 1)
        uu = _unit_at(key, c0 + 2)
        x = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
        g = 1.0 + c * x
        if g > 0.0:
            v = g * g * g
            if math.log(uu) < 0.5 * x * x + d - d * v + d * math.log(v):
                return boost * d * v
        t += 1


@njit(cache=True)
def gamma_block(alphas, key):
    n = alphas.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = _gamma_one(alphas[i], derive_key(key, i))
    return out


@njit(cache=True)
def bootstrap_indices(key, start, n_boot, n):
    # replicate start+r draws from substream start+r, so replicates are
    # schedule-independent and chunked calls match one big call
    out = np.empty((n_boot, n), dtype=np.int64)
    for r in range(n_boot):
        kr = derive_key(key, start + r)
        for m in range(n):
            idx = int(_unit_at(kr, m) * n)
            if idx >= n:
                idx = n - 1
            out[r, m] = idx
    return out
