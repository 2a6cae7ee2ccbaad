"""Pure-numpy fallback for the splitmix64 counter-based sampling kernels.

Mirrors the numba backend function-for-function. All 64-bit mixing happens
on uint64 arrays, which wrap silently; scalar entry points go through
1-element arrays for the same reason. Raw bit streams, uniforms, and
bootstrap indices are bit-identical to the numba path.
"""

from __future__ import annotations

import numpy as np

U64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
U64_STREAM = np.uint64(0xD1B54A32D192ED03)
U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 2.0**-53


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * U64_MIX1
    z = (z ^ (z >> np.uint64(27))) * U64_MIX2
    return z ^ (z >> np.uint64(31))


def derive_key(seed, stream):
    z = np.asarray([seed], dtype=np.uint64) + (
        np.asarray([stream], dtype=np.uint64) + np.uint64(1)
    ) * U64_STREAM
    return _mix64(z)[0]


def _derive_keys(key, streams: np.ndarray) -> np.ndarray:
    z = np.uint64(key) + (streams.astype(np.uint64) + np.uint64(1)) * U64_STREAM
    return _mix64(z)


def _units_at(key, ctrs: np.ndarray) -> np.ndarray:
    z = np.uint64(key) + (ctrs.astype(np.uint64) + np.uint64(1)) * U64_GAMMA
    bits = _mix64(z) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * _INV_2_53


def _units_keyed(keys: np.ndarray, ctrs: np.ndarray) -> np.ndarray:
    z = keys + (ctrs.astype(np.uint64) + np.uint64(1)) * U64_GAMMA
    bits = _mix64(z) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * _INV_2_53


def uniform_block(key, start, n):
    return _units_at(key, np.arange(start, start + n, dtype=np.int64))


def normal_block(key, start_pair, n):
    c = 2 * np.arange(start_pair, start_pair + n, dtype=np.int64)
    u1 = _units_at(key, c)
    u2 = _units_at(key, c + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def gamma_block(alphas, key):
    n = alphas.shape[0]
    out = np.empty(n, dtype=np.float64)
    keys = _derive_keys(key, np.arange(n, dtype=np.int64))

    a = alphas.astype(np.float64).copy()
    boost = np.ones(n)
    base = np.zeros(n, dtype=np.int64)
    small = a < 1.0
    if small.any():
        u = _units_keyed(keys[small], np.zeros(small.sum(), dtype=np.int64))
        boost[small] = u ** (1.0 / a[small])
        a[small] += 1.0
        base[small] = 1

    d = a - 1.0 / 3.0
    c = 1.0 / (3.0 * np.sqrt(d))

    # vectorized rejection rounds; each sample owns its substream so the
    # draws consumed match the sequential numba path exactly
    pending = np.arange(n, dtype=np.int64)
    t = 0
    while pending.size:
        c0 = base[pending] + 3 * t
        kp = keys[pending]
        u1 = _units_keyed(kp, c0)
        u2 = _units_keyed(kp, c0 + 1)
        uu = _units_keyed(kp, c0 + 2)
        x = np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
        g = 1.0 + c[pending] * x
        v = g * g * g
        dp = d[pending]
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = (g > 0.0) & (
                np.log(uu) < 0.5 * x * x + dp - dp * v + dp * np.log(np.where(g > 0.0, v, 1.0))
            )
        accepted = pending[ok]
        out[accepted] = boost[accepted] * d[accepted] * v[ok]
        pending = pending[~ok]
        t += 1
    return out


def bootstrap_indices(key, start, n_boot, n):
    keys = _derive_keys(key, np.arange(start, start + n_boot, dtype=np.int64))
    ctrs = np.arange(n, dtype=np.int64)
    u = _units_keyed(keys[:, None], np.broadcast_to(ctrs, (n_boot, n)))
    idx = (u * n).astype(np.int64)
    np.clip(idx, 0, n - 1, out=idx)
    return idx
