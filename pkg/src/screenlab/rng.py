"""Deterministic seeded randomness for every stochastic operation.

The generator is splitmix64 run in counter mode (Steele, Lea & Flood 2014):
variate ``i`` of stream ``s`` under seed ``k`` is a pure function of
``(k, s, i)``. Parallel consumers take disjoint stream ids, so results are
schedule-independent. The hot loops live in the numba backend with a numpy
fallback (see :mod:`screenlab.accel`).
"""

from __future__ import annotations

import numpy as np

from . import accel

if accel.NUMBA_ENABLED:
    from . import _rngkern_numba as _kern
else:
    from . import _rngkern_numpy as _kern

_MASK64 = (1 << 64) - 1


def seed_key(seed: int, stream: int = 0) -> np.uint64:
    """Derive the 64-bit key for (seed, stream)."""
    return np.uint64(_kern.derive_key(np.uint64(seed & _MASK64), np.int64(stream & _MASK64)))


def substream(key: np.uint64, stream: int) -> np.uint64:
    return np.uint64(_kern.derive_key(np.uint64(key), np.int64(stream)))


def uniforms(key: np.uint64, n: int, start: int = 0) -> np.ndarray:
    """n uniforms in (0,1) at counters start..start+n-1."""
    return _kern.uniform_block(np.uint64(key), np.int64(start), np.int64(n))


def normals(key: np.uint64, n: int, start_pair: int = 0) -> np.ndarray:
    """n standard normals; draw i consumes counter pair 2(start_pair+i)."""
    return _kern.normal_block(np.uint64(key), np.int64(start_pair), np.int64(n))


def gammas(alphas: np.ndarray, key: np.uint64) -> np.ndarray:
    """Independent Gamma(alpha_i, 1) draws, one substream per element."""
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    if alphas.size and alphas.min() <= 0.0:
        raise ValueError("gamma shape parameters must be positive")
    return _kern.gamma_block(alphas, np.uint64(key))


def dirichlet(alpha: np.ndarray, n: int, key: np.uint64) -> np.ndarray:
    """n draws from Dirichlet(alpha) via normalized independent gammas.

    Sample i, component j uses substream i*K+j, so the stream layout is
    independent of how the draws are batched.
    """
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    k = alpha.shape[0]
    flat = np.tile(alpha, n)
    g = gammas(flat, key).reshape(n, k)
    return g / g.sum(axis=1, keepdims=True)


def bootstrap_index_matrix(key: np.uint64, n_boot: int, n: int, start: int = 0) -> np.ndarray:
    """(n_boot, n) resampling indices; replicate start+r uses substream
    start+r, so chunked generation matches one big call."""
    return _kern.bootstrap_indices(np.uint64(key), np.int64(start), np.int64(n_boot), np.int64(n))


def permutation(key: np.uint64, n: int, start: int = 0) -> np.ndarray:
    """Deterministic permutation of range(n): argsort of n uniforms."""
    return np.argsort(uniforms(key, n, start), kind="stable").astype(np.int64)
