"""Numba acceleration toggle for the hot kernels.

Kernels run under numba's @njit by default. Set ``SCREENLAB_NUMBA=0`` to
select the pure-numpy fallback path instead; the fallback is also chosen
automatically when numba cannot be imported. Integer kernel outputs (random
bit streams, bootstrap indices) are bit-identical on both paths; float
outputs can differ in the last ulp because of FMA contraction.
"""

from __future__ import annotations

import os


def _env_wants_numba() -> bool:
    val = os.environ.get("SCREENLAB_NUMBA", "auto").strip().lower()
    return val not in ("0", "false", "no", "off")


NUMBA_ENABLED = False
if _env_wants_numba():
    try:
        from numba import njit as _njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def jit_kernel(func):
    """Compile a loop kernel with numba when enabled, else return it as-is.

    Decorated functions must be written in nopython-compatible style
    (numpy arrays, scalars, no dicts) so the same source runs on both paths.
    """
    if NUMBA_ENABLED:
        return _njit(cache=True)(func)
    return func
