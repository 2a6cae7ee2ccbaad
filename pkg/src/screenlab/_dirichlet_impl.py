"""Kernel for the Dirichlet MLE fixed point (Minka update).

Scalar digamma/trigamma/inverse-digamma mirror the vectorized versions in
:mod:`screenlab.specfun`; a parity test pins them together. Compiled via
jit_kernel so bootstrap refits stay cheap; the same source runs un-jitted
on the numpy fallback path.
"""

from __future__ import annotations

import math

import numpy as np

from .accel import jit_kernel

_EULER_GAMMA = 0.5772156649015328606


@jit_kernel
def _digamma_s(x):
    acc = 0.0
    w = x
    while w < 10.0:
        acc -= 1.0 / w
        w += 1.0
    z = 1.0 / (w * w)
    s = 1.0 / 12.0 - z * (
        1.0 / 120.0
        - z * (1.0 / 252.0 - z * (1.0 / 240.0 - z * (1.0 / 132.0 - z * (691.0 / 32760.0 - z / 12.0))))
    )
    return acc + math.log(w) - 0.5 / w - z * s


@jit_kernel
def _trigamma_s(x):
    acc = 0.0
    w = x
    while w < 10.0:
        acc += 1.0 / (w * w)
        w += 1.0
    z = 1.0 / (w * w)
    s = 1.0 / 6.0 - z * (
        1.0 / 30.0 - z * (1.0 / 42.0 - z * (1.0 / 30.0 - z * (5.0 / 66.0 - z * 691.0 / 2730.0)))
    )
    return acc + 1.0 / w + 0.5 * z + s * z / w


@jit_kernel
def _inv_digamma_s(y):
    if y >= -2.22:
        x = math.exp(y) + 0.5
    else:
        x = -1.0 / (y + _EULER_GAMMA)
    for _ in range(60):
        f = _digamma_s(x) - y
        if abs(f) <= 1e-12:
            break
        x_new = x - f / _trigamma_s(x)
        if x_new <= 0.0:
            x_new = x / 2.0
        x = x_new
    return x


@jit_kernel
def _fixed_point(alpha, mean_log, n, tol, max_iter, cap):
    """Runs psi(alpha_j') = psi(alpha0) + mean_log_j until converged.

    Mutates alpha in place. Returns (converged, iterations, capped);
    raises if the per-iteration log-likelihood ever decreases.
    """
    k = alpha.shape[0]
    prev_ll = -np.inf
    converged = False
    capped = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        alpha0 = 0.0
        for j in range(k):
            alpha0 += alpha[j]
        ll = math.lgamma(alpha0)
        for j in range(k):
            ll += (alpha[j] - 1.0) * mean_log[j] - math.lgamma(alpha[j])
        ll *= n
        if ll < prev_ll - 1e-8 * (1.0 + abs(prev_ll)):
            raise RuntimeError("Dirichlet fixed point decreased the likelihood")
        if ll > prev_ll:
            prev_ll = ll

        psi0 = _digamma_s(alpha0)
        delta = 0.0
        new_sum = 0.0
        for j in range(k):
            aj = _inv_digamma_s(psi0 + mean_log[j])
            d = abs(aj - alpha[j])
            if d > delta:
                delta = d
            alpha[j] = aj
            new_sum += aj
        if new_sum > cap:
            scale = cap / new_sum
            for j in range(k):
                alpha[j] *= scale
            capped = True
            break
        if delta <= tol:
            converged = True
            break
    return converged, iterations, capped
