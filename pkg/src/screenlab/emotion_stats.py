"""Dirichlet fitting, emotional range, and bootstrap confidence intervals.

Emotional range of a set of performances is the differential entropy (nats)
of the maximum-likelihood Dirichlet fitted to their emotion vectors: high
entropy means varied performances, low entropy a narrow register. The MLE
is Minka's fixed-point update with inverse-digamma steps, which ascends the
likelihood monotonically. Boundary zeros are handled by clamping to a small
epsilon and renormalizing before the fit; epsilon is recorded in every
report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import rng
from ._dirichlet_impl import _fixed_point
from .corpus import Corpus, EmotionDistribution, N_LABELS

# digamma and inverse_digamma are this module's public surface for the
# special functions backing the MLE; implementations live in specfun
from .specfun import digamma, gammaln, inverse_digamma  # noqa: F401

DEFAULT_EPSILON = 1e-6
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000
DEFAULT_MIN_N = 50
DEFAULT_MIN_FILMS = 30
DEFAULT_N_BOOT = 2000
DEFAULT_LEVEL = 0.95
ALPHA0_CAP = 1e7

_BOOT_STREAM = 0x424F4F54
_REPLICATE_BLOCK = 256


class InsufficientDataError(ValueError):
    def __init__(self, subject_id: str, n: int, required: int):
        self.subject_id = subject_id
        super().__init__(f"subject {subject_id!r}: {n} samples, need at least {required}")


@dataclass
class DirichletParams:
    alpha: np.ndarray
    alpha0: float
    n_samples: int
    converged: bool
    iterations: int


@dataclass
class RangeReport:
    params: DirichletParams
    entropy: float
    subject_id: str
    n: int
    epsilon: float


@dataclass
class BootstrapCI:
    point: float
    lo: float
    hi: float
    level: float
    n_boot: int
    seed: int


def _as_matrix(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        mat = np.asarray(samples, dtype=np.float64)
    else:
        rows = [s.probs if isinstance(s, EmotionDistribution) else s for s in samples]
        mat = np.asarray(rows, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError("samples must form a 2-D array of probability vectors")
    return mat


def smooth_simplex(samples, eps: float = DEFAULT_EPSILON) -> np.ndarray:
    """Clamp entries to >= eps and renormalize each row to sum 1.

    The Dirichlet log-density diverges on the simplex boundary; smoothing
    must precede any likelihood computation.
    """
    mat = _as_matrix(samples)
    mat = np.maximum(mat, eps)
    return mat / mat.sum(axis=1, keepdims=True)


def dirichlet_log_likelihood(alpha, samples) -> float:
    """Sum of Dirichlet log densities of the samples under alpha."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(alpha <= 0.0):
        raise ValueError("alpha must be strictly positive")
    mat = _as_matrix(samples)
    if mat.shape[0] < 1:
        raise ValueError("need at least one sample")
    if np.any(mat <= 0.0):
        raise ValueError("samples contain non-positive entries; smooth them first")
    n = mat.shape[0]
    log_norm = math.lgamma(float(alpha.sum())) - gammaln(alpha).sum()
    return float(n * log_norm + ((alpha - 1.0) * np.log(mat).sum(axis=0)).sum())


def _loglik_from_suff(alpha: np.ndarray, mean_log: np.ndarray, n: int) -> float:
    log_norm = math.lgamma(float(alpha.sum())) - gammaln(alpha).sum()
    return float(n * (log_norm + ((alpha - 1.0) * mean_log).sum()))


def _moment_init(mean: np.ndarray, mean_sq: np.ndarray) -> Optional[np.ndarray]:
    # match mean and mean-square: each coordinate implies a concentration
    # s_j = (m_j - q_j) / (q_j - m_j^2); average the well-defined ones
    var = mean_sq - mean * mean
    valid = var > 1e-14
    if not valid.any():
        return None
    s = (mean[valid] - mean_sq[valid]) / var[valid]
    s = s[np.isfinite(s) & (s > 0.0)]
    if s.size == 0:
        return None
    return mean * float(np.mean(s))


def _fit_from_suff(
    mean_log: np.ndarray,
    mean: np.ndarray,
    mean_sq: np.ndarray,
    n: int,
    tol: float,
    max_iter: int,
    alpha_init: Optional[np.ndarray] = None,
) -> DirichletParams:
    k = mean.shape[0]
    var = mean_sq - mean * mean
    if float(var.max()) <= 1e-14:
        # zero-variance data: the MLE diverges; cap and flag
        alpha = mean * ALPHA0_CAP
        return DirichletParams(alpha, float(alpha.sum()), n, False, 0)

    if alpha_init is not None:
        alpha = np.asarray(alpha_init, dtype=np.float64).copy()
    else:
        alpha = _moment_init(mean, mean_sq)
    if alpha is None or np.any(~np.isfinite(alpha)) or np.any(alpha <= 0.0):
        alpha = np.ones(k)
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    converged, iterations, capped = _fixed_point(
        alpha, np.ascontiguousarray(mean_log), float(n), float(tol), int(max_iter), ALPHA0_CAP
    )
    return DirichletParams(alpha, float(alpha.sum()), n, bool(converged and not capped), int(iterations))


def dirichlet_mle(
    samples,
    eps: float = DEFAULT_EPSILON,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> DirichletParams:
    """Maximum-likelihood Dirichlet via Minka's fixed point.

    Samples are smoothed (clamp to eps, renormalize) first. The update
    psi(alpha_j') = psi(alpha0) + mean_i log p_ij runs until the largest
    coordinate change is below tol; the log-likelihood is checked to be
    non-decreasing at every step. Degenerate zero-variance input gets
    alpha0 capped at 1e7 with converged=False.
    """
    mat = _as_matrix(samples)
    if mat.shape[0] < 2:
        raise InsufficientDataError("<samples>", mat.shape[0], 2)
    sm = smooth_simplex(mat, eps)
    mean_log = np.log(sm).mean(axis=0)
    mean = sm.mean(axis=0)
    mean_sq = (sm * sm).mean(axis=0)
    return _fit_from_suff(mean_log, mean, mean_sq, sm.shape[0], tol, max_iter)


def dirichlet_entropy(alpha) -> float:
    """Differential entropy (nats) of Dirichlet(alpha).

    H = log B(alpha) + (alpha0 - K) psi(alpha0) - sum (alpha_j - 1) psi(alpha_j)
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(alpha <= 0.0):
        raise ValueError("alpha must be strictly positive")
    k = alpha.shape[0]
    alpha0 = float(alpha.sum())
    log_b = gammaln(alpha).sum() - math.lgamma(alpha0)
    return float(log_b + (alpha0 - k) * digamma(alpha0) - ((alpha - 1.0) * digamma(alpha)).sum())


def emotional_range(
    dists,
    subject_id: str,
    min_n: int = DEFAULT_MIN_N,
    eps: float = DEFAULT_EPSILON,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RangeReport:
    """Fit a Dirichlet to the emotion vectors and report its entropy."""
    mat = _as_matrix(dists)
    n = mat.shape[0]
    if n < min_n:
        raise InsufficientDataError(subject_id, n, min_n)
    params = dirichlet_mle(mat, eps=eps, tol=tol, max_iter=max_iter)
    return RangeReport(
        params=params,
        entropy=dirichlet_entropy(params.alpha),
        subject_id=subject_id,
        n=n,
        epsilon=eps,
    )


def _percentiles(values: np.ndarray, level: float) -> tuple[float, float]:
    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(values, [tail, 100.0 - tail])
    return float(lo), float(hi)


def bootstrap_ci(
    values,
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> BootstrapCI:
    """Percentile bootstrap CI for the mean of values.

    Replicate r draws its indices from substream r of (seed, boot stream),
    so results are independent of replicate scheduling.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("bootstrap_ci requires nonempty input")
    key = rng.seed_key(seed, _BOOT_STREAM)
    means = np.empty(n_boot)
    for start in range(0, n_boot, _REPLICATE_BLOCK):
        stop = min(start + _REPLICATE_BLOCK, n_boot)
        idx = _block_indices(key, start, stop, arr.size)
        means[start:stop] = arr[idx].mean(axis=1)
    lo, hi = _percentiles(means, level)
    return BootstrapCI(float(arr.mean()), lo, hi, level, n_boot, seed)


def _block_indices(key, start: int, stop: int, n: int) -> np.ndarray:
    return rng.bootstrap_index_matrix(key, stop - start, n, start=start)


def cluster_bootstrap_ci(
    groups: Sequence[np.ndarray],
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> BootstrapCI:
    """Percentile bootstrap CI for a pooled mean, resampling whole groups.

    Groups are typically films; resampling them respects within-film
    correlation.
    """
    groups = [np.asarray(g, dtype=np.float64) for g in groups if len(g)]
    if not groups:
        raise ValueError("cluster_bootstrap_ci requires nonempty input")
    sums = np.asarray([g.sum() for g in groups])
    counts = np.asarray([g.size for g in groups], dtype=np.float64)
    n_groups = len(groups)
    key = rng.seed_key(seed, _BOOT_STREAM)
    means = np.empty(n_boot)
    for start in range(0, n_boot, _REPLICATE_BLOCK):
        stop = min(start + _REPLICATE_BLOCK, n_boot)
        idx = _block_indices(key, start, stop, n_groups)
        means[start:stop] = sums[idx].sum(axis=1) / counts[idx].sum(axis=1)
    point = float(sums.sum() / counts.sum())
    lo, hi = _percentiles(means, level)
    return BootstrapCI(point, lo, hi, level, n_boot, seed)


def bootstrap_ci_statistic(
    n_units: int,
    statistic: Callable[[np.ndarray], float],
    point: float,
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> BootstrapCI:
    """Percentile bootstrap for an arbitrary statistic of resampled units.

    `statistic` receives an index array into the units for one replicate.
    """
    if n_units == 0:
        raise ValueError("bootstrap requires nonempty input")
    key = rng.seed_key(seed, _BOOT_STREAM)
    stats = np.empty(n_boot)
    for r in range(n_boot):
        idx = rng.bootstrap_index_matrix(key, 1, n_units, start=r)[0]
        stats[r] = statistic(idx)
    lo, hi = _percentiles(stats, level)
    return BootstrapCI(point, lo, hi, level, n_boot, seed)


@dataclass
class GenreRangeEntry:
    report: RangeReport
    ci: BootstrapCI
    n_films: int


@dataclass
class GenreRangeResult:
    entries: dict[str, GenreRangeEntry]
    skipped: dict[str, int]  # genre -> film count below the threshold


def _film_suff_stats(mat: np.ndarray, eps: float):
    sm = smooth_simplex(mat, eps)
    return sm.shape[0], np.log(sm).sum(axis=0), sm.sum(axis=0), (sm * sm).sum(axis=0)


def genre_emotional_range(
    corpus: Corpus,
    min_films: int = DEFAULT_MIN_FILMS,
    min_n: int = DEFAULT_MIN_N,
    eps: float = DEFAULT_EPSILON,
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> GenreRangeResult:
    """Per-genre emotional range over pooled utterance distributions.

    A film with several genres contributes to each. Genres with fewer than
    min_films films are skipped (reported, not errored). The CI is a
    film-level cluster bootstrap of the refitted entropy.
    """
    by_genre: dict[str, list[str]] = {}
    for film in corpus.films.values():
        for genre in film.genres:
            by_genre.setdefault(genre, []).append(film.film_id)

    by_film: dict[str, list] = {fid: [] for fid in corpus.films}
    for u in corpus.utterances:
        by_film[u.film_id].append(u.emotion.probs)
    film_mats = {
        fid: np.asarray(rows, dtype=np.float64).reshape(-1, N_LABELS)
        for fid, rows in by_film.items()
    }

    entries: dict[str, GenreRangeEntry] = {}
    skipped: dict[str, int] = {}
    for g_index, genre in enumerate(sorted(by_genre)):
        film_ids = sorted(by_genre[genre])
        if len(film_ids) < min_films:
            skipped[genre] = len(film_ids)
            continue
        film_ids = [fid for fid in film_ids if film_mats[fid].shape[0] > 0]
        pooled = np.concatenate([film_mats[fid] for fid in film_ids], axis=0)
        report = emotional_range(pooled, subject_id=genre, min_n=min_n, eps=eps)

        suff = [_film_suff_stats(film_mats[fid], eps) for fid in film_ids]
        ns = np.asarray([s[0] for s in suff], dtype=np.float64)
        logs = np.stack([s[1] for s in suff])
        means = np.stack([s[2] for s in suff])
        sqs = np.stack([s[3] for s in suff])

        def entropy_of_resample(idx: np.ndarray) -> float:
            n_tot = ns[idx].sum()
            params = _fit_from_suff(
                logs[idx].sum(axis=0) / n_tot,
                means[idx].sum(axis=0) / n_tot,
                sqs[idx].sum(axis=0) / n_tot,
                int(n_tot),
                DEFAULT_TOL,
                DEFAULT_MAX_ITER,
                alpha_init=report.params.alpha,  # warm start: refits stay cheap
            )
            return dirichlet_entropy(params.alpha)

        ci = bootstrap_ci_statistic(
            len(film_ids),
            entropy_of_resample,
            point=report.entropy,
            n_boot=n_boot,
            level=level,
            seed=int(rng.substream(rng.seed_key(seed, _BOOT_STREAM), g_index)) & 0x7FFFFFFF,
        )
        entries[genre] = GenreRangeEntry(report=report, ci=ci, n_films=len(by_genre[genre]))
    return GenreRangeResult(entries=entries, skipped=skipped)
