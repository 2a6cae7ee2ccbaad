"""Emotion trajectories over narrative time.

Narrative time is the utterance midpoint as a fraction of the film's
credits-trimmed runtime, binned into n_bins equal intervals (default 20,
i.e. 5% steps). Per-bin points carry film-cluster bootstrap CIs; empty bins
are reported as missing, never as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng
from .corpus import Corpus, EMOTION_LABELS, FilmRecord, UtteranceRecord, emotionality
from .emotion_stats import BootstrapCI, DEFAULT_LEVEL, DEFAULT_N_BOOT, _percentiles

DEFAULT_N_BINS = 20
_TRAJ_STREAM = 0x5452414A
_NEUTRAL_CEILING = 1.0 - 1e-9  # prob-mode proportions undefined at pure neutral


@dataclass
class TrajectoryPoint:
    bin_index: int
    lo_pct: float
    hi_pct: float
    point: Optional[float]
    ci: Optional[BootstrapCI]
    n_utts: int


@dataclass
class TrajectoryReport:
    n_bins: int
    series: list[TrajectoryPoint]
    measure: str
    mode: str
    n_excluded: int  # utterances past the effective runtime


def assign_bin(u: UtteranceRecord, film: FilmRecord, n_bins: int = DEFAULT_N_BINS) -> Optional[int]:
    """Bin of the utterance midpoint, or None when it falls past the
    effective (credits-trimmed) runtime.

    bin = floor(n_bins * midpoint / effective_runtime), clamped so a
    midpoint exactly at the end lands in the last bin.
    """
    effective = film.effective_runtime_s
    mid = u.midpoint_s
    if mid > effective:
        return None
    b = int(np.floor(n_bins * mid / effective))
    return min(b, n_bins - 1)


def _cluster_ci(
    values: np.ndarray, film_idx: np.ndarray, n_boot: int, level: float, key, seed: int
) -> BootstrapCI:
    films, inv = np.unique(film_idx, return_inverse=True)
    sums = np.bincount(inv, weights=values, minlength=films.size)
    counts = np.bincount(inv, minlength=films.size).astype(np.float64)
    stats = np.empty(n_boot)
    for r in range(n_boot):
        idx = rng.bootstrap_index_matrix(key, 1, films.size, start=r)[0]
        stats[r] = sums[idx].sum() / counts[idx].sum()
    lo, hi = _percentiles(stats, level)
    return BootstrapCI(float(values.mean()), lo, hi, level, n_boot, seed)


def _binned_report(
    corpus: Corpus,
    values_of,  # (UtteranceRecord) -> float | None; None excludes the utterance
    measure: str,
    mode: str,
    n_bins: int,
    n_boot: int,
    level: float,
    seed: int,
) -> TrajectoryReport:
    if not corpus.utterances:
        raise ValueError("trajectory requires a nonempty corpus")
    film_index = {fid: i for i, fid in enumerate(sorted(corpus.films))}
    per_bin_vals: list[list[float]] = [[] for _ in range(n_bins)]
    per_bin_films: list[list[int]] = [[] for _ in range(n_bins)]
    n_excluded = 0
    for u in corpus.utterances:
        b = assign_bin(u, corpus.films[u.film_id], n_bins)
        if b is None:
            n_excluded += 1
            continue
        v = values_of(u)
        if v is None:
            continue
        per_bin_vals[b].append(v)
        per_bin_films[b].append(film_index[u.film_id])

    key = rng.seed_key(seed, _TRAJ_STREAM)
    series: list[TrajectoryPoint] = []
    for b in range(n_bins):
        lo_pct = 100.0 * b / n_bins
        hi_pct = 100.0 * (b + 1) / n_bins
        vals = np.asarray(per_bin_vals[b], dtype=np.float64)
        if vals.size == 0:
            series.append(TrajectoryPoint(b, lo_pct, hi_pct, None, None, 0))
            continue
        films_arr = np.asarray(per_bin_films[b])
        # canonical accumulation order: results do not depend on input order
        order = np.lexsort((vals, films_arr))
        vals, films_arr = vals[order], films_arr[order]
        ci = _cluster_ci(vals, films_arr, n_boot, level, rng.substream(key, b), seed)
        series.append(TrajectoryPoint(b, lo_pct, hi_pct, float(vals.mean()), ci, int(vals.size)))
    return TrajectoryReport(n_bins=n_bins, series=series, measure=measure, mode=mode, n_excluded=n_excluded)


def emotionality_trajectory(
    corpus: Corpus,
    mode: str = "prob",
    n_bins: int = DEFAULT_N_BINS,
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> TrajectoryReport:
    """Per-bin mean emotionality with film-cluster bootstrap CIs."""
    return _binned_report(
        corpus,
        lambda u: emotionality(u, mode),
        measure="emotionality",
        mode=mode,
        n_bins=n_bins,
        n_boot=n_boot,
        level=level,
        seed=seed,
    )


def emotion_proportion_trajectory(
    corpus: Corpus,
    label: str,
    mode: str = "prob",
    n_bins: int = DEFAULT_N_BINS,
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> TrajectoryReport:
    """Trajectory of one non-neutral emotion as a share of emotional mass.

    prob mode: per-utterance P(label) / (1 - P(neutral)), excluding
    utterances that are (numerically) purely neutral. argmax mode: the
    share of non-neutral-argmax utterances whose argmax is the label.
    """
    if label not in EMOTION_LABELS or label == "neutral":
        raise ValueError(f"label must be one of the six non-neutral emotions, got {label!r}")
    j = EMOTION_LABELS.index(label)

    if mode == "prob":

        def values_of(u: UtteranceRecord):
            pn = u.emotion.p_neutral
            if pn >= _NEUTRAL_CEILING:
                return None
            return u.emotion.probs[j] / (1.0 - pn)

    elif mode == "argmax":

        def values_of(u: UtteranceRecord):
            top = u.emotion.argmax_label()
            if top == "neutral":
                return None
            return 1.0 if top == label else 0.0

    else:
        raise ValueError(f"unknown mode: {mode!r}")

    return _binned_report(
        corpus,
        values_of,
        measure=f"emotion:{label}",
        mode=mode,
        n_bins=n_bins,
        n_boot=n_boot,
        level=level,
        seed=seed,
    )
