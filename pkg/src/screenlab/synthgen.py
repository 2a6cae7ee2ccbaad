"""Synthetic corpora and oracle generators for tests and acceptance runs.

Everything is deterministic per seed through the package's counter-based
generator; parallel consumers use (seed, stream id) derivation. The gamma
draws behind the Dirichlet sampler use the Marsaglia-Tsang squeeze method
for shape >= 1 with the u^(1/a) boost below 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from . import rng
from .corpus import (
    Corpus,
    EMOTION_LABELS,
    EmotionDistribution,
    FilmRecord,
    N_LABELS,
    NEUTRAL_INDEX,
    UtteranceRecord,
)
from .diachronic import PanelObservation
from .phrase_graph import SimilarityGraph

_DIR_STREAM = 0x44495232
_SBM_STREAM = 0x53424D31
_CORPUS_STREAM = 0x53594E43
_PANEL_STREAM = 0x50414E4C

_NON_NEUTRAL = tuple(lbl for lbl in EMOTION_LABELS if lbl != "neutral")

# four semantic families of templated phrases; texts inside a family embed
# close together so kNN + Leiden recover the families
PHRASE_BANK: tuple[tuple[str, ...], ...] = (
    (
        "let's go, let's go!",
        "okay guys, let's go.",
        "come on, let's move out.",
    ),
    (
        "it's a pleasure to meet you.",
        "so nice to finally meet you!",
        "oh, nice to meet you.",
    ),
    (
        "i'm warning you.",
        "don't you dare.",
        "you'll regret this.",
    ),
    (
        "could i ask you something?",
        "can i get you anything?",
        "any questions?",
    ),
)


def sample_dirichlet(alpha, n: int, seed: int) -> list[EmotionDistribution]:
    """n draws from Dirichlet(alpha) over the 7 emotion labels."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (N_LABELS,):
        raise ValueError(f"alpha must have {N_LABELS} entries for emotion distributions")
    if np.any(alpha <= 0.0):
        raise ValueError("alpha must be strictly positive")
    mat = rng.dirichlet(alpha, n, rng.seed_key(seed, _DIR_STREAM))
    return [EmotionDistribution.from_raw(row) for row in mat]


def sample_dirichlet_matrix(alpha, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """(n, K) Dirichlet draws for arbitrary K; matrix form of the sampler."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(alpha <= 0.0):
        raise ValueError("alpha must be strictly positive")
    return rng.dirichlet(alpha, n, rng.substream(rng.seed_key(seed, _DIR_STREAM), stream))


def planted_partition(
    block_sizes: Sequence[int], p_in: float, p_out: float, seed: int
) -> tuple[SimilarityGraph, np.ndarray]:
    """Stochastic block model with unit edge weights and known labels."""
    if not p_in > p_out:
        raise ValueError(f"planted partition needs p_in > p_out, got {p_in} <= {p_out}")
    n = int(sum(block_sizes))
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)
    iu, ju = np.triu_indices(n, k=1)
    key = rng.seed_key(seed, _SBM_STREAM)
    u = rng.uniforms(key, iu.size)
    p = np.where(labels[iu] == labels[ju], p_in, p_out)
    mask = u < p
    width = max(3, len(str(max(n - 1, 1))))
    ids = [f"n{i:0{width}d}" for i in range(n)]
    return (
        SimilarityGraph(
            node_ids=ids,
            src=iu[mask].astype(np.int64),
            dst=ju[mask].astype(np.int64),
            weight=np.ones(int(mask.sum())),
        ),
        labels,
    )


def nmi(labels_a, labels_b) -> float:
    """Normalized mutual information, 2 I / (H_a + H_b)."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ValueError("label arrays must have the same length")
    n = a.size
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    cm = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(cm, (ia, ib), 1.0)
    pxy = cm / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    info = float((pxy[nz] * np.log(pxy[nz] / (px @ py)[nz])).sum())
    hx = float(-(px[px > 0] * np.log(px[px > 0])).sum())
    hy = float(-(py[py > 0] * np.log(py[py > 0])).sum())
    if hx + hy == 0.0:
        return 1.0
    return 2.0 * info / (hx + hy)


@dataclass
class SynthSpec:
    """Knobs for the synthetic corpus generator.

    Exactly one of neutral_curve / yearly_emotionality drives the neutral
    probability; with neither, a flat 0.7 neutral level applies.
    """

    n_films: int = 8
    utterances_per_film: int = 60
    n_bins: int = 20
    start_year: int = 1980
    years_span: int = 8
    neutral_curve: Optional[Sequence[float]] = None  # per-bin P(neutral)
    yearly_emotionality: Optional[Mapping[int, float]] = None  # year -> 1 - P(neutral)
    anger_peak_bin: Optional[int] = None
    nonneutral_alpha: Sequence[float] = (1.0,) * 6
    genres_cycle: Sequence[Sequence[str]] = (("drama",), ("comedy",))
    runtime_s: float = 6000.0
    credits_frac: Optional[float] = 0.95
    jitter: float = 0.01
    embed_dim: int = 8
    with_embeddings: bool = True
    seed: int = 0

    def validate(self) -> None:
        if self.neutral_curve is not None:
            if len(self.neutral_curve) != self.n_bins:
                raise ValueError(
                    f"neutral_curve has {len(self.neutral_curve)} entries for {self.n_bins} bins"
                )
            for p in self.neutral_curve:
                if not 0.0 <= p <= 1.0:
                    raise ValueError("neutral_curve probabilities must lie in [0, 1]")
        if self.yearly_emotionality is not None:
            for v in self.yearly_emotionality.values():
                if not 0.0 <= v <= 1.0:
                    raise ValueError("yearly emotionality targets must lie in [0, 1]")
        if self.anger_peak_bin is not None and not 0 <= self.anger_peak_bin < self.n_bins:
            raise ValueError("anger_peak_bin out of range")


def _phrase_list() -> list[str]:
    return [t for fam in PHRASE_BANK for t in fam]


def synth_text_embeddings(embed_dim: int = 8, seed: int = 0) -> dict[str, np.ndarray]:
    """Unit embeddings per bank phrase: family centroid plus a small
    per-text offset, so families are tight clusters under cosine."""
    key = rng.seed_key(seed, _CORPUS_STREAM)
    out: dict[str, np.ndarray] = {}
    for fi, family in enumerate(PHRASE_BANK):
        centroid = np.zeros(embed_dim)
        centroid[fi % embed_dim] = 1.0
        for ti, text in enumerate(family):
            offset = rng.normals(rng.substream(key, fi * 97 + ti), embed_dim) * 0.05
            vec = centroid + offset
            out[text] = vec / np.sqrt((vec * vec).sum())
    return out


def synth_corpus(spec: SynthSpec) -> Corpus:
    """Corpus whose per-bin neutral level and per-year emotionality follow
    the requested curves in expectation."""
    spec.validate()
    key = rng.seed_key(spec.seed, _CORPUS_STREAM)
    if spec.yearly_emotionality is not None:
        years = sorted(spec.yearly_emotionality)
    else:
        years = [spec.start_year + i for i in range(spec.years_span)]

    phrases = _phrase_list()
    embeddings = synth_text_embeddings(spec.embed_dim, spec.seed) if spec.with_embeddings else None

    nn_alpha = np.asarray(spec.nonneutral_alpha, dtype=np.float64)
    anger_alpha = np.array([50.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    nn_positions = [EMOTION_LABELS.index(lbl) for lbl in _NON_NEUTRAL]

    films: dict[str, FilmRecord] = {}
    utterances: list[UtteranceRecord] = []
    n_passes = max(1, -(-spec.utterances_per_film // spec.n_bins))

    for fi in range(spec.n_films):
        fid = f"f{fi:03d}"
        year = years[fi % len(years)]
        credits = spec.credits_frac * spec.runtime_s if spec.credits_frac is not None else None
        films[fid] = FilmRecord(
            film_id=fid,
            title=f"Synthetic Feature {fi}",
            year=year,
            runtime_s=spec.runtime_s,
            credits_start_s=credits,
            genres=frozenset(spec.genres_cycle[fi % len(spec.genres_cycle)]),
        )
        effective = credits if credits is not None else spec.runtime_s
        fkey = rng.substream(key, fi)
        jit = rng.uniforms(fkey, spec.utterances_per_film)
        weights = rng.dirichlet(nn_alpha, spec.utterances_per_film, rng.substream(fkey, 1))
        anger_weights = rng.dirichlet(anger_alpha, spec.utterances_per_film, rng.substream(fkey, 2))

        for t in range(spec.utterances_per_film):
            b = t % spec.n_bins
            p = t // spec.n_bins
            frac = (b + (p + 0.5) / n_passes) / spec.n_bins
            mid = frac * effective
            start = max(0.0, mid - 1.0)
            end = min(spec.runtime_s, mid + 1.0)

            if spec.yearly_emotionality is not None:
                p_neutral = 1.0 - spec.yearly_emotionality[year]
            elif spec.neutral_curve is not None:
                p_neutral = float(spec.neutral_curve[b])
            else:
                p_neutral = 0.7
            p_neutral += spec.jitter * (2.0 * jit[t] - 1.0)
            p_neutral = min(max(p_neutral, 1e-3), 1.0 - 1e-3)

            w6 = anger_weights[t] if spec.anger_peak_bin == b else weights[t]
            probs = np.empty(N_LABELS)
            probs[NEUTRAL_INDEX] = p_neutral
            for slot, pos in enumerate(nn_positions):
                probs[pos] = (1.0 - p_neutral) * w6[slot]

            text = phrases[(t + fi) % len(phrases)]
            utterances.append(
                UtteranceRecord(
                    film_id=fid,
                    utt_id=f"u{t:04d}",
                    start_s=start,
                    end_s=end,
                    text=text,
                    emotion=EmotionDistribution.from_raw(probs),
                    sent_embedding=(
                        tuple(float(v) for v in embeddings[text]) if embeddings else None
                    ),
                )
            )

    utterances.sort(key=lambda u: (u.film_id, u.start_s))
    return Corpus(films=films, utterances=utterances)


def synth_panel(
    n_groups: int,
    obs_per_group: int,
    beta: float,
    noise_sigma: float,
    seed: int = 0,
    group_effect_scale: float = 1.0,
) -> list[PanelObservation]:
    """Random panel y = a_g + beta * x + noise with known slope."""
    key = rng.seed_key(seed, _PANEL_STREAM)
    effects = rng.normals(rng.substream(key, 0), n_groups) * group_effect_scale
    obs: list[PanelObservation] = []
    for g in range(n_groups):
        gkey = rng.substream(key, g + 1)
        xs = np.arange(obs_per_group, dtype=np.float64) - (obs_per_group - 1) / 2.0
        noise = rng.normals(gkey, obs_per_group) * noise_sigma
        ys = effects[g] + beta * xs + noise
        for t in range(obs_per_group):
            obs.append(PanelObservation(group_id=g, x=float(xs[t]), y=float(ys[t]), utt_id=f"g{g}:o{t}"))
    return obs
