"""Year-over-year emotionality and the within-group fixed-effects fit.

The diachronic question is whether performances, not scripts, changed:
the regression therefore runs inside phrase groups used in every release
year of the corpus, absorbing per-group intercepts (the within estimator)
and leaving a single slope of emotionality on year.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .corpus import Corpus, emotionality
from .emotion_stats import BootstrapCI, DEFAULT_LEVEL, DEFAULT_N_BOOT, _percentiles
from .phrase_graph import PhraseGroup
from .specfun import f_sf

_YEAR_STREAM = 0x59454152


class DegenerateDesignError(ValueError):
    pass


@dataclass
class YearPoint:
    year: int
    point: float
    ci: BootstrapCI
    n_utts: int


@dataclass
class YearlyReport:
    points: list[YearPoint]
    empty_years: list[int]  # film years with no utterances
    mode: str


@dataclass
class PanelObservation:
    group_id: int
    x: float  # release year, centered at the panel mean
    y: float  # emotionality in [0, 1]
    utt_id: str


@dataclass
class RegressionReport:
    beta: float
    se: float
    r2: float
    f_stat: float
    df1: int
    df2: int
    p_value: float
    n_obs: int
    n_groups: int


def yearly_emotionality(
    corpus: Corpus,
    mode: str = "prob",
    n_boot: int = DEFAULT_N_BOOT,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> YearlyReport:
    """Mean emotionality per release year with film-cluster bootstrap CIs."""
    by_year: dict[int, dict[str, list[float]]] = {}
    for u in corpus.utterances:
        film = corpus.films[u.film_id]
        by_year.setdefault(film.year, {}).setdefault(u.film_id, []).append(emotionality(u, mode))

    empty_years = sorted({f.year for f in corpus.films.values()} - set(by_year))
    key = rng.seed_key(seed, _YEAR_STREAM)
    points = []
    for i, year in enumerate(sorted(by_year)):
        films = [np.asarray(v) for _, v in sorted(by_year[year].items())]
        sums = np.asarray([g.sum() for g in films])
        counts = np.asarray([g.size for g in films], dtype=np.float64)
        sub = rng.substream(key, i)
        stats = np.empty(n_boot)
        for r in range(n_boot):
            idx = rng.bootstrap_index_matrix(sub, 1, len(films), start=r)[0]
            stats[r] = sums[idx].sum() / counts[idx].sum()
        lo, hi = _percentiles(stats, level)
        point = float(sums.sum() / counts.sum())
        n_utts = int(counts.sum())
        points.append(
            YearPoint(year, point, BootstrapCI(point, lo, hi, level, n_boot, seed), n_utts)
        )
    return YearlyReport(points=points, empty_years=empty_years, mode=mode)


def select_ubiquitous_groups(corpus: Corpus, groups: list[PhraseGroup]) -> list[PhraseGroup]:
    """Groups with at least one utterance in every release year that has
    utterances in the corpus."""
    text_to_group: dict[str, int] = {}
    for gi, g in enumerate(groups):
        for t in g.member_texts:
            text_to_group[t] = gi
    years_present: set[int] = set()
    covered: dict[int, set[int]] = {gi: set() for gi in range(len(groups))}
    for u in corpus.utterances:
        year = corpus.films[u.film_id].year
        years_present.add(year)
        gi = text_to_group.get(u.text)
        if gi is not None:
            covered[gi].add(year)
    return [g for gi, g in enumerate(groups) if covered[gi] == years_present and years_present]


def build_panel(
    corpus: Corpus, groups: list[PhraseGroup], mode: str = "prob"
) -> list[PanelObservation]:
    """Panel of (group, centered year, emotionality) observations.

    Years are centered at the mean over observations for conditioning;
    centering leaves the slope untouched.
    """
    text_to_group: dict[str, int] = {}
    for g in groups:
        for t in g.member_texts:
            text_to_group[t] = g.group_id
    rows = []
    for u in corpus.utterances:
        gi = text_to_group.get(u.text)
        if gi is None:
            continue
        year = corpus.films[u.film_id].year
        rows.append((gi, float(year), emotionality(u, mode), f"{u.film_id}:{u.utt_id}"))
    if not rows:
        return []
    mean_year = float(np.mean([r[1] for r in rows]))
    return [PanelObservation(g, x - mean_year, y, uid) for g, x, y, uid in rows]


def fixed_effects_ols(obs: list[PanelObservation]) -> RegressionReport:
    """Within estimator: demean x and y inside each group, then OLS.

    beta = sum(x~ y~) / sum(x~^2); within-R^2 = beta^2 sum(x~^2)/sum(y~^2);
    F = df2 * R^2 / (1 - R^2) with df2 = N - G - 1; p from the F(1, df2)
    upper tail.
    """
    if not obs:
        raise ValueError("fixed_effects_ols requires observations")
    gids = np.asarray([o.group_id for o in obs])
    x = np.asarray([o.x for o in obs], dtype=np.float64)
    y = np.asarray([o.y for o in obs], dtype=np.float64)
    uniq, inv = np.unique(gids, return_inverse=True)
    n = x.size
    g = uniq.size
    if g < 2 and n < 3:
        raise ValueError("need >= 2 groups or one group with >= 3 observations")
    df2 = n - g - 1
    if df2 < 1:
        raise DegenerateDesignError(f"no residual degrees of freedom: N={n}, G={g}")

    counts = np.bincount(inv).astype(np.float64)
    x_dm = x - (np.bincount(inv, weights=x) / counts)[inv]
    y_dm = y - (np.bincount(inv, weights=y) / counts)[inv]
    sxx = float((x_dm * x_dm).sum())
    if sxx <= 0.0:
        raise DegenerateDesignError("x has no within-group variance")
    sxy = float((x_dm * y_dm).sum())
    syy = float((y_dm * y_dm).sum())
    beta = sxy / sxx
    rss = max(syy - beta * beta * sxx, 0.0)
    r2 = 0.0 if syy == 0.0 else beta * beta * sxx / syy
    se = float(np.sqrt(rss / df2 / sxx)) if df2 > 0 else float("nan")
    if r2 >= 1.0:
        f_stat = float("inf")
    else:
        f_stat = df2 * r2 / (1.0 - r2)
    p = f_sf(f_stat, 1.0, float(df2))
    return RegressionReport(
        beta=beta,
        se=se,
        r2=r2,
        f_stat=f_stat,
        df1=1,
        df2=df2,
        p_value=p,
        n_obs=n,
        n_groups=g,
    )
