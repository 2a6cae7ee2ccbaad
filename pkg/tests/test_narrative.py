import numpy as np
import pytest

from screenlab.corpus import Corpus, EmotionDistribution, FilmRecord, UtteranceRecord
from screenlab.narrative import (
    assign_bin,
    emotion_proportion_trajectory,
    emotionality_trajectory,
)
from screenlab.synthgen import SynthSpec, synth_corpus


def _film(runtime=7200.0, credits=None):
    return FilmRecord("f", "T", 2000, runtime, credits)


def _utt(start, end, probs=None, text="x", fid="f", uid=None):
    return UtteranceRecord(
        film_id=fid,
        utt_id=uid or f"u{start}",
        start_s=start,
        end_s=end,
        text=text,
        emotion=EmotionDistribution.from_raw(probs or [1 / 7] * 7),
    )


class TestAssignBin:
    def test_lower_boundary(self):
        assert assign_bin(_utt(0.0, 0.0001), _film()) == 0

    def test_upper_boundary_clamped(self):
        f = _film(runtime=1000.0)
        u = _utt(999.0, 1001.0)  # midpoint exactly at runtime
        assert u.midpoint_s == 1000.0
        assert assign_bin(u, f) == 19

    def test_midpoint_at_half_of_7200s(self):
        u = _utt(3599.0, 3601.0)
        assert assign_bin(u, _film(runtime=7200.0)) == 10

    def test_clock_runs_on_trimmed_runtime(self):
        f = _film(runtime=1000.0, credits=500.0)
        assert assign_bin(_utt(495.0, 505.0), f) == 19  # midpoint 500 = end of narrative
        assert assign_bin(_utt(600.0, 610.0), f) is None  # past the boundary

    def test_scale_invariance(self):
        f1 = _film(runtime=1000.0)
        f2 = _film(runtime=2000.0)
        for s in (0.0, 123.0, 499.0, 731.5, 999.0):
            b1 = assign_bin(_utt(s, s + 1.0), f1)
            b2 = assign_bin(_utt(2 * s, 2 * (s + 1.0)), f2)
            assert b1 == b2


class TestEmotionalityTrajectory:
    def test_linear_neutral_decline_is_monotone(self):
        spec = SynthSpec(
            n_films=6, utterances_per_film=120, neutral_curve=np.linspace(0.9, 0.5, 20), seed=3
        )
        corpus = synth_corpus(spec)
        traj = emotionality_trajectory(corpus, n_boot=100, seed=1)
        pts = [p.point for p in traj.series]
        assert all(p is not None for p in pts)
        assert all(b > a for a, b in zip(pts, pts[1:]))

    def test_single_utterance_only_bin0(self):
        films = {"f": _film(runtime=1000.0)}
        corpus = Corpus(films=films, utterances=[_utt(0.0, 1.0)])
        traj = emotionality_trajectory(corpus, n_boot=50, seed=0)
        assert traj.series[0].n_utts == 1
        assert traj.series[0].point is not None
        for p in traj.series[1:]:
            assert p.point is None and p.ci is None and p.n_utts == 0

    def test_all_neutral_is_flat_zero(self):
        films = {"f": _film(runtime=100.0)}
        utts = [
            _utt(5.0 * i, 5.0 * i + 1.0, probs=[0, 0, 0, 0, 1.0, 0, 0], uid=f"u{i}")
            for i in range(20)
        ]
        corpus = Corpus(films=films, utterances=utts)
        traj = emotionality_trajectory(corpus, n_boot=50, seed=0)
        for p in traj.series:
            if p.point is not None:
                assert p.point == 0.0

    def test_order_invariance(self):
        spec = SynthSpec(n_films=4, utterances_per_film=60, seed=8)
        corpus = synth_corpus(spec)
        shuffled = Corpus(films=corpus.films, utterances=list(reversed(corpus.utterances)))
        a = emotionality_trajectory(corpus, n_boot=60, seed=2)
        b = emotionality_trajectory(shuffled, n_boot=60, seed=2)
        assert [p.point for p in a.series] == [p.point for p in b.series]
        assert [(p.ci.lo, p.ci.hi) for p in a.series] == [(p.ci.lo, p.ci.hi) for p in b.series]

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            emotionality_trajectory(Corpus(films={}, utterances=[]), n_boot=10, seed=0)

    def test_excluded_past_effective_runtime_counted(self):
        films = {"f": _film(runtime=1000.0, credits=500.0)}
        corpus = Corpus(films=films, utterances=[_utt(0.0, 10.0), _utt(600.0, 620.0)])
        traj = emotionality_trajectory(corpus, n_boot=10, seed=0)
        assert traj.n_excluded == 1


class TestEmotionProportionTrajectory:
    def test_proportion_formula(self):
        films = {"f": _film(runtime=100.0)}
        # P(joy)=0.3, P(neutral)=0.4 -> joy share 0.5
        probs = [0.05, 0.05, 0.05, 0.3, 0.4, 0.1, 0.05]
        corpus = Corpus(films=films, utterances=[_utt(0.0, 1.0, probs=probs)])
        traj = emotion_proportion_trajectory(corpus, "joy", n_boot=10, seed=0)
        assert traj.series[0].point == pytest.approx(0.5)

    def test_anger_peak_recovered(self):
        spec = SynthSpec(n_films=6, utterances_per_film=200, anger_peak_bin=17, seed=4)
        corpus = synth_corpus(spec)
        traj = emotion_proportion_trajectory(corpus, "anger", n_boot=60, seed=1)
        pts = [p.point for p in traj.series]
        assert int(np.argmax(pts)) == 17

    def test_absent_label_is_zero_series(self):
        films = {"f": _film(runtime=100.0)}
        probs = [0.5, 0.0, 0.0, 0.1, 0.4, 0.0, 0.0]  # no fear mass anywhere
        utts = [_utt(5.0 * i, 5.0 * i + 1.0, probs=probs, uid=f"u{i}") for i in range(20)]
        corpus = Corpus(films=films, utterances=utts)
        traj = emotion_proportion_trajectory(corpus, "fear", n_boot=20, seed=0)
        assert all(p.point == 0.0 for p in traj.series if p.point is not None)

    def test_neutral_label_rejected(self):
        corpus = Corpus(films={"f": _film()}, utterances=[_utt(0.0, 1.0)])
        with pytest.raises(ValueError):
            emotion_proportion_trajectory(corpus, "neutral", n_boot=10, seed=0)

    def test_pure_neutral_excluded_in_prob_mode(self):
        films = {"f": _film(runtime=100.0)}
        pure = _utt(0.0, 1.0, probs=[0, 0, 0, 0, 1.0, 0, 0], uid="a")
        mixed = _utt(2.0, 3.0, probs=[0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0], uid="b")
        corpus = Corpus(films=films, utterances=[pure, mixed])
        traj = emotion_proportion_trajectory(corpus, "joy", n_boot=10, seed=0)
        assert traj.series[0].n_utts == 1  # only the mixed utterance counts
        assert traj.series[0].point == pytest.approx(1.0)

    def test_shares_sum_to_one_across_labels(self):
        spec = SynthSpec(n_films=4, utterances_per_film=80, seed=6)
        corpus = synth_corpus(spec)
        labels = ["anger", "disgust", "fear", "joy", "sadness", "surprise"]
        trajs = {
            lbl: emotion_proportion_trajectory(corpus, lbl, n_boot=10, seed=0) for lbl in labels
        }
        for b in range(20):
            pts = [trajs[lbl].series[b].point for lbl in labels]
            if all(p is not None for p in pts):
                assert sum(pts) == pytest.approx(1.0, abs=1e-9)

    def test_argmax_mode_share(self):
        films = {"f": _film(runtime=100.0)}
        utts = [
            _utt(0.0, 1.0, probs=[0.6, 0.0, 0.0, 0.1, 0.3, 0.0, 0.0], uid="a"),  # anger argmax
            _utt(2.0, 3.0, probs=[0.1, 0.0, 0.0, 0.6, 0.3, 0.0, 0.0], uid="b"),  # joy argmax
            _utt(4.0, 5.0, probs=[0.0, 0.0, 0.0, 0.1, 0.9, 0.0, 0.0], uid="c"),  # neutral argmax
        ]
        corpus = Corpus(films=films, utterances=utts)
        traj = emotion_proportion_trajectory(corpus, "anger", mode="argmax", n_boot=10, seed=0)
        assert traj.series[0].point == pytest.approx(0.5)
        assert traj.series[0].n_utts == 2
