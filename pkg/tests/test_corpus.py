import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from screenlab.corpus import (
    Corpus,
    CorpusParseError,
    CorpusValidationError,
    EMOTION_LABELS,
    EmotionDistribution,
    ReferentialError,
    emotionality,
    group_conversations,
    parse_corpus,
    trim_credits,
    write_corpus,
)


class TestEmotionDistribution:
    def test_renormalizes_small_drift(self):
        probs = [0.0999999, 0.1, 0.1, 0.1, 0.5, 0.05, 0.0499996]
        assert sum(probs) == pytest.approx(0.9999995)
        d = EmotionDistribution.from_raw(probs)
        assert sum(d.probs) == pytest.approx(1.0, abs=1e-9)

    def test_rejects_sum_outside_band(self):
        with pytest.raises(ValueError, match="outside"):
            EmotionDistribution.from_raw([0.9 / 7] * 7)

    def test_rejects_negative_and_wrong_arity(self):
        with pytest.raises(ValueError):
            EmotionDistribution.from_raw([-0.1, 0.2, 0.2, 0.2, 0.2, 0.2, 0.1])
        with pytest.raises(ValueError):
            EmotionDistribution.from_raw([0.5, 0.5])

    def test_argmax_tie_breaks_canonically(self):
        d = EmotionDistribution.from_raw([1 / 7] * 7)
        assert d.argmax_label() == "anger"
        d2 = EmotionDistribution.from_raw([0.0, 0.3, 0.3, 0.1, 0.1, 0.1, 0.1])
        assert d2.argmax_label() == "disgust"


class TestEmotionality:
    def test_pure_neutral_is_zero_both_modes(self):
        d = EmotionDistribution.from_raw([0, 0, 0, 0, 1.0, 0, 0])
        assert emotionality(d, "prob") == 0.0
        assert emotionality(d, "argmax") == 0.0

    def test_uniform_distribution(self):
        d = EmotionDistribution.from_raw([1 / 7] * 7)
        assert emotionality(d, "prob") == pytest.approx(6 / 7)
        # the all-way tie resolves to anger, which is non-neutral
        assert emotionality(d, "argmax") == 1.0

    def test_simple_mixture(self):
        d = EmotionDistribution.from_raw([0, 0, 0, 0.6, 0.4, 0, 0])
        assert emotionality(d, "prob") == pytest.approx(0.6)
        assert emotionality(d, "argmax") == 1.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=7, max_size=7))
    def test_prob_mode_complements_neutral(self, raw):
        total = sum(raw)
        d = EmotionDistribution.from_raw([v / total for v in raw])
        assert emotionality(d, "prob") + d.p_neutral == pytest.approx(1.0, abs=0)


class TestGoldenParse:
    def test_counts_and_order(self, golden_corpus):
        assert len(golden_corpus.films) == 2
        assert len(golden_corpus.utterances) == 10
        keys = [(u.film_id, u.start_s) for u in golden_corpus.utterances]
        assert keys == sorted(keys)
        # hand-derived order: f02's u03 (50 s) sorts before u02 (100 s)
        f02 = [u.utt_id for u in golden_corpus.utterances if u.film_id == "f02"]
        assert f02 == ["u01", "u03", "u02", "u04"]

    def test_genres_and_credits(self, golden_corpus):
        assert golden_corpus.films["f01"].credits_start_s == 5000.0
        assert golden_corpus.films["f02"].credits_start_s is None
        assert golden_corpus.films["f02"].genres == frozenset({"comedy", "drama"})

    def test_round_trip(self, golden_corpus, tmp_path):
        up, fp = write_corpus(golden_corpus, str(tmp_path))
        again = parse_corpus(up, fp)
        assert again == golden_corpus
        # and conversation ids survive a round trip once assigned
        conv = group_conversations(golden_corpus)
        up2, fp2 = write_corpus(conv, str(tmp_path / "conv"))
        assert parse_corpus(up2, fp2) == conv


class TestParseErrors:
    def _write(self, tmp_path, utt_lines, film_lines=None):
        films = film_lines or [
            '{"film_id": "f01", "title": "T", "year": 2000, "runtime_s": 1000.0}'
        ]
        fpath = tmp_path / "films.jsonl"
        upath = tmp_path / "utterances.jsonl"
        fpath.write_text("\n".join(films) + "\n")
        upath.write_text("\n".join(utt_lines) + "\n")
        return str(upath), str(fpath)

    def _utt(self, **kw):
        base = {
            "film_id": "f01",
            "utt_id": "u1",
            "start_s": 1.0,
            "end_s": 2.0,
            "text": "x",
            "emotion_probs": [1 / 7] * 7,
        }
        base.update(kw)
        return json.dumps(base)

    def test_malformed_json_names_line(self, tmp_path):
        up, fp = self._write(tmp_path, [self._utt(), "{not json"])
        with pytest.raises(CorpusParseError, match=r":2"):
            parse_corpus(up, fp)

    def test_unknown_film_is_referential(self, tmp_path):
        up, fp = self._write(tmp_path, [self._utt(film_id="nope")])
        with pytest.raises(ReferentialError, match="nope"):
            parse_corpus(up, fp)

    def test_bad_probability_sum_names_line(self, tmp_path):
        up, fp = self._write(
            tmp_path, [self._utt(), self._utt(utt_id="u2", start_s=5.0, end_s=6.0, emotion_probs=[0.9 / 7] * 7)]
        )
        with pytest.raises(CorpusValidationError, match=r":2"):
            parse_corpus(up, fp)

    def test_end_before_start_rejected(self, tmp_path):
        up, fp = self._write(tmp_path, [self._utt(start_s=5.0, end_s=5.0)])
        with pytest.raises(CorpusValidationError, match="end_s"):
            parse_corpus(up, fp)

    def test_utterance_beyond_runtime_rejected(self, tmp_path):
        up, fp = self._write(tmp_path, [self._utt(start_s=990.0, end_s=1001.0)])
        with pytest.raises(CorpusValidationError, match="runtime"):
            parse_corpus(up, fp)

    def test_exact_duplicate_collapses(self, tmp_path):
        up, fp = self._write(tmp_path, [self._utt(), self._utt()])
        corpus = parse_corpus(up, fp)
        assert len(corpus.utterances) == 1

    def test_conflicting_duplicate_rejected(self, tmp_path):
        up, fp = self._write(tmp_path, [self._utt(), self._utt(text="different")])
        with pytest.raises(CorpusValidationError, match="appears twice"):
            parse_corpus(up, fp)

    def test_equal_start_times_rejected(self, tmp_path):
        up, fp = self._write(
            tmp_path, [self._utt(), self._utt(utt_id="u2", start_s=1.0, end_s=3.0)]
        )
        with pytest.raises(CorpusValidationError, match="strict"):
            parse_corpus(up, fp)

    def test_bad_credits_boundary_rejected(self, tmp_path):
        up, fp = self._write(
            tmp_path,
            [self._utt()],
            ['{"film_id": "f01", "title": "T", "year": 2000, "runtime_s": 1000.0, "credits_start_s": 1500.0}'],
        )
        with pytest.raises(CorpusValidationError, match="credits"):
            parse_corpus(up, fp)

    def test_sidecar_size_validated(self, tmp_path):
        bad = tmp_path / "side.f32"
        bad.write_bytes(b"\x00" * 100)
        up, fp = self._write(tmp_path, [self._utt(layer_embeddings_path="side.f32")])
        with pytest.raises(CorpusValidationError, match="bytes"):
            parse_corpus(up, fp)

    def test_sidecar_loads(self, tmp_path):
        arr = np.arange(25 * 768, dtype="<f4").reshape(25, 768)
        (tmp_path / "ok.f32").write_bytes(arr.tobytes())
        up, fp = self._write(tmp_path, [self._utt(layer_embeddings_path="ok.f32")])
        corpus = parse_corpus(up, fp)
        assert corpus.utterances[0].layer_embeddings.shape == (25, 768)
        assert float(corpus.utterances[0].layer_embeddings[24, 767]) == float(arr[24, 767])


class TestTrimCredits:
    def test_golden_trim_drops_boundary_utterance(self, golden_corpus):
        trimmed = trim_credits(golden_corpus)
        ids = {(u.film_id, u.utt_id) for u in trimmed.utterances}
        assert ("f01", "u06") not in ids  # starts exactly at the boundary
        assert len(trimmed.utterances) == 9

    def test_no_boundary_passes_through(self, golden_corpus):
        trimmed = trim_credits(golden_corpus)
        f02 = [u for u in trimmed.utterances if u.film_id == "f02"]
        assert len(f02) == 4

    def test_enumerated_boundary(self, tmp_path):
        films = ['{"film_id": "f", "title": "T", "year": 2000, "runtime_s": 200.0, "credits_start_s": 100.0}']
        utts = []
        for i, s in enumerate((50.0, 99.9, 150.0)):
            utts.append(
                json.dumps(
                    {
                        "film_id": "f",
                        "utt_id": f"u{i}",
                        "start_s": s,
                        "end_s": s + 1.0,
                        "text": "x",
                        "emotion_probs": [1 / 7] * 7,
                    }
                )
            )
        (tmp_path / "films.jsonl").write_text("\n".join(films) + "\n")
        (tmp_path / "utterances.jsonl").write_text("\n".join(utts) + "\n")
        corpus = parse_corpus(str(tmp_path / "utterances.jsonl"), str(tmp_path / "films.jsonl"))
        assert len(trim_credits(corpus).utterances) == 2

    def test_idempotent(self, golden_corpus):
        once = trim_credits(golden_corpus)
        assert trim_credits(once) == once


class TestConversations:
    def test_golden_grouping(self, golden_corpus):
        conv = group_conversations(golden_corpus)
        by_id = {(u.film_id, u.utt_id): u.conversation_id for u in conv.utterances}
        # hand-derived: gaps 2.0 and 2.9 chain u01-u03; 3.01 breaks before u04
        assert by_id[("f01", "u01")] == by_id[("f01", "u02")] == by_id[("f01", "u03")] == "f01:c0"
        assert by_id[("f01", "u04")] == "f01:c1"
        assert by_id[("f01", "u05")] == "f01:c2"
        assert by_id[("f01", "u06")] == "f01:c3"
        assert by_id[("f02", "u01")] == "f02:c0"
        assert by_id[("f02", "u03")] == "f02:c1"

    def test_partition_property(self, golden_corpus):
        conv = group_conversations(golden_corpus)
        assert all(u.conversation_id is not None for u in conv.utterances)
        for u in conv.utterances:
            assert u.conversation_id.startswith(u.film_id + ":")

    def test_empty_corpus(self):
        empty = Corpus(films={}, utterances=[])
        assert group_conversations(empty).utterances == []

    def test_gap_exactly_three_shares(self, tmp_path):
        films = ['{"film_id": "f", "title": "T", "year": 2000, "runtime_s": 100.0}']
        utts = [
            json.dumps(
                {
                    "film_id": "f",
                    "utt_id": f"u{i}",
                    "start_s": s,
                    "end_s": e,
                    "text": "x",
                    "emotion_probs": [1 / 7] * 7,
                }
            )
            for i, (s, e) in enumerate([(0.0, 2.0), (5.0, 6.0)])
        ]
        (tmp_path / "films.jsonl").write_text("\n".join(films) + "\n")
        (tmp_path / "utterances.jsonl").write_text("\n".join(utts) + "\n")
        corpus = parse_corpus(str(tmp_path / "utterances.jsonl"), str(tmp_path / "films.jsonl"))
        conv = group_conversations(corpus, gap_s=3.0)
        ids = [u.conversation_id for u in conv.utterances]
        assert ids[0] == ids[1]  # start 5.0 - end 2.0 == 3.0 <= gap
