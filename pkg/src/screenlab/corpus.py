"""Interchange data model: JSONL corpora of films and spoken utterances.

A corpus is two JSONL files (`utterances.jsonl`, `films.jsonl`) plus
optional binary embedding sidecars. Parsing validates every record,
renormalizes emotion vectors within a small drift band, and rejects
offending lines with line-numbered diagnostics. Parsed corpora are
treated as immutable; derivation steps return new Corpus objects.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

EMOTION_LABELS = ("anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise")
N_LABELS = len(EMOTION_LABELS)
NEUTRAL_INDEX = EMOTION_LABELS.index("neutral")

LAYER_ROWS = 25
LAYER_COLS = 768
LAYER_BYTES = LAYER_ROWS * LAYER_COLS * 4

# |sum(probs) - 1| tolerated before renormalization; absorbs float
# serialization drift without masking real errors
RENORM_BAND = 1e-3

DEFAULT_CONVERSATION_GAP_S = 3.0


class CorpusError(Exception):
    """Base error for corpus ingestion; carries line-numbered diagnostics."""

    def __init__(self, issues: Sequence[str]):
        self.issues = list(issues)
        super().__init__("\n".join(self.issues))


class CorpusParseError(CorpusError):
    pass


class ReferentialError(CorpusError):
    pass


class CorpusValidationError(CorpusError):
    pass


@dataclass(frozen=True)
class EmotionDistribution:
    """Point on the 7-simplex over the canonical emotion labels."""

    probs: tuple[float, ...]

    @classmethod
    def from_raw(cls, values: Sequence[float]) -> "EmotionDistribution":
        if len(values) != N_LABELS:
            raise ValueError(f"expected {N_LABELS} probabilities, got {len(values)}")
        vals = [float(v) for v in values]
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("probabilities must be finite")
        if any(v < 0.0 for v in vals):
            raise ValueError("probabilities must be non-negative")
        total = sum(vals)
        if abs(total - 1.0) > RENORM_BAND:
            raise ValueError(f"probabilities sum to {total:.6g}, outside 1 +/- {RENORM_BAND}")
        # skip rescaling inside a few ulps of 1 so that normalization is
        # idempotent and serialized corpora round-trip field-for-field
        if abs(total - 1.0) > 1e-12:
            vals = [v / total for v in vals]
        return cls(tuple(vals))

    @property
    def p_neutral(self) -> float:
        return self.probs[NEUTRAL_INDEX]

    def argmax_label(self) -> str:
        # ties resolve to the earliest label in canonical order
        best = 0
        for j in range(1, N_LABELS):
            if self.probs[j] > self.probs[best]:
                best = j
        return EMOTION_LABELS[best]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)


@dataclass(eq=False)
class UtteranceRecord:
    """One spoken sentence with timing, text, and emotion distribution."""

    film_id: str
    utt_id: str
    start_s: float
    end_s: float
    text: str
    emotion: EmotionDistribution
    sent_embedding: Optional[tuple[float, ...]] = None
    layer_embeddings: Optional[np.ndarray] = None
    conversation_id: Optional[str] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, UtteranceRecord):
            return NotImplemented
        if (
            self.film_id != other.film_id
            or self.utt_id != other.utt_id
            or self.start_s != other.start_s
            or self.end_s != other.end_s
            or self.text != other.text
            or self.emotion != other.emotion
            or self.sent_embedding != other.sent_embedding
            or self.conversation_id != other.conversation_id
        ):
            return False
        a, b = self.layer_embeddings, other.layer_embeddings
        if (a is None) != (b is None):
            return False
        return a is None or bool(np.array_equal(a, b))

    @property
    def midpoint_s(self) -> float:
        return 0.5 * (self.start_s + self.end_s)


@dataclass(frozen=True)
class FilmRecord:
    film_id: str
    title: str
    year: int
    runtime_s: float
    credits_start_s: Optional[float] = None
    genres: frozenset[str] = field(default_factory=frozenset)

    @property
    def effective_runtime_s(self) -> float:
        """Credits-trimmed runtime: the narrative clock denominator."""
        return self.credits_start_s if self.credits_start_s is not None else self.runtime_s


@dataclass
class Corpus:
    films: dict[str, FilmRecord]
    utterances: list[UtteranceRecord]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.films == other.films and self.utterances == other.utterances

    def utterances_of_film(self, film_id: str) -> list[UtteranceRecord]:
        return [u for u in self.utterances if u.film_id == film_id]

    def emotion_matrix(self) -> np.ndarray:
        """(n_utterances, 7) float64 matrix in corpus order."""
        if not self.utterances:
            return np.zeros((0, N_LABELS))
        return np.asarray([u.emotion.probs for u in self.utterances], dtype=np.float64)

    def film_of(self, u: UtteranceRecord) -> FilmRecord:
        return self.films[u.film_id]


def _load_jsonl(path: str, errors: list[str]) -> list[tuple[int, dict]]:
    rows: list[tuple[int, dict]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                errors.append(f"{path}:{lineno}: malformed JSON ({e.msg})")
                continue
            if not isinstance(obj, dict):
                errors.append(f"{path}:{lineno}: expected a JSON object")
                continue
            rows.append((lineno, obj))
    return rows


def _req(obj: dict, key: str, where: str, errors: list[str]):
    if key not in obj:
        errors.append(f"{where}: missing required key '{key}'")
        return None
    return obj[key]


def _parse_films(path: str) -> tuple[dict[str, FilmRecord], set[str], list[str], list[str]]:
    parse_errors: list[str] = []
    val_errors: list[str] = []
    films: dict[str, FilmRecord] = {}
    invalid_ids: set[str] = set()
    for lineno, obj in _load_jsonl(path, parse_errors):
        where = f"{path}:{lineno}"
        film_id = _req(obj, "film_id", where, val_errors)
        title = _req(obj, "title", where, val_errors)
        year = _req(obj, "year", where, val_errors)
        runtime_s = _req(obj, "runtime_s", where, val_errors)
        if None in (film_id, title, year, runtime_s):
            if film_id is not None:
                invalid_ids.add(str(film_id))
            continue
        try:
            year = int(year)
            runtime_s = float(runtime_s)
        except (TypeError, ValueError):
            val_errors.append(f"{where}: year/runtime_s have wrong types")
            invalid_ids.add(str(film_id))
            continue
        if runtime_s <= 0:
            val_errors.append(f"{where}: runtime_s must be > 0")
            invalid_ids.add(str(film_id))
            continue
        credits = obj.get("credits_start_s")
        if credits is not None:
            credits = float(credits)
            if not (0.0 < credits <= runtime_s):
                val_errors.append(f"{where}: credits_start_s must be in (0, runtime_s]")
                invalid_ids.add(str(film_id))
                continue
        genres = frozenset(str(g) for g in obj.get("genres", []))
        if film_id in films:
            val_errors.append(f"{where}: duplicate film_id '{film_id}'")
            continue
        films[str(film_id)] = FilmRecord(
            film_id=str(film_id),
            title=str(title),
            year=year,
            runtime_s=runtime_s,
            credits_start_s=credits,
            genres=genres,
        )
    return films, invalid_ids, parse_errors, val_errors


def _parse_utterances(
    path: str, films: dict[str, FilmRecord], invalid_films: set[str]
) -> tuple[list[UtteranceRecord], list[str], list[str], list[str]]:
    parse_errors: list[str] = []
    ref_errors: list[str] = []
    val_errors: list[str] = []
    base_dir = os.path.dirname(os.path.abspath(path))
    records: list[UtteranceRecord] = []
    embed_dim: Optional[int] = None
    for lineno, obj in _load_jsonl(path, parse_errors):
        where = f"{path}:{lineno}"
        film_id = _req(obj, "film_id", where, val_errors)
        utt_id = _req(obj, "utt_id", where, val_errors)
        start_s = _req(obj, "start_s", where, val_errors)
        end_s = _req(obj, "end_s", where, val_errors)
        text = _req(obj, "text", where, val_errors)
        probs = _req(obj, "emotion_probs", where, val_errors)
        if None in (film_id, utt_id, start_s, end_s, text) or probs is None:
            continue
        try:
            start_s = float(start_s)
            end_s = float(end_s)
        except (TypeError, ValueError):
            val_errors.append(f"{where}: start_s/end_s have wrong types")
            continue
        if start_s < 0:
            val_errors.append(f"{where}: start_s must be >= 0")
            continue
        if not end_s > start_s:
            val_errors.append(f"{where}: end_s must be > start_s")
            continue
        try:
            emotion = EmotionDistribution.from_raw(probs)
        except ValueError as e:
            val_errors.append(f"{where}: {e}")
            continue
        film = films.get(str(film_id))
        if film is None:
            # a film that failed validation is already reported; only a
            # truly unknown id is a referential error
            if str(film_id) not in invalid_films:
                ref_errors.append(f"{where}: unknown film_id '{film_id}'")
            continue
        if end_s > film.runtime_s:
            val_errors.append(f"{where}: end_s exceeds film runtime {film.runtime_s:.6g}")
            continue

        sent_embedding = None
        if obj.get("sent_embedding") is not None:
            sent_embedding = tuple(float(v) for v in obj["sent_embedding"])
            if embed_dim is None:
                embed_dim = len(sent_embedding)
            elif len(sent_embedding) != embed_dim:
                val_errors.append(
                    f"{where}: sent_embedding dimension {len(sent_embedding)} != corpus dimension {embed_dim}"
                )
                continue

        layer = None
        if obj.get("layer_embeddings_path") is not None:
            side = os.path.join(base_dir, obj["layer_embeddings_path"])
            if not os.path.exists(side):
                val_errors.append(f"{where}: layer embedding sidecar not found: {side}")
                continue
            size = os.path.getsize(side)
            if size != LAYER_BYTES:
                val_errors.append(
                    f"{where}: sidecar {side} has {size} bytes, expected {LAYER_BYTES} (25x768 float32)"
                )
                continue
            layer = np.fromfile(side, dtype="<f4").reshape(LAYER_ROWS, LAYER_COLS)

        conv = obj.get("conversation_id")
        records.append(
            UtteranceRecord(
                film_id=str(film_id),
                utt_id=str(utt_id),
                start_s=start_s,
                end_s=end_s,
                text=str(text),
                emotion=emotion,
                sent_embedding=sent_embedding,
                layer_embeddings=layer,
                conversation_id=None if conv is None else str(conv),
            )
        )
    return records, parse_errors, ref_errors, val_errors


def parse_corpus(utterances_path: str, films_path: str) -> Corpus:
    """Parse and validate a JSONL corpus.

    Emotion vectors with sums inside the renormalization band are rescaled
    to sum exactly 1. Every invariant violation is reported with its file
    and line number; parse errors take precedence over referential ones,
    which take precedence over validation errors.
    """
    films, invalid_ids, f_parse, f_val = _parse_films(films_path)
    records, u_parse, u_ref, u_val = _parse_utterances(utterances_path, films, invalid_ids)

    parse_errors = f_parse + u_parse
    val_errors = f_val + u_val
    if parse_errors:
        raise CorpusParseError(parse_errors + u_ref + val_errors)
    if u_ref:
        raise ReferentialError(u_ref + val_errors)

    # exact duplicates collapse; conflicting reuse of an utt_id is an error
    seen: dict[tuple[str, str], UtteranceRecord] = {}
    deduped: list[UtteranceRecord] = []
    for rec in records:
        k = (rec.film_id, rec.utt_id)
        if k in seen:
            if rec != seen[k]:
                val_errors.append(
                    f"{utterances_path}: utt_id '{rec.utt_id}' of film '{rec.film_id}' "
                    "appears twice with different content"
                )
            continue
        seen[k] = rec
        deduped.append(rec)

    deduped.sort(key=lambda r: (r.film_id, r.start_s, r.end_s, r.utt_id))
    for a, b in zip(deduped, deduped[1:]):
        if a.film_id == b.film_id and a.start_s == b.start_s:
            val_errors.append(
                f"{utterances_path}: utterances '{a.utt_id}' and '{b.utt_id}' of film "
                f"'{a.film_id}' share start_s={a.start_s:.6g}; ordering must be strict"
            )
    if val_errors:
        raise CorpusValidationError(val_errors)

    films_sorted = {k: films[k] for k in sorted(films)}
    return Corpus(films=films_sorted, utterances=deduped)


def _sidecar_name(utt_id: str) -> str:
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in utt_id)
    return f"{safe}.f32"


def write_corpus(corpus: Corpus, out_dir: str) -> tuple[str, str]:
    """Serialize a corpus into out_dir; returns (utterances_path, films_path).

    Layer embeddings, when present, are written as float32 little-endian
    sidecars under layer_embeddings/ and referenced by relative path.
    """
    os.makedirs(out_dir, exist_ok=True)
    films_path = os.path.join(out_dir, "films.jsonl")
    utt_path = os.path.join(out_dir, "utterances.jsonl")
    with open(films_path, "w", encoding="utf-8") as fh:
        for fid in sorted(corpus.films):
            f = corpus.films[fid]
            obj = {
                "film_id": f.film_id,
                "title": f.title,
                "year": f.year,
                "runtime_s": f.runtime_s,
                "genres": sorted(f.genres),
            }
            if f.credits_start_s is not None:
                obj["credits_start_s"] = f.credits_start_s
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")

    side_dir = os.path.join(out_dir, "layer_embeddings")
    with open(utt_path, "w", encoding="utf-8") as fh:
        for u in corpus.utterances:
            obj = {
                "film_id": u.film_id,
                "utt_id": u.utt_id,
                "start_s": u.start_s,
                "end_s": u.end_s,
                "text": u.text,
                "emotion_probs": list(u.emotion.probs),
            }
            if u.sent_embedding is not None:
                obj["sent_embedding"] = list(u.sent_embedding)
            if u.layer_embeddings is not None:
                os.makedirs(side_dir, exist_ok=True)
                rel = os.path.join("layer_embeddings", _sidecar_name(f"{u.film_id}__{u.utt_id}"))
                u.layer_embeddings.astype("<f4").tofile(os.path.join(out_dir, rel))
                obj["layer_embeddings_path"] = rel
            if u.conversation_id is not None:
                obj["conversation_id"] = u.conversation_id
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return utt_path, films_path


def trim_credits(corpus: Corpus) -> Corpus:
    """Drop utterances starting at or after their film's credits boundary.

    The boundary is inclusive: credit music/voiceover begins exactly there.
    Films without a boundary pass through unchanged. Idempotent.
    """
    kept = []
    for u in corpus.utterances:
        boundary = corpus.films[u.film_id].credits_start_s
        if boundary is not None and u.start_s >= boundary:
            continue
        kept.append(u)
    return Corpus(films=dict(corpus.films), utterances=kept)


def group_conversations(corpus: Corpus, gap_s: float = DEFAULT_CONVERSATION_GAP_S) -> Corpus:
    """Assign conversation ids: consecutive utterances of a film share one
    iff the next starts within gap_s of the previous ending.

    Ids are deterministic: "<film_id>:c<running index>", index starting at 0
    per film.
    """
    out: list[UtteranceRecord] = []
    prev_film: Optional[str] = None
    prev_end = 0.0
    conv_idx = -1
    for u in corpus.utterances:
        if u.film_id != prev_film:
            prev_film = u.film_id
            conv_idx = 0
        elif u.start_s - prev_end > gap_s:
            conv_idx += 1
        out.append(replace(u, conversation_id=f"{u.film_id}:c{conv_idx}"))
        prev_end = u.end_s
    return Corpus(films=dict(corpus.films), utterances=out)


def emotionality(u, mode: str = "prob") -> float:
    """How non-neutral an utterance is, in [0, 1].

    mode="prob": 1 - P(neutral). mode="argmax": 1 unless the argmax label
    (canonical-order tie-break) is neutral.
    """
    dist = u.emotion if isinstance(u, UtteranceRecord) else u
    if mode == "prob":
        return 1.0 - dist.p_neutral
    if mode == "argmax":
        return 0.0 if dist.argmax_label() == "neutral" else 1.0
    raise ValueError(f"unknown emotionality mode: {mode!r}")


def emotionality_values(corpus_or_utts, mode: str = "prob") -> np.ndarray:
    """Vector of emotionality over utterances, in corpus order."""
    utts: Iterable[UtteranceRecord]
    utts = corpus_or_utts.utterances if isinstance(corpus_or_utts, Corpus) else corpus_or_utts
    return np.asarray([emotionality(u, mode) for u in utts], dtype=np.float64)
