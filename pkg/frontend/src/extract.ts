/**
 * The extraction pipeline: media -> speech segments -> transcripts ->
 * word-level alignment -> sentence splits -> per-utterance records with
 * layer and sentence embeddings, serialized in the screenlab corpus
 * format (JSONL + float32 sidecars).
 *
 * Per-film failures are logged and the job continues; the emitted corpus
 * always passes `screenlab ingest` validation.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import type { ModelAdapters } from './adapters.js';
import { writeJsonl } from './jsonl.js';
import { splitSentences } from './sentences.js';
import {
  type ExtractionJob,
  type ExtractionStats,
  type FilmJson,
  LAYER_COLS,
  LAYER_ROWS,
  type MediaItem,
  N_LABELS,
  type UtteranceDraft,
  type UtteranceJson,
} from './types.js';
import { UtteranceHead } from './head.js';

const UNIFORM = Array.from({ length: N_LABELS }, () => 1 / N_LABELS);

export async function extractFilm(
  media: MediaItem,
  adapters: ModelAdapters,
): Promise<UtteranceDraft[]> {
  const segments = await adapters.segmenter.segment(media.mediaPath);
  const drafts: UtteranceDraft[] = [];
  let index = 0;
  for (const segment of segments) {
    const text = await adapters.transcriber.transcribe(media.mediaPath, segment);
    if (!text.trim()) continue;
    const words = await adapters.aligner.align(media.mediaPath, segment, text);
    if (!words.length) continue;
    for (const span of splitSentences(words)) {
      if (!(span.endS > span.startS)) continue;
      const layer = await adapters.speechEncoder.encodeUtterance(
        media.mediaPath,
        span.startS,
        span.endS,
      );
      if (layer.length !== LAYER_ROWS * LAYER_COLS) {
        throw new Error(
          `speech encoder returned ${layer.length} values, expected ${LAYER_ROWS}x${LAYER_COLS}`,
        );
      }
      drafts.push({
        filmId: media.filmId,
        uttId: `u${String(index).padStart(5, '0')}`,
        startS: span.startS,
        endS: Math.min(span.endS, media.runtimeS),
        text: span.text,
        layerEmbeddings: layer,
        sentEmbedding: await adapters.sentenceEncoder.encode(span.text),
      });
      index += 1;
    }
  }
  return drafts;
}

export interface ExtractOptions {
  /** optional utterance head; fills emotion_probs (else uniform placeholder) */
  head?: UtteranceHead;
  log?: (msg: string) => void;
}

export async function runExtraction(
  job: ExtractionJob,
  adapters: ModelAdapters,
  options: ExtractOptions = {},
): Promise<ExtractionStats> {
  const log = options.log ?? (() => undefined);
  mkdirSync(job.outDir, { recursive: true });
  const sideDir = join(job.outDir, 'layer_embeddings');
  mkdirSync(sideDir, { recursive: true });

  const films: FilmJson[] = [];
  const utterances: UtteranceJson[] = [];
  const failed: string[] = [];

  for (const media of job.media) {
    let drafts: UtteranceDraft[];
    try {
      drafts = await extractFilm(media, adapters);
    } catch (err) {
      failed.push(media.filmId);
      log(`extraction failed for ${media.filmId}: ${(err as Error).message}`);
      continue;
    }
    films.push({
      film_id: media.filmId,
      title: media.title,
      year: media.year,
      runtime_s: media.runtimeS,
      ...(media.creditsStartS !== undefined ? { credits_start_s: media.creditsStartS } : {}),
      genres: media.genres,
    });
    for (const d of drafts) {
      const rel = join('layer_embeddings', `${d.filmId}__${d.uttId}.f32`);
      writeFileSync(join(job.outDir, rel), Buffer.from(d.layerEmbeddings.buffer.slice(0)));
      let probs = UNIFORM;
      if (options.head) {
        const p = options.head.predict(Float64Array.from(d.layerEmbeddings));
        probs = Array.from(p);
      }
      utterances.push({
        film_id: d.filmId,
        utt_id: d.uttId,
        start_s: d.startS,
        end_s: d.endS,
        text: d.text,
        emotion_probs: probs,
        sent_embedding: Array.from(d.sentEmbedding),
        layer_embeddings_path: rel,
      });
    }
    log(`${media.filmId}: ${drafts.length} utterances`);
  }

  utterances.sort((a, b) =>
    a.film_id < b.film_id ? -1 : a.film_id > b.film_id ? 1 : a.start_s - b.start_s,
  );
  await writeJsonl(join(job.outDir, 'utterances.jsonl'), utterances);
  await writeJsonl(join(job.outDir, 'films.jsonl'), films);
  return { filmsProcessed: films.length, filmsFailed: failed, utterances: utterances.length };
}
