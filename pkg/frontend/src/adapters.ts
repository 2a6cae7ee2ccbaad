/**
 * Pluggable model backends behind the extraction pipeline.
 *
 * Production adapters wrap external services or local checkpoints (a VAD
 * segmenter, a transcriber, a forced aligner, a speech encoder exposing
 * per-layer activations, a sentence encoder). The pipeline only sees these
 * interfaces; tests and offline runs plug in the synthetic adapter, which
 * fabricates deterministic audio "content" from the media path.
 */

import { Rng } from './rng.js';
import { LAYER_COLS, LAYER_ROWS, type SpeechSegment, type TranscribedSegment, type WordTiming } from './types.js';

export interface SegmenterAdapter {
  /** continuous single-speaker speech segments of the media file */
  segment(mediaPath: string): Promise<SpeechSegment[]>;
}

export interface TranscriberAdapter {
  transcribe(mediaPath: string, segment: SpeechSegment): Promise<string>;
}

export interface AlignerAdapter {
  /** word-level time alignment of a transcript inside its segment */
  align(mediaPath: string, segment: SpeechSegment, text: string): Promise<WordTiming[]>;
}

export interface SpeechEncoderAdapter {
  /**
   * Per-layer activations averaged across all frames of [startS, endS]:
   * row-major LAYER_ROWS x LAYER_COLS float32.
   */
  encodeUtterance(mediaPath: string, startS: number, endS: number): Promise<Float32Array>;
}

export interface SentenceEncoderAdapter {
  encode(text: string): Promise<Float32Array>;
}

export interface ModelAdapters {
  segmenter: SegmenterAdapter;
  transcriber: TranscriberAdapter;
  aligner: AlignerAdapter;
  speechEncoder: SpeechEncoderAdapter;
  sentenceEncoder: SentenceEncoderAdapter;
}

function hashString(s: string): number {
  let h = 2166136261 >>> 0;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 16777619) >>> 0;
  }
  return h >>> 0;
}

export interface SyntheticScript {
  /** sentences spoken in one speech burst, with silence between bursts */
  bursts: string[][];
}

/**
 * Deterministic offline stand-in for the model stack. The "media file" is
 * interpreted as a script: each burst becomes one VAD segment, words get
 * uniform timings, and embeddings are seeded from the text content.
 */
export class SyntheticAdapters implements ModelAdapters {
  constructor(
    private scripts: Map<string, SyntheticScript>,
    private embedDim = 16,
    private wordsPerSecond = 2.5,
  ) {}

  private script(mediaPath: string): SyntheticScript {
    const s = this.scripts.get(mediaPath);
    if (!s) throw new Error(`no synthetic script for media ${mediaPath}`);
    return s;
  }

  private burstSpans(mediaPath: string): Array<{ startS: number; endS: number; words: string[] }> {
    const spans = [];
    let cursor = 5.0;
    for (const burst of this.script(mediaPath).bursts) {
      const words = burst.flatMap((sentence) => sentence.split(/\s+/).filter(Boolean));
      const dur = Math.max(words.length / this.wordsPerSecond, 0.4);
      spans.push({ startS: cursor, endS: cursor + dur, words });
      cursor += dur + 6.0; // silence between bursts
    }
    return spans;
  }

  segmenter: SegmenterAdapter = {
    segment: async (mediaPath) =>
      this.burstSpans(mediaPath).map(({ startS, endS }) => ({ startS, endS })),
  };

  transcriber: TranscriberAdapter = {
    transcribe: async (mediaPath, segment) => {
      const span = this.burstSpans(mediaPath).find(
        (s) => Math.abs(s.startS - segment.startS) < 1e-9,
      );
      return span ? span.words.join(' ') : '';
    },
  };

  aligner: AlignerAdapter = {
    align: async (_mediaPath, segment, text) => {
      const words = text.split(/\s+/).filter(Boolean);
      if (!words.length) return [];
      const step = (segment.endS - segment.startS) / words.length;
      return words.map((word, i) => ({
        word,
        startS: segment.startS + i * step,
        endS: segment.startS + (i + 1) * step,
      }));
    },
  };

  speechEncoder: SpeechEncoderAdapter = {
    encodeUtterance: async (mediaPath, startS, endS) => {
      const rng = new Rng(hashString(`${mediaPath}|${startS.toFixed(3)}|${endS.toFixed(3)}`));
      const out = new Float32Array(LAYER_ROWS * LAYER_COLS);
      for (let i = 0; i < out.length; i++) out[i] = rng.normal() * 0.5;
      return out;
    },
  };

  sentenceEncoder: SentenceEncoderAdapter = {
    encode: async (text) => {
      const rng = new Rng(hashString(text));
      const out = new Float32Array(this.embedDim);
      let norm = 0;
      for (let i = 0; i < out.length; i++) {
        out[i] = rng.normal();
        norm += out[i] * out[i];
      }
      norm = Math.sqrt(norm) || 1;
      for (let i = 0; i < out.length; i++) out[i] /= norm;
      return out;
    },
  };
}
