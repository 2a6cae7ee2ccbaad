/**
 * Shared types for the extraction and training frontend.
 *
 * The output contract is the screenlab corpus interchange format:
 * utterances.jsonl / films.jsonl plus float32 layer-embedding sidecars,
 * byte-validatable by `screenlab ingest`.
 */

export const EMOTION_LABELS = [
  'anger',
  'disgust',
  'fear',
  'joy',
  'neutral',
  'sadness',
  'surprise',
] as const;

export type EmotionLabel = (typeof EMOTION_LABELS)[number];

export const N_LABELS = EMOTION_LABELS.length;
export const LAYER_ROWS = 25;
export const LAYER_COLS = 768;

/** Conversation grouping threshold: next utterance starts within 3 s. */
export const CONVERSATION_GAP_S = 3.0;

export interface SpeechSegment {
  startS: number;
  endS: number;
}

export interface WordTiming {
  word: string;
  startS: number;
  endS: number;
}

export interface TranscribedSegment extends SpeechSegment {
  text: string;
}

export interface UtteranceDraft {
  filmId: string;
  uttId: string;
  startS: number;
  endS: number;
  text: string;
  /** row-major 25 x 768, averaged across frames of the utterance */
  layerEmbeddings: Float32Array;
  sentEmbedding: Float32Array;
}

export interface UtteranceJson {
  film_id: string;
  utt_id: string;
  start_s: number;
  end_s: number;
  text: string;
  emotion_probs: number[];
  sent_embedding?: number[];
  layer_embeddings_path?: string;
  conversation_id?: string;
}

export interface FilmJson {
  film_id: string;
  title: string;
  year: number;
  runtime_s: number;
  credits_start_s?: number;
  genres: string[];
}

export interface MediaItem {
  filmId: string;
  title: string;
  year: number;
  mediaPath: string;
  runtimeS: number;
  creditsStartS?: number;
  genres: string[];
}

export interface ExtractionJob {
  media: MediaItem[];
  outDir: string;
  /** identifiers recorded in the run log; resolution happens in adapters */
  models: {
    segmenter: string;
    transcriber: string;
    aligner: string;
    speechEncoder: string;
    sentenceEncoder: string;
  };
  device?: string;
}

export interface ExtractionStats {
  filmsProcessed: number;
  filmsFailed: string[];
  utterances: number;
}
