/**
 * Rule-based sentence segmentation of transcripts with word timings.
 *
 * Speech segments from voice-activity detection can span several
 * sentences; utterances are the discursive unit, so segments split at
 * sentence boundaries derived from the transcription. Boundaries are
 * terminal punctuation (. ! ?) optionally followed by closing quotes,
 * with guards for common abbreviations and decimal points.
 */

import type { WordTiming } from './types.js';

const TERMINAL = /[.!?]+["')\]]*$/;
const ABBREVIATIONS = new Set([
  'mr.', 'mrs.', 'ms.', 'dr.', 'st.', 'jr.', 'sr.', 'prof.', 'vs.', 'etc.',
]);

export interface SentenceSpan {
  text: string;
  startS: number;
  endS: number;
}

function endsSentence(word: string, next?: string): boolean {
  if (!TERMINAL.test(word)) return false;
  const lower = word.toLowerCase();
  if (ABBREVIATIONS.has(lower)) return false;
  // a single trailing period after a digit is usually a decimal or index
  if (/^\d+\.$/.test(word) && next !== undefined && /^\d/.test(next)) return false;
  return true;
}

/** Split aligned words into sentence spans with tight word-level timing. */
export function splitSentences(words: WordTiming[]): SentenceSpan[] {
  const spans: SentenceSpan[] = [];
  let buf: WordTiming[] = [];
  for (let i = 0; i < words.length; i++) {
    buf.push(words[i]);
    if (endsSentence(words[i].word, words[i + 1]?.word)) {
      spans.push(spanOf(buf));
      buf = [];
    }
  }
  if (buf.length) spans.push(spanOf(buf));
  return spans;
}

function spanOf(words: WordTiming[]): SentenceSpan {
  return {
    text: words.map((w) => w.word).join(' '),
    startS: words[0].startS,
    endS: words[words.length - 1].endS,
  };
}
