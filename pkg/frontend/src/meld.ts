/**
 * MELD dataset loading: CSV splits plus precomputed per-utterance encoder
 * features.
 *
 * The audio -> 25x768 features step needs the pretrained speech encoder;
 * this module consumes a directory of float32 sidecars named
 * dia<D>_utt<U>.f32 produced by that encoder, so training runs wherever
 * the checkpoints were available to precompute them. Everything else
 * (label mapping, timing parse, the 3 s conversation rule) is here.
 */

import { existsSync, readFileSync } from 'node:fs';
import { join } from 'node:path';

import { groupConversations } from './conversations.js';
import { EMOTION_LABELS, LAYER_COLS, LAYER_ROWS, type EmotionLabel } from './types.js';

export interface MeldUtterance {
  dialogueId: number;
  utteranceId: number;
  text: string;
  emotion: EmotionLabel;
  startS: number;
  endS: number;
}

/** minimal RFC-4180 CSV reader (quoted fields, doubled-quote escapes) */
export function parseCsv(content: string): string[][] {
  const rows: string[][] = [];
  let field = '';
  let row: string[] = [];
  let inQuotes = false;
  for (let i = 0; i < content.length; i++) {
    const ch = content[i];
    if (inQuotes) {
      if (ch === '"') {
        if (content[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      inQuotes = true;
    } else if (ch === ',') {
      row.push(field);
      field = '';
    } else if (ch === '\n' || ch === '\r') {
      if (ch === '\r' && content[i + 1] === '\n') i++;
      row.push(field);
      field = '';
      if (row.length > 1 || row[0] !== '') rows.push(row);
      row = [];
    } else {
      field += ch;
    }
  }
  if (field !== '' || row.length) {
    row.push(field);
    rows.push(row);
  }
  return rows;
}

/** "0:00:03,839" -> seconds */
export function parseMeldTime(value: string): number {
  const m = value.trim().match(/^(\d+):(\d\d):(\d\d)[,.](\d+)$/);
  if (!m) throw new Error(`unparseable MELD timestamp: ${value!}`);
  return (
    Number(m[1]) * 3600 + Number(m[2]) * 60 + Number(m[3]) + Number(m[4].padEnd(3, '0')) / 1000
  );
}

const MELD_EMOTIONS = new Set<string>(EMOTION_LABELS);

export function loadMeldSplit(csvPath: string): MeldUtterance[] {
  const rows = parseCsv(readFileSync(csvPath, 'utf-8'));
  const header = rows[0];
  const col = (name: string) => {
    const idx = header.indexOf(name);
    if (idx < 0) throw new Error(`MELD CSV missing column ${name}`);
    return idx;
  };
  const cText = col('Utterance');
  const cEmotion = col('Emotion');
  const cDia = col('Dialogue_ID');
  const cUtt = col('Utterance_ID');
  const cStart = col('StartTime');
  const cEnd = col('EndTime');
  const out: MeldUtterance[] = [];
  for (const row of rows.slice(1)) {
    const emotion = row[cEmotion].trim().toLowerCase();
    if (!MELD_EMOTIONS.has(emotion)) throw new Error(`unknown MELD emotion: ${emotion}`);
    out.push({
      dialogueId: Number(row[cDia]),
      utteranceId: Number(row[cUtt]),
      text: row[cText],
      emotion: emotion as EmotionLabel,
      startS: parseMeldTime(row[cStart]),
      endS: parseMeldTime(row[cEnd]),
    });
  }
  return out;
}

export interface MeldConversation {
  utterances: MeldUtterance[];
}

/**
 * Conversations under the 3 s rule, applied inside each MELD dialogue.
 * On the MELD training split this yields 1,478 conversations.
 */
export function buildMeldConversations(utterances: MeldUtterance[], gapS = 3.0): MeldConversation[] {
  const byDialogue = new Map<number, MeldUtterance[]>();
  for (const u of utterances) {
    const arr = byDialogue.get(u.dialogueId) ?? [];
    arr.push(u);
    byDialogue.set(u.dialogueId, arr);
  }
  const conversations: MeldConversation[] = [];
  for (const dia of [...byDialogue.keys()].sort((a, b) => a - b)) {
    const items = byDialogue
      .get(dia)!
      .map((u) => ({ ...u, startS: u.startS, endS: u.endS }));
    for (const group of groupConversations(items, gapS)) {
      conversations.push({ utterances: group });
    }
  }
  return conversations;
}

export function featurePath(featuresDir: string, u: MeldUtterance): string {
  return join(featuresDir, `dia${u.dialogueId}_utt${u.utteranceId}.f32`);
}

export function loadFeature(featuresDir: string, u: MeldUtterance): Float64Array {
  const path = featurePath(featuresDir, u);
  if (!existsSync(path)) throw new Error(`missing feature sidecar ${path}`);
  const buf = readFileSync(path);
  const expected = LAYER_ROWS * LAYER_COLS * 4;
  if (buf.length !== expected) {
    throw new Error(`${path}: ${buf.length} bytes, expected ${expected}`);
  }
  const f32 = new Float32Array(buf.buffer, buf.byteOffset, LAYER_ROWS * LAYER_COLS);
  return Float64Array.from(f32);
}

export function labelIndex(label: EmotionLabel): number {
  return EMOTION_LABELS.indexOf(label);
}
