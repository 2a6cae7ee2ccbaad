import { execFileSync } from 'node:child_process';
import { mkdtempSync, readFileSync, statSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { SyntheticAdapters, type SyntheticScript } from '../src/adapters.js';
import { extractFilm, runExtraction } from '../src/extract.js';
import { readJsonl } from '../src/jsonl.js';
import { splitSentences } from '../src/sentences.js';
import { LAYER_COLS, LAYER_ROWS, type MediaItem, type UtteranceJson } from '../src/types.js';

function mediaItem(filmId: string, mediaPath: string): MediaItem {
  return {
    filmId,
    title: `Film ${filmId}`,
    year: 2001,
    mediaPath,
    runtimeS: 3600,
    creditsStartS: 3500,
    genres: ['drama'],
  };
}

function adaptersFor(scripts: Record<string, SyntheticScript>): SyntheticAdapters {
  return new SyntheticAdapters(new Map(Object.entries(scripts)));
}

describe('splitSentences', () => {
  it('splits on terminal punctuation', () => {
    const words = ['Hello', 'there.', 'How', 'are', 'you?'].map((word, i) => ({
      word,
      startS: i,
      endS: i + 0.8,
    }));
    const spans = splitSentences(words);
    expect(spans.map((s) => s.text)).toEqual(['Hello there.', 'How are you?']);
    expect(spans[0].endS).toBeLessThanOrEqual(spans[1].startS);
  });

  it('does not split on abbreviations', () => {
    const words = ['Dr.', 'Smith', 'arrived.'].map((word, i) => ({ word, startS: i, endS: i + 0.5 }));
    expect(splitSentences(words)).toHaveLength(1);
  });
});

describe('extractFilm', () => {
  it('one spoken sentence in a clip gives one contained record', async () => {
    const adapters = adaptersFor({ 'a.mp4': { bursts: [['this is the only line.']] } });
    const drafts = await extractFilm(mediaItem('f1', 'a.mp4'), adapters);
    expect(drafts).toHaveLength(1);
    expect(drafts[0].endS - drafts[0].startS).toBeGreaterThan(0);
    expect(drafts[0].endS - drafts[0].startS).toBeLessThanOrEqual(10);
    expect(drafts[0].layerEmbeddings).toHaveLength(LAYER_ROWS * LAYER_COLS);
  });

  it('two sentences in one speech burst become two records in time order', async () => {
    const adapters = adaptersFor({
      'b.mp4': { bursts: [['first sentence here.', 'second one follows!']] },
    });
    const drafts = await extractFilm(mediaItem('f1', 'b.mp4'), adapters);
    expect(drafts).toHaveLength(2);
    expect(drafts[0].startS).toBeLessThan(drafts[1].startS);
    expect(drafts[0].text).toMatch(/first/);
    expect(drafts[1].text).toMatch(/second/);
  });

  it('a silent clip yields zero records', async () => {
    const adapters = adaptersFor({ 'c.mp4': { bursts: [] } });
    const drafts = await extractFilm(mediaItem('f1', 'c.mp4'), adapters);
    expect(drafts).toHaveLength(0);
  });
});

describe('runExtraction', () => {
  it('emits a corpus that passes core ingestion untouched', async () => {
    const outDir = mkdtempSync(join(tmpdir(), 'slx-'));
    const scripts: Record<string, SyntheticScript> = {
      'one.mp4': {
        bursts: [
          ['are you coming with us?', 'we leave at dawn.'],
          ['i had a feeling about this.'],
        ],
      },
      'two.mp4': { bursts: [['nobody move.'], ['it is over now.', 'go home.']] },
    };
    const media = [mediaItem('f001', 'one.mp4'), mediaItem('f002', 'two.mp4')];
    const stats = await runExtraction(
      { media, outDir, models: dummyModels(), device: 'cpu' },
      adaptersFor(scripts),
    );
    expect(stats.filmsProcessed).toBe(2);
    expect(stats.utterances).toBe(6);
    expect(stats.filmsFailed).toEqual([]);

    const rows = readJsonl<UtteranceJson>(join(outDir, 'utterances.jsonl'));
    expect(rows).toHaveLength(6);
    for (const row of rows) {
      const probsSum = row.emotion_probs.reduce((a, b) => a + b, 0);
      expect(probsSum).toBeCloseTo(1, 9);
      const side = statSync(join(outDir, row.layer_embeddings_path!));
      expect(side.size).toBe(LAYER_ROWS * LAYER_COLS * 4);
    }

    // the decisive check: core `screenlab ingest` accepts the output
    const ingestOut = join(outDir, 'canon');
    const stdout = execFileSync(
      'python3',
      [
        '-m', 'screenlab.cli', 'ingest',
        '--utterances', join(outDir, 'utterances.jsonl'),
        '--films', join(outDir, 'films.jsonl'),
        '--out', ingestOut,
      ],
      { encoding: 'utf-8' },
    );
    expect(stdout).toMatch(/ingested 6 utterances across 2 films/);
  });

  it('continues past per-film failures', async () => {
    const outDir = mkdtempSync(join(tmpdir(), 'slx-'));
    const adapters = adaptersFor({ 'ok.mp4': { bursts: [['fine.']] } }); // no script for bad.mp4
    const media = [mediaItem('good', 'ok.mp4'), mediaItem('bad', 'bad.mp4')];
    const logs: string[] = [];
    const stats = await runExtraction(
      { media, outDir, models: dummyModels(), device: 'cpu' },
      adapters,
      { log: (m) => logs.push(m) },
    );
    expect(stats.filmsProcessed).toBe(1);
    expect(stats.filmsFailed).toEqual(['bad']);
    expect(logs.some((l) => l.includes('bad'))).toBe(true);
  });
});

function dummyModels() {
  return {
    segmenter: 'synthetic-vad',
    transcriber: 'synthetic-asr',
    aligner: 'synthetic-aligner',
    speechEncoder: 'synthetic-speech-encoder',
    sentenceEncoder: 'synthetic-sentence-encoder',
  };
}
