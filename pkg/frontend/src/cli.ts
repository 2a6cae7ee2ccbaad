#!/usr/bin/env node
/**
 * screenlab-extract: produce screenlab corpora from media and train the
 * emotion heads.
 *
 * Subcommands:
 *   extract           media manifest -> utterances.jsonl (+ sidecars)
 *   train-utterance   MELD -> utterance head (.slwh, core-compatible)
 *   train-contextual  MELD -> biLSTM contextual model (+ predictions)
 *   predict           rewrite emotion_probs of a corpus with a head
 *
 * Real model backends (VAD, transcription, alignment, encoders) plug in as
 * adapters; this offline build ships the deterministic synthetic adapter
 * (--synthetic) used by the test suite.
 */

import { mkdirSync, readFileSync } from 'node:fs';
import { join } from 'node:path';
import process from 'node:process';

import { SyntheticAdapters, type SyntheticScript } from './adapters.js';
import { trainContextualModel, type Conversation } from './bilstm.js';
import { saveContextualWeights } from './contextual_weights.js';
import { runExtraction } from './extract.js';
import { DEFAULT_HEAD, DEFAULT_TRAIN, trainUtteranceHead } from './head.js';
import { readJsonl, writeJsonl } from './jsonl.js';
import { buildMeldConversations, labelIndex, loadFeature, loadMeldSplit } from './meld.js';
import { loadHeadWeights, saveHeadWeights } from './weights.js';
import { LAYER_COLS, LAYER_ROWS, type MediaItem, type UtteranceJson } from './types.js';

function fail(msg: string): never {
  console.error(msg);
  process.exit(1);
}

function argValue(args: string[], name: string): string | undefined {
  const idx = args.indexOf(name);
  return idx >= 0 ? args[idx + 1] : undefined;
}

interface MediaManifest {
  media: (MediaItem & { script?: SyntheticScript })[];
}

async function cmdExtract(args: string[]): Promise<void> {
  const manifestPath = argValue(args, '--manifest') ?? fail('extract requires --manifest');
  const outDir = argValue(args, '--out') ?? fail('extract requires --out');
  const weightsPath = argValue(args, '--weights');
  const synthetic = args.includes('--synthetic');
  const manifest = JSON.parse(readFileSync(manifestPath, 'utf-8')) as MediaManifest;
  if (!synthetic) {
    fail(
      'no production model backends are bundled in this build; ' +
        'run with --synthetic (scripts embedded in the manifest) or register adapters',
    );
  }
  const scripts = new Map<string, SyntheticScript>();
  for (const m of manifest.media) {
    if (!m.script) fail(`--synthetic requires a script for media ${m.filmId}`);
    scripts.set(m.mediaPath, m.script);
  }
  const adapters = new SyntheticAdapters(scripts);
  const head = weightsPath ? loadHeadWeights(weightsPath) : undefined;
  const stats = await runExtraction(
    { media: manifest.media, outDir, models: syntheticModelIds(), device: 'cpu' },
    adapters,
    { head, log: (m) => console.error(m) },
  );
  console.log(
    `extracted ${stats.utterances} utterances from ${stats.filmsProcessed} films` +
      (stats.filmsFailed.length ? ` (${stats.filmsFailed.length} failed)` : ''),
  );
}

function syntheticModelIds() {
  return {
    segmenter: 'synthetic-vad',
    transcriber: 'synthetic-asr',
    aligner: 'synthetic-aligner',
    speechEncoder: 'synthetic-speech-encoder',
    sentenceEncoder: 'synthetic-sentence-encoder',
  };
}

async function cmdTrainUtterance(args: string[]): Promise<void> {
  const meldRoot = argValue(args, '--meld-root') ?? fail('train-utterance requires --meld-root');
  const featuresDir = argValue(args, '--features') ?? fail('train-utterance requires --features');
  const outPath = argValue(args, '--out') ?? fail('train-utterance requires --out');
  const epochs = Number(argValue(args, '--epochs') ?? DEFAULT_TRAIN.epochs);
  const seed = Number(argValue(args, '--seed') ?? DEFAULT_TRAIN.seed);

  const train = loadMeldSplit(join(meldRoot, 'train_sent_emo.csv'));
  const features = train.map((u) => loadFeature(featuresDir, u));
  const labels = train.map((u) => labelIndex(u.emotion));
  const result = trainUtteranceHead(features, labels, DEFAULT_HEAD, {
    ...DEFAULT_TRAIN,
    epochs,
    seed,
  });
  saveHeadWeights(result.head, outPath, { trained_on: 'MELD-train', epochs, seed });
  console.log(
    `trained utterance head: train accuracy ${result.trainAccuracy.toFixed(4)}, saved ${outPath}`,
  );
}

async function cmdTrainContextual(args: string[]): Promise<void> {
  const meldRoot = argValue(args, '--meld-root') ?? fail('train-contextual requires --meld-root');
  const featuresDir = argValue(args, '--features') ?? fail('train-contextual requires --features');
  const outPath = argValue(args, '--out') ?? fail('train-contextual requires --out');
  const epochs = Number(argValue(args, '--epochs') ?? 30);
  const seed = Number(argValue(args, '--seed') ?? 13);

  const train = loadMeldSplit(join(meldRoot, 'train_sent_emo.csv'));
  const conversations = buildMeldConversations(train);
  console.error(`MELD training split: ${conversations.length} conversations under the 3 s rule`);
  const convs: Conversation[] = conversations.map((c) => ({
    features: c.utterances.map((u) => loadFeature(featuresDir, u)),
    labels: c.utterances.map((u) => labelIndex(u.emotion)),
  }));
  const result = trainContextualModel(convs, undefined, {
    epochs,
    batchSize: 8,
    lr: 1e-3,
    seed,
  });
  saveContextualWeights(result.model, outPath);
  console.log(
    `trained contextual model: train accuracy ${result.trainAccuracy.toFixed(4)}, saved ${outPath}`,
  );
}

async function cmdPredict(args: string[]): Promise<void> {
  const corpusPath = argValue(args, '--utterances') ?? fail('predict requires --utterances');
  const weightsPath = argValue(args, '--weights') ?? fail('predict requires --weights');
  const outDir = argValue(args, '--out') ?? fail('predict requires --out');
  const head = loadHeadWeights(weightsPath);
  const rows = readJsonl<UtteranceJson>(corpusPath);
  const baseDir = corpusPath.slice(0, Math.max(corpusPath.lastIndexOf('/'), 0)) || '.';
  const out: UtteranceJson[] = [];
  for (const row of rows) {
    if (!row.layer_embeddings_path) {
      fail(`utterance ${row.film_id}:${row.utt_id} lacks layer_embeddings_path`);
    }
    const buf = readFileSync(join(baseDir, row.layer_embeddings_path));
    if (buf.length !== LAYER_ROWS * LAYER_COLS * 4) {
      fail(`${row.layer_embeddings_path}: unexpected sidecar size ${buf.length}`);
    }
    const feats = Float64Array.from(
      new Float32Array(buf.buffer, buf.byteOffset, LAYER_ROWS * LAYER_COLS),
    );
    out.push({ ...row, emotion_probs: Array.from(head.predict(feats)) });
  }
  mkdirSync(outDir, { recursive: true });
  await writeJsonl(join(outDir, 'utterances.jsonl'), out);
  console.log(`wrote ${out.length} predictions to ${join(outDir, 'utterances.jsonl')}`);
}

async function main(): Promise<void> {
  const [, , cmd, ...args] = process.argv;
  switch (cmd) {
    case 'extract':
      return cmdExtract(args);
    case 'train-utterance':
      return cmdTrainUtterance(args);
    case 'train-contextual':
      return cmdTrainContextual(args);
    case 'predict':
      return cmdPredict(args);
    default:
      console.error(
        'usage: screenlab-extract <extract|train-utterance|train-contextual|predict> [options]',
      );
      process.exit(2);
  }
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : String(err));
  process.exit(1);
});
