/**
 * Container for contextual-model weights (extractor-internal; the core
 * engine consumes only the utterance-head .slwh format). Same layout
 * discipline: magic "SLCX", version, JSON header, float32 LE blocks.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import { ContextualModel, type ContextualConfig } from './bilstm.js';
import { EMOTION_LABELS } from './types.js';

const MAGIC = Buffer.from('SLCX', 'ascii');
const FORMAT_VERSION = 1;

export function saveContextualWeights(model: ContextualModel, path: string): void {
  const { nLayers, featDim, hiddenDim, nClasses } = model.config;
  const header = Buffer.from(
    JSON.stringify({
      format_version: FORMAT_VERSION,
      n_layers: nLayers,
      feat_dim: featDim,
      hidden_dim: hiddenDim,
      n_classes: nClasses,
      labels: EMOTION_LABELS,
    }),
    'utf-8',
  );
  const blocks = model.params();
  const floats = blocks.reduce((acc, b) => acc + b.length, 0);
  const buf = Buffer.alloc(4 + 8 + header.length + floats * 4);
  let off = 0;
  MAGIC.copy(buf, off);
  off += 4;
  buf.writeUInt32LE(FORMAT_VERSION, off);
  off += 4;
  buf.writeUInt32LE(header.length, off);
  off += 4;
  header.copy(buf, off);
  off += header.length;
  for (const block of blocks) {
    for (let i = 0; i < block.length; i++) {
      buf.writeFloatLE(block[i], off);
      off += 4;
    }
  }
  writeFileSync(path, buf);
}

export function loadContextualWeights(path: string): ContextualModel {
  const buf = readFileSync(path);
  if (!buf.subarray(0, 4).equals(MAGIC)) throw new Error(`not a contextual weight file: ${path}`);
  if (buf.readUInt32LE(4) !== FORMAT_VERSION) throw new Error('unsupported format version');
  const headerLen = buf.readUInt32LE(8);
  const header = JSON.parse(buf.subarray(12, 12 + headerLen).toString('utf-8'));
  const config: ContextualConfig = {
    nLayers: header.n_layers,
    featDim: header.feat_dim,
    hiddenDim: header.hidden_dim,
    nClasses: header.n_classes,
  };
  const model = new ContextualModel(config, 0);
  let off = 12 + headerLen;
  for (const block of model.params()) {
    for (let i = 0; i < block.length; i++) {
      block[i] = buf.readFloatLE(off);
      off += 4;
    }
  }
  return model;
}
