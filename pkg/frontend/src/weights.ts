/**
 * Head weight export/import in the core engine's binary format:
 * magic "SLWH", uint32 format version, uint32 header length, JSON header
 * (dims, activation, label order), then little-endian float32 blocks in
 * the order layer_logits, hidden_w, hidden_b, out_w, out_b.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import { UtteranceHead, type HeadConfig } from './head.js';
import { EMOTION_LABELS } from './types.js';

const MAGIC = Buffer.from('SLWH', 'ascii');
const FORMAT_VERSION = 1;

export function saveHeadWeights(head: UtteranceHead, path: string, extra: Record<string, unknown> = {}): void {
  const { nLayers, featDim, hiddenDim, nClasses } = head.config;
  const header = Buffer.from(
    JSON.stringify({
      format_version: FORMAT_VERSION,
      n_layers: nLayers,
      feat_dim: featDim,
      hidden_dim: hiddenDim,
      n_classes: nClasses,
      activation: 'relu',
      labels: EMOTION_LABELS,
      version: '1',
      ...extra,
    }),
    'utf-8',
  );
  const blocks = [head.layerLogits, head.hiddenW, head.hiddenB, head.outW, head.outB];
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

export function loadHeadWeights(path: string): UtteranceHead {
  const buf = readFileSync(path);
  if (!buf.subarray(0, 4).equals(MAGIC)) {
    throw new Error(`not a head weight file: ${path}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) throw new Error(`unsupported weight format version ${version}`);
  const headerLen = buf.readUInt32LE(8);
  const header = JSON.parse(buf.subarray(12, 12 + headerLen).toString('utf-8'));
  const config: HeadConfig = {
    nLayers: header.n_layers,
    featDim: header.feat_dim,
    hiddenDim: header.hidden_dim,
    nClasses: header.n_classes,
  };
  const head = new UtteranceHead(config, 0);
  let off = 12 + headerLen;
  const read = (n: number): Float64Array => {
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      out[i] = buf.readFloatLE(off);
      off += 4;
    }
    return out;
  };
  head.layerLogits = read(config.nLayers);
  head.hiddenW = read(config.hiddenDim * config.featDim);
  head.hiddenB = read(config.hiddenDim);
  head.outW = read(config.nClasses * config.hiddenDim);
  head.outB = read(config.nClasses);
  return head;
}
