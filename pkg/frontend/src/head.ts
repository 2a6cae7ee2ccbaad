/**
 * Utterance-level emotion head: a learned softmax weighting over the
 * encoder layers, then a one-hidden-layer ReLU classifier.
 *
 * The forward pass mirrors the core engine's `ser_head_forward`; weights
 * exported through weights.ts reproduce its predictions to float32
 * precision.
 */

import { Adam, argmax, matvec, matvecT, outerAccum, softmax } from './linalg.js';
import { Rng } from './rng.js';

export interface HeadConfig {
  nLayers: number;
  featDim: number;
  hiddenDim: number;
  nClasses: number;
}

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  lr: number;
  seed: number;
}

export const DEFAULT_HEAD: HeadConfig = { nLayers: 25, featDim: 768, hiddenDim: 128, nClasses: 7 };
export const DEFAULT_TRAIN: TrainConfig = { epochs: 40, batchSize: 32, lr: 1e-3, seed: 13 };

interface ForwardCache {
  weights: Float64Array; // softmax over layer logits
  v: Float64Array; // weighted layer average
  pre: Float64Array; // hidden pre-activation
  h: Float64Array; // hidden activation
  probs: Float64Array;
}

export class UtteranceHead {
  layerLogits: Float64Array;
  hiddenW: Float64Array;
  hiddenB: Float64Array;
  outW: Float64Array;
  outB: Float64Array;

  constructor(public readonly config: HeadConfig, seed = 13) {
    const rng = new Rng(seed);
    const { nLayers, featDim, hiddenDim, nClasses } = config;
    this.layerLogits = new Float64Array(nLayers); // start from a uniform average
    this.hiddenW = new Float64Array(hiddenDim * featDim);
    rng.fill(this.hiddenW, Math.sqrt(2 / featDim));
    this.hiddenB = new Float64Array(hiddenDim);
    this.outW = new Float64Array(nClasses * hiddenDim);
    rng.fill(this.outW, Math.sqrt(2 / hiddenDim));
    this.outB = new Float64Array(nClasses);
  }

  params(): Float64Array[] {
    return [this.layerLogits, this.hiddenW, this.hiddenB, this.outW, this.outB];
  }

  /** layers: row-major nLayers x featDim */
  forward(layers: Float64Array): ForwardCache {
    const { nLayers, featDim, hiddenDim, nClasses } = this.config;
    if (layers.length !== nLayers * featDim) {
      throw new Error(`layer matrix has ${layers.length} values, expected ${nLayers}x${featDim}`);
    }
    const weights = softmax(this.layerLogits);
    const v = new Float64Array(featDim);
    for (let l = 0; l < nLayers; l++) {
      const wl = weights[l];
      const base = l * featDim;
      for (let d = 0; d < featDim; d++) v[d] += wl * layers[base + d];
    }
    const pre = new Float64Array(hiddenDim);
    matvec(this.hiddenW, hiddenDim, featDim, v, pre);
    for (let i = 0; i < hiddenDim; i++) pre[i] += this.hiddenB[i];
    const h = new Float64Array(hiddenDim);
    for (let i = 0; i < hiddenDim; i++) h[i] = pre[i] > 0 ? pre[i] : 0;
    const logits = new Float64Array(nClasses);
    matvec(this.outW, nClasses, hiddenDim, h, logits);
    for (let i = 0; i < nClasses; i++) logits[i] += this.outB[i];
    return { weights, v, pre, h, probs: softmax(logits) };
  }

  predict(layers: Float64Array): Float64Array {
    return this.forward(layers).probs;
  }

  /**
   * Cross-entropy gradients for one example; accumulates into grads
   * (same shapes as params()). Returns the loss.
   */
  backward(layers: Float64Array, label: number, cache: ForwardCache, grads: Float64Array[]): number {
    const { nLayers, featDim, hiddenDim, nClasses } = this.config;
    const [gLogitsL, gHw, gHb, gOw, gOb] = grads;
    const { weights, v, pre, h, probs } = cache;

    const dLogits = new Float64Array(nClasses);
    for (let i = 0; i < nClasses; i++) dLogits[i] = probs[i] - (i === label ? 1 : 0);
    outerAccum(gOw, dLogits, h);
    for (let i = 0; i < nClasses; i++) gOb[i] += dLogits[i];

    const dh = new Float64Array(hiddenDim);
    matvecT(this.outW, nClasses, hiddenDim, dLogits, dh);
    const dPre = new Float64Array(hiddenDim);
    for (let i = 0; i < hiddenDim; i++) dPre[i] = pre[i] > 0 ? dh[i] : 0;
    outerAccum(gHw, dPre, v);
    for (let i = 0; i < hiddenDim; i++) gHb[i] += dPre[i];

    const dv = new Float64Array(featDim);
    matvecT(this.hiddenW, hiddenDim, featDim, dPre, dv);

    // through the softmax layer weighting
    const dw = new Float64Array(nLayers);
    for (let l = 0; l < nLayers; l++) {
      const base = l * featDim;
      let acc = 0;
      for (let d = 0; d < featDim; d++) acc += dv[d] * layers[base + d];
      dw[l] = acc;
    }
    let mix = 0;
    for (let l = 0; l < nLayers; l++) mix += weights[l] * dw[l];
    for (let l = 0; l < nLayers; l++) gLogitsL[l] += weights[l] * (dw[l] - mix);

    return -Math.log(Math.max(probs[label], 1e-300));
  }
}

export interface TrainResult {
  head: UtteranceHead;
  losses: number[];
  trainAccuracy: number;
}

export function trainUtteranceHead(
  features: Float64Array[],
  labels: number[],
  config: HeadConfig = DEFAULT_HEAD,
  train: TrainConfig = DEFAULT_TRAIN,
): TrainResult {
  if (features.length !== labels.length || features.length === 0) {
    throw new Error('features and labels must align and be nonempty');
  }
  const head = new UtteranceHead(config, train.seed);
  const optimizer = new Adam(head.params(), train.lr);
  const rng = new Rng(train.seed ^ 0x5eed);
  const order = features.map((_, i) => i);
  const losses: number[] = [];

  for (let epoch = 0; epoch < train.epochs; epoch++) {
    rng.shuffle(order);
    let epochLoss = 0;
    for (let start = 0; start < order.length; start += train.batchSize) {
      const batch = order.slice(start, start + train.batchSize);
      const grads = head.params().map((p) => new Float64Array(p.length));
      for (const idx of batch) {
        const cache = head.forward(features[idx]);
        epochLoss += head.backward(features[idx], labels[idx], cache, grads);
      }
      for (const g of grads) for (let i = 0; i < g.length; i++) g[i] /= batch.length;
      optimizer.step(grads);
    }
    losses.push(epochLoss / features.length);
  }

  let correct = 0;
  for (let i = 0; i < features.length; i++) {
    if (argmax(head.predict(features[i])) === labels[i]) correct++;
  }
  return { head, losses, trainAccuracy: correct / features.length };
}
