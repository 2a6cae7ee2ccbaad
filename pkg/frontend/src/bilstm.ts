/**
 * Contextual emotion model: learned layer weighting feeds per-utterance
 * vectors through a bidirectional LSTM over the conversation, with a
 * shared classification head on each step's concatenated hidden states.
 * Gradients are hand-written BPTT, verified against finite differences in
 * the test suite.
 */

import { Adam, argmax, matvec, matvecT, outerAccum, softmax } from './linalg.js';
import { Rng } from './rng.js';
import type { TrainConfig } from './head.js';

export interface ContextualConfig {
  nLayers: number;
  featDim: number;
  hiddenDim: number; // per direction
  nClasses: number;
}

export const DEFAULT_CONTEXTUAL: ContextualConfig = {
  nLayers: 25,
  featDim: 768,
  hiddenDim: 64,
  nClasses: 7,
};

interface LstmParams {
  w: Float64Array; // (4h x input)
  u: Float64Array; // (4h x h)
  b: Float64Array; // (4h)
}

interface LstmGrads {
  w: Float64Array;
  u: Float64Array;
  b: Float64Array;
}

interface StepCache {
  x: Float64Array;
  i: Float64Array;
  f: Float64Array;
  g: Float64Array;
  o: Float64Array;
  c: Float64Array;
  tanhC: Float64Array;
  hPrev: Float64Array;
  cPrev: Float64Array;
}

function sigmoid(x: number): number {
  return 1 / (1 + Math.exp(-x));
}

export interface Conversation {
  /** per utterance: row-major nLayers x featDim features */
  features: Float64Array[];
  labels: number[];
}

export class ContextualModel {
  layerLogits: Float64Array;
  fwd: LstmParams;
  bwd: LstmParams;
  outW: Float64Array; // (nClasses x 2h)
  outB: Float64Array;

  constructor(public readonly config: ContextualConfig, seed = 13) {
    const rng = new Rng(seed);
    const { nLayers, featDim, hiddenDim, nClasses } = config;
    this.layerLogits = new Float64Array(nLayers);
    const mk = (): LstmParams => {
      const w = new Float64Array(4 * hiddenDim * featDim);
      rng.fill(w, 1 / Math.sqrt(featDim));
      const u = new Float64Array(4 * hiddenDim * hiddenDim);
      rng.fill(u, 1 / Math.sqrt(hiddenDim));
      const b = new Float64Array(4 * hiddenDim);
      // forget-gate bias at 1 helps gradient flow early in training
      for (let i = hiddenDim; i < 2 * hiddenDim; i++) b[i] = 1.0;
      return { w, u, b };
    };
    this.fwd = mk();
    this.bwd = mk();
    this.outW = new Float64Array(nClasses * 2 * hiddenDim);
    rng.fill(this.outW, 1 / Math.sqrt(2 * hiddenDim));
    this.outB = new Float64Array(nClasses);
  }

  params(): Float64Array[] {
    return [
      this.layerLogits,
      this.fwd.w,
      this.fwd.u,
      this.fwd.b,
      this.bwd.w,
      this.bwd.u,
      this.bwd.b,
      this.outW,
      this.outB,
    ];
  }

  private weightedInputs(layerFeats: Float64Array[]): { xs: Float64Array[]; weights: Float64Array } {
    const { nLayers, featDim } = this.config;
    const weights = softmax(this.layerLogits);
    const xs = layerFeats.map((feat) => {
      if (feat.length !== nLayers * featDim) {
        throw new Error(`feature matrix has ${feat.length} values, expected ${nLayers}x${featDim}`);
      }
      const x = new Float64Array(featDim);
      for (let l = 0; l < nLayers; l++) {
        const wl = weights[l];
        const base = l * featDim;
        for (let d = 0; d < featDim; d++) x[d] += wl * feat[base + d];
      }
      return x;
    });
    return { xs, weights };
  }

  private runDirection(xs: Float64Array[], p: LstmParams, reverse: boolean) {
    const { featDim, hiddenDim } = this.config;
    const T = xs.length;
    const hs: Float64Array[] = new Array(T);
    const caches: StepCache[] = new Array(T);
    let h = new Float64Array(hiddenDim);
    let c = new Float64Array(hiddenDim);
    const z = new Float64Array(4 * hiddenDim);
    const uz = new Float64Array(4 * hiddenDim);
    for (let step = 0; step < T; step++) {
      const t = reverse ? T - 1 - step : step;
      const x = xs[t];
      matvec(p.w, 4 * hiddenDim, featDim, x, z);
      matvec(p.u, 4 * hiddenDim, hiddenDim, h, uz);
      const i = new Float64Array(hiddenDim);
      const f = new Float64Array(hiddenDim);
      const g = new Float64Array(hiddenDim);
      const o = new Float64Array(hiddenDim);
      const cNew = new Float64Array(hiddenDim);
      const tanhC = new Float64Array(hiddenDim);
      const hNew = new Float64Array(hiddenDim);
      for (let k = 0; k < hiddenDim; k++) {
        i[k] = sigmoid(z[k] + uz[k] + p.b[k]);
        f[k] = sigmoid(z[hiddenDim + k] + uz[hiddenDim + k] + p.b[hiddenDim + k]);
        g[k] = Math.tanh(z[2 * hiddenDim + k] + uz[2 * hiddenDim + k] + p.b[2 * hiddenDim + k]);
        o[k] = sigmoid(z[3 * hiddenDim + k] + uz[3 * hiddenDim + k] + p.b[3 * hiddenDim + k]);
        cNew[k] = f[k] * c[k] + i[k] * g[k];
        tanhC[k] = Math.tanh(cNew[k]);
        hNew[k] = o[k] * tanhC[k];
      }
      caches[t] = { x, i, f, g, o, c: cNew, tanhC, hPrev: h, cPrev: c };
      hs[t] = hNew;
      h = hNew;
      c = cNew;
    }
    return { hs, caches };
  }

  private backwardDirection(
    p: LstmParams,
    caches: StepCache[],
    dhs: Float64Array[],
    reverse: boolean,
    grads: LstmGrads,
    dxs: Float64Array[],
  ) {
    const { featDim, hiddenDim } = this.config;
    const T = caches.length;
    let dhNext = new Float64Array(hiddenDim);
    let dcNext = new Float64Array(hiddenDim);
    const dz = new Float64Array(4 * hiddenDim);
    for (let step = T - 1; step >= 0; step--) {
      const t = reverse ? T - 1 - step : step;
      const cc = caches[t];
      const dh = new Float64Array(hiddenDim);
      for (let k = 0; k < hiddenDim; k++) dh[k] = dhs[t][k] + dhNext[k];
      const dc = new Float64Array(hiddenDim);
      for (let k = 0; k < hiddenDim; k++) {
        const dOut = dh[k] * cc.o[k] * (1 - cc.tanhC[k] * cc.tanhC[k]);
        dc[k] = dOut + dcNext[k];
        const dO = dh[k] * cc.tanhC[k];
        dz[3 * hiddenDim + k] = dO * cc.o[k] * (1 - cc.o[k]);
        const dI = dc[k] * cc.g[k];
        dz[k] = dI * cc.i[k] * (1 - cc.i[k]);
        const dF = dc[k] * cc.cPrev[k];
        dz[hiddenDim + k] = dF * cc.f[k] * (1 - cc.f[k]);
        const dG = dc[k] * cc.i[k];
        dz[2 * hiddenDim + k] = dG * (1 - cc.g[k] * cc.g[k]);
      }
      outerAccum(grads.w, dz, cc.x);
      outerAccum(grads.u, dz, cc.hPrev);
      for (let k = 0; k < 4 * hiddenDim; k++) grads.b[k] += dz[k];

      const dx = new Float64Array(featDim);
      matvecT(p.w, 4 * hiddenDim, featDim, dz, dx);
      for (let d = 0; d < featDim; d++) dxs[t][d] += dx[d];

      const dhPrev = new Float64Array(hiddenDim);
      matvecT(p.u, 4 * hiddenDim, hiddenDim, dz, dhPrev);
      dhNext = dhPrev;
      const dcPrev = new Float64Array(hiddenDim);
      for (let k = 0; k < hiddenDim; k++) dcPrev[k] = dc[k] * cc.f[k];
      dcNext = dcPrev;
    }
  }

  /** per-step probability distributions for one conversation */
  predict(layerFeats: Float64Array[]): Float64Array[] {
    const { hiddenDim, nClasses } = this.config;
    const { xs } = this.weightedInputs(layerFeats);
    const f = this.runDirection(xs, this.fwd, false);
    const b = this.runDirection(xs, this.bwd, true);
    return xs.map((_, t) => {
      const concat = new Float64Array(2 * hiddenDim);
      concat.set(f.hs[t], 0);
      concat.set(b.hs[t], hiddenDim);
      const logits = new Float64Array(nClasses);
      matvec(this.outW, nClasses, 2 * hiddenDim, concat, logits);
      for (let k = 0; k < nClasses; k++) logits[k] += this.outB[k];
      return softmax(logits);
    });
  }

  /** accumulate gradients for one conversation; returns summed loss */
  trainStep(conv: Conversation, grads: Float64Array[]): number {
    const { nLayers, featDim, hiddenDim, nClasses } = this.config;
    const [gLogitsL, gFw, gFu, gFb, gBw, gBu, gBb, gOw, gOb] = grads;
    const { xs, weights } = this.weightedInputs(conv.features);
    const T = xs.length;
    const fRun = this.runDirection(xs, this.fwd, false);
    const bRun = this.runDirection(xs, this.bwd, true);

    let loss = 0;
    const dhF: Float64Array[] = [];
    const dhB: Float64Array[] = [];
    const dxs = xs.map(() => new Float64Array(featDim));
    for (let t = 0; t < T; t++) {
      const concat = new Float64Array(2 * hiddenDim);
      concat.set(fRun.hs[t], 0);
      concat.set(bRun.hs[t], hiddenDim);
      const logits = new Float64Array(nClasses);
      matvec(this.outW, nClasses, 2 * hiddenDim, concat, logits);
      for (let k = 0; k < nClasses; k++) logits[k] += this.outB[k];
      const probs = softmax(logits);
      loss += -Math.log(Math.max(probs[conv.labels[t]], 1e-300));

      const dLogits = new Float64Array(nClasses);
      for (let k = 0; k < nClasses; k++) dLogits[k] = probs[k] - (k === conv.labels[t] ? 1 : 0);
      outerAccum(gOw, dLogits, concat);
      for (let k = 0; k < nClasses; k++) gOb[k] += dLogits[k];
      const dConcat = new Float64Array(2 * hiddenDim);
      matvecT(this.outW, nClasses, 2 * hiddenDim, dLogits, dConcat);
      dhF.push(dConcat.slice(0, hiddenDim));
      dhB.push(dConcat.slice(hiddenDim));
    }

    this.backwardDirection(this.fwd, fRun.caches, dhF, false, { w: gFw, u: gFu, b: gFb }, dxs);
    this.backwardDirection(this.bwd, bRun.caches, dhB, true, { w: gBw, u: gBu, b: gBb }, dxs);

    // through the shared softmax layer weighting
    const dw = new Float64Array(nLayers);
    for (let t = 0; t < T; t++) {
      const feat = conv.features[t];
      for (let l = 0; l < nLayers; l++) {
        const base = l * featDim;
        let acc = 0;
        for (let d = 0; d < featDim; d++) acc += dxs[t][d] * feat[base + d];
        dw[l] += acc;
      }
    }
    let mix = 0;
    for (let l = 0; l < nLayers; l++) mix += weights[l] * dw[l];
    for (let l = 0; l < nLayers; l++) gLogitsL[l] += weights[l] * (dw[l] - mix);

    return loss;
  }
}

export interface ContextualTrainResult {
  model: ContextualModel;
  losses: number[];
  trainAccuracy: number;
}

export function trainContextualModel(
  conversations: Conversation[],
  config: ContextualConfig = DEFAULT_CONTEXTUAL,
  train: TrainConfig = { epochs: 30, batchSize: 8, lr: 1e-3, seed: 13 },
): ContextualTrainResult {
  if (!conversations.length) throw new Error('no conversations to train on');
  const model = new ContextualModel(config, train.seed);
  const optimizer = new Adam(model.params(), train.lr);
  const rng = new Rng(train.seed ^ 0xb115);
  const order = conversations.map((_, i) => i);
  const losses: number[] = [];

  for (let epoch = 0; epoch < train.epochs; epoch++) {
    rng.shuffle(order);
    let epochLoss = 0;
    let nUtts = 0;
    for (let start = 0; start < order.length; start += train.batchSize) {
      const batch = order.slice(start, start + train.batchSize);
      const grads = model.params().map((p) => new Float64Array(p.length));
      let batchUtts = 0;
      for (const idx of batch) {
        epochLoss += model.trainStep(conversations[idx], grads);
        batchUtts += conversations[idx].labels.length;
      }
      for (const g of grads) for (let i = 0; i < g.length; i++) g[i] /= batchUtts;
      optimizer.step(grads);
      nUtts += batchUtts;
    }
    losses.push(epochLoss / nUtts);
  }

  let correct = 0;
  let total = 0;
  for (const conv of conversations) {
    const probs = model.predict(conv.features);
    for (let t = 0; t < conv.labels.length; t++) {
      if (argmax(probs[t]) === conv.labels[t]) correct++;
      total++;
    }
  }
  return { model, losses, trainAccuracy: correct / total };
}
