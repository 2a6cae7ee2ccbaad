import { describe, expect, it } from 'vitest';

import { argmax } from '../src/linalg.js';
import { trainUtteranceHead, UtteranceHead } from '../src/head.js';
import { Rng } from '../src/rng.js';

describe('UtteranceHead forward', () => {
  it('produces a probability distribution', () => {
    const head = new UtteranceHead({ nLayers: 3, featDim: 5, hiddenDim: 4, nClasses: 3 }, 7);
    const rng = new Rng(1);
    const layers = new Float64Array(15);
    rng.fill(layers);
    const { probs } = head.forward(layers);
    const sum = [...probs].reduce((a, b) => a + b, 0);
    expect(sum).toBeCloseTo(1, 12);
    for (const p of probs) expect(p).toBeGreaterThan(0);
  });

  it('equal layer logits average identical layers exactly', () => {
    const head = new UtteranceHead({ nLayers: 4, featDim: 6, hiddenDim: 3, nClasses: 3 }, 2);
    const v0 = new Float64Array(6);
    new Rng(3).fill(v0);
    const layers = new Float64Array(24);
    for (let l = 0; l < 4; l++) layers.set(v0, l * 6);
    const { v } = head.forward(layers);
    for (let d = 0; d < 6; d++) expect(v[d]).toBeCloseTo(v0[d], 12);
  });

  it('rejects mis-shaped input', () => {
    const head = new UtteranceHead({ nLayers: 3, featDim: 5, hiddenDim: 4, nClasses: 3 }, 7);
    expect(() => head.forward(new Float64Array(14))).toThrow(/expected 3x5/);
  });
});

describe('UtteranceHead gradients', () => {
  it('match central finite differences', () => {
    const head = new UtteranceHead({ nLayers: 3, featDim: 5, hiddenDim: 4, nClasses: 3 }, 11);
    const rng = new Rng(5);
    const layers = new Float64Array(15);
    rng.fill(layers);
    const label = 1;

    const grads = head.params().map((p) => new Float64Array(p.length));
    head.backward(layers, label, head.forward(layers), grads);

    const lossAt = () => -Math.log(head.forward(layers).probs[label]);
    const h = 1e-6;
    const params = head.params();
    for (let k = 0; k < params.length; k++) {
      const p = params[k];
      for (const idx of [0, Math.floor(p.length / 2), p.length - 1]) {
        const orig = p[idx];
        p[idx] = orig + h;
        const up = lossAt();
        p[idx] = orig - h;
        const down = lossAt();
        p[idx] = orig;
        const numeric = (up - down) / (2 * h);
        expect(grads[k][idx]).toBeCloseTo(numeric, 5);
      }
    }
  });
});

describe('training', () => {
  it('overfits 50 separable items to >= 0.95 training accuracy', () => {
    const config = { nLayers: 25, featDim: 100, hiddenDim: 32, nClasses: 7 };
    const rng = new Rng(42);
    const features: Float64Array[] = [];
    const labels: number[] = [];
    for (let i = 0; i < 50; i++) {
      const label = i % 7;
      const feat = new Float64Array(config.nLayers * config.featDim);
      rng.fill(feat, 0.5);
      for (let l = 0; l < config.nLayers; l++) {
        for (let d = label * 14; d < label * 14 + 14; d++) feat[l * config.featDim + d] += 0.8;
      }
      features.push(feat);
      labels.push(label);
    }
    const result = trainUtteranceHead(features, labels, config, {
      epochs: 60,
      batchSize: 10,
      lr: 3e-3,
      seed: 9,
    });
    expect(result.trainAccuracy).toBeGreaterThanOrEqual(0.95);
    expect(result.losses[result.losses.length - 1]).toBeLessThan(result.losses[0]);
  });

  it('is deterministic per seed', () => {
    const config = { nLayers: 2, featDim: 8, hiddenDim: 4, nClasses: 3 };
    const rng = new Rng(1);
    const features = Array.from({ length: 12 }, () => {
      const f = new Float64Array(16);
      rng.fill(f);
      return f;
    });
    const labels = features.map((_, i) => i % 3);
    const a = trainUtteranceHead(features, labels, config, { epochs: 5, batchSize: 4, lr: 1e-3, seed: 3 });
    const b = trainUtteranceHead(features, labels, config, { epochs: 5, batchSize: 4, lr: 1e-3, seed: 3 });
    expect([...a.head.hiddenW]).toEqual([...b.head.hiddenW]);
    expect(argmax(a.head.predict(features[0]))).toBe(argmax(b.head.predict(features[0])));
  });
});
