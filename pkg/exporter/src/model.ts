/**
 * Forward passes over a loaded checkpoint: per-position contextual
 * vectors (windowed mean of embeddings), projected ReLU term weights,
 * and a tied-embedding vocabulary scorer used for likelihood export
 * (score of token t = dot(embedding row t, mean passage vector)).
 */

import type { Checkpoint } from "./checkpoint.js";

export function contextualize(passage: number[], model: Checkpoint): Float64Array[] {
  if (passage.length === 0) {
    throw new Error("empty passage");
  }
  const { dim, window, embeddings } = model;
  const length = passage.length;
  const contexts: Float64Array[] = [];
  for (let i = 0; i < length; i++) {
    const lo = Math.max(0, i - window);
    const hi = Math.min(length, i + window + 1);
    const ctx = new Float64Array(dim);
    for (let j = lo; j < hi; j++) {
      const row = passage[j] * dim;
      for (let d = 0; d < dim; d++) {
        ctx[d] += embeddings[row + d];
      }
    }
    const count = hi - lo;
    for (let d = 0; d < dim; d++) {
      ctx[d] /= count;
    }
    contexts.push(ctx);
  }
  return contexts;
}

/** One non-negative weight per passage position (pre max-collapse). */
export function termWeights(passage: number[], model: Checkpoint): Array<[number, number]> {
  const contexts = contextualize(passage, model);
  const { dim, projection, bias } = model;
  const out: Array<[number, number]> = [];
  for (let i = 0; i < passage.length; i++) {
    let pre = bias;
    const ctx = contexts[i];
    for (let d = 0; d < dim; d++) {
      pre += ctx[d] * projection[d];
    }
    out.push([passage[i], Math.fround(Math.max(0, pre))]);
  }
  return out;
}

/** Dense vocabulary scores for one passage (raw logits; ordering is what matters). */
export function likelihoodScores(passage: number[], model: Checkpoint): Float32Array {
  if (passage.length === 0) {
    return new Float32Array(model.vocabSize);
  }
  const { dim, vocabSize, embeddings } = model;
  const pooled = new Float64Array(dim);
  for (const tokenId of passage) {
    const row = tokenId * dim;
    for (let d = 0; d < dim; d++) {
      pooled[d] += embeddings[row + d];
    }
  }
  for (let d = 0; d < dim; d++) {
    pooled[d] /= passage.length;
  }
  const scores = new Float32Array(vocabSize);
  for (let t = 0; t < vocabSize; t++) {
    const row = t * dim;
    let dot = 0;
    for (let d = 0; d < dim; d++) {
      dot += embeddings[row + d] * pooled[d];
    }
    scores[t] = Math.fround(dot);
  }
  return scores;
}
