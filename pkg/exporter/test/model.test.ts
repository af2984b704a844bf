import fs from "node:fs";
import { describe, expect, it } from "vitest";

import { readCheckpoint } from "../src/checkpoint.js";
import { contextualize, likelihoodScores, termWeights } from "../src/model.js";
import { tempDir, writeCheckpointFile } from "./util.js";

function fixtureCheckpoint(window = 1) {
  const dir = tempDir("ckpt-");
  const path = writeCheckpointFile(dir, 6, 3, window, (i) => 0.01 * i - 0.05);
  const checkpoint = readCheckpoint(path);
  return { dir, checkpoint };
}

describe("readCheckpoint", () => {
  it("round-trips header fields and parameters", () => {
    const { dir, checkpoint } = fixtureCheckpoint(2);
    expect(checkpoint.vocabSize).toBe(6);
    expect(checkpoint.dim).toBe(3);
    expect(checkpoint.window).toBe(2);
    expect(checkpoint.embeddings.length).toBe(18);
    expect(checkpoint.embeddings[1]).toBeCloseTo(-0.04, 12);
    expect(checkpoint.projection).toEqual(
      new Float64Array([0.1 * 1, 0.1 * 2, 0.1 * 3]),
    );
    expect(checkpoint.bias).toBe(0.5);
    fs.rmSync(dir, { recursive: true, force: true });
  });

  it("rejects a wrong magic", () => {
    const dir = tempDir("ckpt-bad-");
    const path = `${dir}/bad.bin`;
    fs.writeFileSync(path, Buffer.from("NOPE1234"));
    expect(() => readCheckpoint(path)).toThrow(/magic/);
    fs.rmSync(dir, { recursive: true, force: true });
  });

  it("rejects truncation", () => {
    const { dir } = fixtureCheckpoint();
    const path = `${dir}/model.bin`;
    const data = fs.readFileSync(path);
    fs.writeFileSync(path, data.subarray(0, data.length - 9));
    expect(() => readCheckpoint(path)).toThrow(/bytes/);
    fs.rmSync(dir, { recursive: true, force: true });
  });
});

describe("contextualize", () => {
  it("window 0 returns static embedding rows", () => {
    const dir = tempDir("ckpt-w0-");
    const path = writeCheckpointFile(dir, 4, 2, 0, (i) => i);
    const checkpoint = readCheckpoint(path);
    const contexts = contextualize([2, 0], checkpoint);
    expect(Array.from(contexts[0])).toEqual([4, 5]);
    expect(Array.from(contexts[1])).toEqual([0, 1]);
    fs.rmSync(dir, { recursive: true, force: true });
  });

  it("middle of three tokens averages all rows at window 1", () => {
    const { dir, checkpoint } = fixtureCheckpoint(1);
    const passage = [0, 2, 4];
    const contexts = contextualize(passage, checkpoint);
    for (let d = 0; d < checkpoint.dim; d++) {
      const mean =
        (checkpoint.embeddings[0 * 3 + d] +
          checkpoint.embeddings[2 * 3 + d] +
          checkpoint.embeddings[4 * 3 + d]) /
        3;
      expect(contexts[1][d]).toBeCloseTo(mean, 12);
    }
    fs.rmSync(dir, { recursive: true, force: true });
  });
});

describe("termWeights", () => {
  it("weights are non-negative and one per position", () => {
    const { dir, checkpoint } = fixtureCheckpoint();
    const passage = [0, 1, 2, 2, 5];
    const weights = termWeights(passage, checkpoint);
    expect(weights.length).toBe(passage.length);
    for (const [tokenId, weight] of weights) {
      expect(passage).toContain(tokenId);
      expect(weight).toBeGreaterThanOrEqual(0);
    }
    fs.rmSync(dir, { recursive: true, force: true });
  });
});

describe("likelihoodScores", () => {
  it("has one finite score per vocabulary entry", () => {
    const { dir, checkpoint } = fixtureCheckpoint();
    const scores = likelihoodScores([1, 3, 5], checkpoint);
    expect(scores.length).toBe(checkpoint.vocabSize);
    for (const value of scores) {
      expect(Number.isFinite(value)).toBe(true);
    }
    fs.rmSync(dir, { recursive: true, force: true });
  });

  it("aligned embeddings outrank opposed ones", () => {
    const dir = tempDir("ckpt-align-");
    // Rows: token 0 = (1, 0), token 1 = (-1, 0), token 2 = (1, 0).
    const values = [1, 0, -1, 0, 1, 0];
    const path = writeCheckpointFile(dir, 3, 2, 0, (i) => values[i]);
    const checkpoint = readCheckpoint(path);
    const scores = likelihoodScores([0], checkpoint);
    expect(scores[2]).toBeGreaterThan(scores[1]);
    fs.rmSync(dir, { recursive: true, force: true });
  });

  it("is deterministic across calls", () => {
    const { dir, checkpoint } = fixtureCheckpoint();
    const a = likelihoodScores([0, 1, 2], checkpoint);
    const b = likelihoodScores([0, 1, 2], checkpoint);
    expect(Array.from(a)).toEqual(Array.from(b));
    fs.rmSync(dir, { recursive: true, force: true });
  });
});
