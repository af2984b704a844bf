/** Shared fixture builders: deterministic corpus, vocab file, checkpoint bytes. */

import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { spawnSync } from "node:child_process";

export function tempDir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

/** Small deterministic PRNG (mulberry32). */
export function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export const SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"];

export function contentWords(count: number): string[] {
  return Array.from({ length: count }, (_, i) => `w${String(i).padStart(3, "0")}`);
}

export function writeVocabFile(dir: string, words: string[]): string {
  const vocabPath = path.join(dir, "vocab.txt");
  fs.writeFileSync(vocabPath, [...SPECIALS, ...words].join("\n") + "\n");
  return vocabPath;
}

export function writeCollection(
  dir: string,
  words: string[],
  passages: number,
  seed = 1,
): string {
  const random = rng(seed);
  const rows: string[] = [];
  for (let p = 0; p < passages; p++) {
    const length = 6 + Math.floor(random() * 10);
    const text = Array.from(
      { length },
      () => words[Math.floor(random() * words.length)],
    ).join(" ");
    rows.push(`p${p}\t${text}`);
  }
  const collectionPath = path.join(dir, "collection.tsv");
  fs.writeFileSync(collectionPath, rows.join("\n") + "\n");
  return collectionPath;
}

/** Serialize a checkpoint in the engine's binary layout. */
export function writeCheckpointFile(
  dir: string,
  vocabSize: number,
  dim: number,
  window: number,
  fill: (index: number) => number,
): string {
  const embBytes = 8 * vocabSize * dim;
  const buf = Buffer.alloc(4 + 4 + 8 + 4 + 4 + embBytes + 8 * dim + 8 + 4);
  let offset = 0;
  buf.write("TOYW", offset, "ascii");
  offset += 4;
  buf.writeUInt32LE(1, offset);
  offset += 4;
  buf.writeBigUInt64LE(BigInt(vocabSize), offset);
  offset += 8;
  buf.writeUInt32LE(dim, offset);
  offset += 4;
  buf.writeUInt32LE(window, offset);
  offset += 4;
  for (let i = 0; i < vocabSize * dim; i++) {
    buf.writeDoubleLE(fill(i), offset + 8 * i);
  }
  offset += embBytes;
  for (let d = 0; d < dim; d++) {
    buf.writeDoubleLE(0.1 * (d + 1), offset + 8 * d);
  }
  offset += 8 * dim;
  buf.writeDoubleLE(0.5, offset);
  offset += 8;
  buf.write("WYOT", offset, "ascii");
  const checkpointPath = path.join(dir, "model.bin");
  fs.writeFileSync(checkpointPath, buf);
  return checkpointPath;
}

export function python(args: string[], input?: string) {
  const result = spawnSync("python3", args, {
    encoding: "utf-8",
    input,
    timeout: 120_000,
  });
  if (result.error) throw result.error;
  return result;
}

export function pythonAvailable(): boolean {
  const result = spawnSync("python3", ["-c", "import impact_rerank"], {
    encoding: "utf-8",
    timeout: 60_000,
  });
  return result.status === 0;
}
