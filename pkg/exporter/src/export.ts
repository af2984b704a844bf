/**
 * Batch export of model outputs into the ranking engine's file contracts:
 *
 *   - weight JSONL: {"pid": "...", "tokens": [[tokenId, weight], ...]}
 *     one line per passage, weights >= 0;
 *   - likelihood file: magic "LKH1", vocab size u32, record count u64,
 *     then per passage pid-length u32, pid utf-8, vocabSize float32 LE;
 *   - manifest JSON recording the checkpoint id, vocabulary checksum,
 *     passage count, batch size, and wall time.
 *
 * Outputs are written to a temp path and renamed into place on success.
 */

import fs from "node:fs";

import type { Checkpoint } from "./checkpoint.js";
import { likelihoodScores, termWeights } from "./model.js";
import { tokenize } from "./tokenizer.js";
import { Vocabulary } from "./vocab.js";

export interface Manifest {
  model: string;
  vocab_checksum: string;
  passages: number;
  batch_size: number;
  wall_seconds: number;
}

export interface ExportOptions {
  collectionPath: string;
  checkpoint: Checkpoint;
  checkpointId: string;
  vocab: Vocabulary;
  outPath: string;
  manifestPath?: string;
  batchSize?: number;
}

export function readCollection(path: string): Array<[string, string]> {
  const rows: Array<[string, string]> = [];
  const text = fs.readFileSync(path, "utf-8");
  for (const [lineNo, line] of text.split("\n").entries()) {
    if (!line) continue;
    const tab = line.indexOf("\t");
    if (tab < 0) {
      throw new Error(`line ${lineNo + 1}: expected pid<TAB>text`);
    }
    rows.push([line.slice(0, tab), line.slice(tab + 1).replace(/\r$/, "")]);
  }
  return rows;
}

function writeManifest(path: string, manifest: Manifest): void {
  fs.writeFileSync(path, JSON.stringify(manifest, null, 2) + "\n");
}

function checkShapes(options: ExportOptions): void {
  if (options.checkpoint.vocabSize !== options.vocab.size) {
    throw new Error(
      `checkpoint vocabulary size ${options.checkpoint.vocabSize} != ` +
        `vocabulary file size ${options.vocab.size}`,
    );
  }
}

function* batches<T>(items: T[], size: number): Generator<T[]> {
  for (let i = 0; i < items.length; i += size) {
    yield items.slice(i, i + size);
  }
}

/** Run fn; on an allocation failure halve the batch size and retry once. */
function withOomRetry<T>(batchSize: number, fn: (batchSize: number) => T): T {
  try {
    return fn(batchSize);
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    if (/allocation|heap|memory/i.test(message) && batchSize > 1) {
      const halved = Math.max(1, Math.floor(batchSize / 2));
      return fn(halved);
    }
    throw error;
  }
}

export function exportWeights(options: ExportOptions): Manifest {
  checkShapes(options);
  const started = process.hrtime.bigint();
  const rows = readCollection(options.collectionPath);
  const requested = options.batchSize ?? 32;
  const tmpPath = options.outPath + ".tmp";

  const usedBatch = withOomRetry(requested, (batchSize) => {
    const fd = fs.openSync(tmpPath, "w");
    try {
      for (const batch of batches(rows, batchSize)) {
        const lines: string[] = [];
        for (const [pid, text] of batch) {
          const tokens = tokenize(text, options.vocab);
          const weights = tokens.length ? termWeights(tokens, options.checkpoint) : [];
          lines.push(JSON.stringify({ pid, tokens: weights }));
        }
        fs.writeSync(fd, lines.join("\n") + (lines.length ? "\n" : ""));
      }
    } finally {
      fs.closeSync(fd);
    }
    return batchSize;
  });
  fs.renameSync(tmpPath, options.outPath);

  const manifest: Manifest = {
    model: options.checkpointId,
    vocab_checksum: options.vocab.checksumHex,
    passages: rows.length,
    batch_size: usedBatch,
    wall_seconds: Number(process.hrtime.bigint() - started) / 1e9,
  };
  if (options.manifestPath) writeManifest(options.manifestPath, manifest);
  return manifest;
}

export function exportLikelihoods(options: ExportOptions): Manifest {
  checkShapes(options);
  const started = process.hrtime.bigint();
  const rows = readCollection(options.collectionPath);
  const requested = options.batchSize ?? 32;
  const vocabSize = options.vocab.size;
  const tmpPath = options.outPath + ".tmp";

  const usedBatch = withOomRetry(requested, (batchSize) => {
    const fd = fs.openSync(tmpPath, "w");
    try {
      const header = Buffer.alloc(4 + 4 + 8);
      header.write("LKH1", 0, "ascii");
      header.writeUInt32LE(vocabSize, 4);
      header.writeBigUInt64LE(BigInt(rows.length), 8);
      fs.writeSync(fd, header);
      for (const batch of batches(rows, batchSize)) {
        for (const [pid, text] of batch) {
          const tokens = tokenize(text, options.vocab);
          const scores = likelihoodScores(tokens, options.checkpoint);
          const pidBytes = Buffer.from(pid, "utf-8");
          const record = Buffer.alloc(4 + pidBytes.length + 4 * vocabSize);
          record.writeUInt32LE(pidBytes.length, 0);
          pidBytes.copy(record, 4);
          for (let i = 0; i < vocabSize; i++) {
            record.writeFloatLE(scores[i], 4 + pidBytes.length + 4 * i);
          }
          fs.writeSync(fd, record);
        }
      }
    } finally {
      fs.closeSync(fd);
    }
    return batchSize;
  });
  fs.renameSync(tmpPath, options.outPath);

  const manifest: Manifest = {
    model: options.checkpointId,
    vocab_checksum: options.vocab.checksumHex,
    passages: rows.length,
    batch_size: usedBatch,
    wall_seconds: Number(process.hrtime.bigint() - started) / 1e9,
  };
  if (options.manifestPath) writeManifest(options.manifestPath, manifest);
  return manifest;
}
