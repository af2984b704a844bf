/**
 * Reader for persisted term-weight model checkpoints (magic "TOYW"):
 * header (version, vocab size, embedding dim, context window), a float64
 * embedding table, the 1-d projection weights, and the bias.
 */

import fs from "node:fs";

const MAGIC = "TOYW";
const TAIL = "WYOT";
const SUPPORTED_VERSION = 1;

export interface Checkpoint {
  vocabSize: number;
  dim: number;
  window: number;
  /** Row-major (vocabSize x dim) embedding table. */
  embeddings: Float64Array;
  projection: Float64Array;
  bias: number;
}

export function readCheckpoint(path: string): Checkpoint {
  const buf = fs.readFileSync(path);
  let offset = 0;
  const magic = buf.toString("ascii", 0, 4);
  if (magic !== MAGIC) {
    throw new Error(`bad checkpoint magic: ${JSON.stringify(magic)}`);
  }
  offset += 4;
  const version = buf.readUInt32LE(offset);
  offset += 4;
  if (version !== SUPPORTED_VERSION) {
    throw new Error(`unsupported checkpoint version ${version}`);
  }
  const vocabSize = Number(buf.readBigUInt64LE(offset));
  offset += 8;
  const dim = buf.readUInt32LE(offset);
  offset += 4;
  const window = buf.readUInt32LE(offset);
  offset += 4;
  const embBytes = 8 * vocabSize * dim;
  const expected = offset + embBytes + 8 * dim + 8 + 4;
  if (buf.length !== expected) {
    throw new Error(`checkpoint is ${buf.length} bytes, expected ${expected}`);
  }
  const embeddings = new Float64Array(vocabSize * dim);
  for (let i = 0; i < embeddings.length; i++) {
    embeddings[i] = buf.readDoubleLE(offset + 8 * i);
  }
  offset += embBytes;
  const projection = new Float64Array(dim);
  for (let i = 0; i < dim; i++) {
    projection[i] = buf.readDoubleLE(offset + 8 * i);
  }
  offset += 8 * dim;
  const bias = buf.readDoubleLE(offset);
  offset += 8;
  if (buf.toString("ascii", offset, offset + 4) !== TAIL) {
    throw new Error("bad checkpoint tail magic");
  }
  return { vocabSize, dim, window, embeddings, projection, bias };
}
