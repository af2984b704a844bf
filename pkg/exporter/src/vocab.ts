/**
 * WordPiece vocabulary loading with the same 64-bit FNV-1a checksum the
 * ranking engine computes: any entry or ordering difference between the
 * exporter's vocabulary and the engine's surfaces as a checksum mismatch
 * at ingest time.
 */

import fs from "node:fs";

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = 0xffffffffffffffffn;

export function fnv1a64(data: Uint8Array, seed: bigint = FNV_OFFSET): bigint {
  let h = seed;
  for (const byte of data) {
    h = ((h ^ BigInt(byte)) * FNV_PRIME) & MASK64;
  }
  return h;
}

export class Vocabulary {
  readonly entries: string[];
  readonly lookup: Map<string, number>;
  readonly checksum: bigint;

  constructor(entries: string[]) {
    if (entries.length === 0) {
      throw new Error("vocabulary has no tokens");
    }
    this.entries = entries;
    this.lookup = new Map();
    let h = FNV_OFFSET;
    const encoder = new TextEncoder();
    for (let i = 0; i < entries.length; i++) {
      const token = entries[i];
      if (this.lookup.has(token)) {
        throw new Error(`duplicate token ${JSON.stringify(token)} at line ${i + 1}`);
      }
      this.lookup.set(token, i);
      h = fnv1a64(encoder.encode(token + "\n"), h);
    }
    this.checksum = h;
  }

  get size(): number {
    return this.entries.length;
  }

  get checksumHex(): string {
    return this.checksum.toString(16).padStart(16, "0");
  }

  idOf(token: string): number | undefined {
    return this.lookup.get(token);
  }

  static fromFile(path: string): Vocabulary {
    const text = fs.readFileSync(path, "utf-8");
    const entries = text
      .split(/\r?\n/)
      .filter((line) => line.length > 0);
    return new Vocabulary(entries);
  }
}
