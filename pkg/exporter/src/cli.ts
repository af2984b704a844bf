#!/usr/bin/env node
/**
 * impact-export: run a term-weight checkpoint over a collection TSV and
 * emit the files the ranking engine ingests.
 *
 *   impact-export weights     --collection c.tsv --vocab v.txt \
 *       --checkpoint model.bin --out weights.jsonl [--manifest m.json]
 *   impact-export likelihoods --collection c.tsv --vocab v.txt \
 *       --checkpoint model.bin --out lkh.bin [--manifest m.json]
 *
 * Exit codes: 0 success, 1 internal error, 2 usage/input error.
 */

import fs from "node:fs";

import { readCheckpoint } from "./checkpoint.js";
import { exportLikelihoods, exportWeights } from "./export.js";
import { Vocabulary } from "./vocab.js";

const REQUIRED = ["--collection", "--vocab", "--checkpoint", "--out"];

class UsageError extends Error {}

function parseArgs(argv: string[]): Map<string, string> {
  const map = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new UsageError(`unexpected argument ${JSON.stringify(arg)}`);
    }
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new UsageError(`flag ${arg} needs a value`);
    }
    map.set(arg, value);
    i++;
  }
  return map;
}

function requireFile(path: string, what: string): string {
  if (!fs.existsSync(path)) {
    throw new UsageError(`${what} not found: ${path}`);
  }
  return path;
}

export function runCli(argv: string[]): number {
  try {
    const command = argv[0];
    if (command !== "weights" && command !== "likelihoods") {
      throw new UsageError("usage: impact-export <weights|likelihoods> --collection ... --vocab ... --checkpoint ... --out ...");
    }
    const args = parseArgs(argv.slice(1));
    for (const flag of REQUIRED) {
      if (!args.has(flag)) throw new UsageError(`missing required flag ${flag}`);
    }
    const checkpointPath = requireFile(args.get("--checkpoint")!, "checkpoint");
    const options = {
      collectionPath: requireFile(args.get("--collection")!, "collection"),
      vocab: Vocabulary.fromFile(requireFile(args.get("--vocab")!, "vocabulary")),
      checkpoint: readCheckpoint(checkpointPath),
      checkpointId: checkpointPath,
      outPath: args.get("--out")!,
      manifestPath: args.get("--manifest"),
      batchSize: args.has("--batch-size") ? parseInt(args.get("--batch-size")!, 10) : undefined,
    };
    const manifest =
      command === "weights" ? exportWeights(options) : exportLikelihoods(options);
    process.stdout.write(JSON.stringify({ command, ...manifest }) + "\n");
    return 0;
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    process.stderr.write(`error: ${message}\n`);
    return error instanceof UsageError ? 2 : 1;
  }
}

if (process.argv[1] && /cli\.(js|ts)$/.test(process.argv[1])) {
  process.exit(runCli(process.argv.slice(2)));
}
