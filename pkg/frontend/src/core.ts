/**
 * Subprocess plumbing: every binding call shells out to the `boxhash` CLI
 * with a JSON box file and parses its JSON/stdout reply. Calls are async
 * child processes, so any number of suppressions can run concurrently.
 */

import { execFile } from "node:child_process";
import { randomUUID } from "node:crypto";
import { mkdtemp, rm, writeFile, readFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

/** Interpreter running the core package; override with BOXHASH_PYTHON. */
const pythonBin = (): string => process.env.BOXHASH_PYTHON ?? "python3";

export class BridgeError extends Error {}

export interface CliResult {
  stdout: string;
  stderr: string;
}

export async function runCli(args: string[]): Promise<CliResult> {
  try {
    const { stdout, stderr } = await execFileAsync(
      pythonBin(),
      ["-m", "boxhash", ...args],
      { maxBuffer: 64 * 1024 * 1024 },
    );
    return { stdout, stderr };
  } catch (error) {
    const err = error as NodeJS.ErrnoException & { stderr?: string };
    throw new BridgeError(
      `boxhash CLI failed (${err.message})${err.stderr ? `: ${err.stderr.trim()}` : ""}`,
    );
  }
}

export interface BoxRecord {
  w: number;
  h: number;
  cx: number;
  cy: number;
  score: number;
}

export function toRecords(boxes: Float64Array, scores: Float64Array): BoxRecord[] {
  const records: BoxRecord[] = [];
  for (let i = 0; i < scores.length; i += 1) {
    records.push({
      w: boxes[4 * i],
      h: boxes[4 * i + 1],
      cx: boxes[4 * i + 2],
      cy: boxes[4 * i + 3],
      score: scores[i],
    });
  }
  return records;
}

export interface SuppressPayload {
  schema_version: number;
  algo: string;
  kept: number[];
  timings_ms: Record<string, number>;
  rescored?: number[];
}

/** Write the records, run `suppress`, read the JSON reply back. */
export async function suppressViaCli(
  records: BoxRecord[],
  flags: string[],
): Promise<SuppressPayload> {
  const dir = await mkdtemp(join(tmpdir(), "boxhash-bridge-"));
  const input = join(dir, `${randomUUID()}.json`);
  const output = join(dir, `${randomUUID()}.out.json`);
  try {
    await writeFile(input, JSON.stringify(records), "utf8");
    await runCli(["suppress", "--input", input, "--output", output, ...flags]);
    return JSON.parse(await readFile(output, "utf8")) as SuppressPayload;
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}
