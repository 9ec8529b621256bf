import { execFile } from "node:child_process";
import { randomUUID } from "node:crypto";
import { mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import { describe, expect, it } from "vitest";

import {
  ShapeError,
  coreVersion,
  hnms,
  lowerBound,
  multiHnms,
  nms,
  prefilterPipeline,
  softNms,
} from "../src/index.js";

import packageJson from "../package.json" with { type: "json" };

const execFileAsync = promisify(execFile);
const python = process.env.BOXHASH_PYTHON ?? "python3";

// crowded trio: middle box out-scores the third and shares its hash cell
const trioBoxes = Float64Array.from([
  100, 100, 54.1, 50,
  100, 100, 79.1, 50,
  100, 100, 96.1, 50,
]);
const trioScores = Float64Array.from([0.9, 0.8, 0.7]);

/** Deterministic 32-bit PRNG so the 1000 parity instances are reproducible. */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

interface CliReply {
  kept: number[];
  rescored?: number[];
}

/** Independent path to the core: own temp file, own CLI invocation. */
async function cliDirect(
  boxes: Float64Array,
  scores: Float64Array,
  flags: string[],
): Promise<CliReply> {
  const dir = await mkdtemp(join(tmpdir(), "boxhash-direct-"));
  const input = join(dir, `${randomUUID()}.json`);
  const output = join(dir, `${randomUUID()}.json`);
  try {
    const records = Array.from(scores, (score, i) => ({
      w: boxes[4 * i],
      h: boxes[4 * i + 1],
      cx: boxes[4 * i + 2],
      cy: boxes[4 * i + 3],
      score,
    }));
    await writeFile(input, JSON.stringify(records), "utf8");
    await execFileAsync(python, [
      "-m", "boxhash", "suppress", "--input", input, "--output", output, ...flags,
    ]);
    return JSON.parse(await readFile(output, "utf8")) as CliReply;
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

async function pooled<T>(jobs: (() => Promise<T>)[], width: number): Promise<T[]> {
  const results = new Array<T>(jobs.length);
  let next = 0;
  const worker = async () => {
    while (next < jobs.length) {
      const index = next;
      next += 1;
      results[index] = await jobs[index]();
    }
  };
  await Promise.all(Array.from({ length: width }, worker));
  return results;
}

describe("lower bound", () => {
  it("matches the reference values", async () => {
    expect(await lowerBound(0.73)).toBeCloseTo(0.5015, 3);
    expect(Math.abs((await lowerBound(0.73)) - 0.5015)).toBeLessThanOrEqual(0.0005);
    expect(Math.abs((await lowerBound(0.3)) - 1.4e-4)).toBeLessThanOrEqual(0.2e-4);
    expect(await lowerBound(0.25)).toBe(0);
  });

  it("agrees exactly with the CLI text for a grid of alphas", async () => {
    for (const alpha of [0.3, 0.5, 0.7, 0.73, 0.9]) {
      const { stdout } = await execFileAsync(python, [
        "-m", "boxhash", "bound", "--alpha", String(alpha),
      ]);
      expect(await lowerBound(alpha)).toBe(Number(stdout.trim()));
    }
  });

  it("rejects an out-of-range alpha", async () => {
    await expect(lowerBound(1.5)).rejects.toThrow(/alpha/);
  });
});

describe("suppression bindings", () => {
  it("keeps the first two trio boxes under hash-cell suppression", async () => {
    const result = await hnms(trioBoxes, trioScores, { alpha: 0.73 });
    expect(result.kept).toEqual([0, 1]);
  });

  it("keeps the first and third trio boxes under exact suppression", async () => {
    const result = await nms(trioBoxes, trioScores, 0.5015);
    expect(result.kept).toEqual([0, 2]);
  });

  it("handles empty arrays", async () => {
    const result = await nms(new Float64Array(0), new Float64Array(0), 0.5);
    expect(result.kept).toEqual([]);
  });

  it("rejects an N-by-3 buffer with the expected shape attached", async () => {
    const bad = new Float64Array(9);
    const scores = new Float64Array(3);
    const call = hnms(bad, scores, { alpha: 0.7 });
    await expect(call).rejects.toBeInstanceOf(ShapeError);
    await call.catch((error: ShapeError) => {
      expect(error.expectedShape).toEqual([3, 4]);
    });
  });

  it("reports rescored values for soft suppression", async () => {
    const result = await softNms(trioBoxes.subarray(0, 8), trioScores.subarray(0, 2), {
      method: "linear",
    });
    expect(result.kept).toEqual([0, 1]);
    expect(result.rescored[0]).toBe(0.9);
    expect(result.rescored[1]).toBeCloseTo(0.32, 12);
  });

  it("does not mutate the input buffers", async () => {
    const boxes = Float64Array.from(trioBoxes);
    const scores = Float64Array.from(trioScores);
    await multiHnms(boxes, scores, 0.73, 2);
    expect(boxes).toEqual(trioBoxes);
    expect(scores).toEqual(trioScores);
  });
});

describe("version pin", () => {
  it("bridge version equals the core version", async () => {
    expect(packageJson.version).toBe(await coreVersion());
  });
});

describe("round-trip parity with the core CLI", () => {
  it("matches bit-exactly on 1000 random instances", async () => {
    const rand = mulberry32(20260810);
    const jobs: (() => Promise<void>)[] = [];
    for (let instance = 0; instance < 1000; instance += 1) {
      const n = Math.floor(rand() * 9); // 0..8 boxes
      const boxes = new Float64Array(4 * n);
      const scores = new Float64Array(n);
      for (let i = 0; i < n; i += 1) {
        boxes[4 * i] = 1 + rand() * 100;
        boxes[4 * i + 1] = 1 + rand() * 100;
        boxes[4 * i + 2] = (rand() - 0.5) * 300;
        boxes[4 * i + 3] = (rand() - 0.5) * 300;
        scores[i] = rand();
      }
      const algo = instance % 5;
      jobs.push(async () => {
        if (algo === 0) {
          const threshold = 0.2 + 0.6 * rand();
          const viaBinding = await nms(boxes, scores, threshold);
          const direct = await cliDirect(boxes, scores, [
            "--algo", "nms", "--threshold", String(threshold),
          ]);
          expect(viaBinding.kept).toEqual(direct.kept);
        } else if (algo === 1) {
          const viaBinding = await softNms(boxes, scores, { method: "gaussian", sigma: 0.5 });
          const direct = await cliDirect(boxes, scores, [
            "--algo", "soft", "--method", "gaussian", "--sigma", "0.5",
          ]);
          expect(viaBinding.kept).toEqual(direct.kept);
          expect(Array.from(viaBinding.rescored)).toEqual(direct.rescored ?? []);
        } else if (algo === 2) {
          const viaBinding = await hnms(boxes, scores, { alpha: 0.73 });
          const direct = await cliDirect(boxes, scores, ["--algo", "hnms", "--alpha", "0.73"]);
          expect(viaBinding.kept).toEqual(direct.kept);
        } else if (algo === 3) {
          const viaBinding = await multiHnms(boxes, scores, 0.7, 3);
          const direct = await cliDirect(boxes, scores, [
            "--algo", "multi", "--alpha", "0.7", "--k", "3",
          ]);
          expect(viaBinding.kept).toEqual(direct.kept);
        } else {
          const viaBinding = await prefilterPipeline(boxes, scores, 0.73, 2, {
            stage2: "nms",
            threshold: 0.5,
          });
          const direct = await cliDirect(boxes, scores, [
            "--algo", "pipeline", "--alpha", "0.73", "--k", "2",
            "--stage2", "nms", "--threshold", "0.5",
          ]);
          expect(viaBinding.kept).toEqual(direct.kept);
        }
      });
    }
    await pooled(jobs, 16);
  });
});
