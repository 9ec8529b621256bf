/**
 * boxhash-bridge: suppression and IoU-bound calls on flat numeric arrays.
 *
 * Boxes travel as a contiguous N×4 Float64Array in (w, h, cx, cy) row
 * order with a length-N score array. Results are exactly what the core
 * CLI reports: kept indices ascending, plus the full rescored array for
 * soft suppression. Inputs are never mutated.
 */

import {
  BridgeError,
  runCli,
  suppressViaCli,
  toRecords,
  type SuppressPayload,
} from "./core.js";

export { BridgeError } from "./core.js";

/** Thrown when the boxes/scores buffers disagree; carries the expected shape. */
export class ShapeError extends Error {
  readonly expectedShape: [number, 4];

  constructor(message: string, expectedShape: [number, 4]) {
    super(message);
    this.expectedShape = expectedShape;
  }
}

export type SuppressAlgo = "nms" | "soft" | "hnms" | "multi" | "pipeline";

export interface HashParams {
  alpha: number;
  w0?: number;
  h0?: number;
  bx?: number;
  by?: number;
}

export interface SoftOptions {
  method?: "linear" | "gaussian";
  sigma?: number;
  scoreFloor?: number;
}

export interface PipelineOptions extends SoftOptions {
  stage2?: "nms" | "soft";
  threshold?: number;
}

export interface KeepResult {
  kept: number[];
  timingsMs: Record<string, number>;
}

export interface SoftResult extends KeepResult {
  rescored: Float64Array;
}

function asFloat64(values: Float64Array | readonly number[]): Float64Array {
  return values instanceof Float64Array ? values : Float64Array.from(values);
}

function checkShapes(
  boxes: Float64Array | readonly number[],
  scores: Float64Array | readonly number[],
): { boxes: Float64Array; scores: Float64Array } {
  const b = asFloat64(boxes);
  const s = asFloat64(scores);
  if (b.length !== 4 * s.length) {
    throw new ShapeError(
      `boxes buffer has ${b.length} values for ${s.length} scores; expected shape [${s.length}, 4]`,
      [s.length, 4],
    );
  }
  return { boxes: b, scores: s };
}

async function suppress(
  boxesIn: Float64Array | readonly number[],
  scoresIn: Float64Array | readonly number[],
  algo: SuppressAlgo,
  flags: string[],
): Promise<SuppressPayload> {
  const { boxes, scores } = checkShapes(boxesIn, scoresIn);
  return suppressViaCli(toRecords(boxes, scores), ["--algo", algo, ...flags]);
}

function hashFlags(params: HashParams): string[] {
  const flags = ["--alpha", String(params.alpha)];
  if (params.w0 !== undefined) flags.push("--w0", String(params.w0));
  if (params.h0 !== undefined) flags.push("--h0", String(params.h0));
  if (params.bx !== undefined) flags.push("--bx", String(params.bx));
  if (params.by !== undefined) flags.push("--by", String(params.by));
  return flags;
}

function softFlags(options: SoftOptions): string[] {
  const flags: string[] = [];
  if (options.method !== undefined) flags.push("--method", options.method);
  if (options.sigma !== undefined) flags.push("--sigma", String(options.sigma));
  if (options.scoreFloor !== undefined) flags.push("--score-floor", String(options.scoreFloor));
  return flags;
}

function toKeepResult(payload: SuppressPayload): KeepResult {
  return { kept: payload.kept, timingsMs: payload.timings_ms };
}

function toSoftResult(payload: SuppressPayload): SoftResult {
  if (!payload.rescored) {
    throw new BridgeError("core reply is missing the rescored array");
  }
  return { ...toKeepResult(payload), rescored: Float64Array.from(payload.rescored) };
}

/** Exact greedy suppression at the given IoU threshold. */
export async function nms(
  boxes: Float64Array | readonly number[],
  scores: Float64Array | readonly number[],
  iouThreshold: number,
): Promise<KeepResult> {
  return toKeepResult(
    await suppress(boxes, scores, "nms", ["--threshold", String(iouThreshold)]),
  );
}

/** Score-decay suppression; returns every box's rescored value as well. */
export async function softNms(
  boxes: Float64Array | readonly number[],
  scores: Float64Array | readonly number[],
  options: SoftOptions = {},
): Promise<SoftResult> {
  return toSoftResult(await suppress(boxes, scores, "soft", softFlags(options)));
}

/** Hash-cell suppression: one surviving box per cell. */
export async function hnms(
  boxes: Float64Array | readonly number[],
  scores: Float64Array | readonly number[],
  params: HashParams,
): Promise<KeepResult> {
  return toKeepResult(await suppress(boxes, scores, "hnms", hashFlags(params)));
}

/** K chained hash-cell passes with staggered cell boundaries. */
export async function multiHnms(
  boxes: Float64Array | readonly number[],
  scores: Float64Array | readonly number[],
  alpha: number,
  kCount: number,
): Promise<KeepResult> {
  return toKeepResult(
    await suppress(boxes, scores, "multi", ["--alpha", String(alpha), "--k", String(kCount)]),
  );
}

/** Hash pre-filter followed by exact (soft) suppression on the survivors. */
export async function prefilterPipeline(
  boxes: Float64Array | readonly number[],
  scores: Float64Array | readonly number[],
  alpha: number,
  kCount: number,
  options: PipelineOptions = {},
): Promise<KeepResult & { rescored?: Float64Array }> {
  const flags = ["--alpha", String(alpha), "--k", String(kCount)];
  if (options.stage2 !== undefined) flags.push("--stage2", options.stage2);
  if (options.threshold !== undefined) flags.push("--threshold", String(options.threshold));
  flags.push(...softFlags(options));
  const payload = await suppress(boxes, scores, "pipeline", flags);
  const result: KeepResult & { rescored?: Float64Array } = toKeepResult(payload);
  if (payload.rescored) {
    result.rescored = Float64Array.from(payload.rescored);
  }
  return result;
}

/** Smallest possible IoU of two boxes sharing a hash cell at this alpha. */
export async function lowerBound(alpha: number): Promise<number> {
  const { stdout } = await runCli(["bound", "--alpha", String(alpha)]);
  const value = Number(stdout.trim());
  if (!Number.isFinite(value)) {
    throw new BridgeError(`unexpected bound output: ${stdout.trim()}`);
  }
  return value;
}

/** Core package version, for the semantic-version pin check. */
export async function coreVersion(): Promise<string> {
  const { stdout } = await runCli(["--version"]);
  const match = stdout.match(/boxhash (\S+)/);
  if (!match) {
    throw new BridgeError(`unexpected version output: ${stdout.trim()}`);
  }
  return match[1];
}
