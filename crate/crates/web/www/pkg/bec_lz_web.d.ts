/* tslint:disable */
/* eslint-disable */

export function gridPoints(n: number): Float64Array;

/**
 * Lowest `levels` energies at `points` well positions between `x0_start` and `x0_end`.
 */
export function levelDynamics(u0: number, sigma: number, x0_start: number, x0_end: number, points: number, levels: number, n: number): Float64Array;

/**
 * Trap plus well, `x²/2 + u0·atan(x0)·exp(−(x−x0)²/2σ²)`, on `n` points.
 */
export function potentialCurve(u0: number, sigma: number, x0: number, n: number): Float64Array;

/**
 * Density of the post-sweep superposition with excited fraction `p`, `t` after the sweep.
 */
export function reducedDensity(p: number, t: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly gridPoints: (a: number) => [number, number, number, number];
    readonly levelDynamics: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly potentialCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly reducedDensity: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
