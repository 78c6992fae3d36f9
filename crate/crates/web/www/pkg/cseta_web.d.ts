/* tslint:disable */
/* eslint-disable */

/**
 * Spectrum of the truncated circle operator with `η̄`, `m₋` and `η_BK`.
 */
export function circle_view(mu_re: Float64Array, mu_im: Float64Array, cutoff: number): string;

/**
 * `η̄` and `η_BK` along a rank-one family.
 */
export function family_view(re0: number, im0: number, re1: number, im1: number, steps: number): string;

/**
 * Eigenvalue tracks along the linear path between two exponent vectors.
 */
export function flow_view(mu0_re: Float64Array, mu0_im: Float64Array, mu1_re: Float64Array, mu1_im: Float64Array, cutoff: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly circle_view: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly family_view: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly flow_view: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
