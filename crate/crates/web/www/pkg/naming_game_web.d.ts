/* tslint:disable */
/* eslint-disable */

export function closedFormCurves(t: number, t_prime: number, steps: number, ranks: number): string;

export function lognormalStep(t: number, names: number, mode: number, sigma: number, population: number, seed: bigint): string;

export function mutateName(table_text: string, mu: number, lambda: number, max_edits: number): string;

export function sampleNames(count: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly closedFormCurves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly lognormalStep: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly mutateName: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly sampleNames: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
