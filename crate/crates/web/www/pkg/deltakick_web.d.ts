/* tslint:disable */
/* eslint-disable */

/**
 * `[T_fit µK, T_err µK, σ0 mm, n, times…, sizes…, errors…]`
 */
export function expansionView(temperature_uk: number, radius_mm: number, last_delay_ms: number, points: number, atoms: number, seed: number): Float64Array;

/**
 * `[strength, T_before µK, T_after µK, n, x_before…, v_before…, x_after…, v_after…]`
 */
export function kickView(temperature_uk: number, radius_mm: number, t_f_ms: number, strength_factor: number, quadrupole: boolean, atoms: number, seed: number): Float64Array;

/**
 * `[well bottom nK, well rim nK, points, levels, x…, V…, level energies…]`;
 * bottom and rim are NaN without a well.
 */
export function wellView(barrier_nk: number, waist_um: number, centre_um: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly expansionView: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly kickView: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly wellView: (a: number, b: number, c: number) => [number, number, number, number];
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
