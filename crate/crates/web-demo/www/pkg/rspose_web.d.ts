/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    correct(fill: boolean): void;
    corrected_rgba(): Uint8Array;
    global_rgba(): Uint8Array;
    constructor(seed: number, speed: number, rotation_deg: number, readout_ratio: number);
    overlay_after_rgba(): Uint8Array;
    overlay_before_rgba(): Uint8Array;
    rmse_after(): number;
    rmse_before(): number;
    rolling_rgba(): Uint8Array;
    size(): number;
}

export function sweep_svg(variable: string, trials: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_correct: (a: number, b: number) => [number, number];
    readonly demo_corrected_rgba: (a: number) => [number, number, number, number];
    readonly demo_global_rgba: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly demo_overlay_after_rgba: (a: number) => [number, number, number, number];
    readonly demo_overlay_before_rgba: (a: number) => [number, number, number, number];
    readonly demo_rmse_after: (a: number) => number;
    readonly demo_rmse_before: (a: number) => number;
    readonly demo_rolling_rgba: (a: number) => [number, number];
    readonly demo_size: (a: number) => number;
    readonly sweep_svg: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
