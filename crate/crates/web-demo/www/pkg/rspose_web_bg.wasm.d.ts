/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_correct: (a: number, b: number) => [number, number];
export const demo_corrected_rgba: (a: number) => [number, number, number, number];
export const demo_global_rgba: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const demo_overlay_after_rgba: (a: number) => [number, number, number, number];
export const demo_overlay_before_rgba: (a: number) => [number, number, number, number];
export const demo_rmse_after: (a: number) => number;
export const demo_rmse_before: (a: number) => number;
export const demo_rolling_rgba: (a: number) => [number, number];
export const demo_size: (a: number) => number;
export const sweep_svg: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
