/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_hodgeslice_free: (a: number, b: number) => void;
export const __wbg_sqgdemo_free: (a: number, b: number) => void;
export const hodgeslice_height: (a: number) => number;
export const hodgeslice_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const hodgeslice_norms: (a: number) => [number, number];
export const hodgeslice_rgba: (a: number, b: number) => [number, number];
export const hodgeslice_width: (a: number) => number;
export const lift_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const sqgdemo_l2: (a: number) => number;
export const sqgdemo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const sqgdemo_rgba: (a: number) => [number, number];
export const sqgdemo_size: (a: number) => number;
export const sqgdemo_step: (a: number, b: number) => [number, number];
export const sqgdemo_time: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
